"""End-to-end analysis driver.

Wires the pipeline together: decode classes, lower methods, match the
catalog, build the call graph, chain privacy flows from every source
invocation site, link field-mediated cross-flow edges, and abstract
each flow.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .abstraction import AbstractFlow, abstract_flow
from .catalog import Catalog, CatalogMatcher
from .classfile import ClassArtifact, MethodRef
from .descriptors import POLICY_STRICT
from .globalflow import (
    DEFAULT_MAX_DEPTH,
    CallGraph,
    GlobalFlow,
    PrivacyFlowGraph,
    SourceSite,
    build_call_graph,
    build_privacy_flow,
    find_coi,
    link_field_flows,
    union_graph,
)
from .hierarchy import ClassHierarchy
from .ir import KIND_FIELD_LOAD, Cfg, UnanalyzableMethod, lower_method
from .localflow import FlowPoint, MethodFlowAnalysis, P_INPUT, P_INVOKE, P_START

log = logging.getLogger(__name__)


@dataclass
class AnalysisOptions:
    rich_policy: str = POLICY_STRICT
    max_depth: int = DEFAULT_MAX_DEPTH
    jobs: int = 1


class Program:
    """Lowered view of the loaded class set."""

    def __init__(self, classes: list[ClassArtifact], catalog: Catalog,
                 options: AnalysisOptions | None = None) -> None:
        self.options = options or AnalysisOptions()
        self.classes = list(classes)
        self.hierarchy = ClassHierarchy(self.classes)
        self.matcher = CatalogMatcher(catalog, self.hierarchy)
        self.loaded = frozenset(a.name for a in self.classes)
        self.cfgs: dict[MethodRef, Cfg] = {}
        self.analyses: dict[MethodRef, MethodFlowAnalysis] = {}
        self.skipped: list[tuple[MethodRef, str]] = []

        bodies = [
            body
            for art in self.classes
            for body in art.methods
            if body.has_code
        ]

        def lower(body):
            try:
                return body.ref, lower_method(body), None
            except UnanalyzableMethod as exc:
                return body.ref, None, str(exc)

        if self.options.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.options.jobs) as pool:
                results = list(pool.map(lower, bodies))
        else:
            results = [lower(b) for b in bodies]

        for ref, cfg, err in results:
            if cfg is None:
                log.warning("excluding unanalyzable method: %s", err)
                self.skipped.append((ref, err))
                continue
            self.cfgs[ref] = cfg
            self.analyses[ref] = MethodFlowAnalysis(
                cfg, self.matcher, self.loaded, self.options.rich_policy
            )

        self.field_readers: dict[tuple[str, str], set[MethodRef]] = {}
        for ref, cfg in self.cfgs.items():
            for stmt in cfg.statements:
                if stmt.kind == KIND_FIELD_LOAD and stmt.field:
                    self.field_readers.setdefault(stmt.field, set()).add(ref)

    def source_sites(self) -> list[SourceSite]:
        sites = []
        for ref in sorted(self.analyses):
            analysis = self.analyses[ref]
            for point in analysis.input_points():
                sites.append(SourceSite(
                    method=ref, site=point.site, target=point.target,
                    entry=analysis.entry_for_site(point.site),
                ))
        return sites


class ProgramFlowProvider:
    """Feeds local flows to the global chaining rules."""

    def __init__(self, program: Program) -> None:
        self.program = program
        self._empty = ((), ())

    def has_code(self, method: MethodRef) -> bool:
        return method in self.program.analyses

    def start_flows(self, method: MethodRef):
        analysis = self.program.analyses.get(method)
        if analysis is None:
            return self._empty
        return analysis.flows_from(FlowPoint(P_START))

    def invoke_flows(self, method: MethodRef, site: int):
        analysis = self.program.analyses.get(method)
        if analysis is None:
            return self._empty
        point = analysis.point_at.get(site)
        if point is None or point.kind != P_INVOKE:
            return self._empty
        return analysis.flows_from(point)

    def input_flows(self, method: MethodRef, site: int):
        analysis = self.program.analyses.get(method)
        if analysis is None:
            return self._empty
        point = analysis.point_at.get(site)
        if point is None or point.kind != P_INPUT:
            return self._empty
        return analysis.flows_from(point)


@dataclass
class AnalysisResult:
    program: Program
    call_graph: CallGraph
    coi: set[str]
    flows: list[GlobalFlow]
    abstractions: list[AbstractFlow]
    graph: PrivacyFlowGraph
    sites_without_flows: list[SourceSite] = field(default_factory=list)


def analyze_classes(classes: list[ClassArtifact], catalog: Catalog,
                    options: AnalysisOptions | None = None) -> AnalysisResult:
    options = options or AnalysisOptions()
    program = Program(classes, catalog, options)
    call_graph = build_call_graph(program.cfgs, program.hierarchy)
    provider = ProgramFlowProvider(program)
    coi = find_coi(program.analyses)

    flows: list[GlobalFlow] = []
    dead_sites: list[SourceSite] = []
    for site in program.source_sites():
        flow = build_privacy_flow(
            f"O{len(flows) + 1}", site, call_graph, provider,
            max_depth=options.max_depth,
        )
        if flow is None:
            dead_sites.append(site)
            continue
        flows.append(flow)

    flows = link_field_flows(flows, program.field_readers)
    abstractions = [
        abstract_flow(g, program.matcher, {f.id: f for f in flows})
        for g in flows
    ]
    return AnalysisResult(
        program=program,
        call_graph=call_graph,
        coi=coi,
        flows=flows,
        abstractions=abstractions,
        graph=union_graph(flows),
        sites_without_flows=dead_sites,
    )
