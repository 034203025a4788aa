"""Whole-program call graph and privacy-flow chaining.

One privacy flow is built per source invocation site.  Starting from
the local flow rooted at that input primitive, two rules chain local
flows across methods until fixpoint:

  return_chain   a flow ending at a return continues in every caller,
                 beginning at the invocation of the returning method;
  call_chain     a flow ending at an invocation with tainted data
                 continues inside every resolved callee that has code,
                 beginning at its start.

Revisited (method, begin point) pairs are not re-expanded, which
bounds the work on recursive call graphs.  The union of all privacy
flows is the privacy flow-graph.  Edges follow the direction the
data moves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .catalog import CatalogEntry
from .classfile import MethodRef
from .ir import KIND_INVOKE, Cfg
from .localflow import (
    P_INPUT,
    P_INVOKE,
    P_OUTPUT,
    P_RETURN,
    P_START,
    FieldTaint,
    FlowPoint,
    LocalFlow,
)

log = logging.getLogger(__name__)

RULE_RETURN = "return_chain"
RULE_CALL = "call_chain"

DEFAULT_MAX_DEPTH = 64


@dataclass(frozen=True)
class CallEdge:
    caller: MethodRef
    site: int              # statement id of the invocation in the caller
    callee: MethodRef


class CallGraph:
    def __init__(self, nodes, edges) -> None:
        self.nodes: frozenset[MethodRef] = frozenset(nodes)
        self.edges: tuple[CallEdge, ...] = tuple(sorted(
            edges, key=lambda e: (e.caller, e.site, e.callee)
        ))
        self._callers: dict[MethodRef, list[tuple[MethodRef, int]]] = {}
        self._callees: dict[tuple[MethodRef, int], list[MethodRef]] = {}
        for e in self.edges:
            self._callers.setdefault(e.callee, []).append((e.caller, e.site))
            self._callees.setdefault((e.caller, e.site), []).append(e.callee)

    def callers_of(self, callee: MethodRef) -> list[tuple[MethodRef, int]]:
        return self._callers.get(callee, [])

    def callees_of(self, caller: MethodRef, site: int) -> list[MethodRef]:
        return self._callees.get((caller, site), [])


def build_call_graph(cfgs: dict[MethodRef, Cfg], hierarchy) -> CallGraph:
    """Class-hierarchy-analysis call graph over the lowered methods.

    Static and special calls bind to the named method, searching up the
    superclass chain.  Virtual and interface calls additionally bind to
    every loaded subtype override.  Unresolved targets stay as leaf
    nodes so chains can still report where data went.
    """
    nodes: set[MethodRef] = set(cfgs)
    edges: list[CallEdge] = []
    for caller, cfg in cfgs.items():
        for stmt in cfg.statements:
            if stmt.kind != KIND_INVOKE:
                continue
            info = stmt.invoke
            if info.kind == "dynamic":
                continue
            for callee in _resolve_targets(info.target, info.kind, hierarchy):
                nodes.add(callee)
                edges.append(CallEdge(caller, stmt.id, callee))
    return CallGraph(nodes, edges)


def _resolve_targets(target: MethodRef, kind: str, hierarchy) -> list[MethodRef]:
    base = hierarchy.find_method(
        target.declaring_class, target.name, target.param_types
    )
    out: list[MethodRef] = []
    if base is not None and base.has_code:
        out.append(base.ref)
    if kind in ("virtual", "interface"):
        for sub in hierarchy.subtypes(target.declaring_class):
            art = hierarchy.artifact(sub)
            if art is None:
                continue
            for body in art.methods:
                if (body.ref.name == target.name
                        and body.ref.param_types == target.param_types
                        and body.has_code):
                    out.append(body.ref)
    if not out:
        out.append(target)  # external leaf
    seen: set[MethodRef] = set()
    return [m for m in sorted(out) if not (m in seen or seen.add(m))]


@dataclass(frozen=True)
class SourceSite:
    method: MethodRef       # method containing the invocation
    site: int               # statement id
    target: MethodRef       # the catalogued source method
    entry: CatalogEntry


@dataclass(frozen=True)
class Step:
    from_flow: LocalFlow
    to_flow: LocalFlow
    rule: str


@dataclass(frozen=True)
class FieldLink:
    from_flow: str          # id of the flow whose taint wrote the field
    writer: MethodRef
    owner: str
    field: str
    to_flow: str            # id of the flow containing the reader
    reader: MethodRef


@dataclass
class GlobalFlow:
    id: str
    root: LocalFlow
    root_site: SourceSite
    nodes: tuple[MethodRef, ...]          # first-visit order, source first
    edges: tuple[tuple[MethodRef, MethodRef], ...]
    steps: tuple[Step, ...]
    flows: tuple[LocalFlow, ...]
    sink_nodes: frozenset[MethodRef]      # catalogued sinks this flow reaches
    field_taints: tuple[FieldTaint, ...]
    truncated: bool = False
    field_links: tuple[FieldLink, ...] = ()

    @property
    def category(self) -> str:
        return self.root_site.entry.category


class _Expansion:
    def __init__(self, flow_id: str, call_graph: CallGraph, provider,
                 max_depth: int) -> None:
        self.flow_id = flow_id
        self.graph = call_graph
        self.provider = provider
        self.max_depth = max_depth
        self.nodes: list[MethodRef] = []
        self.node_set: set[MethodRef] = set()
        self.edges: list[tuple[MethodRef, MethodRef]] = []
        self.edge_set: set[tuple[MethodRef, MethodRef]] = set()
        self.steps: list[Step] = []
        self.flows: list[LocalFlow] = []
        self.sinks: set[MethodRef] = set()
        self.taints: list[FieldTaint] = []
        self.visited: set[tuple[MethodRef, str, int | None]] = set()
        self.truncated = False

    def add_node(self, m: MethodRef) -> None:
        if m not in self.node_set:
            self.node_set.add(m)
            self.nodes.append(m)

    def add_edge(self, a: MethodRef, b: MethodRef) -> None:
        if (a, b) not in self.edge_set:
            self.edge_set.add((a, b))
            self.edges.append((a, b))

    def expand(self, method: MethodRef, begin: FlowPoint,
               flows: tuple[LocalFlow, ...], taints: tuple[FieldTaint, ...],
               depth: int) -> None:
        self.taints.extend(taints)
        for flow in flows:
            self.flows.append(flow)
            self.add_node(flow.method)
            end = flow.end
            if end.kind == P_OUTPUT:
                self.add_node(end.target)
                self.add_edge(flow.method, end.target)
                self.sinks.add(end.target)
                continue
            if depth + 1 > self.max_depth:
                self.truncated = True
                log.warning("flow %s truncated at depth %d", self.flow_id, depth)
                continue
            if end.kind == P_RETURN:
                for caller, site in self.graph.callers_of(method):
                    self._continue(flow, caller, P_INVOKE, site, depth, RULE_RETURN)
            elif end.kind == P_INVOKE:
                for callee in self.graph.callees_of(method, end.site):
                    if not self.provider.has_code(callee):
                        continue
                    self._continue(flow, callee, P_START, None, depth, RULE_CALL)

    def _continue(self, flow: LocalFlow, method: MethodRef, begin_kind: str,
                  site: int | None, depth: int, rule: str) -> None:
        if begin_kind == P_START:
            flows, taints = self.provider.start_flows(method)
        else:
            flows, taints = self.provider.invoke_flows(method, site)
        if not flows:
            return
        for f2 in flows:
            self.steps.append(Step(flow, f2, rule))
            self.add_edge(flow.method, f2.method)
        key = (method, begin_kind, site)
        if key in self.visited:
            return
        self.visited.add(key)
        self.expand(method, flows[0].begin, flows, taints, depth + 1)


def build_privacy_flow(flow_id: str, source: SourceSite, call_graph: CallGraph,
                       provider, max_depth: int = DEFAULT_MAX_DEPTH) -> GlobalFlow | None:
    """Chain local flows outward from one source invocation site.

    Returns None when the input primitive entails no local flow at all
    (nothing reachable carries the value)."""
    flows, taints = provider.input_flows(source.method, source.site)
    if not flows:
        return None
    ex = _Expansion(flow_id, call_graph, provider, max_depth)
    ex.add_node(source.target)
    ex.add_node(source.method)
    ex.add_edge(source.target, source.method)
    ex.visited.add((source.method, P_INPUT, source.site))
    ex.expand(source.method, flows[0].begin, flows, taints, depth=1)
    return GlobalFlow(
        id=flow_id,
        root=flows[0],
        root_site=source,
        nodes=tuple(ex.nodes),
        edges=tuple(ex.edges),
        steps=tuple(ex.steps),
        flows=tuple(ex.flows),
        sink_nodes=frozenset(ex.sinks),
        field_taints=tuple(ex.taints),
        truncated=ex.truncated,
    )


def find_coi(analyses) -> set[str]:
    """Classes of interest: classes containing at least one invocation
    of a catalogued source method."""
    out: set[str] = set()
    for method, analysis in analyses.items():
        if analysis.input_points():
            out.add(method.declaring_class)
    return out


def link_field_flows(flows: list[GlobalFlow],
                     field_readers: dict[tuple[str, str], set[MethodRef]]
                     ) -> list[GlobalFlow]:
    """Cross-link flows through fields: a field written with tainted
    data inside one flow and read by a method node of another (or the
    same) flow yields a dashed annotation edge.  No nodes are added."""
    links_by_target: dict[str, list[FieldLink]] = {g.id: [] for g in flows}
    seen: set[tuple] = set()
    for g_a in flows:
        for taint in g_a.field_taints:
            readers = field_readers.get((taint.owner, taint.field))
            if not readers:
                continue
            for g_b in flows:
                for node in g_b.nodes:
                    if node not in readers:
                        continue
                    key = (g_a.id, taint.owner, taint.field, g_b.id, node)
                    if key in seen:
                        continue
                    seen.add(key)
                    links_by_target[g_b.id].append(FieldLink(
                        from_flow=g_a.id, writer=taint.method,
                        owner=taint.owner, field=taint.field,
                        to_flow=g_b.id, reader=node,
                    ))
    out = []
    for g in flows:
        g.field_links = tuple(links_by_target[g.id])
        out.append(g)
    return out


@dataclass(frozen=True)
class PrivacyFlowGraph:
    flows: tuple[GlobalFlow, ...]
    nodes: tuple[MethodRef, ...]
    edges: tuple[tuple[MethodRef, MethodRef], ...]


def union_graph(flows) -> PrivacyFlowGraph:
    nodes: list[MethodRef] = []
    node_set: set[MethodRef] = set()
    edges: list[tuple[MethodRef, MethodRef]] = []
    edge_set: set[tuple[MethodRef, MethodRef]] = set()
    for g in flows:
        for n in g.nodes:
            if n not in node_set:
                node_set.add(n)
                nodes.append(n)
        for e in g.edges:
            if e not in edge_set:
                edge_set.add(e)
                edges.append(e)
    return PrivacyFlowGraph(tuple(flows), tuple(nodes), tuple(edges))
