"""Per-method data-flow points and local taint flows.

For one method we compute the flow points (start, invocations, matched
input/output primitives, returns) and the local flows a begin point
entails: forward may-taint propagation over the statement CFG through
assignments, field stores/loads (keyed owner+name, receiver-insensitive),
whole-array summaries, and object containers.  Calls into classes that
were loaded do not propagate locally; the global chaining rules follow
them instead.  Calls into unloaded library code conservatively taint
their result so values survive helpers like String.valueOf.

Flows whose end value cannot carry privacy content (the rich-type
filter) are dropped.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

from .catalog import KIND_SINK, KIND_SOURCE, CatalogEntry, CatalogMatcher
from .classfile import MethodRef
from .descriptors import POLICY_STRICT, is_rich_type
from .ir import (
    KIND_ASSIGN,
    KIND_FIELD_LOAD,
    KIND_FIELD_STORE,
    KIND_INVOKE,
    KIND_RETURN,
    Cfg,
    Statement,
)

log = logging.getLogger(__name__)

P_START = "start"
P_INVOKE = "invoke"
P_INPUT = "input_primitive"
P_OUTPUT = "output_primitive"
P_RETURN = "return"

F_SOURCE = "source_flow"
F_SINK = "sink_flow"
F_PROCESS = "process_flow"

BEGIN_KINDS = (P_START, P_INVOKE, P_INPUT)
END_KINDS = (P_RETURN, P_OUTPUT, P_INVOKE)


@dataclass(frozen=True)
class FlowPoint:
    kind: str
    site: int | None = None          # statement id; absent only for start
    target: MethodRef | None = None  # invoked method, when any

    def describe(self) -> str:
        if self.kind == P_START:
            return "start"
        t = f" {self.target.short()}" if self.target else ""
        return f"{self.kind}@{self.site}{t}"


@dataclass(frozen=True)
class TypeChange:
    method: MethodRef
    statement: int
    from_desc: str
    to_desc: str


@dataclass(frozen=True)
class LocalFlow:
    method: MethodRef
    begin: FlowPoint
    end: FlowPoint
    kind: str
    value_type: str
    type_changes: tuple[TypeChange, ...] = ()

    def describe(self) -> str:
        return (f"{self.method.short()}: {self.begin.describe()} -> "
                f"{self.end.describe()} [{self.kind}] {self.value_type}")


@dataclass(frozen=True)
class FieldTaint:
    owner: str
    field: str
    method: MethodRef
    begin: FlowPoint


def _flow_kind(begin: FlowPoint, end: FlowPoint) -> str:
    if begin.kind == P_INPUT and end.kind == P_RETURN:
        return F_SOURCE
    if begin.kind == P_START and end.kind == P_OUTPUT:
        return F_SINK
    return F_PROCESS


class MethodFlowAnalysis:
    """Flow points and on-demand taint runs for one lowered method."""

    def __init__(self, cfg: Cfg, matcher: CatalogMatcher,
                 loaded_classes: frozenset[str],
                 rich_policy: str = POLICY_STRICT) -> None:
        self.cfg = cfg
        self.matcher = matcher
        self.loaded = loaded_classes
        self.policy = rich_policy
        self.site_entries: dict[int, CatalogEntry | None] = {}
        self.points = self._collect_points()
        self.point_at: dict[int, FlowPoint] = {
            p.site: p for p in self.points if p.site is not None
        }
        self._cache: dict[FlowPoint, tuple[tuple[LocalFlow, ...], tuple[FieldTaint, ...]]] = {}
        self._closure_cache: dict[int, frozenset[int]] = {}
        self._copy_defs: dict[int, list[Statement]] | None = None

    # -- points -----------------------------------------------------

    def _collect_points(self) -> list[FlowPoint]:
        points = [FlowPoint(P_START)]
        for s in self.cfg.statements:
            if s.kind == KIND_INVOKE:
                matched = self.matcher.match(s.invoke.target)
                if matched is None:
                    points.append(FlowPoint(P_INVOKE, s.id, s.invoke.target))
                    self.site_entries[s.id] = None
                elif matched[0] == KIND_SOURCE:
                    points.append(FlowPoint(P_INPUT, s.id, s.invoke.target))
                    self.site_entries[s.id] = matched[1]
                else:
                    points.append(FlowPoint(P_OUTPUT, s.id, s.invoke.target))
                    self.site_entries[s.id] = matched[1]
            elif s.kind == KIND_RETURN:
                points.append(FlowPoint(P_RETURN, s.id))
        return points

    def input_points(self) -> list[FlowPoint]:
        return [p for p in self.points if p.kind == P_INPUT]

    def entry_for_site(self, site: int) -> CatalogEntry | None:
        return self.site_entries.get(site)

    # -- seeding ----------------------------------------------------

    def _copy_closure(self, slot: int) -> frozenset[int]:
        """The slot plus everything it may be a plain copy of.

        Tainting an object (a by-reference array argument, the receiver
        of a store into a tainted container) means tainting the value,
        and the temp holding it and the local it was loaded from are
        the same object.  Pure copies and stack-merge statements are
        followed backwards, nothing else; this over-approximates across
        redefinitions, which is in line with having no alias analysis."""
        cached = self._closure_cache.get(slot)
        if cached is not None:
            return cached
        if self._copy_defs is None:
            by_def: dict[int, list[Statement]] = {}
            for s in self.cfg.statements:
                if s.kind == KIND_ASSIGN and s.array_read is None and s.conv_from is None:
                    for d in s.defs:
                        by_def.setdefault(d, []).append(s)
            self._copy_defs = by_def
        closure = {slot}
        frontier = [slot]
        while frontier:
            cur = frontier.pop()
            for s in self._copy_defs.get(cur, ()):
                for u in s.uses:
                    if u not in closure:
                        closure.add(u)
                        frontier.append(u)
        result = frozenset(closure)
        self._closure_cache[slot] = result
        return result

    def _seeds(self, begin: FlowPoint) -> tuple[set, dict[int, set]]:
        """(facts live at method entry, facts generated after a statement)."""
        if begin.kind == P_START:
            return {slot for slot, _ in self.cfg.param_slots}, {}
        stmt = self.cfg.statements[begin.site]
        info = stmt.invoke
        gen: set = set()
        if begin.kind == P_INPUT:
            entry = self.site_entries.get(begin.site)
            if info.result is not None and is_rich_type(
                info.result_desc, self.policy
            ):
                gen.add(info.result)
            if entry is not None and entry.result_via_param:
                for pos, desc in enumerate(info.arg_descs):
                    if desc.startswith("["):
                        gen |= self._copy_closure(info.args[pos])
        elif begin.kind == P_INVOKE:
            if info.result is not None:
                gen.add(info.result)
            if info.target.name == "<init>" and info.receiver is not None:
                gen |= self._copy_closure(info.receiver)
        else:
            raise ValueError(f"cannot begin a flow at {begin.kind}")
        return set(), {begin.site: gen}

    # -- propagation ------------------------------------------------

    def flows_from(self, begin: FlowPoint):
        """All local flows entailed from one begin point, plus the
        field-taint facts the run recorded."""
        cached = self._cache.get(begin)
        if cached is not None:
            return cached

        cfg = self.cfg
        entry_facts, gen_at = self._seeds(begin)
        n = len(cfg.statements)
        out_facts: list[set] = [set() for _ in range(n)]

        ends: dict[tuple, str] = {}       # (kind, site) -> value_type
        field_hits: set[tuple[str, str]] = set()
        changes: dict[int, TypeChange] = {}

        work = deque(s.id for s in cfg.statements)
        queued = set(work)
        while work:
            sid = work.popleft()
            queued.discard(sid)
            stmt = cfg.statements[sid]
            inset = set(entry_facts) if sid == cfg.entry else set()
            for pred in cfg.predecessors(sid):
                inset |= out_facts[pred]
            out = self._transfer(stmt, inset, ends, field_hits, changes)
            out |= gen_at.get(sid, set())
            if out != out_facts[sid]:
                out_facts[sid] = out
                for succ in cfg.successors(sid):
                    if succ not in queued:
                        queued.add(succ)
                        work.append(succ)

        type_changes = tuple(changes[k] for k in sorted(changes))
        flows = []
        for (kind, site), value_type in sorted(
            ends.items(), key=lambda kv: (kv[0][1], kv[0][0])
        ):
            if not is_rich_type(value_type, self.policy):
                continue
            end = self.point_at.get(site)
            if end is None or end.kind != kind:
                end = FlowPoint(kind, site,
                                cfg.statements[site].invoke.target
                                if cfg.statements[site].invoke else None)
            flow = LocalFlow(
                method=cfg.method, begin=begin, end=end,
                kind=_flow_kind(begin, end), value_type=value_type,
                type_changes=type_changes,
            )
            flows.append(flow)
        taints = tuple(
            FieldTaint(owner, field, cfg.method, begin)
            for owner, field in sorted(field_hits)
        )
        result = (tuple(flows), taints)
        self._cache[begin] = result
        return result

    def _transfer(self, stmt: Statement, inset: set, ends, field_hits,
                  changes) -> set:
        out = set(inset)
        out.difference_update(stmt.defs)  # a redefined slot starts clean
        cfg = self.cfg

        if stmt.kind == KIND_ASSIGN:
            relevant = {stmt.array_read} if stmt.array_read is not None else stmt.uses
            if any(u in inset for u in relevant):
                out |= stmt.defs
                if stmt.conv_from and stmt.value_type and stmt.conv_from != stmt.value_type:
                    changes.setdefault(stmt.id, TypeChange(
                        cfg.method, stmt.id, stmt.conv_from, stmt.value_type
                    ))
        elif stmt.kind == KIND_INVOKE:
            info = stmt.invoke
            tainted: list[str] = []
            for pos, slot in enumerate(info.args):
                if slot in inset:
                    tainted.append(info.arg_descs[pos])
            if info.receiver is not None and info.receiver in inset:
                tainted.append(info.receiver_desc)
            if tainted:
                point = self.point_at.get(stmt.id)
                if point is not None and point.kind in (P_INVOKE, P_OUTPUT):
                    rich = [d for d in tainted if is_rich_type(d, self.policy)]
                    value = rich[0] if rich else tainted[0]
                    key = (point.kind, stmt.id)
                    # a later iteration may taint a rich operand; prefer it
                    if key not in ends or (
                        not is_rich_type(ends[key], self.policy)
                        and is_rich_type(value, self.policy)
                    ):
                        ends[key] = value
                external = info.target.declaring_class not in self.loaded
                if external:
                    if info.result is not None:
                        out.add(info.result)
                        if info.result_desc != tainted[0]:
                            changes.setdefault(stmt.id, TypeChange(
                                cfg.method, stmt.id, tainted[0], info.result_desc
                            ))
                    if info.target.name == "<init>" and info.receiver is not None:
                        out |= self._copy_closure(info.receiver)
        elif stmt.kind == KIND_FIELD_LOAD:
            channel = ("f",) + stmt.field
            recv = stmt.field_receiver_slot
            if channel in inset or (recv is not None and recv in inset):
                out |= stmt.defs
        elif stmt.kind == KIND_FIELD_STORE:
            if stmt.field_value_slot in inset:
                out.add(("f",) + stmt.field)
                field_hits.add(stmt.field)
                if stmt.field_receiver_slot is not None:
                    out |= self._copy_closure(stmt.field_receiver_slot)
        elif stmt.kind == KIND_RETURN:
            if any(u in inset for u in stmt.uses):
                ends.setdefault((P_RETURN, stmt.id), cfg.return_desc)
            if cfg.is_constructor and 0 in inset:
                this_desc = "L" + cfg.method.declaring_class.replace(".", "/") + ";"
                ends.setdefault((P_RETURN, stmt.id), this_desc)
        else:
            if stmt.array_write is not None:
                arr, value = stmt.array_write
                if value in inset:
                    out |= self._copy_closure(arr)
        return out


def collect_points(cfg: Cfg, matcher: CatalogMatcher) -> list[FlowPoint]:
    """The data-flow points of one method (start, invocations split into
    matched input/output primitives and plain invokes, returns)."""
    return MethodFlowAnalysis(cfg, matcher, frozenset()).points


def compute_local_flows(analysis: MethodFlowAnalysis):
    """Eagerly computed flows: those beginning at start and at every
    input primitive.  Flows beginning at plain invocations are
    materialized on demand by the global chaining rules.

    Returns (flows, field taints)."""
    flows: list[LocalFlow] = []
    taints: list[FieldTaint] = []
    begins = [FlowPoint(P_START)] + analysis.input_points()
    for begin in begins:
        fl, ft = analysis.flows_from(begin)
        flows.extend(fl)
        taints.extend(ft)
    return tuple(flows), tuple(taints)
