"""Symbolic abstraction of privacy flows.

Each method node of a concrete flow is classified into one of nine
symbols; runs of consecutive plain processes from the same package are
grouped into a single node.  Endpoint roles beat name heuristics:
a terminal sink called sendMessage is a sink, not a security process,
even though its name contains "send".

Classification precedence (highest first):
    first node matching the root source          SRC_START  ▲
    source method / cross-flow field-link target SRC_MID    △
    sink method, terminal                        SINK_END   ▼
    sink method, interior                        SINK_MID   ▽
    "auth" in method or package name             AUTH       ◇
    constructors and "init" method names         INIT       ⊙
    security naming or network/database package  SEC        ⊗
    terminal otherwise                           PROC_END   ●
    anything else                                PROC       ○
"""

from __future__ import annotations

from dataclasses import dataclass

from .catalog import KIND_SINK, KIND_SOURCE, CatalogMatcher
from .classfile import MethodRef
from .globalflow import GlobalFlow

SRC_START = "SRC_START"
SRC_MID = "SRC_MID"
PROC = "PROC"
SEC = "SEC"
SINK_END = "SINK_END"
SINK_MID = "SINK_MID"
PROC_END = "PROC_END"
AUTH = "AUTH"
INIT = "INIT"

GLYPHS = {
    SRC_START: "▲",   # black up triangle
    SRC_MID: "△",     # white up triangle
    PROC: "○",        # white circle
    SEC: "⊗",         # circled times
    SINK_END: "▼",    # black down triangle
    SINK_MID: "▽",    # white down triangle
    PROC_END: "●",    # black circle
    AUTH: "◇",        # white diamond
    INIT: "⊙",        # circled dot
}

SECURITY_SUBSTRINGS = ("encrypt", "db", "send", "connect")


@dataclass(frozen=True)
class SymbolNode:
    symbol: str
    members: tuple[MethodRef, ...]
    label: str | None = None

    @property
    def glyph(self) -> str:
        return GLYPHS[self.symbol]

    def describe(self) -> str:
        names = ", ".join(m.short() for m in self.members)
        suffix = f" ({self.label})" if self.label else ""
        return f"{self.glyph}{suffix} {names}"


@dataclass(frozen=True)
class AbstractFlow:
    flow_id: str
    nodes: tuple[SymbolNode, ...]
    edges: tuple[tuple[int, int], ...]
    cross_links: tuple[tuple[str, str, int], ...]  # (from flow, field, node index)

    def symbol_string(self) -> str:
        return " ".join(n.glyph for n in self.nodes)

    def tokens(self) -> tuple[str, ...]:
        return tuple(n.symbol for n in self.nodes)


def classify_node(node: MethodRef, position: str, matcher: CatalogMatcher,
                  flow: GlobalFlow, cross_targets: frozenset[MethodRef],
                  security_packages: frozenset[str]) -> str:
    """Classify one flow node.  position is first|interior|last."""
    matched = matcher.match(node)
    is_source = matched is not None and matched[0] == KIND_SOURCE
    is_sink = (matched is not None and matched[0] == KIND_SINK) \
        or node in flow.sink_nodes

    if position == "first" and (node == flow.root_site.target or is_source):
        return SRC_START
    if position != "first" and (is_source or node in cross_targets):
        return SRC_MID
    if is_sink:
        return SINK_END if position == "last" else SINK_MID

    # substring heuristics look at the method name and the package name,
    # not the class name: a class called MessageSender does not make
    # every one of its methods a security process
    name = node.name.lower()
    where = f"{node.package}.{node.name}".lower()
    if "auth" in where:
        return AUTH
    if node.name in ("<init>", "<clinit>") or "init" in name:
        return INIT
    if any(s in where for s in SECURITY_SUBSTRINGS) \
            or node.package in security_packages:
        return SEC
    if position == "last":
        return PROC_END
    return PROC


def group_processes(nodes: list[tuple[MethodRef, str]]) -> list[SymbolNode]:
    """Collapse maximal runs of consecutive plain processes that share a
    package into one node; every other symbol stays individual."""
    out: list[SymbolNode] = []
    run: list[MethodRef] = []

    def flush() -> None:
        if run:
            out.append(SymbolNode(PROC, tuple(run)))
            run.clear()

    for node, symbol in nodes:
        if symbol == PROC:
            if run and run[0].package != node.package:
                flush()
            run.append(node)
        else:
            flush()
            out.append(SymbolNode(symbol, (node,)))
    flush()
    return out


def label_node(node: SymbolNode, matcher: CatalogMatcher, flow: GlobalFlow,
               link_categories: dict[MethodRef, list[str]],
               security_packages: frozenset[str]) -> SymbolNode:
    """Attach the display label: categories for endpoints, the matched
    facet for security processes, the class name for initialisations."""
    member = node.members[0]
    label: str | None = None
    if node.symbol == SRC_START:
        label = flow.root_site.entry.category
    elif node.symbol in (SINK_END, SINK_MID):
        matched = matcher.match(member)
        label = matched[1].category if matched else None
    elif node.symbol == SRC_MID:
        matched = matcher.match(member)
        if matched is not None and matched[0] == KIND_SOURCE:
            label = matched[1].category
        else:
            cats = link_categories.get(member)
            label = "+".join(sorted(set(cats))) if cats else None
    elif node.symbol == AUTH:
        label = "authentication"
    elif node.symbol == INIT:
        label = member.simple_class
    elif node.symbol == SEC:
        where = f"{member.package}.{member.name}".lower()
        for sub in SECURITY_SUBSTRINGS:
            if sub in where:
                label = sub
                break
        else:
            label = "network/database package" \
                if member.package in security_packages else None
    elif node.symbol in (PROC, PROC_END):
        label = member.package or None
    if label is None:
        return node
    return SymbolNode(node.symbol, node.members, label)


def abstract_flow(flow: GlobalFlow, matcher: CatalogMatcher,
                  flows_by_id: dict[str, GlobalFlow]) -> AbstractFlow:
    """Compress one concrete flow into its symbol sequence."""
    security_packages = matcher.security_packages()
    cross_targets = frozenset(
        link.reader for link in flow.field_links if link.from_flow != flow.id
    )
    link_categories: dict[MethodRef, list[str]] = {}
    for link in flow.field_links:
        if link.from_flow == flow.id:
            continue
        origin = flows_by_id.get(link.from_flow)
        if origin is not None:
            link_categories.setdefault(link.reader, []).append(origin.category)

    classified: list[tuple[MethodRef, str]] = []
    last = len(flow.nodes) - 1
    for i, node in enumerate(flow.nodes):
        position = "first" if i == 0 else ("last" if i == last else "interior")
        classified.append((node, classify_node(
            node, position, matcher, flow, cross_targets, security_packages
        )))

    grouped = group_processes(classified)
    labeled = tuple(
        label_node(n, matcher, flow, link_categories, security_packages)
        for n in grouped
    )
    edges = tuple((i, i + 1) for i in range(len(labeled) - 1))

    member_index: dict[MethodRef, int] = {}
    for idx, node in enumerate(labeled):
        for m in node.members:
            member_index.setdefault(m, idx)
    cross_links = tuple(
        (link.from_flow, f"{link.owner}.{link.field}", member_index[link.reader])
        for link in flow.field_links
        if link.from_flow != flow.id and link.reader in member_index
    )
    return AbstractFlow(flow.id, labeled, edges, cross_links)
