"""Flow serialization: DOT files, the machine summary, and the DPIA
evidence document.

Concrete flow graphs carry full method signatures as node names; the
abstract graphs carry the symbol glyphs with short labels.  Field links
are rendered as dashed edges.  All output is deterministic for
identical inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .abstraction import (
    AUTH,
    INIT,
    PROC,
    PROC_END,
    SEC,
    SINK_END,
    SINK_MID,
    SRC_MID,
    AbstractFlow,
)
from .catalog import CatalogMatcher
from .descriptors import desc_to_java
from .globalflow import GlobalFlow, PrivacyFlowGraph


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _node(sig: str) -> str:
    return f'"{_esc(sig)}"'


def emit_flow_dot(flow: GlobalFlow) -> str:
    """Concrete privacy flow as a DOT digraph; nodes carry the full
    method signatures, dashed edges are field links."""
    lines = [f'digraph "{_esc(flow.id)}" {{',
             "  rankdir=TB;",
             '  node [shape=box fontname="Helvetica"];']
    for n in flow.nodes:
        lines.append(f"  {_node(n.signature())};")
    for a, b in flow.edges:
        lines.append(f"  {_node(a.signature())} -> {_node(b.signature())};")
    for link in flow.field_links:
        label = f"{link.owner}.{link.field}"
        if link.from_flow != flow.id:
            label = f"{link.from_flow}: {label}"
        lines.append(
            f"  {_node(link.writer.signature())} -> "
            f"{_node(link.reader.signature())} "
            f'[style=dashed label="{_esc(label)}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_abstract_dot(abstract: AbstractFlow) -> str:
    """Abstract flow as a DOT digraph of symbol nodes."""
    lines = [f'digraph "{_esc(abstract.flow_id)}-abstract" {{',
             "  rankdir=TB;",
             '  node [shape=box fontname="Helvetica"];']
    for i, node in enumerate(abstract.nodes):
        parts = [node.glyph + (f" {node.label}" if node.label else "")]
        parts.extend(m.short() for m in node.members)
        label = "\\n".join(_esc(p) for p in parts)
        lines.append(f'  n{i} [label="{label}"];')
    for a, b in abstract.edges:
        lines.append(f"  n{a} -> n{b};")
    for from_flow, field, idx in abstract.cross_links:
        ref = f'"{_esc(from_flow)}"'
        lines.append(f"  {ref} [shape=plaintext];")
        lines.append(f'  {ref} -> n{idx} [style=dashed label="{_esc(field)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_union_dot(graph: PrivacyFlowGraph) -> str:
    lines = ['digraph "privacy-flow-graph" {',
             "  rankdir=TB;",
             '  node [shape=box fontname="Helvetica"];']
    for n in graph.nodes:
        lines.append(f"  {_node(n.signature())};")
    for a, b in graph.edges:
        lines.append(f"  {_node(a.signature())} -> {_node(b.signature())};")
    for flow in graph.flows:
        for link in flow.field_links:
            lines.append(
                f"  {_node(link.writer.signature())} -> "
                f"{_node(link.reader.signature())} "
                f'[style=dashed label="{_esc(link.owner + "." + link.field)}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------
# machine summary

def summary_data(flows: list[GlobalFlow],
                 abstractions: list[AbstractFlow]) -> dict:
    """The documented summary schema:

    { "flows": [ { "id": str,
                   "root": {"method": str, "category": str},
                   "nodes": [str, ...],
                   "edges": [[str, str], ...],
                   "symbols": [str, ...],
                   "truncated": bool } ] }
    """
    abs_by_id = {a.flow_id: a for a in abstractions}
    out = []
    for flow in flows:
        abstract = abs_by_id[flow.id]
        out.append({
            "id": flow.id,
            "root": {
                "method": flow.root_site.target.signature(),
                "category": flow.category,
            },
            "nodes": [n.signature() for n in flow.nodes],
            "edges": [[a.signature(), b.signature()] for a, b in flow.edges],
            "symbols": list(abstract.tokens()),
            "truncated": flow.truncated,
        })
    return {"flows": out}


def validate_summary(data) -> None:
    """Raise ValueError if data does not follow the summary schema."""
    if not isinstance(data, dict) or set(data) != {"flows"}:
        raise ValueError("summary must be an object with a single 'flows' key")
    if not isinstance(data["flows"], list):
        raise ValueError("'flows' must be a list")
    for i, flow in enumerate(data["flows"]):
        where = f"flows[{i}]"
        if not isinstance(flow, dict):
            raise ValueError(f"{where} must be an object")
        expected = {"id", "root", "nodes", "edges", "symbols", "truncated"}
        if set(flow) != expected:
            raise ValueError(f"{where} keys must be {sorted(expected)}")
        if not isinstance(flow["id"], str):
            raise ValueError(f"{where}.id must be a string")
        root = flow["root"]
        if (not isinstance(root, dict) or set(root) != {"method", "category"}
                or not all(isinstance(root[k], str) for k in root)):
            raise ValueError(f"{where}.root must map method/category to strings")
        if not (isinstance(flow["nodes"], list)
                and all(isinstance(n, str) for n in flow["nodes"])):
            raise ValueError(f"{where}.nodes must be a list of strings")
        for e in flow["edges"]:
            if not (isinstance(e, list) and len(e) == 2
                    and all(isinstance(x, str) for x in e)):
                raise ValueError(f"{where}.edges entries must be string pairs")
        if not (isinstance(flow["symbols"], list)
                and all(isinstance(s, str) for s in flow["symbols"])):
            raise ValueError(f"{where}.symbols must be a list of strings")
        if not isinstance(flow["truncated"], bool):
            raise ValueError(f"{where}.truncated must be a boolean")


# --------------------------------------------------------------------
# DPIA evidence

Q5_MARKER = "REQUIRES HUMAN INPUT"


@dataclass
class DpiaEvidence:
    flow_id: str
    q1_sources: list[tuple[str, str, str]]       # (method, category, location)
    q2_processes: list[tuple[str, str, tuple[str, ...]]]  # (symbol, package, methods)
    q3_transformations: list[str]
    q4_egress: list[tuple[str, str]]             # (method, category)
    q5_sensitivity: str
    q6_security: list[tuple[str, str, str]]      # (symbol, method, label)


def build_evidence(flow: GlobalFlow, abstract: AbstractFlow,
                   matcher: CatalogMatcher) -> DpiaEvidence:
    q1 = [(
        flow.root_site.target.signature(),
        flow.category,
        f"invoked by {flow.root_site.method.signature()}",
    )]
    linked_indexes = {idx for _, _, idx in abstract.cross_links}
    for i, node in enumerate(abstract.nodes):
        if node.symbol == SRC_MID:
            location = ("receives values from fields written by other flows"
                        if i in linked_indexes
                        else "catalogued source reached inside the flow")
            for m in node.members:
                q1.append((m.signature(), node.label or "unknown", location))

    q2 = []
    for node in abstract.nodes:
        if node.symbol in (PROC, PROC_END, SEC, AUTH, INIT):
            q2.append((
                node.symbol,
                node.members[0].package or "(default package)",
                tuple(m.signature() for m in node.members),
            ))

    seen_changes = set()
    q3 = []
    for local in flow.flows:
        for change in local.type_changes:
            key = (change.method, change.statement, change.from_desc, change.to_desc)
            if key in seen_changes:
                continue
            seen_changes.add(key)
            q3.append(
                f"{desc_to_java(change.from_desc)} -> "
                f"{desc_to_java(change.to_desc)} in {change.method.signature()}"
            )

    q4 = []
    for sink in sorted(flow.sink_nodes):
        matched = matcher.match(sink)
        q4.append((sink.signature(), matched[1].category if matched else "unknown"))

    hints = sorted({flow.category})
    q5 = (f"{Q5_MARKER}: sensitivity of the data must be assessed manually; "
          f"source categories on this flow: {', '.join(hints)}")

    q6 = []
    for node in abstract.nodes:
        if node.symbol in (SEC, AUTH):
            for m in node.members:
                q6.append((node.symbol, m.signature(), node.label or ""))

    return DpiaEvidence(flow.id, q1, q2, q3, q4, q5, q6)


_QUESTIONS = (
    ("Q1", "Data origin and nature"),
    ("Q2", "Processing steps"),
    ("Q3", "Data transformations"),
    ("Q4", "Egress and sharing"),
    ("Q5", "Sensitivity of the data"),
    ("Q6", "Security measures"),
)


def generate_dpia_report(flows: list[GlobalFlow],
                         abstractions: list[AbstractFlow],
                         matcher: CatalogMatcher,
                         coi: set[str]) -> str:
    """Markdown evidence document: one section per flow, six question
    headings each."""
    abs_by_id = {a.flow_id: a for a in abstractions}
    lines = ["# Privacy data-flow evidence report", ""]
    n = len(flows)
    lines.append(f"Detected {n} privacy flow{'s' if n != 1 else ''}.")
    lines.append("")
    if coi:
        lines.append("Classes invoking catalogued source methods: "
                     + ", ".join(sorted(coi)))
        lines.append("")

    for flow in flows:
        abstract = abs_by_id[flow.id]
        ev = build_evidence(flow, abstract, matcher)
        lines.append(f"## Flow {flow.id}: {flow.root_site.target.short()} "
                     f"[{flow.category}]")
        lines.append("")
        lines.append(f"Abstraction: {abstract.symbol_string()}")
        if flow.truncated:
            lines.append("")
            lines.append("Note: expansion stopped at the depth limit; "
                         "this flow may be incomplete.")
        lines.append("")

        lines.append(f"### {_QUESTIONS[0][0]}: {_QUESTIONS[0][1]}")
        for method, category, location in ev.q1_sources:
            lines.append(f"- `{method}` [{category}], {location}")
        lines.append("")

        lines.append(f"### {_QUESTIONS[1][0]}: {_QUESTIONS[1][1]}")
        if ev.q2_processes:
            for symbol, package, methods in ev.q2_processes:
                shown = "; ".join(f"`{m}`" for m in methods)
                lines.append(f"- {symbol} in {package}: {shown}")
        else:
            lines.append("- no intermediate processing detected")
        lines.append("")

        lines.append(f"### {_QUESTIONS[2][0]}: {_QUESTIONS[2][1]}")
        if ev.q3_transformations:
            for t in ev.q3_transformations:
                lines.append(f"- {t}")
        else:
            lines.append("- no type changes observed along the flow")
        lines.append("")

        lines.append(f"### {_QUESTIONS[3][0]}: {_QUESTIONS[3][1]}")
        if ev.q4_egress:
            for method, category in ev.q4_egress:
                lines.append(f"- `{method}` [{category}]")
        else:
            lines.append("- no egress detected on this flow")
        lines.append("")

        lines.append(f"### {_QUESTIONS[4][0]}: {_QUESTIONS[4][1]}")
        lines.append(f"- {ev.q5_sensitivity}")
        lines.append("")

        lines.append(f"### {_QUESTIONS[5][0]}: {_QUESTIONS[5][1]}")
        if ev.q6_security:
            for symbol, method, label in ev.q6_security:
                suffix = f" ({label})" if label else ""
                lines.append(f"- {symbol}{suffix}: `{method}`")
        else:
            lines.append("- no security or authentication processes detected")
        lines.append("")

    return "\n".join(lines)


# --------------------------------------------------------------------
# output directory

def write_outputs(result, out_dir, debug_ir: bool = False) -> dict:
    """Write flows/, abstract/, graph.dot, report.md and summary.json
    under out_dir.  Returns {"flows": n} for the caller's summary line."""
    out = Path(out_dir)
    flows_dir = out / "flows"
    abstract_dir = out / "abstract"
    flows_dir.mkdir(parents=True, exist_ok=True)
    abstract_dir.mkdir(parents=True, exist_ok=True)

    abs_by_id = {a.flow_id: a for a in result.abstractions}
    for flow in result.flows:
        (flows_dir / f"{flow.id}.dot").write_text(
            emit_flow_dot(flow), encoding="utf-8"
        )
        (abstract_dir / f"{flow.id}.dot").write_text(
            emit_abstract_dot(abs_by_id[flow.id]), encoding="utf-8"
        )

    (out / "graph.dot").write_text(emit_union_dot(result.graph), encoding="utf-8")

    data = summary_data(result.flows, result.abstractions)
    validate_summary(data)
    (out / "summary.json").write_text(
        json.dumps(data, indent=2) + "\n", encoding="utf-8"
    )

    report = generate_dpia_report(
        result.flows, result.abstractions, result.program.matcher, result.coi
    )
    (out / "report.md").write_text(report, encoding="utf-8")

    if debug_ir:
        dumps = [result.program.cfgs[ref].dump()
                 for ref in sorted(result.program.cfgs)]
        (out / "debug-ir.txt").write_text(
            "\n\n".join(dumps) + "\n", encoding="utf-8"
        )
    return {"flows": len(result.flows)}
