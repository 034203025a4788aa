"""privflow: static privacy data-flow analysis for JVM bytecode.

Finds how data moves from catalogued source methods through application
code into catalogued sink methods, renders the result as privacy
flow-graphs and symbolic abstractions, and generates DPIA evidence
material from them.
"""

from .abstraction import AbstractFlow, SymbolNode, abstract_flow
from .analyzer import AnalysisOptions, AnalysisResult, Program, analyze_classes
from .catalog import (
    Catalog,
    CatalogEntry,
    CatalogError,
    CatalogMatcher,
    builtin_catalog,
    load_catalog,
    match_invocation,
    parse_catalog_text,
)
from .classfile import (
    ClassArtifact,
    ClassFormatError,
    InputError,
    MethodBody,
    MethodRef,
    invocation_sites,
    load_inputs,
    parse_class,
)
from .descriptors import is_rich_type
from .globalflow import (
    CallGraph,
    GlobalFlow,
    PrivacyFlowGraph,
    build_call_graph,
    build_privacy_flow,
    find_coi,
    link_field_flows,
    union_graph,
)
from .hierarchy import ClassHierarchy
from .ir import Cfg, Statement, UnanalyzableMethod, lower_method
from .localflow import (
    FieldTaint,
    FlowPoint,
    LocalFlow,
    MethodFlowAnalysis,
    collect_points,
    compute_local_flows,
)
from .report import (
    DpiaEvidence,
    build_evidence,
    emit_abstract_dot,
    emit_flow_dot,
    emit_union_dot,
    generate_dpia_report,
    summary_data,
    validate_summary,
    write_outputs,
)

__version__ = "0.1.0"

__all__ = [
    "AbstractFlow", "AnalysisOptions", "AnalysisResult", "CallGraph",
    "Catalog", "CatalogEntry", "CatalogError", "CatalogMatcher", "Cfg",
    "ClassArtifact", "ClassFormatError", "ClassHierarchy", "DpiaEvidence",
    "FieldTaint", "FlowPoint", "GlobalFlow", "InputError", "LocalFlow",
    "MethodBody", "MethodFlowAnalysis", "MethodRef", "PrivacyFlowGraph",
    "Program", "Statement", "SymbolNode", "UnanalyzableMethod",
    "abstract_flow", "analyze_classes", "build_call_graph",
    "build_evidence", "build_privacy_flow", "builtin_catalog",
    "collect_points", "compute_local_flows", "emit_abstract_dot",
    "emit_flow_dot", "emit_union_dot", "find_coi", "generate_dpia_report",
    "invocation_sites", "is_rich_type", "link_field_flows", "load_catalog",
    "load_inputs", "lower_method", "match_invocation", "parse_catalog_text",
    "parse_class", "summary_data", "union_graph", "validate_summary",
    "write_outputs",
]
