import random

from support import jasm, synth
from support.oracles import oracle_global

from conftest import analyze_defs

from privflow.analyzer import AnalysisOptions, Program, ProgramFlowProvider
from privflow.catalog import builtin_catalog
from privflow.classfile import MethodRef, parse_class
from privflow.globalflow import (
    RULE_CALL,
    RULE_RETURN,
    build_call_graph,
    build_privacy_flow,
    find_coi,
    union_graph,
)
from privflow.hierarchy import ClassHierarchy


def program_for(classdefs) -> Program:
    classes = [parse_class(cd.assemble()) for cd in classdefs]
    return Program(classes, builtin_catalog())


def test_call_graph_no_invocations():
    cd = jasm.ClassDef("demo.Lone")
    cd.method("f", "()V", [("return",)])
    program = program_for([cd])
    graph = build_call_graph(program.cfgs, program.hierarchy)
    assert MethodRef("demo.Lone", "f", (), "void") in graph.nodes
    assert graph.edges == ()


def test_call_graph_interface_dispatch_to_both_implementors():
    iface = jasm.ClassDef("demo.Handler", is_interface=True)
    iface.method("handle", "(Ljava/lang/String;)V", None, abstract=True)
    impl_a = jasm.ClassDef("demo.HandlerA", interfaces=["demo.Handler"])
    impl_a.method("handle", "(Ljava/lang/String;)V", [("return",)])
    impl_b = jasm.ClassDef("demo.HandlerB", interfaces=["demo.Handler"])
    impl_b.method("handle", "(Ljava/lang/String;)V", [("return",)])
    caller = jasm.ClassDef("demo.Caller")
    caller.method("go", "(Ldemo/Handler;Ljava/lang/String;)V", [
        ("aload", 1),
        ("aload", 2),
        ("invokeinterface", "demo.Handler", "handle", "(Ljava/lang/String;)V"),
        ("return",),
    ])
    program = program_for([iface, impl_a, impl_b, caller])
    graph = build_call_graph(program.cfgs, program.hierarchy)
    go = MethodRef("demo.Caller", "go",
                   ("demo.Handler", "java.lang.String"), "void")
    site = next(s.id for s in program.cfgs[go].statements if s.kind == "invoke")
    callees = graph.callees_of(go, site)
    assert {c.declaring_class for c in callees} == {"demo.HandlerA", "demo.HandlerB"}


def test_call_graph_inherited_method_resolves_to_base():
    base = jasm.ClassDef("demo.Base")
    base.method("work", "()V", [("return",)])
    sub = jasm.ClassDef("demo.Sub", super_name="demo.Base")
    caller = jasm.ClassDef("demo.Caller2")
    caller.method("go", "(Ldemo/Sub;)V", [
        ("aload", 1),
        ("invokevirtual", "demo.Sub", "work", "()V"),
        ("return",),
    ])
    program = program_for([base, sub, caller])
    graph = build_call_graph(program.cfgs, program.hierarchy)
    go = MethodRef("demo.Caller2", "go", ("demo.Sub",), "void")
    site = next(s.id for s in program.cfgs[go].statements if s.kind == "invoke")
    assert [c.declaring_class for c in graph.callees_of(go, site)] == ["demo.Base"]


def test_find_coi_grades(grades_result):
    assert grades_result.coi == {"Student"}


def test_find_coi_negative_and_sink_irrelevant():
    clean = jasm.ClassDef("demo.Clean")
    clean.method("f", "()V", [("return",)])
    both = jasm.ClassDef("demo.Both")
    both.method("f", "(Ljava/io/DataInputStream;[B)V", [
        ("aload", 1),
        ("aload", 2),
        ("invokevirtual", "java.io.DataInputStream", "read", "([B)I"),
        ("istore", 3),
        ("getstatic", "java.lang.System", "out", "Ljava/io/PrintStream;"),
        ("iload", 3),
        ("invokevirtual", "java.io.PrintStream", "print", "(I)V"),
        ("return",),
    ])
    program = program_for([clean, both])
    assert find_coi(program.analyses) == {"demo.Both"}


def _three_method_chain(tmp_path):
    """A returns tainted data to B; B passes it into a sink inside C."""
    a = jasm.ClassDef("chain.A")
    a.method("produce", "(Ljava/io/BufferedReader;)Ljava/lang/String;", [
        ("aload", 0),
        ("invokevirtual", "java.io.BufferedReader", "readLine",
         "()Ljava/lang/String;"),
        ("areturn",),
    ], static=True)
    b = jasm.ClassDef("chain.B")
    b.method("relay", "(Ljava/io/BufferedReader;)V", [
        ("aload", 0),
        ("invokestatic", "chain.A", "produce",
         "(Ljava/io/BufferedReader;)Ljava/lang/String;"),
        ("invokestatic", "chain.C", "consume", "(Ljava/lang/String;)V"),
        ("return",),
    ], static=True)
    c = jasm.ClassDef("chain.C")
    c.method("consume", "(Ljava/lang/String;)V", [
        ("getstatic", "java.lang.System", "out", "Ljava/io/PrintStream;"),
        ("aload", 0),
        ("invokevirtual", "java.io.PrintStream", "println",
         "(Ljava/lang/String;)V"),
        ("return",),
    ], static=True)
    return analyze_defs(tmp_path, [a, b, c])


def test_chain_uses_both_rules(tmp_path):
    result = _three_method_chain(tmp_path)
    assert len(result.flows) == 1
    flow = result.flows[0]
    rules = {(s.from_flow.method.short(), s.rule, s.to_flow.method.short())
             for s in flow.steps}
    assert ("chain.A.produce", RULE_RETURN, "chain.B.relay") in rules
    assert ("chain.B.relay", RULE_CALL, "chain.C.consume") in rules
    assert [n.short() for n in flow.nodes] == [
        "java.io.BufferedReader.readLine",
        "chain.A.produce",
        "chain.B.relay",
        "chain.C.consume",
        "java.io.PrintStream.println",
    ]


def test_unused_result_gives_root_only_flow(tmp_path):
    a = jasm.ClassDef("solo.A")
    a.method("produce", "(Ljava/io/BufferedReader;)Ljava/lang/String;", [
        ("aload", 0),
        ("invokevirtual", "java.io.BufferedReader", "readLine",
         "()Ljava/lang/String;"),
        ("areturn",),
    ], static=True)
    b = jasm.ClassDef("solo.B")
    b.method("ignore", "(Ljava/io/BufferedReader;)V", [
        ("aload", 0),
        ("invokestatic", "solo.A", "produce",
         "(Ljava/io/BufferedReader;)Ljava/lang/String;"),
        ("pop",),
        ("return",),
    ], static=True)
    result = analyze_defs(tmp_path, [a, b])
    assert len(result.flows) == 1
    flow = result.flows[0]
    assert flow.steps == ()
    assert [n.short() for n in flow.nodes] == [
        "java.io.BufferedReader.readLine", "solo.A.produce",
    ]


def test_max_depth_marks_truncated(tmp_path):
    stages = []
    for i in range(6):
        cd = jasm.ClassDef(f"deep.S{i}")
        if i == 0:
            cd.method("go", "(Ljava/io/BufferedReader;)V", [
                ("aload", 0),
                ("invokevirtual", "java.io.BufferedReader", "readLine",
                 "()Ljava/lang/String;"),
                ("invokestatic", "deep.S1", "step", "(Ljava/lang/String;)V"),
                ("return",),
            ], static=True)
        else:
            code = [("aload", 0)]
            if i < 5:
                code += [("invokestatic", f"deep.S{i + 1}", "step",
                          "(Ljava/lang/String;)V"), ("return",)]
            else:
                code = [
                    ("getstatic", "java.lang.System", "out",
                     "Ljava/io/PrintStream;"),
                    ("aload", 0),
                    ("invokevirtual", "java.io.PrintStream", "println",
                     "(Ljava/lang/String;)V"),
                    ("return",),
                ]
            cd.method("step", "(Ljava/lang/String;)V", code, static=True)
        stages.append(cd)

    full = analyze_defs(tmp_path, stages)
    assert full.flows[0].truncated is False
    assert any(n.name == "println" for n in full.flows[0].nodes)

    short = analyze_defs(tmp_path, stages, max_depth=3)
    assert short.flows[0].truncated is True
    assert not any(n.name == "println" for n in short.flows[0].nodes)


def test_recursive_chain_terminates(manifest):
    from conftest import analyze_fixture

    (case,) = [c for c in manifest if c.name == "recur"]
    result = analyze_fixture(case)
    assert len(result.flows) == 1
    assert {n.short() for n in result.flows[0].nodes} == {
        "java.io.DataInputStream.read", "Recur.go", "Recur.bounce", "Recur.echo",
    }


def test_field_links_cross_flow(sendmsg_result):
    links = [link for flow in sendmsg_result.flows for link in flow.field_links]
    cross = [l for l in links if l.from_flow != l.to_flow]
    assert len(cross) == 1
    link = cross[0]
    assert link.from_flow == "O2"
    assert link.to_flow == "O1"
    assert (link.owner, link.field) == ("chatapp.store.SessionStore", "profileKey")
    assert link.reader.name == "handleMessage"


def test_field_links_disjoint_fields_none(tmp_path):
    result = _three_method_chain(tmp_path)
    assert all(not f.field_links for f in result.flows)


def test_field_link_self_roundtrip(tmp_path):
    cd = jasm.ClassDef("selflink.Keeper")
    cd.field("held", "Ljava/lang/String;")
    cd.method("keep", "(Ljava/io/BufferedReader;)Ljava/lang/String;", [
        ("aload", 0),
        ("aload", 1),
        ("invokevirtual", "java.io.BufferedReader", "readLine",
         "()Ljava/lang/String;"),
        ("putfield", "selflink.Keeper", "held", "Ljava/lang/String;"),
        ("aload", 0),
        ("getfield", "selflink.Keeper", "held", "Ljava/lang/String;"),
        ("areturn",),
    ])
    result = analyze_defs(tmp_path, [cd])
    (flow,) = result.flows
    selfs = [l for l in flow.field_links
             if l.from_flow == l.to_flow == flow.id
             and (l.owner, l.field) == ("selflink.Keeper", "held")
             and l.reader.name == "keep"]
    assert len(selfs) == 1  # recorded exactly once


def test_union_graph_empty():
    graph = union_graph([])
    assert graph.nodes == () and graph.edges == ()


def test_union_graph_shared_sink(tmp_path):
    a = jasm.ClassDef("share.A")
    a.method("f", "(Ljava/io/BufferedReader;)V", [
        ("getstatic", "java.lang.System", "out", "Ljava/io/PrintStream;"),
        ("aload", 0),
        ("invokevirtual", "java.io.BufferedReader", "readLine",
         "()Ljava/lang/String;"),
        ("invokevirtual", "java.io.PrintStream", "println",
         "(Ljava/lang/String;)V"),
        ("return",),
    ], static=True)
    b = jasm.ClassDef("share.B")
    b.method("g", "(Ljava/io/BufferedReader;)V", [
        ("getstatic", "java.lang.System", "out", "Ljava/io/PrintStream;"),
        ("aload", 0),
        ("invokevirtual", "java.io.BufferedReader", "readLine",
         "()Ljava/lang/String;"),
        ("invokevirtual", "java.io.PrintStream", "println",
         "(Ljava/lang/String;)V"),
        ("return",),
    ], static=True)
    result = analyze_defs(tmp_path, [a, b])
    assert len(result.flows) == 2
    println = [n for n in result.graph.nodes if n.name == "println"]
    assert len(println) == 1
    in_edges = [e for e in result.graph.edges if e[1] == println[0]]
    assert len(in_edges) == 2


def test_model_oracle_agreement_sample():
    for seed in range(25):
        rng = random.Random(seed)
        graph, provider, site = synth.random_model(rng)
        flow = build_privacy_flow("T", site, graph, provider, max_depth=10_000)
        oracle = oracle_global(graph, provider, site.method, site.site)
        if flow is None:
            assert oracle is None
            continue
        nodes, edges = oracle
        assert set(flow.nodes) == nodes, f"seed {seed}"
        assert set(flow.edges) == edges, f"seed {seed}"


def test_dynamic_sites_produce_no_call_edges():
    cd = jasm.ClassDef("demo.Dyn")
    cd.method("f", "(I)Ljava/lang/String;", [
        ("iload", 1),
        ("invokedynamic", "makeText", "(I)Ljava/lang/String;"),
        ("areturn",),
    ])
    program = program_for([cd])
    graph = build_call_graph(program.cfgs, program.hierarchy)
    assert graph.edges == ()
