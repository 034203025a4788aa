import logging

import pytest

from support import jasm

from privflow.catalog import (
    CatalogError,
    CatalogMatcher,
    builtin_catalog,
    load_catalog,
    match_invocation,
    merge_catalogs,
    parse_catalog_text,
    parse_signature,
)
from privflow.classfile import MethodRef, parse_class
from privflow.hierarchy import ClassHierarchy

TABLE1_SOURCES = [
    "int java.io.DataInputStream.read(byte[])",
    "java.lang.String java.net.URL.getQuery()",
    "java.sql.ResultSet java.sql.Statement.getResultSet()",
    "int org.apache.commons.io.input.ProxyInputStream.read(byte[])",
    "org.apache.http.ssl.SSLContextBuilder org.apache.http.ssl.SSLContextBuilder.loadKeyMaterial()",
    "java.sql.ResultSet org.apache.derby.iapi.jdbc.BrokeredStatement.executeQuery(java.lang.String)",
]

TABLE2_SINKS = [
    "void java.util.logging.Logger.log(java.util.logging.LogRecord)",
    "void java.io.BufferedWriter.write(int)",
    "void javax.servlet.http.HttpServletResponse.sendRedirect(java.lang.String)",
    "void com.sun.xml.txw2.output.XMLWriter.comment(char[],int,int)",
    "java.net.HttpURLConnection org.jsoup.helper.HttpConnection(org.jsoup.Connection)",
]


def empty_hierarchy() -> ClassHierarchy:
    return ClassHierarchy([])


def test_parse_signature_styles():
    ref = parse_signature("int java.io.DataInputStream.read(byte[])")
    assert ref == MethodRef("java.io.DataInputStream", "read", ("byte[]",), "int")
    ref = parse_signature(
        "void com.sun.xml.txw2.output.XMLWriter.comment(char[],int,int)"
    )
    assert ref.param_types == ("char[]", "int", "int")
    ref = parse_signature("java.lang.String a.b.C.d()")
    assert ref.param_types == ()


def test_source_line_parses_with_category():
    cat = parse_catalog_text(
        "source\tint java.io.DataInputStream.read(byte[])\tI/O\n"
    )
    (entry,) = cat.sources
    assert entry.kind == "source"
    assert entry.category == "I/O"
    assert entry.result_via_param  # byte[] argument carries the result


def test_sink_line_parses_with_category():
    cat = parse_catalog_text(
        "sink\tvoid java.util.logging.Logger.log(java.util.logging.LogRecord)\tLog\n"
    )
    (entry,) = cat.sinks
    assert entry.kind == "sink"
    assert entry.category == "Log"


def test_empty_file_with_builtin_is_starter_catalog(tmp_path):
    f = tmp_path / "empty.txt"
    f.write_text("# nothing here\n")
    assert load_catalog(f, include_builtin=True) == builtin_catalog()


@pytest.mark.parametrize("line", [
    "source\tint x.Y.z(int)",                      # missing category
    "gunk\tint x.Y.z(int)\tI/O",                   # bad kind
    "source\tint x.Y.z(int)\tWeird",               # bad category
    "source\tnot-a-signature\tI/O",                # unparseable signature
])
def test_malformed_lines_raise_with_line_number(line):
    with pytest.raises(CatalogError) as err:
        parse_catalog_text(f"# header\n{line}\n", origin="f.txt")
    assert "f.txt:2" in str(err.value)


def test_duplicate_entry_warns_first_wins(caplog):
    text = ("source\tint a.B.c(int)\tI/O\n"
            "source\tint a.B.c(int)\tNetwork\n")
    with caplog.at_level(logging.WARNING):
        cat = parse_catalog_text(text)
    assert len(cat.sources) == 1
    assert cat.sources[0].category == "I/O"
    assert any("duplicate" in r.message for r in caplog.records)


def test_round_trip_is_identity():
    cat = builtin_catalog()
    assert parse_catalog_text(cat.dump()) == cat


def test_starter_contains_published_entries_verbatim():
    cat = builtin_catalog()
    sources = {e.signature.signature() for e in cat.sources}
    sinks = {e.signature.signature() for e in cat.sinks}
    for sig in TABLE1_SOURCES:
        assert sig in sources
    for sig in TABLE2_SINKS:
        assert sig in sinks


def test_match_exact_owner():
    matcher = CatalogMatcher(builtin_catalog(), empty_hierarchy())
    target = MethodRef("java.io.DataInputStream", "read", ("byte[]",), "int")
    kind, entry = matcher.match(target)
    assert kind == "source"
    assert entry.category == "I/O"


def test_match_uncatalogued_returns_none():
    matcher = CatalogMatcher(builtin_catalog(), empty_hierarchy())
    assert matcher.match(MethodRef("java.lang.String", "trim", (), "java.lang.String")) is None


def test_match_via_subclass_owner():
    sub = jasm.ClassDef("demo.CountingStream",
                        super_name="java.io.DataInputStream")
    art = parse_class(sub.assemble())
    hierarchy = ClassHierarchy([art])
    target = MethodRef("demo.CountingStream", "read", ("byte[]",), "int")
    assert match_invocation(builtin_catalog(), target, hierarchy) is not None
    # and without the hierarchy knowledge there is no match
    assert match_invocation(builtin_catalog(), target, empty_hierarchy()) is None


def test_matching_monotone_under_hierarchy_growth():
    matcher_small = CatalogMatcher(builtin_catalog(), empty_hierarchy())
    classes = [
        parse_class(jasm.ClassDef("demo.A", super_name="java.io.InputStream").assemble()),
        parse_class(jasm.ClassDef("demo.B", super_name="demo.A").assemble()),
    ]
    matcher_big = CatalogMatcher(builtin_catalog(), ClassHierarchy(classes))
    probes = [
        MethodRef("demo.B", "read", ("byte[]",), "int"),
        MethodRef("java.io.DataInputStream", "read", ("byte[]",), "int"),
        MethodRef("demo.B", "trim", (), "java.lang.String"),
    ]
    for probe in probes:
        small = matcher_small.match(probe)
        if small is not None:
            assert matcher_big.match(probe) is not None


def test_sources_checked_before_sinks():
    text = ("sink\tvoid a.B.c(java.lang.String)\tLog\n"
            "source\tjava.lang.String a.B.c(java.lang.String)\tI/O\n")
    cat = parse_catalog_text(text)
    matcher = CatalogMatcher(cat, empty_hierarchy())
    kind, _ = matcher.match(MethodRef("a.B", "c", ("java.lang.String",), "void"))
    assert kind == "source"


def test_merge_order_prefers_user_entries(caplog):
    user = parse_catalog_text("source\tint java.io.DataInputStream.read(byte[])\tOther\n")
    with caplog.at_level(logging.WARNING):
        merged = merge_catalogs(user, builtin_catalog())
    matcher = CatalogMatcher(merged, empty_hierarchy())
    _, entry = matcher.match(
        MethodRef("java.io.DataInputStream", "read", ("byte[]",), "int")
    )
    assert entry.category == "Other"


def test_dynamic_targets_never_match():
    matcher = CatalogMatcher(builtin_catalog(), empty_hierarchy())
    assert matcher.match(MethodRef("<dynamic>", "read", ("byte[]",), "int")) is None
