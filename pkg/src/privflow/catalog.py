"""Source/sink method catalogs.

A catalog is a plain-text, line-oriented list of library methods whose
invocation either yields privacy-relevant data (sources) or carries data
out of the program (sinks).  Lines are `kind<TAB>signature<TAB>category`
with signatures written Java-style: `int java.io.DataInputStream.read(byte[])`.
`#` starts a comment, files are UTF-8.

A starter catalog covering common JDK, android and logging entry points
is built in; user files are merged in front of it so they take
precedence during matching.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .classfile import MethodRef
from .descriptors import is_rich_type, java_to_desc
from .hierarchy import ClassHierarchy

log = logging.getLogger(__name__)

KIND_SOURCE = "source"
KIND_SINK = "sink"

CATEGORIES = ("I/O", "Network", "Database", "Log", "Other")


class CatalogError(Exception):
    """Malformed catalog file content."""


@dataclass(frozen=True)
class CatalogEntry:
    kind: str                 # source | sink
    signature: MethodRef
    category: str
    result_via_param: bool    # source writes through a by-reference argument

    def line(self) -> str:
        return f"{self.kind}\t{self.signature.signature()}\t{self.category}"


@dataclass(frozen=True)
class Catalog:
    sources: tuple[CatalogEntry, ...]
    sinks: tuple[CatalogEntry, ...]

    @property
    def entries(self) -> tuple[CatalogEntry, ...]:
        return self.sources + self.sinks

    def dump(self) -> str:
        lines = ["# source/sink method catalog",
                 "# kind<TAB>return-type owner.method(param,param)<TAB>category"]
        lines.extend(e.line() for e in self.sources)
        lines.extend(e.line() for e in self.sinks)
        return "\n".join(lines) + "\n"


def parse_signature(text: str) -> MethodRef:
    """Parse `return-type owner.name(params)` into a MethodRef."""
    text = text.strip()
    space = text.find(" ")
    if space < 0:
        raise CatalogError(f"missing return type in signature: {text!r}")
    ret = text[:space].strip()
    rest = text[space + 1 :].strip()
    open_paren = rest.find("(")
    if open_paren < 0 or not rest.endswith(")"):
        raise CatalogError(f"missing parameter list in signature: {text!r}")
    qualified = rest[:open_paren].strip()
    owner, _, name = qualified.rpartition(".")
    if not owner or not name:
        raise CatalogError(f"method owner missing in signature: {text!r}")
    params_text = rest[open_paren + 1 : -1].strip()
    params = tuple(p.strip() for p in params_text.split(",")) if params_text else ()
    try:
        java_to_desc(ret)
        for p in params:
            java_to_desc(p)
    except ValueError as exc:
        raise CatalogError(f"bad type in signature {text!r}: {exc}") from exc
    return MethodRef(owner, name, params, ret)


def _make_entry(kind: str, ref: MethodRef, category: str) -> CatalogEntry:
    via_param = kind == KIND_SOURCE and any(
        p.endswith("[]") for p in ref.param_types
    )
    entry = CatalogEntry(kind, ref, category, via_param)
    if kind == KIND_SOURCE and not via_param and not is_rich_type(
        java_to_desc(ref.return_type)
    ):
        log.warning(
            "source entry %s returns a non-rich type and has no "
            "by-reference parameter; it will never produce a flow",
            ref.signature(),
        )
    return entry


def parse_catalog_text(text: str, origin: str = "<memory>") -> Catalog:
    sources: list[CatalogEntry] = []
    sinks: list[CatalogEntry] = []
    seen: set[tuple[str, MethodRef]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise CatalogError(
                f"{origin}:{lineno}: expected kind<TAB>signature<TAB>category"
            )
        kind, sig_text, category = (p.strip() for p in parts)
        if kind not in (KIND_SOURCE, KIND_SINK):
            raise CatalogError(f"{origin}:{lineno}: unknown kind {kind!r}")
        if category not in CATEGORIES:
            raise CatalogError(
                f"{origin}:{lineno}: unknown category {category!r} "
                f"(expected one of {', '.join(CATEGORIES)})"
            )
        try:
            ref = parse_signature(sig_text)
        except CatalogError as exc:
            raise CatalogError(f"{origin}:{lineno}: {exc}") from exc
        key = (kind, ref)
        if key in seen:
            log.warning("%s:%d: duplicate %s entry %s (first wins)",
                        origin, lineno, kind, ref.signature())
            continue
        seen.add(key)
        entry = _make_entry(kind, ref, category)
        (sources if kind == KIND_SOURCE else sinks).append(entry)
    return Catalog(tuple(sources), tuple(sinks))


def merge_catalogs(*catalogs: Catalog) -> Catalog:
    """Concatenate catalogs; earlier ones win on duplicates."""
    sources: list[CatalogEntry] = []
    sinks: list[CatalogEntry] = []
    seen: set[tuple[str, MethodRef]] = set()
    for cat in catalogs:
        for entry in cat.entries:
            key = (entry.kind, entry.signature)
            if key in seen:
                log.warning("duplicate %s entry %s dropped during merge",
                            entry.kind, entry.signature.signature())
                continue
            seen.add(key)
            (sources if entry.kind == KIND_SOURCE else sinks).append(entry)
    return Catalog(tuple(sources), tuple(sinks))


def load_catalog(path, include_builtin: bool = True) -> Catalog:
    """Load a catalog file, merged with the built-in starter catalog
    unless disabled.  User entries precede built-in ones so they win
    both duplicate resolution and match order."""
    p = Path(path)
    loaded = parse_catalog_text(p.read_text(encoding="utf-8"), origin=str(p))
    if include_builtin:
        return merge_catalogs(loaded, builtin_catalog())
    return loaded


# --------------------------------------------------------------------
# matching

class CatalogMatcher:
    """Subtype-aware invocation matcher.

    A target matches an entry when name and parameter types are equal
    and the target's declaring class is the entry's owner or one of its
    declared supertypes.  Sources are checked before sinks; within a
    kind, catalog order wins.
    """

    def __init__(self, catalog: Catalog, hierarchy: ClassHierarchy) -> None:
        self.catalog = catalog
        self.hierarchy = hierarchy
        self._index: dict[tuple[str, tuple[str, ...]], list[CatalogEntry]] = {}
        for entry in catalog.sources + catalog.sinks:
            key = (entry.signature.name, entry.signature.param_types)
            self._index.setdefault(key, []).append(entry)

    def match(self, target: MethodRef) -> tuple[str, CatalogEntry] | None:
        if target.declaring_class == "<dynamic>":
            return None
        candidates = self._index.get((target.name, target.param_types))
        if not candidates:
            return None
        chain = None
        for entry in candidates:
            owner = entry.signature.declaring_class
            if owner == target.declaring_class:
                return entry.kind, entry
            if chain is None:
                chain = set(self.hierarchy.supertypes(target.declaring_class))
            if owner in chain:
                return entry.kind, entry
        return None

    def security_packages(self) -> frozenset[str]:
        """Library packages the catalog associates with network or
        database traffic.  Packages of loaded application classes are
        excluded: a catalogued app-level sink does not turn its whole
        package into a security zone."""
        out = set()
        for entry in self.catalog.entries:
            if entry.category in ("Network", "Database") \
                    and not self.hierarchy.is_loaded(entry.signature.declaring_class):
                out.add(entry.signature.package)
        return frozenset(out)


def match_invocation(catalog: Catalog, target: MethodRef,
                     hierarchy: ClassHierarchy) -> tuple[str, CatalogEntry] | None:
    return CatalogMatcher(catalog, hierarchy).match(target)


# --------------------------------------------------------------------
# starter catalog

STARTER_CATALOG_TEXT = """\
# Built-in starter catalog of source and sink methods.
# kind<TAB>return-type owner.method(param,param)<TAB>category
#
# --- sources: methods whose results carry user or environment data ---
source\tint java.io.DataInputStream.read(byte[])\tI/O
source\tjava.lang.String java.net.URL.getQuery()\tNetwork
source\tjava.sql.ResultSet java.sql.Statement.getResultSet()\tDatabase
source\tint org.apache.commons.io.input.ProxyInputStream.read(byte[])\tI/O
source\torg.apache.http.ssl.SSLContextBuilder org.apache.http.ssl.SSLContextBuilder.loadKeyMaterial()\tNetwork
source\tjava.sql.ResultSet org.apache.derby.iapi.jdbc.BrokeredStatement.executeQuery(java.lang.String)\tDatabase
source\tint java.io.InputStream.read(byte[])\tI/O
source\tint java.io.InputStream.read()\tI/O
source\tint java.io.InputStream.read(byte[],int,int)\tI/O
source\tint java.io.FileInputStream.read(byte[])\tI/O
source\tjava.lang.String java.io.BufferedReader.readLine()\tI/O
source\tint java.io.Reader.read(char[])\tI/O
source\tjava.lang.String java.util.Scanner.nextLine()\tI/O
source\tjava.lang.String java.util.Scanner.next()\tI/O
source\tjava.lang.String java.io.Console.readLine()\tI/O
source\tbyte[] java.nio.file.Files.readAllBytes(java.nio.file.Path)\tI/O
source\tjava.lang.String java.lang.System.getProperty(java.lang.String)\tI/O
source\tjava.lang.String java.lang.System.getenv(java.lang.String)\tI/O
source\tandroid.text.Editable android.widget.EditText.getText()\tI/O
source\tjava.lang.String java.net.URL.getHost()\tNetwork
source\tjava.lang.String java.net.URL.getPath()\tNetwork
source\tjava.io.InputStream java.net.URLConnection.getInputStream()\tNetwork
source\tjava.io.InputStream java.net.Socket.getInputStream()\tNetwork
source\tjava.lang.String java.net.InetAddress.getHostAddress()\tNetwork
source\tjava.lang.String java.net.InetAddress.getHostName()\tNetwork
source\tjava.lang.String java.sql.ResultSet.getString(int)\tDatabase
source\tjava.lang.String java.sql.ResultSet.getString(java.lang.String)\tDatabase
source\tint java.sql.ResultSet.getInt(int)\tDatabase
source\tjava.sql.ResultSet java.sql.PreparedStatement.executeQuery()\tDatabase
source\tjava.sql.ResultSet java.sql.Statement.executeQuery(java.lang.String)\tDatabase
#
# --- sinks: methods that move data out of the program's scope ---
sink\tvoid java.util.logging.Logger.log(java.util.logging.LogRecord)\tLog
sink\tvoid java.io.BufferedWriter.write(int)\tI/O
sink\tvoid javax.servlet.http.HttpServletResponse.sendRedirect(java.lang.String)\tNetwork
sink\tvoid com.sun.xml.txw2.output.XMLWriter.comment(char[],int,int)\tI/O
sink\tjava.net.HttpURLConnection org.jsoup.helper.HttpConnection(org.jsoup.Connection)\tNetwork
sink\tvoid java.io.PrintStream.print(int)\tI/O
sink\tvoid java.io.PrintStream.print(java.lang.String)\tI/O
sink\tvoid java.io.PrintStream.print(char[])\tI/O
sink\tvoid java.io.PrintStream.print(java.lang.Object)\tI/O
sink\tvoid java.io.PrintStream.println(int)\tI/O
sink\tvoid java.io.PrintStream.println(java.lang.String)\tI/O
sink\tvoid java.io.PrintStream.println(java.lang.Object)\tI/O
sink\tvoid java.io.PrintStream.write(byte[])\tI/O
sink\tvoid java.io.OutputStream.write(byte[])\tI/O
sink\tvoid java.io.OutputStream.write(byte[],int,int)\tI/O
sink\tvoid java.io.FileOutputStream.write(byte[])\tI/O
sink\tvoid java.io.Writer.write(java.lang.String)\tI/O
sink\tvoid java.io.BufferedWriter.write(java.lang.String)\tI/O
sink\tvoid java.io.ObjectOutputStream.writeObject(java.lang.Object)\tI/O
sink\tvoid java.io.DataOutputStream.write(byte[],int,int)\tI/O
sink\tvoid java.net.DatagramSocket.send(java.net.DatagramPacket)\tNetwork
sink\tint java.nio.channels.SocketChannel.write(java.nio.ByteBuffer)\tNetwork
sink\tvoid java.net.URLConnection.setRequestProperty(java.lang.String,java.lang.String)\tNetwork
sink\tvoid java.net.HttpURLConnection.setRequestProperty(java.lang.String,java.lang.String)\tNetwork
sink\tvoid java.util.logging.Logger.info(java.lang.String)\tLog
sink\tvoid java.util.logging.Logger.warning(java.lang.String)\tLog
sink\tvoid java.util.logging.Logger.log(java.util.logging.Level,java.lang.String)\tLog
sink\tvoid org.slf4j.Logger.info(java.lang.String)\tLog
sink\tvoid org.slf4j.Logger.debug(java.lang.String)\tLog
sink\tvoid org.slf4j.Logger.warn(java.lang.String)\tLog
sink\tvoid org.apache.logging.log4j.Logger.info(java.lang.String)\tLog
sink\tint android.util.Log.d(java.lang.String,java.lang.String)\tLog
sink\tint android.util.Log.i(java.lang.String,java.lang.String)\tLog
sink\tboolean java.sql.PreparedStatement.execute()\tDatabase
sink\tvoid java.sql.PreparedStatement.setString(int,java.lang.String)\tDatabase
sink\tint java.sql.Statement.executeUpdate(java.lang.String)\tDatabase
"""


@lru_cache(maxsize=1)
def builtin_catalog() -> Catalog:
    return parse_catalog_text(STARTER_CATALOG_TEXT, origin="<builtin>")
