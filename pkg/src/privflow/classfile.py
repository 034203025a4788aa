"""Class-file and JAR ingestion.

Decodes the JVM class-file format (constant pool, fields, methods,
Code attributes, bytecode) into immutable artifacts.  Internal
'/'-separated names are normalized to dotted form here; nothing
downstream sees internal names.  Unknown attributes are skipped by
length so newer class-file versions decode best-effort; major
version 52 (Java 8) is the tested baseline.
"""

from __future__ import annotations

import logging
import struct
import zipfile
from dataclasses import dataclass, replace
from pathlib import Path

from .descriptors import desc_to_java, parse_method_descriptor
from .opcodes import INVOKE_KINDS, OPCODES

log = logging.getLogger(__name__)

MAGIC = 0xCAFEBABE
SUPPORTED_MAJOR = 52  # Java 8 baseline; higher versions parse best-effort

ACC_STATIC = 0x0008
ACC_NATIVE = 0x0100
ACC_ABSTRACT = 0x0400

CONST_UTF8 = 1
CONST_INTEGER = 3
CONST_FLOAT = 4
CONST_LONG = 5
CONST_DOUBLE = 6
CONST_CLASS = 7
CONST_STRING = 8
CONST_FIELDREF = 9
CONST_METHODREF = 10
CONST_IFACEMETHODREF = 11
CONST_NAMEANDTYPE = 12
CONST_METHODHANDLE = 15
CONST_METHODTYPE = 16
CONST_DYNAMIC = 17
CONST_INVOKEDYNAMIC = 18
CONST_MODULE = 19
CONST_PACKAGE = 20


class ClassFormatError(Exception):
    """A byte stream that is not a decodable class file."""


class InputError(Exception):
    """A path that cannot be read at all (fatal for the run)."""


@dataclass(frozen=True, order=True)
class MethodRef:
    """Fully qualified method identity.

    Types are spelled the Java way ("int", "byte[]", "java.lang.String")
    and the declaring class is always in dotted form.
    """

    declaring_class: str
    name: str
    param_types: tuple[str, ...]
    return_type: str

    def __post_init__(self) -> None:
        if not self.declaring_class or "/" in self.declaring_class:
            raise ValueError(f"bad declaring class: {self.declaring_class!r}")

    @property
    def package(self) -> str:
        owner = self.declaring_class
        return owner.rsplit(".", 1)[0] if "." in owner else ""

    @property
    def simple_class(self) -> str:
        return self.declaring_class.rsplit(".", 1)[-1]

    def signature(self) -> str:
        params = ",".join(self.param_types)
        return f"{self.return_type} {self.declaring_class}.{self.name}({params})"

    def short(self) -> str:
        return f"{self.declaring_class}.{self.name}"


def method_ref_from_descriptor(owner: str, name: str, desc: str) -> MethodRef:
    params, ret = parse_method_descriptor(desc)
    return MethodRef(
        declaring_class=owner,
        name=name,
        param_types=tuple(desc_to_java(p) for p in params),
        return_type=desc_to_java(ret),
    )


@dataclass(frozen=True)
class Instruction:
    offset: int
    opcode: int
    mnemonic: str
    cp: int | None = None        # constant-pool index, when any
    local: int | None = None     # local-variable index, when any
    value: int | None = None     # immediate / iinc delta / newarray code / dims
    targets: tuple[int, ...] = ()  # absolute branch targets (switch: default first)
    # resolved constant-pool views, filled at parse time:
    method: "MethodRef | None" = None          # invoke target
    invoke_kind: str | None = None             # virtual|static|special|interface|dynamic
    field_ref: tuple[str, str, str] | None = None  # (owner dotted, name, descriptor)
    type_ref: str | None = None                # new/checkcast/... class or array descriptor
    const_desc: str | None = None              # descriptor of an ldc'd constant


@dataclass(frozen=True)
class ExceptionHandler:
    start_pc: int
    end_pc: int
    handler_pc: int
    catch_type: str | None  # dotted class name, None = catch-all


@dataclass(frozen=True)
class MethodBody:
    ref: MethodRef
    descriptor: str                      # raw JVM descriptor
    access_flags: int
    max_locals: int
    instructions: tuple[Instruction, ...]
    exception_table: tuple[ExceptionHandler, ...] = ()

    @property
    def is_static(self) -> bool:
        return bool(self.access_flags & ACC_STATIC)

    @property
    def has_code(self) -> bool:
        return bool(self.instructions)


@dataclass(frozen=True)
class ClassArtifact:
    name: str
    super_name: str | None
    interfaces: tuple[str, ...]
    methods: tuple[MethodBody, ...]
    fields: frozenset[tuple[str, str]]   # (name, descriptor)
    major_version: int
    source: str = ""                     # where the bytes came from

    @property
    def package(self) -> str:
        return self.name.rsplit(".", 1)[0] if "." in self.name else ""


def _decode_mutf8(raw: bytes) -> str:
    """Decode JVM modified UTF-8 (NUL as C0 80, CESU-8 surrogates)."""
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        return raw.replace(b"\xc0\x80", b"\x00").decode("utf-8", errors="surrogatepass")


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def u1(self) -> int:
        return self._unpack(">B", 1)

    def u2(self) -> int:
        return self._unpack(">H", 2)

    def u4(self) -> int:
        return self._unpack(">I", 4)

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ClassFormatError("truncated class file")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def _unpack(self, fmt: str, n: int):
        if self.pos + n > len(self.data):
            raise ClassFormatError("truncated class file")
        (v,) = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += n
        return v


class _ConstPool:
    def __init__(self, reader: _Reader) -> None:
        count = reader.u2()
        self.entries: dict[int, tuple[int, tuple]] = {}
        i = 1
        while i < count:
            tag = reader.u1()
            if tag == CONST_UTF8:
                length = reader.u2()
                self.entries[i] = (tag, (_decode_mutf8(reader.raw(length)),))
            elif tag in (CONST_INTEGER, CONST_FLOAT):
                self.entries[i] = (tag, (reader.u4(),))
            elif tag in (CONST_LONG, CONST_DOUBLE):
                self.entries[i] = (tag, (reader.raw(8),))
                i += 1  # 8-byte constants occupy two pool slots
            elif tag in (CONST_CLASS, CONST_STRING, CONST_METHODTYPE,
                         CONST_MODULE, CONST_PACKAGE):
                self.entries[i] = (tag, (reader.u2(),))
            elif tag in (CONST_FIELDREF, CONST_METHODREF, CONST_IFACEMETHODREF,
                         CONST_NAMEANDTYPE, CONST_DYNAMIC, CONST_INVOKEDYNAMIC):
                self.entries[i] = (tag, (reader.u2(), reader.u2()))
            elif tag == CONST_METHODHANDLE:
                self.entries[i] = (tag, (reader.u1(), reader.u2()))
            else:
                raise ClassFormatError(f"unknown constant-pool tag {tag}")
            i += 1

    def _get(self, index: int, expect: tuple[int, ...]) -> tuple:
        entry = self.entries.get(index)
        if entry is None or entry[0] not in expect:
            raise ClassFormatError(f"bad constant-pool reference #{index}")
        return entry[1]

    def utf8(self, index: int) -> str:
        return self._get(index, (CONST_UTF8,))[0]

    def class_name(self, index: int) -> str:
        (name_idx,) = self._get(index, (CONST_CLASS,))
        return self.utf8(name_idx).replace("/", ".")

    def name_and_type(self, index: int) -> tuple[str, str]:
        name_idx, desc_idx = self._get(index, (CONST_NAMEANDTYPE,))
        return self.utf8(name_idx), self.utf8(desc_idx)

    def member_ref(self, index: int) -> tuple[str, str, str]:
        """(owner dotted, name, descriptor) for a field/method ref."""
        cls_idx, nat_idx = self._get(
            index, (CONST_FIELDREF, CONST_METHODREF, CONST_IFACEMETHODREF)
        )
        name, desc = self.name_and_type(nat_idx)
        return self.class_name(cls_idx), name, desc

    def invokedynamic(self, index: int) -> tuple[str, str]:
        """(name, descriptor) of the dynamic call site."""
        _bsm, nat_idx = self._get(index, (CONST_INVOKEDYNAMIC,))
        return self.name_and_type(nat_idx)


def _decode_bytecode(code: bytes) -> tuple[Instruction, ...]:
    out: list[Instruction] = []
    pos = 0
    n = len(code)
    while pos < n:
        offset = pos
        op = code[pos]
        pos += 1
        if op not in OPCODES:
            raise ClassFormatError(f"unknown opcode 0x{op:02x} at {offset}")
        mnem, fmt = OPCODES[op]
        cp = local = value = None
        targets: tuple[int, ...] = ()
        if fmt == "":
            pass
        elif fmt == "u1":
            v = code[pos]; pos += 1
            if mnem == "newarray":
                value = v
            else:
                local = v
        elif fmt == "s1":
            value = struct.unpack_from(">b", code, pos)[0]; pos += 1
        elif fmt == "s2":
            value = struct.unpack_from(">h", code, pos)[0]; pos += 2
        elif fmt == "b2":
            delta = struct.unpack_from(">h", code, pos)[0]; pos += 2
            targets = (offset + delta,)
        elif fmt == "b4":
            delta = struct.unpack_from(">i", code, pos)[0]; pos += 4
            targets = (offset + delta,)
        elif fmt == "cp1":
            cp = code[pos]; pos += 1
        elif fmt == "cp2":
            cp = struct.unpack_from(">H", code, pos)[0]; pos += 2
        elif fmt == "iinc":
            local = code[pos]
            value = struct.unpack_from(">b", code, pos + 1)[0]
            pos += 2
        elif fmt == "iface":
            cp = struct.unpack_from(">H", code, pos)[0]; pos += 4
        elif fmt == "indy":
            cp = struct.unpack_from(">H", code, pos)[0]; pos += 4
        elif fmt == "multi":
            cp = struct.unpack_from(">H", code, pos)[0]
            value = code[pos + 2]
            pos += 3
        elif fmt == "table":
            pad = (4 - (pos % 4)) % 4
            pos += pad
            default, low, high = struct.unpack_from(">iii", code, pos)
            pos += 12
            count = high - low + 1
            if count < 0 or pos + 4 * count > n:
                raise ClassFormatError("malformed tableswitch")
            offs = struct.unpack_from(f">{count}i", code, pos)
            pos += 4 * count
            targets = (offset + default,) + tuple(offset + d for d in offs)
        elif fmt == "lookup":
            pad = (4 - (pos % 4)) % 4
            pos += pad
            default, npairs = struct.unpack_from(">ii", code, pos)
            pos += 8
            if npairs < 0 or pos + 8 * npairs > n:
                raise ClassFormatError("malformed lookupswitch")
            ts = []
            for _ in range(npairs):
                _match, d = struct.unpack_from(">ii", code, pos)
                pos += 8
                ts.append(offset + d)
            targets = (offset + default,) + tuple(ts)
        elif fmt == "wide":
            wop = code[pos]; pos += 1
            wmnem, _ = OPCODES.get(wop, ("?", ""))
            if wmnem == "iinc":
                local = struct.unpack_from(">H", code, pos)[0]
                value = struct.unpack_from(">h", code, pos + 2)[0]
                pos += 4
            elif wmnem in ("iload", "lload", "fload", "dload", "aload",
                           "istore", "lstore", "fstore", "dstore", "astore",
                           "ret"):
                local = struct.unpack_from(">H", code, pos)[0]
                pos += 2
            else:
                raise ClassFormatError(f"bad wide operand 0x{wop:02x}")
            out.append(Instruction(offset, wop, wmnem, None, local, value, ()))
            continue
        else:  # pragma: no cover - table is closed
            raise ClassFormatError(f"unhandled format {fmt}")
        if pos > n:
            raise ClassFormatError("bytecode runs past code length")
        out.append(Instruction(offset, op, mnem, cp, local, value, targets))

    valid = {ins.offset for ins in out}
    for ins in out:
        for t in ins.targets:
            if t not in valid:
                raise ClassFormatError(
                    f"branch target {t} of {ins.mnemonic}@{ins.offset} "
                    "is not an instruction offset"
                )
    return tuple(out)


_LDC_DESCS = {
    CONST_INTEGER: "I",
    CONST_FLOAT: "F",
    CONST_LONG: "J",
    CONST_DOUBLE: "D",
    CONST_STRING: "Ljava/lang/String;",
    CONST_CLASS: "Ljava/lang/Class;",
    CONST_METHODTYPE: "Ljava/lang/invoke/MethodType;",
    CONST_METHODHANDLE: "Ljava/lang/invoke/MethodHandle;",
}


def _resolve_instruction(ins: Instruction, pool: _ConstPool) -> Instruction:
    """Attach resolved constant-pool views to one instruction."""
    mnem = ins.mnemonic
    if mnem in ("invokevirtual", "invokespecial", "invokestatic", "invokeinterface"):
        cls, name, desc = pool.member_ref(ins.cp)
        target = method_ref_from_descriptor(cls, name, desc)
        return replace(ins, method=target, invoke_kind=INVOKE_KINDS[ins.opcode])
    if mnem == "invokedynamic":
        name, desc = pool.invokedynamic(ins.cp)
        target = method_ref_from_descriptor("<dynamic>", name, desc)
        return replace(ins, method=target, invoke_kind="dynamic")
    if mnem in ("getstatic", "putstatic", "getfield", "putfield"):
        cls, name, desc = pool.member_ref(ins.cp)
        return replace(ins, field_ref=(cls, name, desc))
    if mnem in ("new", "anewarray", "checkcast", "instanceof", "multianewarray"):
        return replace(ins, type_ref=pool.class_name(ins.cp))
    if mnem in ("ldc", "ldc_w", "ldc2_w"):
        entry = pool.entries.get(ins.cp)
        if entry is None:
            raise ClassFormatError(f"bad ldc constant #{ins.cp}")
        return replace(ins, const_desc=_LDC_DESCS.get(entry[0], "Ljava/lang/Object;"))
    return ins


def _skip_attributes(reader: _Reader, pool: _ConstPool) -> dict[str, bytes]:
    attrs: dict[str, bytes] = {}
    count = reader.u2()
    for _ in range(count):
        name_idx = reader.u2()
        length = reader.u4()
        raw = reader.raw(length)
        try:
            attrs[pool.utf8(name_idx)] = raw
        except ClassFormatError:
            pass  # nameless attribute: skip silently
    return attrs


def parse_class(data: bytes, source: str = "") -> ClassArtifact:
    """Decode one class file.  Raises ClassFormatError on malformed input."""
    reader = _Reader(data)
    if reader.u4() != MAGIC:
        raise ClassFormatError("bad magic number")
    reader.u2()  # minor
    major = reader.u2()
    pool = _ConstPool(reader)
    reader.u2()  # access flags
    this_name = pool.class_name(reader.u2())
    super_idx = reader.u2()
    super_name = pool.class_name(super_idx) if super_idx else None
    interfaces = tuple(pool.class_name(reader.u2()) for _ in range(reader.u2()))

    fields: set[tuple[str, str]] = set()
    for _ in range(reader.u2()):
        reader.u2()  # access
        name = pool.utf8(reader.u2())
        desc = pool.utf8(reader.u2())
        _skip_attributes(reader, pool)
        fields.add((name, desc))

    methods: list[MethodBody] = []
    for _ in range(reader.u2()):
        access = reader.u2()
        name = pool.utf8(reader.u2())
        desc = pool.utf8(reader.u2())
        attrs = _skip_attributes(reader, pool)
        instructions: tuple[Instruction, ...] = ()
        handlers: tuple[ExceptionHandler, ...] = ()
        max_locals = 0
        code_attr = attrs.get("Code")
        if code_attr is not None and not (access & (ACC_ABSTRACT | ACC_NATIVE)):
            cr = _Reader(code_attr)
            cr.u2()  # max_stack
            max_locals = cr.u2()
            code_len = cr.u4()
            raw_instructions = _decode_bytecode(cr.raw(code_len))
            resolved = []
            for ins in raw_instructions:
                try:
                    resolved.append(_resolve_instruction(ins, pool))
                except (ClassFormatError, ValueError) as exc:
                    log.warning(
                        "unresolvable constant in %s.%s at offset %d: %s",
                        this_name, name, ins.offset, exc,
                    )
                    resolved.append(ins)
            instructions = tuple(resolved)
            table = []
            for _ in range(cr.u2()):
                start, end, handler, catch_idx = cr.u2(), cr.u2(), cr.u2(), cr.u2()
                catch = pool.class_name(catch_idx) if catch_idx else None
                table.append(ExceptionHandler(start, end, handler, catch))
            handlers = tuple(table)
        ref = method_ref_from_descriptor(this_name, name, desc)
        methods.append(
            MethodBody(
                ref=ref,
                descriptor=desc,
                access_flags=access,
                max_locals=max_locals,
                instructions=instructions,
                exception_table=handlers,
            )
        )

    _skip_attributes(reader, pool)
    return ClassArtifact(
        name=this_name,
        super_name=super_name,
        interfaces=interfaces,
        methods=tuple(methods),
        fields=frozenset(fields),
        major_version=major,
        source=source,
    )


def _iter_class_bytes(path: Path):
    """Yield (source label, bytes) for every .class reachable from path."""
    if path.is_dir():
        for p in sorted(path.rglob("*.class")):
            yield str(p), p.read_bytes()
    elif path.is_file() and zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            for name in sorted(zf.namelist()):
                if name.endswith(".class") and not name.endswith("module-info.class"):
                    yield f"{path}!{name}", zf.read(name)
    elif path.is_file() and path.suffix == ".class":
        yield str(path), path.read_bytes()
    else:
        raise InputError(f"not a JAR, directory, or class file: {path}")


def load_inputs(paths) -> list[ClassArtifact]:
    """Load every syntactically valid class file under the given paths.

    Directories are scanned recursively; JARs are treated as ZIP
    containers.  A malformed class file is skipped with a warning;
    an unreadable path raises InputError.  Duplicate class names
    keep the first occurrence.  The result order is deterministic
    for identical inputs.
    """
    seen: dict[str, ClassArtifact] = {}
    for raw in paths:
        path = Path(raw)
        if not path.exists():
            raise InputError(f"input path does not exist: {path}")
        try:
            pairs = list(_iter_class_bytes(path))
        except (OSError, zipfile.BadZipFile) as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
        for source, data in pairs:
            try:
                art = parse_class(data, source=source)
            except (ClassFormatError, ValueError, IndexError, struct.error) as exc:
                log.warning("skipping malformed class file %s: %s", source, exc)
                continue
            if art.name in seen:
                log.warning(
                    "duplicate class %s (keeping %s, ignoring %s)",
                    art.name, seen[art.name].source, source,
                )
                continue
            seen[art.name] = art
    return list(seen.values())


def invocation_sites(body: MethodBody) -> list[tuple[int, MethodRef, str]]:
    """All invoke-family instructions of a method, in offset order.

    Returns (offset, target MethodRef, kind) triples.  Dynamic call
    sites are reported under the pseudo-owner "<dynamic>" and are
    never matched against source/sink catalogs.  A site whose
    constant-pool reference failed to resolve was already warned
    about at parse time and is omitted here.
    """
    sites = []
    for ins in body.instructions:
        if ins.opcode in INVOKE_KINDS and ins.method is not None:
            sites.append((ins.offset, ins.method, ins.invoke_kind))
    return sites
