"""JVM type descriptor utilities.

Type descriptors are the compact strings used inside class files
("I", "[B", "Ljava/lang/String;").  Catalog files and reports use the
human-readable Java spelling ("int", "byte[]", "java.lang.String").
Conversion is lossless in both directions.
"""

from __future__ import annotations

PRIMITIVE_TO_JAVA = {
    "B": "byte",
    "C": "char",
    "D": "double",
    "F": "float",
    "I": "int",
    "J": "long",
    "S": "short",
    "Z": "boolean",
    "V": "void",
}

JAVA_TO_PRIMITIVE = {v: k for k, v in PRIMITIVE_TO_JAVA.items()}

# Rich-type policies for value filtering.  "strict" keeps int, byte,
# every reference type and arrays of those; "extended" additionally
# admits the remaining numeric/char primitives.  boolean is never rich.
POLICY_STRICT = "strict"
POLICY_EXTENDED = "extended"


class DescriptorError(ValueError):
    """Raised for strings that are not valid JVM type descriptors."""


def _take_one(desc: str, pos: int) -> int:
    """Return the end index of the single field descriptor at pos."""
    start = pos
    while pos < len(desc) and desc[pos] == "[":
        pos += 1
    if pos >= len(desc):
        raise DescriptorError(f"truncated descriptor: {desc!r} at {start}")
    ch = desc[pos]
    if ch in PRIMITIVE_TO_JAVA:
        return pos + 1
    if ch == "L":
        end = desc.find(";", pos)
        if end < 0:
            raise DescriptorError(f"unterminated class descriptor: {desc!r}")
        return end + 1
    raise DescriptorError(f"bad descriptor char {ch!r} in {desc!r}")


def parse_method_descriptor(desc: str) -> tuple[tuple[str, ...], str]:
    """Split "(Ljava/io/InputStream;I)V" into (param descs, return desc)."""
    if not desc.startswith("("):
        raise DescriptorError(f"not a method descriptor: {desc!r}")
    close = desc.find(")")
    if close < 0:
        raise DescriptorError(f"unterminated parameter list: {desc!r}")
    params = []
    pos = 1
    while pos < close:
        end = _take_one(desc, pos)
        params.append(desc[pos:end])
        pos = end
    ret = desc[close + 1 :]
    _take_one(ret, 0)
    if _take_one(ret, 0) != len(ret):
        raise DescriptorError(f"trailing junk after return type: {desc!r}")
    return tuple(params), ret


def desc_to_java(desc: str) -> str:
    """"[B" -> "byte[]", "Ljava/lang/String;" -> "java.lang.String"."""
    dims = 0
    while desc.startswith("["):
        dims += 1
        desc = desc[1:]
    if desc in PRIMITIVE_TO_JAVA:
        base = PRIMITIVE_TO_JAVA[desc]
    elif desc.startswith("L") and desc.endswith(";"):
        base = desc[1:-1].replace("/", ".")
    else:
        raise DescriptorError(f"bad descriptor: {desc!r}")
    return base + "[]" * dims


def java_to_desc(name: str) -> str:
    """"byte[]" -> "[B", "java.lang.String" -> "Ljava/lang/String;"."""
    name = name.strip()
    dims = 0
    while name.endswith("[]"):
        dims += 1
        name = name[:-2].strip()
    if not name:
        raise DescriptorError("empty type name")
    if name in JAVA_TO_PRIMITIVE:
        base = JAVA_TO_PRIMITIVE[name]
    else:
        base = "L" + name.replace(".", "/") + ";"
    return "[" * dims + base


def element_type(desc: str) -> str:
    """Strip array dimensions from a descriptor."""
    return desc.lstrip("[")


def is_reference(desc: str) -> bool:
    return desc.startswith("[") or desc.startswith("L")


def slot_category(desc: str) -> int:
    """JVM computational category: 2 for long/double, 1 otherwise."""
    return 2 if desc in ("J", "D") else 1


def is_rich_type(desc: str, policy: str = POLICY_STRICT) -> bool:
    """Whether values of this type can carry privacy-relevant content.

    int, byte, every reference type, and arrays of rich types qualify.
    boolean (and boolean arrays) never do.  Under the extended policy
    the remaining primitives except boolean also qualify.
    """
    elem = element_type(desc)
    if elem == "Z" or elem == "V" or not elem:
        return False
    if elem.startswith("L"):
        return True
    if elem in ("I", "B"):
        return True
    if policy == POLICY_EXTENDED:
        return elem in ("C", "S", "J", "F", "D")
    return False
