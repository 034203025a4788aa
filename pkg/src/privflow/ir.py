"""Three-address IR lowering and per-method control-flow graphs.

Stack-based bytecode is lowered by symbolic evaluation of the operand
stack.  Every pushed value gets a fresh temporary slot (defined exactly
once); operand stacks that are live across basic-block joins are unified
through explicit merge statements at block entry.  Exception handlers
are wired with an edge from every covered statement to the handler
entry, so values escaping through a handler keep flowing.

Longs and doubles occupy one logical slot here; the JVM's two-cell
encoding only matters while simulating dup/pop shapes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

from .classfile import MethodBody, MethodRef
from .descriptors import java_to_desc, slot_category

log = logging.getLogger(__name__)

KIND_ASSIGN = "assign"
KIND_INVOKE = "invoke"
KIND_RETURN = "return"
KIND_FIELD_LOAD = "field_load"
KIND_FIELD_STORE = "field_store"
KIND_OTHER = "other"


class UnanalyzableMethod(Exception):
    """Lowering could not produce a consistent CFG for this method."""


@dataclass(frozen=True)
class InvokeInfo:
    target: MethodRef
    kind: str                      # virtual|static|special|interface|dynamic
    receiver: int | None
    args: tuple[int, ...]
    result: int | None
    arg_descs: tuple[str, ...]
    result_desc: str | None

    @property
    def receiver_desc(self) -> str:
        return "L" + self.target.declaring_class.replace(".", "/") + ";"


@dataclass
class Statement:
    id: int
    kind: str
    defs: set[int]
    uses: set[int]
    offset: int
    value_type: str | None = None      # descriptor of the defined value
    invoke: InvokeInfo | None = None
    field: tuple[str, str] | None = None   # (owner dotted, field name)
    field_value_slot: int | None = None
    field_receiver_slot: int | None = None
    array_read: int | None = None          # array slot feeding the def
    array_write: tuple[int, int] | None = None  # (array slot, value slot)
    conv_from: str | None = None           # source descriptor of a conversion
    tag: str = ""                          # phi|catch|branch|goto|switch|new|...
    is_throw: bool = False

    def describe(self) -> str:
        parts = [f"s{self.id}@{self.offset}", self.kind]
        if self.tag:
            parts.append(f"[{self.tag}]")
        if self.defs:
            parts.append("def=" + ",".join(map(str, sorted(self.defs))))
        if self.uses:
            parts.append("use=" + ",".join(map(str, sorted(self.uses))))
        if self.invoke:
            parts.append(self.invoke.target.signature())
        if self.field:
            parts.append(".".join(self.field))
        if self.value_type:
            parts.append(f": {self.value_type}")
        return " ".join(parts)


class Cfg:
    def __init__(self, method: MethodRef, statements: list[Statement],
                 edges: set[tuple[int, int]], entry: int, slot_count: int,
                 param_slots: tuple[tuple[int, str], ...], is_static: bool,
                 return_desc: str) -> None:
        self.method = method
        self.statements = statements
        self.edges = frozenset(edges)
        self.entry = entry
        self.slot_count = slot_count
        self.param_slots = param_slots  # (slot, descriptor), incl. receiver
        self.is_static = is_static
        self.return_desc = return_desc
        self._succs: dict[int, list[int]] = {s.id: [] for s in statements}
        self._preds: dict[int, list[int]] = {s.id: [] for s in statements}
        for a, b in sorted(self.edges):
            self._succs[a].append(b)
            self._preds[b].append(a)

    def successors(self, sid: int) -> list[int]:
        return self._succs[sid]

    def predecessors(self, sid: int) -> list[int]:
        return self._preds[sid]

    @property
    def is_constructor(self) -> bool:
        return self.method.name == "<init>"

    def dump(self) -> str:
        lines = [f"; {self.method.signature()}"]
        for s in self.statements:
            succ = ",".join(map(str, self._succs[s.id]))
            lines.append(f"{s.describe()}  -> [{succ}]")
        return "\n".join(lines)


class _StackVal(NamedTuple):
    slot: int
    cat: int          # JVM computational category (cells)
    desc: str | None


_CONST_DESCS = {
    "iconst_m1": "I", "iconst_0": "I", "iconst_1": "I", "iconst_2": "I",
    "iconst_3": "I", "iconst_4": "I", "iconst_5": "I", "bipush": "I",
    "sipush": "I", "lconst_0": "J", "lconst_1": "J",
    "fconst_0": "F", "fconst_1": "F", "fconst_2": "F",
    "dconst_0": "D", "dconst_1": "D",
}

_LOAD_DESCS = {"i": "I", "l": "J", "f": "F", "d": "D", "a": None}

_ALOAD_ELEM = {"iaload": "I", "laload": "J", "faload": "F", "daload": "D",
               "aaload": None, "baload": "B", "caload": "C", "saload": "S"}

_ASTORE_OPS = {"iastore", "lastore", "fastore", "dastore", "aastore",
               "bastore", "castore", "sastore"}

# binary op -> (operand count, result descriptor)
_BINOPS = {}
for _p, _d in (("i", "I"), ("l", "J"), ("f", "F"), ("d", "D")):
    for _op in ("add", "sub", "mul", "div", "rem"):
        _BINOPS[_p + _op] = (2, _d)
for _p, _d in (("i", "I"), ("l", "J")):
    for _op in ("shl", "shr", "ushr", "and", "or", "xor"):
        _BINOPS[_p + _op] = (2, _d)
_BINOPS.update({"lcmp": (2, "I"), "fcmpl": (2, "I"), "fcmpg": (2, "I"),
                "dcmpl": (2, "I"), "dcmpg": (2, "I")})

_NEG_OPS = {"ineg": "I", "lneg": "J", "fneg": "F", "dneg": "D"}

_CONV_OPS = {
    "i2l": ("I", "J"), "i2f": ("I", "F"), "i2d": ("I", "D"),
    "l2i": ("J", "I"), "l2f": ("J", "F"), "l2d": ("J", "D"),
    "f2i": ("F", "I"), "f2l": ("F", "J"), "f2d": ("F", "D"),
    "d2i": ("D", "I"), "d2l": ("D", "J"), "d2f": ("D", "F"),
    "i2b": ("I", "B"), "i2c": ("I", "C"), "i2s": ("I", "S"),
}

_RETURN_OPS = {"ireturn": "I", "lreturn": "J", "freturn": "F",
               "dreturn": "D", "areturn": None, "return": "V"}

_IF1_OPS = {"ifeq", "ifne", "iflt", "ifge", "ifgt", "ifle",
            "ifnull", "ifnonnull"}
_IF2_OPS = {"if_icmpeq", "if_icmpne", "if_icmplt", "if_icmpge",
            "if_icmpgt", "if_icmple", "if_acmpeq", "if_acmpne"}

_NEWARRAY_DESCS = {4: "[Z", 5: "[C", 6: "[F", 7: "[D",
                   8: "[B", 9: "[S", 10: "[I", 11: "[J"}


def _type_ref_desc(type_ref: str) -> str:
    """Dotted class or array reference (from the pool) to a descriptor."""
    if type_ref.startswith("["):
        return type_ref.replace(".", "/")
    return "L" + type_ref.replace(".", "/") + ";"


def param_slot_table(ref: MethodRef, is_static: bool) -> tuple[tuple[int, str], ...]:
    """JVM local-slot layout of the receiver and declared parameters."""
    out: list[tuple[int, str]] = []
    slot = 0
    if not is_static:
        out.append((0, "L" + ref.declaring_class.replace(".", "/") + ";"))
        slot = 1
    for java_name in ref.param_types:
        desc = java_to_desc(java_name)
        out.append((slot, desc))
        slot += 2 if desc in ("J", "D") else 1
    return tuple(out)


class _Lowering:
    def __init__(self, body: MethodBody) -> None:
        self.body = body
        self.instructions = body.instructions
        self.by_offset = {ins.offset: i for i, ins in enumerate(self.instructions)}
        self.next_slot = max(body.max_locals, self._max_local_index() + 1)
        self.statements: list[Statement] = []
        self.edges: set[tuple[int, int]] = set()

    def _max_local_index(self) -> int:
        mx = -1
        for ins in self.instructions:
            if ins.local is not None:
                mx = max(mx, ins.local)
        return mx

    def fresh(self) -> int:
        slot = self.next_slot
        self.next_slot += 1
        return slot

    def fail(self, why: str):
        raise UnanalyzableMethod(f"{self.body.ref.signature()}: {why}")

    # -- block structure -------------------------------------------

    def split_blocks(self) -> None:
        leaders = {0}
        terminators = set()
        for i, ins in enumerate(self.instructions):
            if ins.mnemonic in ("jsr", "jsr_w", "ret"):
                self.fail("jsr/ret subroutines are not supported")
            if ins.targets:
                leaders.update(ins.targets)
                if i + 1 < len(self.instructions):
                    leaders.add(self.instructions[i + 1].offset)
            if ins.mnemonic in _RETURN_OPS or ins.mnemonic == "athrow":
                terminators.add(i)
                if i + 1 < len(self.instructions):
                    leaders.add(self.instructions[i + 1].offset)
        for h in self.body.exception_table:
            leaders.add(h.handler_pc)
            if h.handler_pc not in self.by_offset:
                self.fail(f"exception handler at bad offset {h.handler_pc}")

        order = sorted(leaders & set(self.by_offset))
        if not order or order[0] != 0:
            self.fail("no code at offset 0")
        self.block_of_offset: dict[int, int] = {}
        self.blocks: list[list[int]] = []
        bounds = order + [None]
        for bi in range(len(order)):
            start = self.by_offset[order[bi]]
            end = self.by_offset[bounds[bi + 1]] if bounds[bi + 1] is not None else len(self.instructions)
            idxs = list(range(start, end))
            self.blocks.append(idxs)
            for i in idxs:
                self.block_of_offset[self.instructions[i].offset] = bi

        self.block_succs: list[list[int]] = []
        for bi, idxs in enumerate(self.blocks):
            last = self.instructions[idxs[-1]]
            succs: list[int] = []
            mnem = last.mnemonic
            if mnem in _RETURN_OPS or mnem == "athrow":
                pass
            elif mnem in ("goto", "goto_w", "tableswitch", "lookupswitch"):
                succs = [self.block_of_offset[t] for t in last.targets]
            elif last.targets:  # conditional branch: fallthrough first
                if bi + 1 >= len(self.blocks):
                    self.fail("conditional branch falls off the end")
                succs = [bi + 1] + [self.block_of_offset[t] for t in last.targets]
            else:
                if bi + 1 < len(self.blocks):
                    succs = [bi + 1]
                else:
                    self.fail("control falls off the end of the code")
            # deduplicate, preserving order
            seen = set()
            self.block_succs.append(
                [s for s in succs if not (s in seen or seen.add(s))]
            )

    # -- symbolic evaluation ---------------------------------------

    def run(self) -> Cfg:
        body = self.body
        if not body.has_code:
            raise ValueError(f"{body.ref.signature()} has no code")
        self.split_blocks()

        n_blocks = len(self.blocks)
        self.entry_syms: list[list[_StackVal] | None] = [None] * n_blocks
        self.entry_kind: list[str] = ["?"] * n_blocks
        self.exit_syms: list[list[_StackVal] | None] = [None] * n_blocks
        self.block_stmts: list[list[int]] = [[] for _ in range(n_blocks)]
        self.pred_records: list[list[list[_StackVal]]] = [[] for _ in range(n_blocks)]
        visited = [False] * n_blocks

        pending: list[tuple[int, list[_StackVal]]] = [(0, [])]

        while True:
            while pending:
                bi, shape = pending.pop(0)
                if visited[bi]:
                    if self.entry_kind[bi] == "catch":
                        if shape:
                            self.fail("handler entered with a non-empty stack")
                        continue
                    prev = self.entry_syms[bi] or []
                    if len(prev) != len(shape) or any(
                        p.cat != s.cat for p, s in zip(prev, shape)
                    ):
                        self.fail("inconsistent stack depth at a join point")
                    self.pred_records[bi].append(shape)
                    continue
                visited[bi] = True
                self.pred_records[bi].append(shape)
                self._emit_block(bi, shape, as_handler=False)
                for succ in self.block_succs[bi]:
                    pending.append((succ, list(self.exit_syms[bi] or [])))

            # activate handlers whose protected range has live statements
            activated = False
            for h in self.body.exception_table:
                hb = self.block_of_offset[h.handler_pc]
                if visited[hb]:
                    continue
                covered = any(
                    visited[self.block_of_offset[ins.offset]]
                    for ins in self.instructions
                    if h.start_pc <= ins.offset < h.end_pc
                    and ins.offset in self.block_of_offset
                )
                if covered:
                    visited[hb] = True
                    self._emit_block(hb, [], as_handler=True)
                    for succ in self.block_succs[hb]:
                        pending.append((succ, list(self.exit_syms[hb] or [])))
                    activated = True
            if not pending and not activated:
                break

        self._patch_phis()
        self._wire_edges(visited)
        entry_stmt = self._first_stmt(0)
        if entry_stmt is None:
            self.fail("method produced no statements")

        return Cfg(
            method=body.ref,
            statements=self.statements,
            edges=self.edges,
            entry=entry_stmt,
            slot_count=self.next_slot,
            param_slots=param_slot_table(body.ref, body.is_static),
            is_static=body.is_static,
            return_desc=java_to_desc(body.ref.return_type),
        )

    def _stmt(self, bi: int, **kw) -> Statement:
        s = Statement(id=len(self.statements), **kw)
        self.statements.append(s)
        self.block_stmts[bi].append(s.id)
        return s

    def _emit_block(self, bi: int, shape: list[_StackVal], as_handler: bool) -> None:
        start_offset = self.instructions[self.blocks[bi][0]].offset
        stack: list[_StackVal] = []
        if as_handler:
            self.entry_kind[bi] = "catch"
            exc = self.fresh()
            self._stmt(bi, kind=KIND_OTHER, defs={exc}, uses=set(),
                       offset=start_offset, tag="catch",
                       value_type="Ljava/lang/Throwable;")
            stack = [_StackVal(exc, 1, "Ljava/lang/Throwable;")]
        elif shape:
            self.entry_kind[bi] = "phi"
            merged = []
            for pos, val in enumerate(shape):
                t = self.fresh()
                self._stmt(bi, kind=KIND_ASSIGN, defs={t}, uses=set(),
                           offset=start_offset, tag="phi", value_type=val.desc)
                merged.append(_StackVal(t, val.cat, val.desc))
            stack = merged
        else:
            self.entry_kind[bi] = "plain"

        self.entry_syms[bi] = list(stack)
        for idx in self.blocks[bi]:
            self._emit_instruction(bi, self.instructions[idx], stack)
        self.exit_syms[bi] = list(stack)

    def _pop(self, stack: list[_StackVal], n: int = 1) -> list[_StackVal]:
        if n == 0:
            return []
        if len(stack) < n:
            self.fail("operand stack underflow")
        vals = stack[-n:]
        del stack[-n:]
        return vals

    def _push(self, bi, stack, offset, desc, *, uses=frozenset(), kind=KIND_ASSIGN,
              tag="", array_read=None, conv_from=None, **extra) -> Statement:
        t = self.fresh()
        s = self._stmt(bi, kind=kind, defs={t}, uses=set(uses), offset=offset,
                       value_type=desc, tag=tag, array_read=array_read,
                       conv_from=conv_from, **extra)
        cat = 2 if desc in ("J", "D") else 1
        stack.append(_StackVal(t, cat, desc))
        return s

    def _dup_shuffle(self, stack: list[_StackVal], group_cells: int,
                     skip_cells: int) -> None:
        group: list[_StackVal] = []
        cells = group_cells
        while cells > 0:
            if not stack:
                self.fail("operand stack underflow in dup")
            v = stack.pop()
            group.insert(0, v)
            cells -= v.cat
        skipped: list[_StackVal] = []
        cells = skip_cells
        while cells > 0:
            if not stack:
                self.fail("operand stack underflow in dup")
            v = stack.pop()
            skipped.insert(0, v)
            cells -= v.cat
        stack.extend(group)
        stack.extend(skipped)
        stack.extend(group)

    def _emit_instruction(self, bi: int, ins, stack: list[_StackVal]) -> None:
        mnem = ins.mnemonic
        off = ins.offset

        if mnem == "nop":
            return

        if mnem == "aconst_null":
            self._push(bi, stack, off, None)
            return
        if mnem in _CONST_DESCS:
            self._push(bi, stack, off, _CONST_DESCS[mnem])
            return
        if mnem in ("ldc", "ldc_w", "ldc2_w"):
            self._push(bi, stack, off, ins.const_desc)
            return

        if mnem[0] in _LOAD_DESCS and (
            mnem[1:].startswith("load") or mnem[1:5] == "load"
        ):
            # iload/lload/fload/dload/aload and their _n forms
            idx = ins.local if ins.local is not None else int(mnem[-1])
            self._push(bi, stack, off, _LOAD_DESCS[mnem[0]], uses={idx})
            return
        if mnem[0] in _LOAD_DESCS and "store" in mnem and mnem not in _ASTORE_OPS:
            idx = ins.local if ins.local is not None else int(mnem[-1])
            (v,) = self._pop(stack)
            self._stmt(bi, kind=KIND_ASSIGN, defs={idx}, uses={v.slot},
                       offset=off, value_type=v.desc)
            return

        if mnem in _ALOAD_ELEM:
            idx, = self._pop(stack)
            arr, = self._pop(stack)
            self._push(bi, stack, off, _ALOAD_ELEM[mnem],
                       uses={arr.slot, idx.slot}, array_read=arr.slot)
            return
        if mnem in _ASTORE_OPS:
            v, = self._pop(stack)
            idx, = self._pop(stack)
            arr, = self._pop(stack)
            self._stmt(bi, kind=KIND_OTHER, defs=set(),
                       uses={arr.slot, idx.slot, v.slot}, offset=off,
                       array_write=(arr.slot, v.slot), tag="arraystore")
            return

        if mnem == "pop":
            self._pop(stack)
            return
        if mnem == "pop2":
            v, = self._pop(stack)
            if v.cat == 1:
                self._pop(stack)
            return
        if mnem == "dup":
            self._dup_shuffle(stack, 1, 0)
            return
        if mnem == "dup_x1":
            self._dup_shuffle(stack, 1, 1)
            return
        if mnem == "dup_x2":
            self._dup_shuffle(stack, 1, 2)
            return
        if mnem == "dup2":
            self._dup_shuffle(stack, 2, 0)
            return
        if mnem == "dup2_x1":
            self._dup_shuffle(stack, 2, 1)
            return
        if mnem == "dup2_x2":
            self._dup_shuffle(stack, 2, 2)
            return
        if mnem == "swap":
            if len(stack) < 2:
                self.fail("operand stack underflow in swap")
            stack[-1], stack[-2] = stack[-2], stack[-1]
            return

        if mnem in _BINOPS:
            count, desc = _BINOPS[mnem]
            vals = self._pop(stack, count)
            self._push(bi, stack, off, desc, uses={v.slot for v in vals})
            return
        if mnem in _NEG_OPS:
            v, = self._pop(stack)
            self._push(bi, stack, off, _NEG_OPS[mnem], uses={v.slot})
            return
        if mnem in _CONV_OPS:
            src, dst = _CONV_OPS[mnem]
            v, = self._pop(stack)
            self._push(bi, stack, off, dst, uses={v.slot}, conv_from=src)
            return
        if mnem == "iinc":
            self._stmt(bi, kind=KIND_ASSIGN, defs={ins.local}, uses={ins.local},
                       offset=off, value_type="I")
            return

        if mnem in _IF1_OPS:
            v, = self._pop(stack)
            self._stmt(bi, kind=KIND_OTHER, defs=set(), uses={v.slot},
                       offset=off, tag="branch")
            return
        if mnem in _IF2_OPS:
            vals = self._pop(stack, 2)
            self._stmt(bi, kind=KIND_OTHER, defs=set(),
                       uses={v.slot for v in vals}, offset=off, tag="branch")
            return
        if mnem in ("goto", "goto_w"):
            self._stmt(bi, kind=KIND_OTHER, defs=set(), uses=set(),
                       offset=off, tag="goto")
            return
        if mnem in ("tableswitch", "lookupswitch"):
            v, = self._pop(stack)
            self._stmt(bi, kind=KIND_OTHER, defs=set(), uses={v.slot},
                       offset=off, tag="switch")
            return

        if mnem in _RETURN_OPS:
            if mnem == "return":
                self._stmt(bi, kind=KIND_RETURN, defs=set(), uses=set(), offset=off)
            else:
                v, = self._pop(stack)
                self._stmt(bi, kind=KIND_RETURN, defs=set(), uses={v.slot},
                           offset=off, value_type=v.desc)
            return

        if mnem == "getstatic":
            owner, name, desc = ins.field_ref
            self._push(bi, stack, off, desc, kind=KIND_FIELD_LOAD,
                       field=(owner, name))
            return
        if mnem == "getfield":
            owner, name, desc = ins.field_ref
            obj, = self._pop(stack)
            self._push(bi, stack, off, desc, kind=KIND_FIELD_LOAD,
                       uses={obj.slot}, field=(owner, name),
                       field_receiver_slot=obj.slot)
            return
        if mnem == "putstatic":
            owner, name, desc = ins.field_ref
            v, = self._pop(stack)
            self._stmt(bi, kind=KIND_FIELD_STORE, defs=set(), uses={v.slot},
                       offset=off, field=(owner, name), field_value_slot=v.slot)
            return
        if mnem == "putfield":
            owner, name, desc = ins.field_ref
            v, = self._pop(stack)
            obj, = self._pop(stack)
            self._stmt(bi, kind=KIND_FIELD_STORE, defs=set(),
                       uses={obj.slot, v.slot}, offset=off, field=(owner, name),
                       field_value_slot=v.slot, field_receiver_slot=obj.slot)
            return

        if mnem.startswith("invoke"):
            target = ins.method
            if target is None:
                self.fail(f"unresolved invoke at offset {off}")
            arg_descs = tuple(java_to_desc(p) for p in target.param_types)
            ret_desc = java_to_desc(target.return_type)
            args = self._pop(stack, len(arg_descs)) if arg_descs else []
            receiver = None
            if ins.invoke_kind in ("virtual", "special", "interface"):
                receiver, = self._pop(stack)
            uses = {a.slot for a in args}
            if receiver is not None:
                uses.add(receiver.slot)
            result = None
            if ret_desc != "V":
                t = self.fresh()
                result = t
            info = InvokeInfo(
                target=target, kind=ins.invoke_kind,
                receiver=receiver.slot if receiver else None,
                args=tuple(a.slot for a in args), result=result,
                arg_descs=arg_descs,
                result_desc=ret_desc if ret_desc != "V" else None,
            )
            self._stmt(bi, kind=KIND_INVOKE, defs={result} if result is not None else set(),
                       uses=uses, offset=off, invoke=info,
                       value_type=ret_desc if ret_desc != "V" else None)
            if result is not None:
                stack.append(_StackVal(result, slot_category(ret_desc), ret_desc))
            return

        if mnem == "new":
            self._push(bi, stack, off, _type_ref_desc(ins.type_ref), tag="new")
            return
        if mnem == "newarray":
            self._pop(stack)  # length does not carry element content
            self._push(bi, stack, off, _NEWARRAY_DESCS[ins.value], tag="newarray")
            return
        if mnem == "anewarray":
            self._pop(stack)
            self._push(bi, stack, off, "[" + _type_ref_desc(ins.type_ref),
                       tag="newarray")
            return
        if mnem == "multianewarray":
            self._pop(stack, ins.value)
            self._push(bi, stack, off, _type_ref_desc(ins.type_ref), tag="newarray")
            return
        if mnem == "arraylength":
            v, = self._pop(stack)
            self._push(bi, stack, off, "I", uses={v.slot})
            return
        if mnem == "athrow":
            v, = self._pop(stack)
            self._stmt(bi, kind=KIND_OTHER, defs=set(), uses={v.slot},
                       offset=off, tag="throw", is_throw=True)
            return
        if mnem == "checkcast":
            v, = self._pop(stack)
            self._push(bi, stack, off, _type_ref_desc(ins.type_ref),
                       uses={v.slot}, conv_from=v.desc, tag="cast")
            return
        if mnem == "instanceof":
            v, = self._pop(stack)
            self._push(bi, stack, off, "Z", uses={v.slot})
            return
        if mnem in ("monitorenter", "monitorexit"):
            v, = self._pop(stack)
            self._stmt(bi, kind=KIND_OTHER, defs=set(), uses={v.slot},
                       offset=off, tag="monitor")
            return

        self.fail(f"unhandled instruction {mnem} at offset {off}")

    # -- post passes -------------------------------------------------

    def _patch_phis(self) -> None:
        for bi, stmts in enumerate(self.block_stmts):
            if self.entry_kind[bi] != "phi":
                continue
            entry = self.entry_syms[bi] or []
            phi_ids = stmts[: len(entry)]
            for records in self.pred_records[bi]:
                for pos, val in enumerate(records):
                    self.statements[phi_ids[pos]].uses.add(val.slot)

    def _first_stmt(self, bi: int, _guard: frozenset[int] = frozenset()) -> int | None:
        if bi in _guard:
            return None
        stmts = self.block_stmts[bi]
        if stmts:
            return stmts[0]
        succs = self.block_succs[bi]
        if len(succs) == 1:
            return self._first_stmt(succs[0], _guard | {bi})
        return None

    def _wire_edges(self, visited: list[bool]) -> None:
        for bi, stmts in enumerate(self.block_stmts):
            if not visited[bi]:
                continue
            for a, b in zip(stmts, stmts[1:]):
                self.edges.add((a, b))
            if stmts:
                tail = stmts[-1]
                last = self.statements[tail]
                if last.kind == KIND_RETURN or last.is_throw:
                    pass
                else:
                    for succ in self.block_succs[bi]:
                        target = self._first_stmt(succ)
                        if target is not None:
                            self.edges.add((tail, target))
        # exception edges: every covered statement flows to its handler
        for h in self.body.exception_table:
            hb = self.block_of_offset.get(h.handler_pc)
            if hb is None:
                continue
            target = self._first_stmt(hb)
            if target is None:
                continue
            for s in self.statements:
                if h.start_pc <= s.offset < h.end_pc and s.id != target:
                    self.edges.add((s.id, target))


def lower_method(body: MethodBody) -> Cfg:
    """Lower one method body to a statement-level CFG.

    Raises UnanalyzableMethod when the bytecode cannot be given a
    consistent stack shape (the caller should warn and exclude the
    method from flow analysis), and ValueError for abstract/native
    bodies with no code.
    """
    return _Lowering(body).run()
