#!/usr/bin/env python3
"""Regenerate the committed fixture class files with the bundled
assembler.  The bytecode mirrors what javac 8 produces for the fixture
sources in fixtures/*/src; fixtures/build.py re-checks that equivalence
whenever a real javac is available.

Usage: python tests/gen_fixture_classes.py [fixtures-dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from support import jasm
from support.jasm import ClassDef, default_ctor


def grades_classes() -> list[ClassDef]:
    """Replica of the student-grade example: read -> Student init ->
    Status init -> calculate -> encode -> findResult -> print."""
    student = ClassDef("Student")
    student.field("data", "I")
    student.method("<init>", "(Ljava/io/DataInputStream;)V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("iconst", 8),
        ("newarray", "byte"),
        ("astore", 2),
        ("aload", 1),
        ("aload", 2),
        ("invokevirtual", "java.io.DataInputStream", "read", "([B)I"),
        ("pop",),
        ("aload", 0),
        ("aload", 2),
        ("iconst", 0),
        ("baload",),
        ("putfield", "Student", "data", "I"),
        ("return",),
    ])

    status = ClassDef("Status")
    status.field("student", "LStudent;")
    status.field("result", "I")
    status.method("<init>", "(Ljava/io/DataInputStream;)V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("aload", 0),
        ("new", "Student"),
        ("dup",),
        ("aload", 1),
        ("invokespecial", "Student", "<init>", "(Ljava/io/DataInputStream;)V"),
        ("putfield", "Status", "student", "LStudent;"),
        ("return",),
    ])
    status.method("calculate", "()I", [
        ("aload", 0),
        ("aload", 0),
        ("aload", 0),
        ("getfield", "Status", "student", "LStudent;"),
        ("getfield", "Student", "data", "I"),
        ("invokevirtual", "Status", "encode", "(I)I"),
        ("putfield", "Status", "result", "I"),
        ("aload", 0),
        ("getfield", "Status", "result", "I"),
        ("ireturn",),
    ])
    status.method("encode", "(I)I", [
        ("iload", 1),
        ("iconst", 31),
        ("imul",),
        ("iconst", 7),
        ("iadd",),
        ("ireturn",),
    ])
    status.method("findResult", "()I", [
        ("aload", 0),
        ("getfield", "Status", "result", "I"),
        ("ireturn",),
    ])

    main = ClassDef("Main")
    main.method("<init>", "()V", default_ctor())
    main.method("main", "([Ljava/lang/String;)V", [
        ("new", "java.io.DataInputStream"),
        ("dup",),
        ("getstatic", "java.lang.System", "in", "Ljava/io/InputStream;"),
        ("invokespecial", "java.io.DataInputStream", "<init>",
         "(Ljava/io/InputStream;)V"),
        ("astore", 1),
        ("new", "Status"),
        ("dup",),
        ("aload", 1),
        ("invokespecial", "Status", "<init>", "(Ljava/io/DataInputStream;)V"),
        ("astore", 2),
        ("aload", 2),
        ("invokevirtual", "Status", "calculate", "()I"),
        ("pop",),
        ("getstatic", "java.lang.System", "out", "Ljava/io/PrintStream;"),
        ("aload", 2),
        ("invokevirtual", "Status", "findResult", "()I"),
        ("invokevirtual", "java.io.PrintStream", "print", "(I)V"),
        ("return",),
    ], static=True)

    return [student, status, main]


def sendmsg_classes() -> list[ClassDef]:
    """Send-message pipeline: ui source -> job process -> field-linked
    mid source -> crypto process -> three grouped sender processes ->
    catalogued sink, plus the second flow that feeds the field link."""
    textbox = ClassDef("chatapp.ui.TextBox")
    textbox.field("value", "Ljava/lang/String;")
    textbox.method("<init>", "()V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("aload", 0),
        ("ldc_str", ""),
        ("putfield", "chatapp.ui.TextBox", "value", "Ljava/lang/String;"),
        ("return",),
    ])
    textbox.method("getText", "()Ljava/lang/String;", [
        ("aload", 0),
        ("getfield", "chatapp.ui.TextBox", "value", "Ljava/lang/String;"),
        ("areturn",),
    ])

    store = ClassDef("chatapp.store.SessionStore")
    store.field("profileKey", "Ljava/lang/String;")
    store.field("endpoint", "Ljava/net/URL;")
    store.method("<init>", "(Ljava/net/URL;)V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("aload", 0),
        ("aload", 1),
        ("putfield", "chatapp.store.SessionStore", "endpoint", "Ljava/net/URL;"),
        ("return",),
    ])
    store.method("refresh", "()Ljava/lang/String;", [
        ("aload", 0),
        ("aload", 0),
        ("getfield", "chatapp.store.SessionStore", "endpoint", "Ljava/net/URL;"),
        ("invokevirtual", "java.net.URL", "getQuery", "()Ljava/lang/String;"),
        ("putfield", "chatapp.store.SessionStore", "profileKey",
         "Ljava/lang/String;"),
        ("aload", 0),
        ("getfield", "chatapp.store.SessionStore", "profileKey",
         "Ljava/lang/String;"),
        ("areturn",),
    ])

    job = ClassDef("chatapp.jobs.PushJob")
    job.field("box", "Lchatapp/ui/TextBox;")
    job.field("processor", "Lchatapp/msg/Processor;")
    job.method("<init>", "(Lchatapp/ui/TextBox;Lchatapp/msg/Processor;)V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("aload", 0),
        ("aload", 1),
        ("putfield", "chatapp.jobs.PushJob", "box", "Lchatapp/ui/TextBox;"),
        ("aload", 0),
        ("aload", 2),
        ("putfield", "chatapp.jobs.PushJob", "processor", "Lchatapp/msg/Processor;"),
        ("return",),
    ])
    job.method("deliver", "()V", [
        ("aload", 0),
        ("getfield", "chatapp.jobs.PushJob", "box", "Lchatapp/ui/TextBox;"),
        ("invokevirtual", "chatapp.ui.TextBox", "getText", "()Ljava/lang/String;"),
        ("astore", 1),
        ("aload", 0),
        ("getfield", "chatapp.jobs.PushJob", "processor", "Lchatapp/msg/Processor;"),
        ("aload", 1),
        ("lconst", 7),
        ("invokevirtual", "chatapp.msg.Processor", "handleMessage",
         "(Ljava/lang/String;J)V"),
        ("return",),
    ], max_locals=3)

    processor = ClassDef("chatapp.msg.Processor")
    processor.field("store", "Lchatapp/store/SessionStore;")
    processor.field("cipher", "Lchatapp/crypto/Cipher;")
    processor.method("<init>", "(Lchatapp/store/SessionStore;Lchatapp/crypto/Cipher;)V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("aload", 0),
        ("aload", 1),
        ("putfield", "chatapp.msg.Processor", "store", "Lchatapp/store/SessionStore;"),
        ("aload", 0),
        ("aload", 2),
        ("putfield", "chatapp.msg.Processor", "cipher", "Lchatapp/crypto/Cipher;"),
        ("return",),
    ])
    # long timestamp occupies locals 2-3; key lands in 4
    processor.method("handleMessage", "(Ljava/lang/String;J)V", [
        ("aload", 0),
        ("getfield", "chatapp.msg.Processor", "store", "Lchatapp/store/SessionStore;"),
        ("getfield", "chatapp.store.SessionStore", "profileKey",
         "Ljava/lang/String;"),
        ("astore", 4),
        ("aload", 0),
        ("getfield", "chatapp.msg.Processor", "cipher", "Lchatapp/crypto/Cipher;"),
        ("aload", 1),
        ("aload", 4),
        ("invokevirtual", "chatapp.crypto.Cipher", "encrypt",
         "(Ljava/lang/String;Ljava/lang/String;)V"),
        ("return",),
    ], max_locals=5)

    cipher = ClassDef("chatapp.crypto.Cipher")
    cipher.field("sender", "Lchatapp/outbox/Sender;")
    cipher.method("<init>", "(Lchatapp/outbox/Sender;)V", [
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        ("aload", 0),
        ("aload", 1),
        ("putfield", "chatapp.crypto.Cipher", "sender", "Lchatapp/outbox/Sender;"),
        ("return",),
    ])
    cipher.method("encrypt", "(Ljava/lang/String;Ljava/lang/String;)V", [
        ("aload", 0),
        ("getfield", "chatapp.crypto.Cipher", "sender", "Lchatapp/outbox/Sender;"),
        ("aload", 1),
        ("invokevirtual", "chatapp.outbox.Sender", "prepare",
         "(Ljava/lang/String;)V"),
        ("return",),
    ])

    sender = ClassDef("chatapp.outbox.Sender")
    sender.method("<init>", "()V", default_ctor())
    sender.method("prepare", "(Ljava/lang/String;)V", [
        ("aload", 0),
        ("aload", 1),
        ("invokevirtual", "chatapp.outbox.Sender", "build", "(Ljava/lang/String;)V"),
        ("return",),
    ])
    sender.method("build", "(Ljava/lang/String;)V", [
        ("aload", 0),
        ("aload", 1),
        ("invokevirtual", "chatapp.outbox.Sender", "finish", "(Ljava/lang/String;)V"),
        ("return",),
    ])
    sender.method("finish", "(Ljava/lang/String;)V", [
        ("aload", 0),
        ("aload", 1),
        ("invokevirtual", "chatapp.outbox.Sender", "sendMessage",
         "(Ljava/lang/String;)V"),
        ("return",),
    ])
    sender.method("sendMessage", "(Ljava/lang/String;)V", [
        ("return",),
    ])

    main = ClassDef("chatapp.Main")
    main.method("<init>", "()V", default_ctor())
    main.method("main", "([Ljava/lang/String;)V", [
        ("new", "chatapp.store.SessionStore"),
        ("dup",),
        ("aconst_null",),
        ("invokespecial", "chatapp.store.SessionStore", "<init>",
         "(Ljava/net/URL;)V"),
        ("astore", 1),
        ("new", "chatapp.outbox.Sender"),
        ("dup",),
        ("invokespecial", "chatapp.outbox.Sender", "<init>", "()V"),
        ("astore", 2),
        ("new", "chatapp.crypto.Cipher"),
        ("dup",),
        ("aload", 2),
        ("invokespecial", "chatapp.crypto.Cipher", "<init>",
         "(Lchatapp/outbox/Sender;)V"),
        ("astore", 3),
        ("new", "chatapp.msg.Processor"),
        ("dup",),
        ("aload", 1),
        ("aload", 3),
        ("invokespecial", "chatapp.msg.Processor", "<init>",
         "(Lchatapp/store/SessionStore;Lchatapp/crypto/Cipher;)V"),
        ("astore", 4),
        ("new", "chatapp.jobs.PushJob"),
        ("dup",),
        ("new", "chatapp.ui.TextBox"),
        ("dup",),
        ("invokespecial", "chatapp.ui.TextBox", "<init>", "()V"),
        ("aload", 4),
        ("invokespecial", "chatapp.jobs.PushJob", "<init>",
         "(Lchatapp/ui/TextBox;Lchatapp/msg/Processor;)V"),
        ("astore", 5),
        ("aload", 1),
        ("invokevirtual", "chatapp.store.SessionStore", "refresh",
         "()Ljava/lang/String;"),
        ("pop",),
        ("aload", 5),
        ("invokevirtual", "chatapp.jobs.PushJob", "deliver", "()V"),
        ("return",),
    ], static=True, max_locals=6)

    return [textbox, store, job, processor, cipher, sender, main]


def recur_classes() -> list[ClassDef]:
    """Mutually recursive pair fed by a source; exercises the cycle guard."""
    recur = ClassDef("Recur")
    recur.method("<init>", "()V", default_ctor())
    recur.method("bounce", "(I)I", [
        ("aload", 0),
        ("iload", 1),
        ("invokevirtual", "Recur", "echo", "(I)I"),
        ("ireturn",),
    ])
    recur.method("echo", "(I)I", [
        ("aload", 0),
        ("iload", 1),
        ("invokevirtual", "Recur", "bounce", "(I)I"),
        ("ireturn",),
    ])
    recur.method("go", "(Ljava/io/DataInputStream;)I", [
        ("iconst", 4),
        ("newarray", "byte"),
        ("astore", 2),
        ("aload", 1),
        ("aload", 2),
        ("invokevirtual", "java.io.DataInputStream", "read", "([B)I"),
        ("pop",),
        ("aload", 0),
        ("aload", 2),
        ("iconst", 0),
        ("baload",),
        ("invokevirtual", "Recur", "bounce", "(I)I"),
        ("ireturn",),
    ])
    return [recur]


FIXTURES = {
    "grades": grades_classes,
    "sendmsg": sendmsg_classes,
    "recur": recur_classes,
}


def main(argv=None) -> int:
    root = Path(argv[0]) if argv else Path(__file__).parent.parent / "fixtures"
    for name, builder in FIXTURES.items():
        target = root / name / "classes"
        jasm.write_classes(target, builder())
        print(f"wrote {name} -> {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
