#!/usr/bin/env python3
"""Fixture regeneration harness.

Recompiles every fixture's Java sources with javac and re-runs the
analyzer on the fresh class files, checking that flow counts and
normalized DOT outputs still match the committed goldens.  Golden
comparison is flow-level: compiler version differences may change the
bytecode bytes but must not change the analysis results.

Without a javac on PATH the script only prints a notice and exits
successfully, so the primary test suite never depends on a JDK.

Usage:
    python fixtures/build.py            verify all fixtures
    python fixtures/build.py --update   also refresh the committed
                                        classes/ dirs from javac output
"""

from __future__ import annotations

import argparse
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).parent


def read_manifest() -> list[tuple[str, int, str | None, str | None]]:
    out = []
    for raw in (HERE / "manifest.txt").read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, count, sources, sinks = line.split("\t")
        out.append((
            name, int(count),
            None if sources == "-" else sources,
            None if sinks == "-" else sinks,
        ))
    return out


def normalize_dot(text: str) -> str:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    body = sorted(ln for ln in lines[1:-1] if ln)
    return "\n".join([lines[0]] + body + [lines[-1]]) + "\n"


def analyzer_command() -> list[str]:
    if shutil.which("privflow"):
        return ["privflow"]
    return [sys.executable, "-m", "privflow.cli"]


def compile_fixture(javac: str, fixture: Path, out_dir: Path) -> None:
    sources = sorted(str(p) for p in (fixture / "src").rglob("*.java"))
    out_dir.mkdir(parents=True, exist_ok=True)
    subprocess.run(
        [javac, "-d", str(out_dir), *sources],
        check=True, capture_output=True, text=True,
    )


def analyze_fixture(fixture: Path, classes: Path, out_dir: Path,
                    sources: str | None, sinks: str | None) -> None:
    cmd = analyzer_command() + [
        "analyze", "--input", str(classes), "--out", str(out_dir),
    ]
    if sources:
        cmd += ["--sources", str(fixture / sources)]
    if sinks:
        cmd += ["--sinks", str(fixture / sinks)]
    subprocess.run(cmd, check=True, capture_output=True, text=True)


def compare_goldens(fixture: Path, fresh_out: Path, expected_flows: int) -> list[str]:
    problems = []
    for sub in ("flows", "abstract"):
        golden_dir = fixture / "golden" / sub
        fresh_dir = fresh_out / sub
        golden_files = sorted(p.name for p in golden_dir.glob("*.dot"))
        fresh_files = sorted(p.name for p in fresh_dir.glob("*.dot"))
        if golden_files != fresh_files:
            problems.append(
                f"{sub}: file sets differ (golden {golden_files}, got {fresh_files})"
            )
            continue
        for name in golden_files:
            want = normalize_dot((golden_dir / name).read_text(encoding="utf-8"))
            got = normalize_dot((fresh_dir / name).read_text(encoding="utf-8"))
            if want != got:
                problems.append(f"{sub}/{name}: normalized DOT differs")
    n_flows = len(list((fresh_out / "flows").glob("*.dot")))
    if n_flows != expected_flows:
        problems.append(f"expected {expected_flows} flows, analyzer found {n_flows}")
    return problems


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--update", action="store_true",
                        help="replace committed classes/ with javac output")
    parser.add_argument("--only", metavar="NAME", help="single fixture to build")
    args = parser.parse_args(argv)

    javac = shutil.which("javac")
    if javac is None:
        print("javac not found: skipping fixture regeneration "
              "(committed class files remain in use)")
        return 0

    failures = 0
    for name, expected, sources, sinks in read_manifest():
        if args.only and name != args.only:
            continue
        fixture = HERE / name
        with tempfile.TemporaryDirectory(prefix=f"privflow-{name}-") as tmp:
            classes = Path(tmp) / "classes"
            out_dir = Path(tmp) / "out"
            try:
                compile_fixture(javac, fixture, classes)
            except subprocess.CalledProcessError as exc:
                print(f"{name}: javac failed:\n{exc.stderr}")
                failures += 1
                continue
            try:
                analyze_fixture(fixture, classes, out_dir, sources, sinks)
            except subprocess.CalledProcessError as exc:
                print(f"{name}: analyzer failed:\n{exc.stderr}")
                failures += 1
                continue
            problems = compare_goldens(fixture, out_dir, expected)
            if problems:
                failures += 1
                print(f"{name}: MISMATCH")
                for p in problems:
                    print(f"  - {p}")
                continue
            print(f"{name}: OK ({expected} flows, goldens reproduced)")
            if args.update:
                committed = fixture / "classes"
                shutil.rmtree(committed, ignore_errors=True)
                shutil.copytree(classes, committed)
                print(f"{name}: committed classes refreshed from javac output")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
