import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

ROOT = Path(__file__).parent.parent
FIXTURES = ROOT / "fixtures"

sys.path.insert(0, str(Path(__file__).parent))

from support import jasm  # noqa: E402

from privflow import (  # noqa: E402
    AnalysisOptions,
    analyze_classes,
    builtin_catalog,
    load_catalog,
    load_inputs,
)
from privflow.catalog import merge_catalogs, parse_catalog_text  # noqa: E402


@dataclass
class FixtureCase:
    name: str
    expected_flows: int
    sources: Path | None
    sinks: Path | None

    @property
    def directory(self) -> Path:
        return FIXTURES / self.name

    @property
    def classes(self) -> Path:
        return self.directory / "classes"

    @property
    def golden(self) -> Path:
        return self.directory / "golden"

    def catalog(self):
        parts = []
        for extra in (self.sources, self.sinks):
            if extra is not None:
                parts.append(load_catalog(extra, include_builtin=False))
        parts.append(builtin_catalog())
        return merge_catalogs(*parts)


def read_manifest() -> list[FixtureCase]:
    cases = []
    for raw in (FIXTURES / "manifest.txt").read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, count, sources, sinks = line.split("\t")
        base = FIXTURES / name
        cases.append(FixtureCase(
            name=name,
            expected_flows=int(count),
            sources=None if sources == "-" else base / sources,
            sinks=None if sinks == "-" else base / sinks,
        ))
    return cases


@pytest.fixture(scope="session")
def manifest() -> list[FixtureCase]:
    return read_manifest()


def analyze_fixture(case: FixtureCase, **options):
    classes = load_inputs([case.classes])
    return analyze_classes(classes, case.catalog(),
                           AnalysisOptions(**options) if options else None)


@pytest.fixture(scope="session")
def grades_result():
    (case,) = [c for c in read_manifest() if c.name == "grades"]
    return analyze_fixture(case)


@pytest.fixture(scope="session")
def sendmsg_result():
    (case,) = [c for c in read_manifest() if c.name == "sendmsg"]
    return analyze_fixture(case)


def build_classes(tmp_path: Path, classdefs, subdir: str = "classes") -> Path:
    target = tmp_path / subdir
    jasm.write_classes(target, classdefs)
    return target


def analyze_defs(tmp_path: Path, classdefs, extra_catalog: str = "",
                 **options):
    """Assemble class definitions and run the full analysis on them."""
    target = build_classes(tmp_path, classdefs)
    classes = load_inputs([target])
    catalog = builtin_catalog()
    if extra_catalog:
        catalog = merge_catalogs(
            parse_catalog_text(extra_catalog, origin="<test>"), catalog
        )
    return analyze_classes(classes, catalog,
                           AnalysisOptions(**options) if options else None)
