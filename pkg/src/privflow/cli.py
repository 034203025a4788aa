"""Command-line interface.

    privflow analyze --input app.jar --out out/
    privflow catalog export
    privflow catalog check my-catalog.txt

Exit codes: 0 success, 1 fatal input/usage error, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .analyzer import AnalysisOptions, analyze_classes
from .catalog import (
    Catalog,
    CatalogError,
    builtin_catalog,
    load_catalog,
    merge_catalogs,
    parse_catalog_text,
)
from .classfile import InputError, load_inputs
from .report import write_outputs

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we promise 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="privflow",
        description="Static privacy data-flow analysis for JVM bytecode.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    analyze = sub.add_parser("analyze",
                             help="analyze class files and emit flow graphs")
    analyze.add_argument("--input", action="append", required=True,
                         metavar="PATH",
                         help="JAR file, class file, or directory (repeatable)")
    analyze.add_argument("--out", default="privflow-out", metavar="DIR",
                         help="output directory (default: privflow-out)")
    analyze.add_argument("--sources", metavar="FILE",
                         help="extra catalog file of source methods")
    analyze.add_argument("--sinks", metavar="FILE",
                         help="extra catalog file of sink methods")
    analyze.add_argument("--no-builtin-catalog", action="store_true",
                         help="do not merge the built-in starter catalog")
    analyze.add_argument("--max-depth", type=int, default=64, metavar="N",
                         help="chaining depth limit per flow (default: 64)")
    analyze.add_argument("--rich-types", choices=["strict", "extended"],
                         default="strict",
                         help="value-type filter policy (default: strict)")
    analyze.add_argument("--jobs", type=int, default=1, metavar="N",
                         help="worker threads for method lowering")
    analyze.add_argument("--debug-ir", action="store_true",
                         help="dump the lowered IR to <out>/debug-ir.txt")
    analyze.add_argument("-v", "--verbose", action="store_true")

    catalog = sub.add_parser("catalog", help="catalog utilities")
    csub = catalog.add_subparsers(dest="catalog_command", required=True,
                                  parser_class=_Parser)
    csub.add_parser("export", help="print the built-in starter catalog")
    check = csub.add_parser("check", help="validate catalog files")
    check.add_argument("paths", nargs="+", metavar="FILE")

    return parser


def _assemble_catalog(args) -> Catalog:
    parts: list[Catalog] = []
    for path in (args.sources, args.sinks):
        if path:
            parts.append(load_catalog(path, include_builtin=False))
    if not args.no_builtin_catalog:
        parts.append(builtin_catalog())
    if not parts:
        raise CatalogError(
            "no catalog: --no-builtin-catalog requires --sources or --sinks"
        )
    return merge_catalogs(*parts)


def _cmd_analyze(args) -> int:
    catalog = _assemble_catalog(args)
    classes = load_inputs(args.input)
    options = AnalysisOptions(
        rich_policy=args.rich_types,
        max_depth=args.max_depth,
        jobs=max(1, args.jobs),
    )
    result = analyze_classes(classes, catalog, options)
    write_outputs(result, args.out, debug_ir=args.debug_ir)

    n = len(result.flows)
    print(f"Detected {n} privacy flow{'s' if n != 1 else ''}.")
    for flow in result.flows:
        tail = flow.nodes[-1].short() if flow.nodes else "?"
        marker = " (truncated)" if flow.truncated else ""
        print(f"  {flow.id}: {flow.root_site.target.short()} "
              f"[{flow.category}] ... {tail}{marker}")
    print(f"Outputs written to {args.out}")
    return 0


def _cmd_catalog(args) -> int:
    if args.catalog_command == "export":
        sys.stdout.write(builtin_catalog().dump())
        return 0
    status = 0
    for path in args.paths:
        try:
            with open(path, encoding="utf-8") as fh:
                cat = parse_catalog_text(fh.read(), origin=path)
        except OSError as exc:
            print(f"error: cannot read {path}: {exc}", file=sys.stderr)
            status = 1
            continue
        except CatalogError as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"{path}: OK ({len(cat.sources)} sources, {len(cat.sinks)} sinks)")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "catalog":
            return _cmd_catalog(args)
    except (InputError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        log.exception("internal error")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
