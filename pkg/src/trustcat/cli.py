"""Command-line front end.

Exit codes: 0 success, 1 lint errors (or an incomplete assessment),
2 verdict NotTrustworthy, 3 input, IO or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime
from pathlib import Path

from . import __version__
from .assessment import dump_document, errors, lint, parse_document
from .catalog import ProtectionLevel, default_catalog, load_catalog, lookup, validate_catalog
from .errors import InputError, TrustcatError
from .identifiers import ASSESSED_DIMENSIONS, format_id
from .report import evaluate_bindings, render_report, scaffold
from .verdict import Outcome, PreconditionViolated, cross_dimensional_verdict

EXIT_OK = 0
EXIT_LINT = 1
EXIT_NOT_TRUSTWORTHY = 2
EXIT_INPUT = 3


class UsageError(InputError):
    pass


def _err(msg: str) -> None:
    print(f"trustcat: {msg}", file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def parse_levels(text: str) -> dict[str, ProtectionLevel]:
    levels: dict[str, ProtectionLevel] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        dim, sep, lvl = part.partition("=")
        dim = dim.strip().upper()
        if not sep or dim not in ASSESSED_DIMENSIONS:
            raise UsageError(f"bad level assignment {part!r} (expected DIM=low|medium|high)")
        if dim in levels:
            raise UsageError(f"dimension {dim} given twice")
        try:
            levels[dim] = ProtectionLevel(lvl.strip().lower())
        except ValueError:
            raise UsageError(f"bad protection level {lvl!r} for {dim}") from None
    return levels


def parse_data(pairs: list[str]) -> dict[str, str]:
    out = {}
    for p in pairs:
        name, sep, path = p.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"bad --data value {p!r} (expected NAME=FILE)")
        out[name] = path
    return out


def cmd_catalog_validate(args: argparse.Namespace) -> int:
    c = load_catalog(Path(args.file)) if args.file else default_catalog()
    defects = validate_catalog(c)
    for d in defects:
        print(d)
    n = sum(1 for _ in c.items())
    _err(f"catalog {c.version}: {n} items, {len(defects)} defect(s)")
    return EXIT_LINT if defects else EXIT_OK


def cmd_catalog_show(args: argparse.Namespace) -> int:
    c = default_catalog()
    it = lookup(c, args.id)
    lines = [f"[{format_id(it.id)}] {it.title}", f"kind: {it.kind.value}"]
    if it.requirements:
        lines.append("requirements: " + ", ".join(str(r) for r in it.requirements))
    if it.lifecycle is not None:
        lines.append(f"lifecycle: {it.lifecycle.value}")
    if it.cross_refs:
        lines.append("references: " + ", ".join(format_id(x) for x in it.cross_refs))
    lines += ["", it.body]
    print("\n".join(lines))
    return EXIT_OK


def cmd_init(args: argparse.Namespace) -> int:
    doc = scaffold(default_catalog(), parse_levels(args.levels),
                   {"name": args.name or "", "version": "", "assessor": "", "date": ""})
    _emit(dump_document(doc), args.output)
    return EXIT_OK


def _load(path: str):
    return parse_document(Path(path))


def cmd_lint(args: argparse.Namespace) -> int:
    findings = lint(default_catalog(), _load(args.doc))
    if args.format == "json":
        print(json.dumps([f.to_json() for f in findings], indent=2))
    else:
        for f in findings:
            print(f)
    n_err = len(errors(findings))
    _err(f"{n_err} error(s), {len(findings) - n_err} warning(s)")
    return EXIT_LINT if n_err else EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    doc, findings = evaluate_bindings(_load(args.doc), parse_data(args.data))
    for f in findings:
        _err(str(f))
    _emit(dump_document(doc), args.output)
    return EXIT_LINT if errors(findings) else EXIT_OK


def cmd_verdict(args: argparse.Namespace) -> int:
    try:
        v = cross_dimensional_verdict(default_catalog(), _load(args.doc))
    except PreconditionViolated as exc:
        for f in exc.findings:
            _err(str(f))
        _err(str(exc))
        return EXIT_LINT
    if args.format == "json":
        print(json.dumps(v.to_json(), indent=2))
    else:
        print(v.outcome.value)
        for d, r in v.blocking:
            print(f"  blocking {d}: {r}")
        for d, t in v.accepted_residuals:
            print(f"  accepted {d}: {t}")
        for n in v.notes:
            print(f"  note: {n}")
    if v.outcome is Outcome.NOT_TRUSTWORTHY:
        return EXIT_NOT_TRUSTWORTHY
    if v.outcome is Outcome.NOT_ASSESSABLE:
        return EXIT_LINT
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.date is not None:
        try:
            datetime.fromisoformat(args.date)
        except ValueError:
            raise UsageError(f"--date {args.date!r} is not an ISO 8601 date") from None
    c = default_catalog()
    doc = _load(args.doc)
    findings = lint(c, doc)
    verdict = None if errors(findings) else cross_dimensional_verdict(c, doc)
    data = render_report(c, doc, findings, verdict, args.format, args.date)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trustcat", description="Trustworthy-AI assessment catalog engine.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    top = p.add_subparsers(dest="group", required=True)

    cat = top.add_parser("catalog", help="inspect the assessment catalog").add_subparsers(dest="cmd", required=True)
    v = cat.add_parser("validate", help="load and validate a catalog file")
    v.add_argument("file", nargs="?")
    v.set_defaults(func=cmd_catalog_validate)
    s = cat.add_parser("show", help="print one catalog item")
    s.add_argument("id")
    s.set_defaults(func=cmd_catalog_show)

    asm = top.add_parser("assess", help="work with assessment documents").add_subparsers(dest="cmd", required=True)
    i = asm.add_parser("init", help="scaffold a document for the given protection levels")
    i.add_argument("--levels", required=True, help="e.g. FN=high,AC=medium,TR=medium,RE=high,S=low,DP=high")
    i.add_argument("--name", help="name of the AI application")
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_init)
    li = asm.add_parser("lint", help="check a document for completeness and conformance")
    li.add_argument("doc")
    li.add_argument("--format", choices=("text", "json"), default="text")
    li.set_defaults(func=cmd_lint)
    m = asm.add_parser("metrics", help="evaluate metric bindings against CSV datasets")
    m.add_argument("doc")
    m.add_argument("--data", action="append", default=[], metavar="NAME=FILE")
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_metrics)
    vd = asm.add_parser("verdict", help="compute the cross-dimensional verdict")
    vd.add_argument("doc")
    vd.add_argument("--format", choices=("text", "json"), default="text")
    vd.set_defaults(func=cmd_verdict)
    r = asm.add_parser("report", help="render the assessment report")
    r.add_argument("doc")
    r.add_argument("--format", choices=("md", "json"), default="md")
    r.add_argument("-o", "--output")
    r.add_argument("--date", help="ISO 8601 date to stamp on the report")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would collide with NotTrustworthy
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (TrustcatError, OSError, UnicodeDecodeError) as exc:
        _err(str(exc) if not isinstance(exc, OSError) else f"{exc.filename or ''}: {exc.strerror or exc}")
        return EXIT_INPUT
