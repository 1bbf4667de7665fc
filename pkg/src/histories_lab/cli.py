"""Command-line front end.

Commands:
    histories-lab run <file.hsc> [--strict] [--tol E] [--ctol E] [--format text|tsv]
    histories-lab gallery <name> [--c a,b] [flags as above]
    histories-lab export <name> [--c a,b]        (scenario file to stdout)

Exit codes: 0 success; 1 a violation (inconsistent family, meaningless
combination, single-framework violation) was reported under --strict;
2 parse error; 3 validation error while constructing values; 4 query
error (zero-probability conditioning, single-framework violation,
inconsistent-family probability request, and kin).  Every failure prints
one ``error[CODE]: message`` line.
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import HistoriesError, Incompatible, ParseError, UnknownScenario
from .numerics import DEFAULT_TOL
from .gallery import SCENARIO_NAMES, build_scenario
from .histories import consistency_check, history_probabilities
from .inference import Event, classify_family_pair, conditional, joint_distribution, marginal
from .qlogic import common_refinement, frameworks_compatible
from .scenario import Built, build_document, parse_complex, parse_scenario, render_document

__all__ = ["main", "run_document"]


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _alpha_str(alpha) -> str:
    if isinstance(alpha, tuple):
        return "(" + ",".join(alpha) + ")"
    return repr(alpha)


@dataclass
class QueryOutcome:
    header: str
    lines: list = field(default_factory=list)  # ("line", text) or ("row", label, value)
    error: HistoriesError | None = None
    violation: bool = False

    def line(self, text: str) -> None:
        self.lines.append(("line", text))

    def row(self, label: str, value: float) -> None:
        self.lines.append(("row", label, value))


def _run_query(built: Built, q, ctol: float | None, tol: float) -> QueryOutcome:
    out = QueryOutcome(q.text)
    if q.kind == "validate":
        out.line(f"ok space dim={built.dim}")
        for kind, name in built.order:
            out.line(f"ok {kind} {name}")
        return out
    if q.kind == "consistency":
        fam = built.families[q.args[0]]
        rep = consistency_check(fam, ctol)
        pair = "none" if rep.worst_pair is None else \
            f"{_alpha_str(rep.worst_pair[0])}|{_alpha_str(rep.worst_pair[1])}"
        out.line(
            f"family {q.args[0]}: consistent={'true' if rep.consistent else 'false'} "
            f"max_overlap={_fmt(rep.max_overlap)} worst_pair={pair} tol={_fmt(rep.tol_used)}"
        )
        out.violation = not rep.consistent
        return out
    if q.kind == "probs":
        table = history_probabilities(built.families[q.args[0]], ctol)
        out.line(f"# {table.condition}")
        for alpha, p in table.entries.items():
            out.row(_alpha_str(alpha), p)
        return out
    if q.kind == "joint":
        name, ta, tb = q.args
        table = joint_distribution(built.families[name], ta, tb, ctol)
        out.line(f"# {table.condition}")
        for (la, lb), p in table.entries.items():
            out.row(f"({la},{lb})", p)
        return out
    if q.kind == "marginal":
        name, ta = q.args
        table = marginal(built.families[name], ta, ctol)
        out.line(f"# {table.condition}")
        for label, p in table.entries.items():
            out.row(label, p)
        return out
    if q.kind == "condition":
        name, (tt, lt), (tg, lg) = q.args
        value = conditional(
            built.families[name], Event(tt, {lt}), Event(tg, {lg}), ctol
        )
        out.line(f"Pr({tt}={lt} | {tg}={lg}) = {_fmt(value)}")
        return out
    if q.kind == "compatible":
        ok = frameworks_compatible(built.pdis[q.args[0]], built.pdis[q.args[1]], tol)
        out.line(f"compatible: {'true' if ok else 'false'}")
        return out
    if q.kind == "refine":
        try:
            refined = common_refinement(built.pdis[q.args[0]], built.pdis[q.args[1]], tol)
        except Incompatible:
            out.line("incompatible")
            return out
        out.line("pdi: " + ", ".join(refined.labels))
        return out
    if q.kind == "classify":
        result = classify_family_pair(
            built.families[q.args[0]], built.families[q.args[1]], tol, ctol
        )
        if result.kind == "commensurate":
            sizes = ",".join(str(len(s)) for s in result.refinement.slots)
            out.line(f"commensurate (refined slot sizes: {sizes})")
        else:
            out.line(result.kind)
        return out
    raise ParseError(f"unknown query kind {q.kind!r}", q.line)


def execute_queries(built: Built, queries, ctol: float | None, tol: float) -> list[QueryOutcome]:
    outcomes = []
    for q in queries:
        try:
            outcomes.append(_run_query(built, q, ctol, tol))
        except HistoriesError as exc:
            bad = QueryOutcome(q.text, error=exc)
            outcomes.append(bad)
    return outcomes


def render_outcomes(outcomes, fmt: str = "text") -> str:
    chunks: list[str] = []
    for out in outcomes:
        chunks.append(f"== query {out.header}")
        if out.error is not None:
            chunks.append(f"error[{out.error.code}]: {out.error}")
            continue
        rows = [c for c in out.lines if c[0] == "row"]
        width = max((len(c[1]) for c in rows), default=0)
        for cell in out.lines:
            if cell[0] == "line":
                chunks.append(cell[1])
            elif fmt == "tsv":
                chunks.append(f"{cell[1]}\t{_fmt(cell[2])}")
            else:
                chunks.append(f"{cell[1]:<{width}}  {_fmt(cell[2])}")
    return "\n".join(chunks) + "\n"


def run_document(doc, *, tol: float = DEFAULT_TOL, ctol: float | None = None,
                 strict: bool = False, fmt: str = "text") -> tuple[str, int]:
    """Build a parsed document, execute its queries in order, and render.

    Returns the report text and the exit code (build errors raise; the
    caller maps them to exit 3).
    """
    built = build_document(doc, tol)
    outcomes = execute_queries(built, doc.queries, ctol, tol)
    text = render_outcomes(outcomes, fmt)
    if any(o.error is not None for o in outcomes):
        return text, 4
    if strict and any(o.violation for o in outcomes):
        return text, 1
    return text, 0


def _fail(exc: HistoriesError, exit_code: int) -> int:
    print(f"error[{exc.code}]: {exc}", file=sys.stderr)
    return exit_code


def _parse_c(spec: str | None) -> tuple:
    if spec is None:
        return (0.6, 0.8)
    parts = [p for p in spec.split(",") if p.strip()]
    if len(parts) != 2:
        raise ParseError(f"--c expects two comma-separated amplitudes, got {spec!r}")
    return tuple(parse_complex(p) for p in parts)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when a violation (e.g. inconsistency) is reported")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="algebraic tolerance")
    p.add_argument("--ctol", type=float, default=None,
                   help="consistency tolerance (absolute; default 1e-10 * dim)")
    p.add_argument("--format", choices=("text", "tsv"), default="text", dest="fmt")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="histories-lab",
        description="Run consistency and probability queries over scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a .hsc scenario file")
    run_p.add_argument("file")
    _add_common_flags(run_p)

    gal_p = sub.add_parser("gallery", help="run a built-in scenario")
    gal_p.add_argument("name", metavar="name", help=f"one of: {', '.join(SCENARIO_NAMES)}")
    gal_p.add_argument("--c", default=None, help="amplitudes for measurement-model, e.g. 0.6,0.8")
    _add_common_flags(gal_p)

    exp_p = sub.add_parser("export", help="print a built-in scenario as a .hsc file")
    exp_p.add_argument("name", metavar="name")
    exp_p.add_argument("--c", default=None)

    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error[IO]: cannot read {args.file}: {exc}", file=sys.stderr)
            return 2
        try:
            doc = parse_scenario(text)
        except ParseError as exc:
            return _fail(exc, 2)
        try:
            report, code = run_document(
                doc, tol=args.tol, ctol=args.ctol, strict=args.strict, fmt=args.fmt
            )
        except HistoriesError as exc:
            return _fail(exc, 3)
        sys.stdout.write(report)
        return code

    if args.command in ("gallery", "export"):
        try:
            scenario = build_scenario(args.name, _parse_c(args.c))
        except (UnknownScenario, ParseError) as exc:
            return _fail(exc, 2)
        except HistoriesError as exc:
            return _fail(exc, 3)
        if args.command == "export":
            sys.stdout.write(render_document(scenario.document))
            return 0
        try:
            report, code = run_document(
                scenario.document, tol=args.tol, ctol=args.ctol,
                strict=args.strict, fmt=args.fmt,
            )
        except HistoriesError as exc:
            return _fail(exc, 3)
        sys.stdout.write(report)
        return code

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
