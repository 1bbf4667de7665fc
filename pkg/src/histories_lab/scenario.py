"""Declarative scenario documents: parse, build, and render.

The file format is line oriented; ``#`` starts a comment and blank lines
are ignored.  A statement whose brackets are still open continues on the
next physical line.  Grammar:

    space dim = <int>
    ket <name> = (<c>, <c>, ...)
    unitary <name> = identity
    unitary <name> = rows [ (<c>, ...); (<c>, ...); ... ]
    projector <name> = ket <ketname>
    projector <name> = sum <p1> <p2> ...
    projector <name> = diag(<0/1 list>)
    pdi <name> = <p1>, <p2>, ...
    family <name> {
        initial = <ket>
        times = t0 t1 ... tf
        step <ti>-><tj> = <unitary>
        slot <ti> = <pdi>
    }
    query validate
    query consistency <family>
    query probs <family>
    query joint <family> <ta> <tb>
    query marginal <family> <t>
    query condition <family> <t>=<label> given <t>=<label>
    query compatible <pdi> <pdi>
    query refine <pdi> <pdi>
    query classify <family> <family>

Complex literals are ``<real>``, ``<real>i``, and ``<real>+<real>i`` /
``<real>-<real>i``.  Every referenced name must be declared earlier, names
share one namespace, and there is exactly one ``space`` declaration, which
comes first.  Steps must connect consecutive declared times and every time
after the first needs exactly one slot.

Parsing checks structure only; converting declarations to values (and
validating normalization, unitarity, and PDI invariants) happens in
:func:`build_document`, so invariant failures report the offending line.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateName,
    HistoriesError,
    NotUnitary,
    ParseError,
    UndefinedName,
)
from .numerics import DEFAULT_TOL, Ket, Operator
from .qlogic import Projector, projector_from_ket, validate_pdi
from .histories import make_family

__all__ = [
    "Built",
    "FamilyDecl",
    "KetDecl",
    "PdiDecl",
    "ProjectorDecl",
    "QueryDecl",
    "ScenarioDocument",
    "SpaceDecl",
    "UnitaryDecl",
    "build_document",
    "format_complex",
    "parse_complex",
    "parse_query_line",
    "parse_scenario",
    "render_document",
]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_FLOAT = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_UFLOAT = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_REAL_RE = re.compile(rf"({_FLOAT})")
_COMPLEX_REAL = re.compile(rf"^({_FLOAT})$")
_COMPLEX_IMAG = re.compile(rf"^({_FLOAT})i$")
_COMPLEX_PAIR = re.compile(rf"^({_FLOAT})([+-]{_UFLOAT})i$")

QUERY_KINDS = (
    "validate",
    "consistency",
    "probs",
    "joint",
    "marginal",
    "condition",
    "compatible",
    "refine",
    "classify",
)


@dataclass
class SpaceDecl:
    dim: int
    line: int | None = None


@dataclass
class KetDecl:
    name: str
    values: tuple[complex, ...]
    line: int | None = None


@dataclass
class UnitaryDecl:
    name: str
    rows: tuple[tuple[complex, ...], ...] | None  # None means identity
    line: int | None = None


@dataclass
class ProjectorDecl:
    name: str
    kind: str  # "ket" | "sum" | "diag"
    args: tuple
    line: int | None = None


@dataclass
class PdiDecl:
    name: str
    members: tuple[str, ...]
    line: int | None = None


@dataclass
class FamilyDecl:
    name: str
    initial: str
    times: tuple[str, ...]
    steps: tuple[str, ...]  # unitary name per consecutive time pair
    slots: tuple[str, ...]  # pdi name per time after the first
    line: int | None = None


@dataclass
class QueryDecl:
    kind: str
    args: tuple
    line: int | None = None
    text: str = ""


Statement = SpaceDecl | KetDecl | UnitaryDecl | ProjectorDecl | PdiDecl | FamilyDecl


@dataclass
class ScenarioDocument:
    statements: list = field(default_factory=list)
    queries: list = field(default_factory=list)

    @property
    def space(self) -> SpaceDecl:
        for s in self.statements:
            if isinstance(s, SpaceDecl):
                return s
        raise ParseError("document has no space declaration")


def parse_complex(token: str, line: int | None = None) -> complex:
    token = token.strip()
    m = _COMPLEX_REAL.match(token)
    if m:
        return complex(float(m.group(1)), 0.0)
    m = _COMPLEX_IMAG.match(token)
    if m:
        return complex(0.0, float(m.group(1)))
    m = _COMPLEX_PAIR.match(token)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    raise ParseError(f"bad complex literal {token!r}", line)


def format_complex(z: complex) -> str:
    re_, im = float(z.real), float(z.imag)
    if re_ == 0.0:
        re_ = 0.0  # normalize -0.0
    if im == 0.0:
        return repr(re_)
    sign = "-" if im < 0 else "+"
    if re_ == 0.0:
        return ("-" if im < 0 else "") + repr(abs(im)) + "i"
    return repr(re_) + sign + repr(abs(im)) + "i"


def _logical_lines(text: str):
    """Yield (line_number, statement_text): comments stripped, bracketed
    statements joined across physical lines with newlines preserved."""
    pending: list[str] = []
    start = 0
    depth = 0
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip() and not pending:
            continue
        if not pending:
            start = n
        pending.append(body)
        depth += body.count("[") + body.count("{") - body.count("]") - body.count("}")
        if depth < 0:
            raise ParseError("unbalanced closing bracket", n)
        if depth == 0:
            stmt = "\n".join(pending).strip()
            pending = []
            if stmt:
                yield start, stmt
    if pending:
        raise ParseError("unclosed bracket at end of file", start)


def _check_name(token: str, line: int) -> str:
    if not _NAME_RE.fullmatch(token):
        raise ParseError(f"bad name {token!r}", line)
    return token


def _split_tuple(body: str, line: int) -> tuple[complex, ...]:
    body = body.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ParseError(f"expected a parenthesized tuple, got {body!r}", line)
    inner = body[1:-1].strip()
    if not inner:
        raise ParseError("empty tuple", line)
    return tuple(parse_complex(tok, line) for tok in inner.split(","))


class _Parser:
    def __init__(self):
        self.doc = ScenarioDocument()
        self.names: dict[str, str] = {}  # name -> kind, one shared namespace
        self.space_seen = False

    def declare(self, name: str, kind: str, line: int) -> None:
        if name in self.names:
            raise DuplicateName(f"name {name!r} already declared as {self.names[name]}", line)
        self.names[name] = kind

    def require(self, name: str, kind: str, line: int) -> None:
        if name not in self.names:
            raise UndefinedName(f"{kind} {name!r} is not declared", line)
        if self.names[name] != kind:
            raise UndefinedName(
                f"{name!r} is a {self.names[name]}, expected a {kind}", line
            )

    def require_space(self, line: int) -> None:
        if not self.space_seen:
            raise ParseError("space declaration must come first", line)

    def statement(self, line: int, text: str) -> None:
        head = text.split(None, 1)[0]
        rest = text[len(head):].strip()
        if head == "space":
            self._space(line, rest)
        elif head == "ket":
            self._ket(line, rest)
        elif head == "unitary":
            self._unitary(line, rest)
        elif head == "projector":
            self._projector(line, rest)
        elif head == "pdi":
            self._pdi(line, rest)
        elif head == "family":
            self._family(line, rest)
        elif head == "query":
            self.doc.queries.append(parse_query_line(rest, line, self))
        else:
            raise ParseError(f"unknown statement {head!r}", line)

    def _space(self, line: int, rest: str) -> None:
        if self.space_seen:
            raise ParseError("duplicate space declaration", line)
        m = re.fullmatch(r"dim\s*=\s*(\d+)", rest)
        if not m:
            raise ParseError(f"expected 'space dim = <int>', got {rest!r}", line)
        dim = int(m.group(1))
        if dim < 1:
            raise ParseError("space dim must be at least 1", line)
        self.space_seen = True
        self.doc.statements.append(SpaceDecl(dim, line))

    def _eq_split(self, rest: str, line: int) -> tuple[str, str]:
        if "=" not in rest:
            raise ParseError(f"expected '=', got {rest!r}", line)
        name, value = rest.split("=", 1)
        return _check_name(name.strip(), line), value.strip()

    def _ket(self, line: int, rest: str) -> None:
        self.require_space(line)
        name, value = self._eq_split(rest, line)
        self.declare(name, "ket", line)
        self.doc.statements.append(KetDecl(name, _split_tuple(value, line), line))

    def _unitary(self, line: int, rest: str) -> None:
        self.require_space(line)
        name, value = self._eq_split(rest, line)
        self.declare(name, "unitary", line)
        flat = " ".join(value.split())
        if flat == "identity":
            self.doc.statements.append(UnitaryDecl(name, None, line))
            return
        m = re.fullmatch(r"rows\s*\[(.*)\]", flat, re.DOTALL)
        if not m:
            raise ParseError(f"expected 'identity' or 'rows [ ... ]', got {value!r}", line)
        rows = tuple(
            _split_tuple(row.strip(), line) for row in m.group(1).split(";") if row.strip()
        )
        if not rows:
            raise ParseError("unitary has no rows", line)
        if any(len(r) != len(rows) for r in rows):
            raise ParseError("unitary rows must form a square matrix", line)
        self.doc.statements.append(UnitaryDecl(name, rows, line))

    def _projector(self, line: int, rest: str) -> None:
        self.require_space(line)
        name, value = self._eq_split(rest, line)
        self.declare(name, "projector", line)
        if value.startswith("ket "):
            ket_name = _check_name(value[4:].strip(), line)
            self.require(ket_name, "ket", line)
            decl = ProjectorDecl(name, "ket", (ket_name,), line)
        elif value.startswith("sum "):
            members = tuple(_check_name(t, line) for t in value[4:].split())
            if not members:
                raise ParseError("projector sum needs at least one member", line)
            for member in members:
                self.require(member, "projector", line)
            decl = ProjectorDecl(name, "sum", members, line)
        elif value.startswith("diag"):
            m = re.fullmatch(r"diag\s*\(([^)]*)\)", value)
            if not m:
                raise ParseError(f"expected 'diag(<0/1 list>)', got {value!r}", line)
            bits = tuple(t.strip() for t in m.group(1).split(","))
            if not all(b in ("0", "1") for b in bits):
                raise ParseError(f"diag entries must be 0 or 1, got {m.group(1)!r}", line)
            decl = ProjectorDecl(name, "diag", tuple(int(b) for b in bits), line)
        else:
            raise ParseError(
                f"expected 'ket <name>', 'sum <names>', or 'diag(...)', got {value!r}", line
            )
        self.doc.statements.append(decl)

    def _pdi(self, line: int, rest: str) -> None:
        self.require_space(line)
        name, value = self._eq_split(rest, line)
        self.declare(name, "pdi", line)
        members = tuple(_check_name(t.strip(), line) for t in value.split(",") if t.strip())
        if not members:
            raise ParseError("pdi needs at least one projector", line)
        for member in members:
            self.require(member, "projector", line)
        self.doc.statements.append(PdiDecl(name, members, line))

    def _family(self, line: int, rest: str) -> None:
        self.require_space(line)
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*\{(.*)\}", rest, re.DOTALL)
        if not m:
            raise ParseError(f"expected 'family <name> {{ ... }}', got {rest!r}", line)
        name = m.group(1)
        self.declare(name, "family", line)
        initial = None
        times: tuple[str, ...] | None = None
        steps: dict[tuple[str, str], str] = {}
        slots: dict[str, str] = {}
        for piece in re.split(r"[;\n]", m.group(2)):
            piece = piece.strip()
            if not piece:
                continue
            if piece.startswith("initial"):
                body = piece[len("initial"):].strip()
                if not body.startswith("="):
                    raise ParseError(f"expected 'initial = <ket>', got {piece!r}", line)
                initial = _check_name(body[1:].strip(), line)
                self.require(initial, "ket", line)
            elif piece.startswith("times"):
                body = piece[len("times"):].strip()
                if not body.startswith("="):
                    raise ParseError(f"expected 'times = t0 t1 ...', got {piece!r}", line)
                times = tuple(_check_name(t, line) for t in body[1:].split())
                if len(times) < 2:
                    raise ParseError("a family needs at least two times", line)
                if len(set(times)) != len(times):
                    raise ParseError(f"duplicate time labels in {times}", line)
            elif piece.startswith("step"):
                sm = re.fullmatch(
                    r"step\s+([A-Za-z_]\w*)\s*->\s*([A-Za-z_]\w*)\s*=\s*([A-Za-z_]\w*)", piece
                )
                if not sm:
                    raise ParseError(f"expected 'step <ti>-><tj> = <unitary>', got {piece!r}", line)
                self.require(sm.group(3), "unitary", line)
                key = (sm.group(1), sm.group(2))
                if key in steps:
                    raise ParseError(f"duplicate step {key[0]}->{key[1]}", line)
                steps[key] = sm.group(3)
            elif piece.startswith("slot"):
                sm = re.fullmatch(r"slot\s+([A-Za-z_]\w*)\s*=\s*([A-Za-z_]\w*)", piece)
                if not sm:
                    raise ParseError(f"expected 'slot <t> = <pdi>', got {piece!r}", line)
                self.require(sm.group(2), "pdi", line)
                if sm.group(1) in slots:
                    raise ParseError(f"duplicate slot at {sm.group(1)}", line)
                slots[sm.group(1)] = sm.group(2)
            else:
                raise ParseError(f"unknown family field {piece!r}", line)
        if initial is None:
            raise ParseError(f"family {name!r} has no initial state", line)
        if times is None:
            raise ParseError(f"family {name!r} has no times", line)
        step_names = []
        for ta, tb in zip(times, times[1:]):
            if (ta, tb) not in steps:
                raise ParseError(f"family {name!r} is missing step {ta}->{tb}", line)
            step_names.append(steps.pop((ta, tb)))
        if steps:
            (ta, tb) = next(iter(steps))
            raise ParseError(
                f"step {ta}->{tb} does not connect consecutive declared times {times}", line
            )
        slot_names = []
        for t in times[1:]:
            if t not in slots:
                raise ParseError(f"family {name!r} has no slot at {t}", line)
            slot_names.append(slots.pop(t))
        if slots:
            t = next(iter(slots))
            raise ParseError(f"slot at {t!r} is not at a declared later time of {times}", line)
        self.doc.statements.append(
            FamilyDecl(name, initial, times, tuple(step_names), tuple(slot_names), line)
        )


def parse_query_line(text: str, line: int | None = None, names=None) -> QueryDecl:
    """Parse one query (the text after the ``query`` keyword)."""
    tokens = text.split()
    if not tokens:
        raise ParseError("empty query", line)
    kind = tokens[0]
    if kind not in QUERY_KINDS:
        raise ParseError(f"unknown query kind {kind!r}", line)

    def need(n: int, usage: str):
        if len(tokens) != n:
            raise ParseError(f"expected 'query {usage}', got {text!r}", line)

    def require(name: str, want: str):
        if names is not None:
            names.require(name, want, line)

    if kind == "validate":
        need(1, "validate")
        args: tuple = ()
    elif kind in ("consistency", "probs"):
        need(2, f"{kind} <family>")
        require(tokens[1], "family")
        args = (tokens[1],)
    elif kind == "joint":
        need(4, "joint <family> <ta> <tb>")
        require(tokens[1], "family")
        args = (tokens[1], tokens[2], tokens[3])
    elif kind == "marginal":
        need(3, "marginal <family> <t>")
        require(tokens[1], "family")
        args = (tokens[1], tokens[2])
    elif kind == "condition":
        usage = "condition <family> <t>=<label> given <t>=<label>"
        need(5, usage)
        if tokens[3] != "given":
            raise ParseError(f"expected 'query {usage}', got {text!r}", line)
        require(tokens[1], "family")
        target = tokens[2].split("=", 1)
        given = tokens[4].split("=", 1)
        if len(target) != 2 or len(given) != 2:
            raise ParseError(f"expected 'query {usage}', got {text!r}", line)
        args = (tokens[1], tuple(target), tuple(given))
    elif kind in ("compatible", "refine"):
        need(3, f"{kind} <pdi> <pdi>")
        require(tokens[1], "pdi")
        require(tokens[2], "pdi")
        args = (tokens[1], tokens[2])
    else:  # classify
        need(3, "classify <family> <family>")
        require(tokens[1], "family")
        require(tokens[2], "family")
        args = (tokens[1], tokens[2])
    return QueryDecl(kind, args, line, " ".join(tokens))


def parse_scenario(text: str) -> ScenarioDocument:
    """Parse a scenario document; structure and name resolution only.

    Raises:
        ParseError / UndefinedName / DuplicateName, all carrying the line.
    """
    parser = _Parser()
    for line, stmt in _logical_lines(text):
        parser.statement(line, stmt)
    if not parser.space_seen:
        raise ParseError("document has no space declaration")
    return parser.doc


@dataclass
class Built:
    """Concrete values constructed from a document."""

    dim: int
    kets: dict
    unitaries: dict
    projectors: dict
    pdis: dict
    families: dict
    order: list  # (kind, name) in declaration order


def build_document(doc: ScenarioDocument, tol: float = DEFAULT_TOL) -> Built:
    """Convert declarations to validated values.

    Invariant failures (normalization, unitarity, PDI axioms, family
    structure) surface here, annotated with the declaration's line.
    """
    built = Built(doc.space.dim, {}, {}, {}, {}, {}, [])
    for stmt in doc.statements:
        try:
            _build_statement(built, stmt, tol)
        except HistoriesError as exc:
            if stmt.line is not None and not isinstance(exc, ParseError):
                exc.args = (f"line {stmt.line}: {exc.args[0] if exc.args else exc}",)
            raise
    return built


def _build_statement(built: Built, stmt, tol: float) -> None:
    dim = built.dim
    if isinstance(stmt, SpaceDecl):
        return
    if isinstance(stmt, KetDecl):
        vec = np.array(stmt.values, dtype=np.complex128)
        if vec.shape[0] != dim:
            raise ParseError(
                f"ket {stmt.name!r} has {vec.shape[0]} amplitudes, space dim is {dim}",
                stmt.line,
            )
        built.kets[stmt.name] = Ket(vec)
    elif isinstance(stmt, UnitaryDecl):
        if stmt.rows is None:
            op = Operator.identity(dim)
        else:
            mat = np.array(stmt.rows, dtype=np.complex128)
            if mat.shape != (dim, dim):
                raise ParseError(
                    f"unitary {stmt.name!r} is {mat.shape[0]}x{mat.shape[1]}, "
                    f"space dim is {dim}",
                    stmt.line,
                )
            op = Operator(mat)
        if not op.is_unitary(tol):
            raise NotUnitary(f"unitary {stmt.name!r} fails the unitarity check")
        built.unitaries[stmt.name] = op
    elif isinstance(stmt, ProjectorDecl):
        if stmt.kind == "ket":
            proj = projector_from_ket(built.kets[stmt.args[0]], stmt.name, tol)
        elif stmt.kind == "diag":
            if len(stmt.args) != dim:
                raise ParseError(
                    f"projector {stmt.name!r} has {len(stmt.args)} diagonal entries, "
                    f"space dim is {dim}",
                    stmt.line,
                )
            proj = Projector(Operator(np.diag(np.array(stmt.args, dtype=np.complex128))),
                             stmt.name, tol)
        else:  # sum
            total = sum(built.projectors[m].mat for m in stmt.args)
            proj = Projector(Operator(total), stmt.name, tol)
        built.projectors[stmt.name] = proj
    elif isinstance(stmt, PdiDecl):
        members = [built.projectors[m].relabel(m) for m in stmt.members]
        built.pdis[stmt.name] = validate_pdi(members, tol)
    elif isinstance(stmt, FamilyDecl):
        built.families[stmt.name] = make_family(
            built.kets[stmt.initial],
            stmt.times,
            [built.unitaries[u] for u in stmt.steps],
            [built.pdis[s] for s in stmt.slots],
            tol=tol,
        )
    else:
        raise ParseError(f"unknown statement type {type(stmt).__name__}")
    built.order.append((type(stmt).__name__.removesuffix("Decl").lower(), stmt.name))


def render_document(doc: ScenarioDocument) -> str:
    """Render a document back to scenario-file text (full float precision,
    so parse(render(doc)) rebuilds bit-identical values)."""
    out: list[str] = []
    for stmt in doc.statements:
        if isinstance(stmt, SpaceDecl):
            out.append(f"space dim = {stmt.dim}")
        elif isinstance(stmt, KetDecl):
            vals = ", ".join(format_complex(z) for z in stmt.values)
            out.append(f"ket {stmt.name} = ({vals})")
        elif isinstance(stmt, UnitaryDecl):
            if stmt.rows is None:
                out.append(f"unitary {stmt.name} = identity")
            else:
                rows = [
                    "  (" + ", ".join(format_complex(z) for z in row) + ")"
                    for row in stmt.rows
                ]
                out.append(f"unitary {stmt.name} = rows [\n" + ";\n".join(rows) + "\n]")
        elif isinstance(stmt, ProjectorDecl):
            if stmt.kind == "ket":
                out.append(f"projector {stmt.name} = ket {stmt.args[0]}")
            elif stmt.kind == "sum":
                out.append(f"projector {stmt.name} = sum " + " ".join(stmt.args))
            else:
                bits = ", ".join(str(b) for b in stmt.args)
                out.append(f"projector {stmt.name} = diag({bits})")
        elif isinstance(stmt, PdiDecl):
            out.append(f"pdi {stmt.name} = " + ", ".join(stmt.members))
        elif isinstance(stmt, FamilyDecl):
            lines = [f"family {stmt.name} {{"]
            lines.append(f"  initial = {stmt.initial}")
            lines.append("  times = " + " ".join(stmt.times))
            for (ta, tb), u in zip(zip(stmt.times, stmt.times[1:]), stmt.steps):
                lines.append(f"  step {ta}->{tb} = {u}")
            for t, s in zip(stmt.times[1:], stmt.slots):
                lines.append(f"  slot {t} = {s}")
            lines.append("}")
            out.append("\n".join(lines))
    for q in doc.queries:
        out.append(f"query {q.text}")
    return "\n".join(out) + "\n"
