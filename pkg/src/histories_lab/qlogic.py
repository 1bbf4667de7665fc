"""Projector logic at a single time.

A property of a quantum system is a projector (Hermitian idempotent).  AND
and OR of two properties exist only when the projectors commute; otherwise
the combination is *meaningless*, which is signalled by raising
:class:`~histories_lab.errors.Meaningless` rather than returning any value.
Meaningless is not "false": false is the zero projector.

Sample spaces are projective decompositions of the identity (PDIs):
mutually orthogonal nonzero projectors summing to I.  A framework is a PDI
together with its event algebra, the 2^n subset sums.  Two frameworks are
compatible when all their projectors commute; compatible frameworks admit
a common refinement built from the nonzero pairwise products.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    DimensionMismatch,
    Incompatible,
    Incomplete,
    Meaningless,
    NotOrthogonal,
    NotProjector,
    TooLarge,
)
from .numerics import DEFAULT_TOL, Ket, Operator, hermitian_eigensystem

__all__ = [
    "DecompositionOfIdentity",
    "EventAlgebra",
    "Observable",
    "Projector",
    "common_refinement",
    "commutator_norm",
    "conjunction",
    "disjunction",
    "event_algebra",
    "frameworks_compatible",
    "intersection_projector",
    "negation",
    "observable_decomposition",
    "projector_from_ket",
    "validate_pdi",
]

EVENT_ALGEBRA_MAX_BASE = 16


@dataclass(eq=False)
class Projector:
    """A labeled Hermitian idempotent operator.

    Validated at construction: ``||P - P^dag||_F <= tol*dim`` and
    ``||P^2 - P||_F <= tol*dim``.  The zero projector is legal on its own
    (it is "false"); PDIs reject it separately.
    """

    op: Operator
    label: str
    tol: float = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = self.op.mat
        bound = self.tol * self.dim
        herm = float(np.linalg.norm(m - m.conj().T))
        if herm > bound:
            raise NotProjector(f"projector {self.label!r} is not Hermitian (defect {herm:.3g})")
        idem = float(np.linalg.norm(m @ m - m))
        if idem > bound:
            raise NotProjector(f"projector {self.label!r} is not idempotent (defect {idem:.3g})")

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def is_zero(self, tol: float = DEFAULT_TOL) -> bool:
        return float(np.linalg.norm(self.mat)) <= tol * self.dim

    def relabel(self, label: str) -> "Projector":
        return Projector(self.op, label, self.tol)


@dataclass(eq=False)
class DecompositionOfIdentity:
    """An ordered PDI; construct through :func:`validate_pdi`."""

    elements: tuple[Projector, ...]

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def by_label(self, label: str) -> Projector:
        for p in self.elements:
            if p.label == label:
                return p
        raise KeyError(label)


@dataclass(eq=False)
class EventAlgebra:
    """All subset sums of a PDI, tagged by the generating label subset."""

    base: DecompositionOfIdentity
    elements: tuple[tuple[frozenset, Projector], ...]

    def __len__(self) -> int:
        return len(self.elements)

    def projector_for(self, labels) -> Projector:
        want = frozenset(labels)
        for subset, proj in self.elements:
            if subset == want:
                return proj
        raise KeyError(want)

    def contains_projector(self, p: Projector, tol: float = DEFAULT_TOL) -> bool:
        return any(
            float(np.linalg.norm(q.mat - p.mat)) <= tol * p.dim for _, q in self.elements
        )


@dataclass(eq=False)
class Observable:
    """A Hermitian operator resolved as sum of eigenvalue * projector,
    each eigenvalue listed once."""

    pairs: tuple[tuple[float, Projector], ...]

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.pairs)

    def reconstruct(self) -> Operator:
        dim = self.pairs[0][1].dim
        total = np.zeros((dim, dim), dtype=np.complex128)
        for a, p in self.pairs:
            total += a * p.mat
        return Operator(total)

    def decomposition(self) -> DecompositionOfIdentity:
        return validate_pdi([p for _, p in self.pairs])


def projector_from_ket(psi: Ket, label: str | None = None, tol: float = DEFAULT_TOL) -> Projector:
    """|psi><psi| for a normalized ket; rank 1 by construction."""
    psi.require_normalized(tol, "state")
    mat = np.outer(psi.vec, psi.vec.conj())
    return Projector(Operator(mat), label if label is not None else "[ket]", tol)


def negation(p: Projector, tol: float = DEFAULT_TOL) -> Projector:
    """NOT is the orthogonal complement I - P, never meaningless."""
    eye = np.eye(p.dim, dtype=np.complex128)
    label = p.label[1:] if p.label.startswith("!") else "!" + p.label
    return Projector(Operator(eye - p.mat), label, tol)


def commutator_norm(p: Projector, q: Projector) -> float:
    if p.dim != q.dim:
        raise DimensionMismatch(f"projectors of dim {p.dim} and {q.dim}")
    return float(np.linalg.norm(p.mat @ q.mat - q.mat @ p.mat))


def _require_commuting(p: Projector, q: Projector, tol: float, what: str) -> None:
    c = commutator_norm(p, q)
    if c > tol * p.dim:
        raise Meaningless(
            f"{p.label!r} {what} {q.label!r} is meaningless: projectors do not commute "
            f"(commutator norm {c:.3g})",
            commutator_norm=c,
        )


def conjunction(p: Projector, q: Projector, tol: float = DEFAULT_TOL) -> Projector:
    """P AND Q = PQ, defined only for commuting projectors.

    Raises:
        Meaningless: when ||PQ - QP||_F > tol*dim.  The zero projector is a
            legitimate return value (the conjunction is false, not
            meaningless).
    """
    _require_commuting(p, q, tol, "AND")
    prod = p.mat @ q.mat
    prod = (prod + prod.conj().T) / 2.0
    return Projector(Operator(prod), f"{p.label}&{q.label}", tol)


def disjunction(p: Projector, q: Projector, tol: float = DEFAULT_TOL) -> Projector:
    """P OR Q = P + Q - PQ, defined only for commuting projectors."""
    _require_commuting(p, q, tol, "OR")
    prod = p.mat @ q.mat
    total = p.mat + q.mat - (prod + prod.conj().T) / 2.0
    return Projector(Operator(total), f"{p.label}|{q.label}", tol)


def intersection_projector(p: Projector, q: Projector, tol: float = DEFAULT_TOL) -> Projector:
    """Projector onto range(P) intersect range(Q), for any two projectors.

    Computed without reference to commutation, as the eigenvalue-2
    eigenspace of P + Q; serves as an independent oracle for
    :func:`conjunction` on commuting pairs.
    """
    if p.dim != q.dim:
        raise DimensionMismatch(f"projectors of dim {p.dim} and {q.dim}")
    evals, vecs = hermitian_eigensystem(Operator(p.mat + q.mat), tol)
    out = np.zeros((p.dim, p.dim), dtype=np.complex128)
    for lam, v in zip(evals, vecs):
        if abs(lam - 2.0) <= max(tol * p.dim, 1e-8):
            out += np.outer(v.vec, v.vec.conj())
    return Projector(Operator(out), f"{p.label}^{q.label}", tol)


def validate_pdi(projectors, tol: float = DEFAULT_TOL) -> DecompositionOfIdentity:
    """Check a labeled projector list forms a projective decomposition of I.

    Accepts Projector values or (label, Operator) pairs.  The first violated
    invariant wins: NotProjector(j) for a non-projector or zero element,
    NotOrthogonal(j, k) for a non-orthogonal pair, Incomplete(deficit) when
    the sum misses the identity.
    """
    elems: list[Projector] = []
    for j, item in enumerate(projectors):
        if isinstance(item, Projector):
            p = item
        else:
            label, op = item
            try:
                p = Projector(op, label, tol)
            except NotProjector as exc:
                raise NotProjector(str(exc), index=j) from None
        if p.is_zero(tol):
            raise NotProjector(f"element {j} ({p.label!r}) is the zero projector", index=j)
        elems.append(p)
    if not elems:
        raise Incomplete("empty projector list", deficit=float("inf"))
    dim = elems[0].dim
    for j, p in enumerate(elems):
        if p.dim != dim:
            raise DimensionMismatch(f"element {j} has dim {p.dim}, expected {dim}")
    bound = tol * dim
    for (j, p), (k, q) in combinations(enumerate(elems), 2):
        overlap = float(np.linalg.norm(p.mat @ q.mat))
        if overlap > bound:
            raise NotOrthogonal(
                f"elements {j} ({p.label!r}) and {k} ({q.label!r}) are not orthogonal "
                f"(||PQ|| = {overlap:.3g})",
                pair=(j, k),
            )
    total = sum(p.mat for p in elems)
    deficit = float(np.linalg.norm(total - np.eye(dim)))
    if deficit > bound:
        raise Incomplete(f"projectors sum to I with deficit {deficit:.3g}", deficit=deficit)
    return DecompositionOfIdentity(tuple(elems))


def observable_decomposition(
    a: Operator, degeneracy_gap: float | None = None, tol: float = DEFAULT_TOL
) -> Observable:
    """Spectral form of a Hermitian operator with each eigenvalue once.

    Eigenvalues closer than ``degeneracy_gap`` merge into one projector;
    the gap defaults to 1e-8 times the spectral range, which separates
    genuine degeneracy from rounding at desk scale.
    """
    evals, vecs = hermitian_eigensystem(a, tol)
    spread = float(evals[-1] - evals[0])
    if degeneracy_gap is None:
        degeneracy_gap = max(1e-8 * spread, 1e-12)
    pairs: list[tuple[float, Projector]] = []
    start = 0
    for k in range(1, a.dim + 1):
        if k == a.dim or evals[k] - evals[k - 1] > degeneracy_gap:
            block = np.zeros((a.dim, a.dim), dtype=np.complex128)
            for j in range(start, k):
                block += np.outer(vecs[j].vec, vecs[j].vec.conj())
            value = float(np.mean(evals[start:k]))
            pairs.append((value, Projector(Operator(block), f"a={value:.6g}", tol)))
            start = k
    return Observable(tuple(pairs))


def frameworks_compatible(
    s1: DecompositionOfIdentity, s2: DecompositionOfIdentity, tol: float = DEFAULT_TOL
) -> bool:
    """True iff every projector of s1 commutes with every projector of s2."""
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"frameworks of dim {s1.dim} and {s2.dim}")
    bound = tol * s1.dim
    return all(commutator_norm(p, q) <= bound for p in s1 for q in s2)


def common_refinement(
    s1: DecompositionOfIdentity, s2: DecompositionOfIdentity, tol: float = DEFAULT_TOL
) -> DecompositionOfIdentity:
    """The coarsest PDI refining two compatible ones: nonzero products P_j Q_k.

    Duplicate products (Frobenius distance <= tol*dim) merge, first label
    wins; product labels concatenate as "P.Q".

    Raises:
        Incompatible: when some pair fails to commute within tol*dim.
    """
    if not frameworks_compatible(s1, s2, tol):
        raise Incompatible("frameworks contain noncommuting projectors; no common refinement")
    bound = tol * s1.dim
    kept: list[tuple[str, np.ndarray]] = []
    for p in s1:
        for q in s2:
            prod = p.mat @ q.mat
            prod = (prod + prod.conj().T) / 2.0
            if float(np.linalg.norm(prod)) <= bound:
                continue
            for _, seen in kept:
                if float(np.linalg.norm(seen - prod)) <= bound:
                    break
            else:
                kept.append((f"{p.label}.{q.label}", prod))
    return validate_pdi([(label, Operator(m)) for label, m in kept], tol)


def event_algebra(s: DecompositionOfIdentity, tol: float = DEFAULT_TOL) -> EventAlgebra:
    """All 2^n subset-sum projectors of an n-element PDI, zero and I included.

    Raises:
        TooLarge: for bases beyond 16 elements.
    """
    n = len(s)
    if n > EVENT_ALGEBRA_MAX_BASE:
        raise TooLarge(f"event algebra of a {n}-element PDI has 2^{n} elements; refusing")
    dim = s.dim
    out: list[tuple[frozenset, Projector]] = []
    for mask in range(2 ** n):
        subset = frozenset(p.label for j, p in enumerate(s) if mask >> j & 1)
        total = np.zeros((dim, dim), dtype=np.complex128)
        for j, p in enumerate(s):
            if mask >> j & 1:
                total += p.mat
        label = "0" if not subset else "+".join(sorted(subset))
        out.append((subset, Projector(Operator(total), label, tol)))
    return EventAlgebra(s, tuple(out))
