"""History families over a time grid, chain kets, and consistency.

A family fixes a normalized initial ket at t0, a unitary per consecutive
time step, and one PDI per later time.  An elementary history is a choice
of one slot label per later time; its chain ket alternates step unitaries
and slot projectors applied to the initial state:

    |alpha> = P_f U_f P_{f-1} U_{f-1} ... P_1 U_1 |psi0>

The family also carries the special history Y0 whose projector at t0 is
the complement of the initial state (identity afterwards), so that the
sample space sums to the history identity.  For a pure initial state the
Y0 chain ket is identically zero.

Probabilities exist only when all distinct chain kets are mutually
orthogonal (the consistency conditions); then p_alpha = <alpha|alpha>,
which reduces to the two-time Born rule for a single later time.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadLabel,
    DimensionMismatch,
    Inconsistent,
    InvalidSlot,
    NotUnitary,
)
from .numerics import DEFAULT_TOL, Ket, Operator
from .qlogic import DecompositionOfIdentity, Projector

__all__ = [
    "ConsistencyReport",
    "HistoryFamily",
    "ProbabilityTable",
    "StepUnitaries",
    "Y0",
    "backward_pre_probability",
    "born_probability",
    "chain_ket",
    "consistency_check",
    "default_consistency_tol",
    "evolve",
    "history_probabilities",
    "make_family",
    "probability_via_preprobability",
]

DEFAULT_CONSISTENCY_TOL = 1e-10


class _Y0Label:
    """Singleton label for the complement-of-initial-state history."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "Y0"


Y0 = _Y0Label()

HistoryLabel = tuple  # tuple of slot labels, or the Y0 singleton


@dataclass(eq=False)
class StepUnitaries:
    """A time grid t0 < t1 < ... < tf with one unitary per consecutive pair."""

    grid: tuple[str, ...]
    unitaries: tuple[Operator, ...]

    def __post_init__(self):
        self.grid = tuple(self.grid)
        self.unitaries = tuple(self.unitaries)
        if len(self.grid) < 2:
            raise BadLabel(f"time grid needs at least 2 labels, got {self.grid}")
        if len(set(self.grid)) != len(self.grid):
            raise BadLabel(f"time labels must be distinct, got {self.grid}")
        if len(self.unitaries) != len(self.grid) - 1:
            raise DimensionMismatch(
                f"{len(self.grid)} times need {len(self.grid) - 1} step unitaries, "
                f"got {len(self.unitaries)}"
            )
        dim = self.unitaries[0].dim
        for m, u in enumerate(self.unitaries, start=1):
            if u.dim != dim:
                raise DimensionMismatch(f"step {m} has dim {u.dim}, expected {dim}")
            if not u.is_unitary():
                raise NotUnitary(
                    f"step {self.grid[m - 1]}->{self.grid[m]} is not unitary", index=m
                )

    @property
    def dim(self) -> int:
        return self.unitaries[0].dim

    @property
    def f(self) -> int:
        return len(self.unitaries)

    def index(self, label: str) -> int:
        try:
            return self.grid.index(label)
        except ValueError:
            raise BadLabel(f"unknown time label {label!r}; grid is {self.grid}") from None

    def step(self, m: int) -> Operator:
        """U_m, carrying t_{m-1} to t_m (m in 1..f)."""
        return self.unitaries[m - 1]


@dataclass(eq=False)
class HistoryFamily:
    """Immutable after construction; build through :func:`make_family`."""

    initial: Ket
    steps: StepUnitaries
    slots: tuple[DecompositionOfIdentity, ...]
    include_y0: bool = True
    _chain_cache: dict | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def times(self) -> tuple[str, ...]:
        return self.steps.grid

    @property
    def f(self) -> int:
        return len(self.slots)

    @property
    def dim(self) -> int:
        return self.initial.dim

    def slot_at(self, time: str) -> DecompositionOfIdentity:
        m = self.steps.index(time)
        if m == 0:
            raise BadLabel(f"time {time!r} is the initial time; it has no slot")
        return self.slots[m - 1]

    def elementary_labels(self) -> list[tuple[str, ...]]:
        return list(itertools.product(*(s.labels for s in self.slots)))

    def sample_space(self) -> list[HistoryLabel]:
        labels: list[HistoryLabel] = self.elementary_labels()
        if self.include_y0:
            labels.append(Y0)
        return labels

    def chain_kets(self) -> dict[HistoryLabel, Ket]:
        """Chain kets for the whole sample space, computed once and cached."""
        if self._chain_cache is None:
            self._chain_cache = {a: chain_ket(self, a) for a in self.sample_space()}
        return self._chain_cache


def make_family(
    initial: Ket,
    grid,
    steps,
    slots,
    include_y0: bool = True,
    tol: float = DEFAULT_TOL,
) -> HistoryFamily:
    """Validate and assemble a history family.

    Args:
        initial: normalized ket at the first grid time.
        grid: ordered time labels, at least two.
        steps: one unitary per consecutive time pair (or a StepUnitaries).
        slots: one DecompositionOfIdentity per time after the first.

    Raises:
        DimensionMismatch, NotUnitary(m), InvalidSlot(m), NotNormalized.
    """
    if isinstance(steps, StepUnitaries):
        su = steps
        if tuple(grid) != su.grid:
            raise BadLabel(f"grid {tuple(grid)} does not match step grid {su.grid}")
    else:
        su = StepUnitaries(tuple(grid), tuple(steps))
    initial.require_normalized(tol, "initial state")
    if initial.dim != su.dim:
        raise DimensionMismatch(f"initial ket dim {initial.dim} vs step dim {su.dim}")
    slots = tuple(slots)
    if len(slots) != su.f:
        raise InvalidSlot(
            f"{len(su.grid)} times need {su.f} slots, got {len(slots)}", index=len(slots)
        )
    for m, s in enumerate(slots, start=1):
        if not isinstance(s, DecompositionOfIdentity):
            raise InvalidSlot(f"slot at {su.grid[m]} is not a DecompositionOfIdentity", index=m)
        if s.dim != su.dim:
            raise DimensionMismatch(
                f"slot at {su.grid[m]} has dim {s.dim}, expected {su.dim}"
            )
    return HistoryFamily(initial, su, slots, include_y0)


def chain_ket(family: HistoryFamily, alpha) -> Ket:
    """Chain ket of one history; unnormalized and possibly zero.

    ``alpha`` is a tuple of slot labels, one per time after t0, or the
    module constant :data:`Y0`.
    """
    if alpha is Y0:
        p0 = np.eye(family.dim) - np.outer(family.initial.vec, family.initial.vec.conj())
        vec = p0 @ family.initial.vec
        for m in range(1, family.f + 1):
            vec = family.steps.step(m).mat @ vec
        return Ket(vec)
    alpha = tuple(alpha)
    if len(alpha) != family.f:
        raise BadLabel(f"history label {alpha} has {len(alpha)} entries, expected {family.f}")
    vec = family.initial.vec
    for m, label in enumerate(alpha, start=1):
        try:
            proj = family.slots[m - 1].by_label(label)
        except KeyError:
            raise BadLabel(
                f"label {label!r} is not in the slot at {family.times[m]} "
                f"(labels: {family.slots[m - 1].labels})"
            ) from None
        vec = proj.mat @ (family.steps.step(m).mat @ vec)
    return Ket(vec)


@dataclass
class ConsistencyReport:
    consistent: bool
    max_overlap: float
    worst_pair: tuple[HistoryLabel, HistoryLabel] | None
    tol_used: float


def default_consistency_tol(dim: int) -> float:
    return DEFAULT_CONSISTENCY_TOL * dim


def consistency_check(family: HistoryFamily, ctol: float | None = None) -> ConsistencyReport:
    """Check mutual orthogonality of all distinct chain kets (Y0 included).

    ``ctol`` is an absolute bound on |<alpha|alpha'>|; it defaults to
    1e-10 * dim.  Two-time families pass automatically up to rounding.
    """
    threshold = default_consistency_tol(family.dim) if ctol is None else ctol
    kets = family.chain_kets()
    labels = list(kets)
    worst = 0.0
    worst_pair = None
    for i in range(len(labels)):
        vi = kets[labels[i]].vec
        for j in range(i + 1, len(labels)):
            overlap = abs(complex(np.vdot(vi, kets[labels[j]].vec)))
            if overlap > worst:
                worst = overlap
                worst_pair = (labels[i], labels[j])
    return ConsistencyReport(worst <= threshold, worst, worst_pair, threshold)


@dataclass
class ProbabilityTable:
    """Labelled nonnegative entries with the conditioning spelled out."""

    condition: str
    entries: dict

    def __getitem__(self, key) -> float:
        return self.entries[key]

    def __iter__(self):
        return iter(self.entries.items())

    def total(self) -> float:
        return float(sum(self.entries.values()))


def history_probabilities(family: HistoryFamily, ctol: float | None = None) -> ProbabilityTable:
    """p_alpha = <alpha|alpha> over the full sample space, Y0 included.

    Raises:
        Inconsistent: when the consistency conditions fail; there is no way
            to assign probabilities to such a family.  The report rides on
            the exception.
    """
    report = consistency_check(family, ctol)
    if not report.consistent:
        raise Inconsistent(
            f"family is inconsistent: max overlap {report.max_overlap:.6g} "
            f"> {report.tol_used:.3g} at {report.worst_pair}",
            report=report,
        )
    entries = {a: k.norm() ** 2 for a, k in family.chain_kets().items()}
    return ProbabilityTable(f"given initial state at {family.times[0]}", entries)


def born_probability(psi0: Ket, t: Operator, phi: Ket, tol: float = DEFAULT_TOL) -> float:
    """Two-time transition probability |<phi|T|psi0>|^2."""
    psi0.require_normalized(tol, "initial state")
    phi.require_normalized(tol, "final state")
    if not t.is_unitary(tol):
        raise NotUnitary("transition operator is not unitary")
    amp = complex(np.vdot(phi.vec, t.mat @ psi0.vec))
    return abs(amp) ** 2


def backward_pre_probability(psi0: Ket, t: Operator, phi: Ket, tol: float = DEFAULT_TOL) -> float:
    """|<psi0|T^dag|phi>|^2: carry phi backward instead of psi0 forward.

    Equals :func:`born_probability` for all valid inputs; the forward
    wave never appears.
    """
    psi0.require_normalized(tol, "initial state")
    phi.require_normalized(tol, "final state")
    if not t.is_unitary(tol):
        raise NotUnitary("transition operator is not unitary")
    phi_back = t.adjoint().mat @ phi.vec
    return abs(complex(np.vdot(psi0.vec, phi_back))) ** 2


def evolve(psi0: Ket, steps: StepUnitaries, upto: str) -> Ket:
    """Apply the composed step unitaries from the first grid time to ``upto``."""
    m = steps.index(upto)
    vec = psi0.vec
    for k in range(1, m + 1):
        vec = steps.step(k).mat @ vec
    return Ket(vec)


def probability_via_preprobability(psi: Ket, p: Projector, tol: float = DEFAULT_TOL) -> float:
    """<psi|P|psi> for a normalized ket used as a calculational device only."""
    psi.require_normalized(tol, "pre-probability state")
    if psi.dim != p.dim:
        raise DimensionMismatch(f"ket dim {psi.dim} vs projector dim {p.dim}")
    value = complex(np.vdot(psi.vec, p.mat @ psi.vec))
    if abs(value.imag) > tol or value.real < -tol or value.real > 1.0 + tol:
        raise ValueError(f"<psi|P|psi> = {value} is not a probability")
    return value.real
