"""Probabilistic reasoning inside one history family, and the rules for
when two families may be related at all.

Every query names events through the family's own slot labels; referencing
anything outside the family's event algebra raises
SingleFrameworkViolation.  That check is the executable form of the single
framework rule: no calculation is allowed to fuse frameworks.

Two families over the same initial state and dynamics are *incompatible*
when some slot projectors fail to commute, *incommensurate* when all
commute but the slot-wise common refinement violates consistency, and
*commensurate* otherwise.  Only commensurate families can be combined.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BadLabel,
    InapplicableFramework,
    SingleFrameworkViolation,
    StructureMismatch,
    ZeroProbabilityCondition,
)
from .numerics import DEFAULT_TOL
from .histories import (
    HistoryFamily,
    ProbabilityTable,
    consistency_check,
    history_probabilities,
    make_family,
)
from .qlogic import DecompositionOfIdentity, common_refinement, frameworks_compatible

__all__ = [
    "AgreementReport",
    "Event",
    "FamilyPairClass",
    "classify_family_pair",
    "conditional",
    "cross_framework_agreement",
    "joint_distribution",
    "marginal",
]

CONDITION_FLOOR = 1e-12


@dataclass(frozen=True)
class Event:
    """A single-time event: a nonempty set of slot labels at one time."""

    time: str
    labels: frozenset

    def __init__(self, time: str, labels):
        if isinstance(labels, str):
            labels = (labels,)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "labels", frozenset(labels))
        if not self.labels:
            raise BadLabel(f"event at {time!r} has an empty label set")


def _slot_index(family: HistoryFamily, time: str) -> int:
    m = family.steps.index(time)
    if m == 0:
        raise BadLabel(f"time {time!r} is the initial time; events live at later times")
    return m


def _slot_for(family: HistoryFamily, event: Event) -> tuple[int, DecompositionOfIdentity]:
    m = _slot_index(family, event.time)
    slot = family.slots[m - 1]
    missing = event.labels - set(slot.labels)
    if missing:
        raise SingleFrameworkViolation(
            f"labels {sorted(missing)} at {event.time!r} are not in this family's "
            f"event algebra (slot labels: {slot.labels}); reasoning must stay inside "
            "a single framework"
        )
    return m, slot


def _matching_mass(family: HistoryFamily, probs: ProbabilityTable, events: Sequence[Event]) -> float:
    """Total probability of elementary histories matching all events."""
    constraints = []
    for e in events:
        m, _ = _slot_for(family, e)
        constraints.append((m - 1, e.labels))
    total = 0.0
    for alpha, p in probs.entries.items():
        if not isinstance(alpha, tuple):
            continue  # Y0 matches no slot event
        if all(alpha[pos] in labels for pos, labels in constraints):
            total += p
    return total


def joint_distribution(
    family: HistoryFamily, a: str, b: str, ctol: float | None = None
) -> ProbabilityTable:
    """Joint distribution of the slot labels at two times.

    Entry (j, k) sums the probabilities of elementary histories carrying
    label j at time ``a`` and k at time ``b``; with ``a == b`` the table is
    diagonal and equals the marginal.
    """
    probs = history_probabilities(family, ctol)
    ma, mb = _slot_index(family, a), _slot_index(family, b)
    slot_a, slot_b = family.slots[ma - 1], family.slots[mb - 1]
    entries = {(la, lb): 0.0 for la in slot_a.labels for lb in slot_b.labels}
    for alpha, p in probs.entries.items():
        if not isinstance(alpha, tuple):
            continue
        entries[(alpha[ma - 1], alpha[mb - 1])] += p
    return ProbabilityTable(f"labels at ({a}, {b}), {probs.condition}", entries)


def marginal(family: HistoryFamily, a: str, ctol: float | None = None) -> ProbabilityTable:
    """Probability of each slot label at one time."""
    probs = history_probabilities(family, ctol)
    ma = _slot_index(family, a)
    slot = family.slots[ma - 1]
    entries = {la: 0.0 for la in slot.labels}
    for alpha, p in probs.entries.items():
        if not isinstance(alpha, tuple):
            continue
        entries[alpha[ma - 1]] += p
    return ProbabilityTable(f"labels at {a}, {probs.condition}", entries)


def conditional(
    family: HistoryFamily, target: Event, given: Event, ctol: float | None = None
) -> float:
    """Pr(target | given) = Pr(target and given) / Pr(given).

    Raises:
        ZeroProbabilityCondition: when Pr(given) <= 1e-12 (absolute); the
            ratio would be numerically meaningless.
    """
    probs = history_probabilities(family, ctol)
    denom = _matching_mass(family, probs, [given])
    if denom <= CONDITION_FLOOR:
        raise ZeroProbabilityCondition(
            f"Pr(given) = {denom:.3g} at {given.time!r}; cannot condition"
        )
    num = _matching_mass(family, probs, [target, given])
    return num / denom


@dataclass
class FamilyPairClass:
    """Incompatible, incommensurate, or commensurate with its refinement."""

    kind: str  # "incompatible" | "incommensurate" | "commensurate"
    refinement: HistoryFamily | None = None


def _same_structure(f: HistoryFamily, g: HistoryFamily, tol: float) -> None:
    if f.times != g.times:
        raise StructureMismatch(f"time grids differ: {f.times} vs {g.times}")
    if f.dim != g.dim:
        raise StructureMismatch(f"dimensions differ: {f.dim} vs {g.dim}")
    if float(np.linalg.norm(f.initial.vec - g.initial.vec)) > tol * f.dim:
        raise StructureMismatch("initial states differ")
    for m in range(1, f.f + 1):
        du = float(np.linalg.norm(f.steps.step(m).mat - g.steps.step(m).mat))
        if du > tol * f.dim:
            raise StructureMismatch(
                f"step unitaries {f.times[m - 1]}->{f.times[m]} differ (||dU|| = {du:.3g})"
            )


def classify_family_pair(
    f: HistoryFamily, g: HistoryFamily, tol: float = DEFAULT_TOL, ctol: float | None = None
) -> FamilyPairClass:
    """Decide whether two families over identical dynamics can be combined.

    Raises:
        StructureMismatch: different grids, initial states, or unitaries;
            that comparison is undefined here.
    """
    _same_structure(f, g, tol)
    for sf, sg in zip(f.slots, g.slots):
        if not frameworks_compatible(sf, sg, tol):
            return FamilyPairClass("incompatible")
    refined_slots = [common_refinement(sf, sg, tol) for sf, sg in zip(f.slots, g.slots)]
    refined = make_family(f.initial, f.times, f.steps.unitaries, refined_slots, tol=tol)
    if consistency_check(refined, ctol).consistent:
        return FamilyPairClass("commensurate", refined)
    return FamilyPairClass("incommensurate")


@dataclass
class AgreementReport:
    equal: bool
    value_first: float
    value_second: float
    tol: float


def _translate_event(family: HistoryFamily, event_mat: np.ndarray, time: str, tol: float) -> Event:
    """Express a projector as a subset of this family's slot at ``time``."""
    slot = family.slot_at(time)
    bound = tol * family.dim
    picked = []
    for p in slot:
        hit = float(np.linalg.norm(event_mat @ p.mat - p.mat))
        miss = float(np.linalg.norm(event_mat @ p.mat))
        if hit <= bound:
            picked.append(p.label)
        elif miss > bound:
            raise InapplicableFramework(
                f"event at {time!r} is not in this family's event algebra "
                f"(cuts across {p.label!r})"
            )
    total = sum(slot.by_label(l).mat for l in picked) if picked else np.zeros_like(event_mat)
    if float(np.linalg.norm(total - event_mat)) > bound:
        raise InapplicableFramework(f"event at {time!r} is not a subset sum of the slot")
    if not picked:
        raise InapplicableFramework(f"event at {time!r} translates to the empty event")
    return Event(time, picked)


def cross_framework_agreement(
    f: HistoryFamily,
    g: HistoryFamily,
    data: Sequence[Event],
    conclusion: Event,
    tol: float = DEFAULT_TOL,
    ctol: float | None = None,
) -> AgreementReport:
    """Pr(conclusion | data) computed in two families that both contain them.

    Events are named with the first family's labels; they are carried to
    the second family by matching the underlying projectors.  An empty
    ``data`` list conditions on the initial state alone.

    Raises:
        InapplicableFramework: when an event has no counterpart in one of
            the families' event algebras.
    """
    events_f = list(data) + [conclusion]
    mats = []
    for e in events_f:
        try:
            _, slot = _slot_for(f, e)
        except SingleFrameworkViolation as exc:
            raise InapplicableFramework(str(exc)) from None
        mats.append((e.time, sum(slot.by_label(l).mat for l in e.labels)))
    events_g = [_translate_event(g, mat, time, tol) for time, mat in mats]

    def prob(family: HistoryFamily, events: list[Event]) -> float:
        probs = history_probabilities(family, ctol)
        concl, dat = events[-1], events[:-1]
        if not dat:
            return _matching_mass(family, probs, [concl])
        denom = _matching_mass(family, probs, dat)
        if denom <= CONDITION_FLOOR:
            raise ZeroProbabilityCondition(f"Pr(data) = {denom:.3g}; cannot condition")
        return _matching_mass(family, probs, dat + [concl]) / denom

    value_f = prob(f, events_f)
    value_g = prob(g, events_g)
    return AgreementReport(abs(value_f - value_g) <= tol, value_f, value_g, tol)
