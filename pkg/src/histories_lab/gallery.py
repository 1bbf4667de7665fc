"""Built-in scenarios: executable documentation and the acceptance corpus.

Each scenario is a declaration document (the same model the CLI parses and
exports) plus a list of expectations: named numeric checks with their
tolerance and provenance.  Expectations rebuild values from the document
every time they run, so corrupted declarations surface as per-entry errors
in the report rather than crashing it.

Scenarios:
    spin-half-xz          noncommuting spin projectors, meaningless AND/OR,
                          and the 1/4-overlap inconsistent three-time family
    oscillator-frameworks truncated oscillator: one coarse and two finer
                          incompatible frameworks over "energy below the gap"
    measurement-model     two-outcome pointer model on particle (x) apparatus,
                          families for unitary evolution, outcomes, prior
                          properties, and collapse-as-conditioning
    singlet-epr           two-qubit singlet correlations at one later time
    mach-zehnder-toy      beam-splitter path qubit; which-path family fails
                          consistency with the same 1/4 overlap
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import Inconsistent, Meaningless, UnknownScenario
from .numerics import DEFAULT_TOL, Ket, Operator, orthonormal_complement
from .qlogic import (
    DecompositionOfIdentity,
    common_refinement,
    commutator_norm,
    conjunction,
    disjunction,
    event_algebra,
    frameworks_compatible,
    negation,
)
from .histories import (
    born_probability,
    consistency_check,
    history_probabilities,
    probability_via_preprobability,
)
from .inference import Event, conditional, joint_distribution, marginal
from .scenario import (
    Built,
    FamilyDecl,
    KetDecl,
    PdiDecl,
    ProjectorDecl,
    QueryDecl,
    ScenarioDocument,
    SpaceDecl,
    UnitaryDecl,
    build_document,
    parse_query_line,
)

__all__ = [
    "SCENARIO_NAMES",
    "Expectation",
    "ExpectationReport",
    "ExpectationResult",
    "Scenario",
    "build_scenario",
    "run_expected",
]

SCENARIO_NAMES = (
    "spin-half-xz",
    "oscillator-frameworks",
    "measurement-model",
    "singlet-epr",
    "mach-zehnder-toy",
)

_R = 1.0 / math.sqrt(2.0)


@dataclass
class Expectation:
    label: str
    compute: Callable[[Built], float]
    expected: float
    tol: float = 1e-12
    provenance: str = "analytic"


@dataclass
class Scenario:
    name: str
    dim: int
    document: ScenarioDocument
    expected: tuple[Expectation, ...]
    params: dict = field(default_factory=dict)

    def build(self, tol: float = DEFAULT_TOL) -> Built:
        return build_document(self.document, tol)

    def family(self, name: str, tol: float = DEFAULT_TOL):
        return self.build(tol).families[name]


@dataclass
class ExpectationResult:
    label: str
    expected: float
    actual: float | None
    delta: float | None
    passed: bool
    tol: float
    provenance: str
    error: str | None = None


@dataclass
class ExpectationReport:
    scenario: str
    results: list[ExpectationResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[ExpectationResult]:
        return [r for r in self.results if not r.passed]


def run_expected(scenario: Scenario, tol: float = DEFAULT_TOL) -> ExpectationReport:
    """Evaluate every expectation at its stated tolerance.

    Failures, including errors raised while rebuilding values, become
    report entries; this function itself does not raise.
    """
    results = []
    for exp in scenario.expected:
        try:
            actual = float(exp.compute(scenario.build(tol)))
        except Exception as exc:  # errors are reported, not propagated
            results.append(
                ExpectationResult(
                    exp.label, exp.expected, None, None, False, exp.tol,
                    exp.provenance, f"{type(exc).__name__}: {exc}",
                )
            )
            continue
        delta = abs(actual - exp.expected)
        results.append(
            ExpectationResult(
                exp.label, exp.expected, actual, delta, delta <= exp.tol,
                exp.tol, exp.provenance,
            )
        )
    return ExpectationReport(scenario.name, results)


class _Doc:
    """Programmatic document assembly mirroring the file grammar."""

    def __init__(self, dim: int):
        self.doc = ScenarioDocument()
        self.doc.statements.append(SpaceDecl(dim))
        self.dim = dim

    def ket(self, name: str, values) -> None:
        self.doc.statements.append(KetDecl(name, tuple(complex(v) for v in values)))

    def identity(self, name: str) -> None:
        self.doc.statements.append(UnitaryDecl(name, None))

    def unitary(self, name: str, matrix) -> None:
        rows = tuple(tuple(complex(v) for v in row) for row in np.asarray(matrix))
        self.doc.statements.append(UnitaryDecl(name, rows))

    def proj_ket(self, name: str, ket_name: str) -> None:
        self.doc.statements.append(ProjectorDecl(name, "ket", (ket_name,)))

    def proj_diag(self, name: str, bits) -> None:
        self.doc.statements.append(ProjectorDecl(name, "diag", tuple(int(b) for b in bits)))

    def proj_sum(self, name: str, members) -> None:
        self.doc.statements.append(ProjectorDecl(name, "sum", tuple(members)))

    def pdi(self, name: str, members) -> None:
        self.doc.statements.append(PdiDecl(name, tuple(members)))

    def family(self, name: str, initial: str, times, steps, slots) -> None:
        self.doc.statements.append(
            FamilyDecl(name, initial, tuple(times), tuple(steps), tuple(slots))
        )

    def queries(self, *texts: str) -> None:
        for t in texts:
            self.doc.queries.append(parse_query_line(t))


def _raises(fn: Callable[[Built], object], exc_type) -> Callable[[Built], float]:
    def compute(built: Built) -> float:
        try:
            fn(built)
        except exc_type:
            return 1.0
        return 0.0

    return compute


def _pdi_match_distance(a: DecompositionOfIdentity, b: DecompositionOfIdentity) -> float:
    """Greedy element matching; inf when sizes differ."""
    if len(a) != len(b) or a.dim != b.dim:
        return float("inf")
    used: set[int] = set()
    worst = 0.0
    for p in a:
        best_k, best_d = -1, float("inf")
        for k, q in enumerate(b):
            if k in used:
                continue
            d = float(np.linalg.norm(p.mat - q.mat))
            if d < best_d:
                best_k, best_d = k, d
        used.add(best_k)
        worst = max(worst, best_d)
    return worst


def _event_mass(table, position: int, labels: set) -> float:
    return sum(
        p for alpha, p in table.entries.items()
        if isinstance(alpha, tuple) and alpha[position] in labels
    )


def build_scenario(name: str, c: tuple[float, float] = (0.6, 0.8)) -> Scenario:
    """Construct a built-in scenario; ``c`` applies to measurement-model only.

    Raises:
        UnknownScenario: for names outside SCENARIO_NAMES.
    """
    if name == "spin-half-xz":
        return _spin_half_xz()
    if name == "oscillator-frameworks":
        return _oscillator_frameworks()
    if name == "measurement-model":
        return _measurement_model(c)
    if name == "singlet-epr":
        return _singlet_epr()
    if name == "mach-zehnder-toy":
        return _mach_zehnder_toy()
    raise UnknownScenario(f"unknown scenario {name!r}; available: {', '.join(SCENARIO_NAMES)}")


def _spin_half_xz() -> Scenario:
    d = _Doc(2)
    d.ket("zp", (1, 0))
    d.ket("zm", (0, 1))
    d.ket("xp", (_R, _R))
    d.ket("xm", (_R, -_R))
    d.identity("Id")
    for ket_name in ("zp", "zm", "xp", "xm"):
        d.proj_ket("P" + ket_name, ket_name)
    d.pdi("Sz", ("Pzp", "Pzm"))
    d.pdi("Sx", ("Pxp", "Pxm"))
    d.family("whichspin", "xp", ("t0", "t1", "t2"), ("Id", "Id"), ("Sz", "Sx"))
    d.queries(
        "validate",
        "compatible Sz Sx",
        "consistency whichspin",
    )
    expected = (
        Expectation(
            "conj_zp_xp_meaningless",
            _raises(lambda b: conjunction(b.projectors["Pzp"], b.projectors["Pxp"]), Meaningless),
            1.0, 0.0, "behavioral",
        ),
        Expectation(
            "disj_zp_xp_meaningless",
            _raises(lambda b: disjunction(b.projectors["Pzp"], b.projectors["Pxp"]), Meaningless),
            1.0, 0.0, "behavioral",
        ),
        Expectation(
            "commutator_norm_zp_xp",
            lambda b: commutator_norm(b.projectors["Pzp"], b.projectors["Pxp"]),
            math.sqrt(0.5),
        ),
        Expectation(
            "negation_zp_is_zm",
            lambda b: float(np.linalg.norm(negation(b.projectors["Pzp"]).mat
                                           - b.projectors["Pzm"].mat)),
            0.0,
        ),
        Expectation(
            "born_zp_to_xp",
            lambda b: born_probability(b.kets["zp"], b.unitaries["Id"], b.kets["xp"]),
            0.5,
        ),
        Expectation(
            "whichspin_max_overlap",
            lambda b: consistency_check(b.families["whichspin"]).max_overlap,
            0.25,
        ),
        Expectation(
            "whichspin_probabilities_rejected",
            _raises(lambda b: history_probabilities(b.families["whichspin"]), Inconsistent),
            1.0, 0.0, "behavioral",
        ),
    )
    return Scenario("spin-half-xz", 2, d.doc, expected)


def _oscillator_frameworks() -> Scenario:
    d = _Doc(4)
    for n in range(4):
        d.ket(f"n{n}", tuple(1 if k == n else 0 for k in range(4)))
    d.ket("plus", (_R, _R, 0, 0))
    d.ket("minus", (_R, -_R, 0, 0))
    d.identity("Id")
    for n in range(4):
        d.proj_diag(f"Pn{n}", tuple(1 if k == n else 0 for k in range(4)))
    d.proj_ket("Pplus", "plus")
    d.proj_ket("Pminus", "minus")
    d.proj_sum("P", ("Pn0", "Pn1"))
    d.proj_sum("R", ("Pn2", "Pn3"))
    d.pdi("F1", ("P", "R"))
    d.pdi("F2", ("Pn0", "Pn1", "R"))
    d.pdi("F3", ("Pplus", "Pminus", "R"))
    d.family("groundcheck", "n0", ("t0", "t1"), ("Id",), ("F2",))
    d.queries(
        "validate",
        "compatible F1 F2",
        "compatible F1 F3",
        "compatible F2 F3",
        "refine F1 F2",
        "consistency groundcheck",
        "probs groundcheck",
    )
    expected = (
        Expectation(
            "compatible_F1_F2",
            lambda b: float(frameworks_compatible(b.pdis["F1"], b.pdis["F2"])),
            1.0, 0.0, "behavioral",
        ),
        Expectation(
            "compatible_F1_F3",
            lambda b: float(frameworks_compatible(b.pdis["F1"], b.pdis["F3"])),
            1.0, 0.0, "behavioral",
        ),
        Expectation(
            "compatible_F2_F3",
            lambda b: float(frameworks_compatible(b.pdis["F2"], b.pdis["F3"])),
            0.0, 0.0, "behavioral",
        ),
        Expectation(
            "refinement_F1_F2_equals_F2",
            lambda b: _pdi_match_distance(common_refinement(b.pdis["F1"], b.pdis["F2"]),
                                          b.pdis["F2"]),
            0.0, 1e-10,
        ),
        Expectation(
            "negation_P_is_n2_plus_n3",
            lambda b: float(np.linalg.norm(negation(b.projectors["P"]).mat
                                           - b.projectors["R"].mat)),
            0.0,
        ),
        Expectation(
            "event_algebra_F1_size",
            lambda b: float(len(event_algebra(b.pdis["F1"]))),
            4.0, 0.0, "behavioral",
        ),
        Expectation(
            "event_algebra_F2_size",
            lambda b: float(len(event_algebra(b.pdis["F2"]))),
            8.0, 0.0, "behavioral",
        ),
        Expectation(
            "P_in_F2_algebra",
            lambda b: float(event_algebra(b.pdis["F2"]).contains_projector(b.projectors["P"])),
            1.0, 0.0, "behavioral",
        ),
        Expectation(
            "Pplus_not_in_F2_algebra",
            lambda b: float(event_algebra(b.pdis["F2"]).contains_projector(b.projectors["Pplus"])),
            0.0, 0.0, "behavioral",
        ),
        Expectation(
            "groundcheck_prob_n0",
            lambda b: history_probabilities(b.families["groundcheck"]).entries[("Pn0",)],
            1.0,
        ),
    )
    return Scenario("oscillator-frameworks", 4, d.doc, expected)


def _measurement_model(c: tuple[float, float]) -> Scenario:
    c1, c2 = complex(c[0]), complex(c[1])
    psi0 = np.array([c1, 0, 0, c2, 0, 0], dtype=np.complex128)
    psi2 = np.array([0, c1, 0, 0, 0, c2], dtype=np.complex128)
    # pointer coupling on the basis products (particle j, apparatus k) at
    # composite index 3j + k: (j, 0) -> (j, j+1); the rest of the basis is
    # filled in lexicographic order to complete the permutation.
    mapping = {0: 1, 3: 5}
    free_targets = [t for t in range(6) if t not in mapping.values()]
    for s in range(6):
        if s not in mapping:
            mapping[s] = free_targets.pop(0)
    u2 = np.zeros((6, 6), dtype=np.complex128)
    for s, t in mapping.items():
        u2[t, s] = 1.0

    d = _Doc(6)
    d.ket("Psi0", tuple(psi0))
    d.ket("Psi2", tuple(psi2))
    comp1 = orthonormal_complement(Ket(psi0))
    comp2 = orthonormal_complement(Ket(psi2))
    for i, k in enumerate(comp1, start=1):
        d.ket(f"q{i}", tuple(k.vec))
    for i, k in enumerate(comp2, start=1):
        d.ket(f"r{i}", tuple(k.vec))
    d.identity("Id")
    d.unitary("U2", u2)
    d.proj_ket("PPsi1", "Psi0")
    d.proj_ket("PPsi2", "Psi2")
    for i in range(1, 6):
        d.proj_ket(f"Pq{i}", f"q{i}")
        d.proj_ket(f"Pr{i}", f"r{i}")
    d.proj_sum("CPsi1", tuple(f"Pq{i}" for i in range(1, 6)))
    d.proj_sum("CPsi2", tuple(f"Pr{i}" for i in range(1, 6)))
    d.proj_diag("Ps1", (1, 1, 1, 0, 0, 0))
    d.proj_diag("Ps2", (0, 0, 0, 1, 1, 1))
    d.proj_diag("M1", (0, 1, 0, 0, 1, 0))
    d.proj_diag("M2", (0, 0, 1, 0, 0, 1))
    d.proj_diag("Rrest", (1, 0, 0, 1, 0, 0))
    for j in (1, 2):
        for k in (0, 1, 2):
            bits = [0] * 6
            bits[3 * (j - 1) + k] = 1
            d.proj_diag(f"S{j}M{k}", bits)
    d.pdi("SPsi1", ("PPsi1", "CPsi1"))
    d.pdi("SPsi2", ("PPsi2", "CPsi2"))
    d.pdi("Sparticle", ("Ps1", "Ps2"))
    d.pdi("Spointer", ("M1", "M2", "Rrest"))
    d.pdi("Sfine", tuple(f"S{j}M{k}" for j in (1, 2) for k in (0, 1, 2)))
    times = ("t0", "t1", "t2")
    d.family("Fu", "Psi0", times, ("Id", "U2"), ("SPsi1", "SPsi2"))
    d.family("F1", "Psi0", times, ("Id", "U2"), ("SPsi1", "Spointer"))
    d.family("F2", "Psi0", times, ("Id", "U2"), ("Sparticle", "Spointer"))
    d.family("F3", "Psi0", times, ("Id", "U2"), ("SPsi1", "Sfine"))
    d.queries(
        "validate",
        "consistency Fu",
        "consistency F1",
        "consistency F2",
        "consistency F3",
        "probs Fu",
        "probs F2",
        "joint F2 t1 t2",
        "marginal F2 t1",
        "marginal F2 t2",
        "condition F2 t1=Ps1 given t2=M1",
        "condition F2 t1=Ps2 given t2=M2",
        "compatible SPsi2 Spointer",
        "classify Fu F1",
        "classify F1 F2",
        "classify F1 F3",
    )

    p = (abs(c1) ** 2, abs(c2) ** 2)
    both_nonzero = p[0] > 1e-12 and p[1] > 1e-12
    expected = [
        Expectation(
            "F2_consistent",
            lambda b: consistency_check(b.families["F2"]).max_overlap,
            0.0,
        ),
        Expectation(
            "Fu_unitary_history_prob_1",
            lambda b: history_probabilities(b.families["Fu"]).entries[("PPsi1", "PPsi2")],
            1.0,
        ),
        Expectation(
            "Fu_other_histories_prob_0",
            lambda b: max(
                v for k, v in history_probabilities(b.families["Fu"]).entries.items()
                if k != ("PPsi1", "PPsi2")
            ),
            0.0,
        ),
        Expectation(
            "Fu_pointer_refinement_compatible",
            lambda b: float(frameworks_compatible(b.pdis["SPsi2"], b.pdis["Spointer"])),
            0.0 if both_nonzero else 1.0, 0.0, "behavioral",
        ),
    ]
    for j, pj in ((1, p[0]), (2, p[1])):
        for k, pk in ((1, p[0]), (2, p[1])):
            want = pj if j == k else 0.0
            expected.append(
                Expectation(
                    f"joint_s{j}_m{k}",
                    lambda b, j=j, k=k: joint_distribution(b.families["F2"], "t1", "t2")
                    .entries[(f"Ps{j}", f"M{k}")],
                    want,
                )
            )
    for j, pj in ((1, p[0]), (2, p[1])):
        expected.append(
            Expectation(
                f"marginal_particle_s{j}",
                lambda b, j=j: marginal(b.families["F2"], "t1").entries[f"Ps{j}"],
                pj,
            )
        )
        expected.append(
            Expectation(
                f"marginal_pointer_m{j}",
                lambda b, j=j: marginal(b.families["F2"], "t2").entries[f"M{j}"],
                pj,
            )
        )
        expected.append(
            Expectation(
                f"preprobability_pointer_m{j}",
                lambda b, j=j: probability_via_preprobability(
                    b.kets["Psi2"], b.projectors[f"M{j}"]
                ),
                pj,
            )
        )
        expected.append(
            Expectation(
                f"pointer_route_agreement_m{j}",
                lambda b, j=j: abs(
                    marginal(b.families["F1"], "t2").entries[f"M{j}"]
                    - probability_via_preprobability(b.kets["Psi2"], b.projectors[f"M{j}"])
                ),
                0.0,
            )
        )
    for j in (1, 2):
        pj = p[j - 1]
        if pj <= 1e-12:
            continue
        for k in (1, 2):
            expected.append(
                Expectation(
                    f"retrodiction_s{k}_given_m{j}",
                    lambda b, j=j, k=k: conditional(
                        b.families["F2"],
                        Event("t1", {f"Ps{k}"}),
                        Event("t2", {f"M{j}"}),
                    ),
                    1.0 if j == k else 0.0,
                )
            )
            expected.append(
                Expectation(
                    f"collapse_s{k}_given_m{j}",
                    lambda b, j=j, k=k: conditional(
                        b.families["F3"],
                        Event("t2", {f"S{k}M0", f"S{k}M1", f"S{k}M2"}),
                        Event("t2", {f"S1M{j}", f"S2M{j}"}),
                    ),
                    1.0 if j == k else 0.0,
                )
            )
    return Scenario(
        "measurement-model", 6, d.doc, tuple(expected), {"c": (complex(c1), complex(c2))}
    )


def _singlet_epr() -> Scenario:
    d = _Doc(4)
    d.ket("singlet", (0, _R, -_R, 0))
    d.identity("Id")
    labels = ("Pzpzp", "Pzpzm", "Pzmzp", "Pzmzm")
    for i, name in enumerate(labels):
        d.proj_diag(name, tuple(1 if k == i else 0 for k in range(4)))
    d.pdi("Sab", labels)
    d.family("epr", "singlet", ("t0", "t1"), ("Id",), ("Sab",))
    d.queries(
        "validate",
        "consistency epr",
        "probs epr",
        "marginal epr t1",
        "joint epr t1 t1",
        "condition epr t1=Pzpzm given t1=Pzpzm",
    )
    table = {"Pzpzp": 0.0, "Pzpzm": 0.5, "Pzmzp": 0.5, "Pzmzm": 0.0}
    expected = [
        Expectation(
            f"prob_{name}",
            lambda b, name=name: marginal(b.families["epr"], "t1").entries[name],
            want,
        )
        for name, want in table.items()
    ]
    expected.append(
        Expectation(
            "conditional_bminus_given_aplus",
            lambda b: conditional(
                b.families["epr"],
                Event("t1", {"Pzpzm", "Pzmzm"}),
                Event("t1", {"Pzpzp", "Pzpzm"}),
            ),
            1.0,
        )
    )
    expected.append(
        Expectation(
            "conditional_bplus_given_aminus",
            lambda b: conditional(
                b.families["epr"],
                Event("t1", {"Pzpzp", "Pzmzp"}),
                Event("t1", {"Pzmzp", "Pzmzm"}),
            ),
            1.0,
        )
    )
    for side, labels_half in (("a_plus", {"Pzpzp", "Pzpzm"}), ("a_minus", {"Pzmzp", "Pzmzm"}),
                              ("b_plus", {"Pzpzp", "Pzmzp"}), ("b_minus", {"Pzpzm", "Pzmzm"})):
        expected.append(
            Expectation(
                f"marginal_{side}",
                lambda b, ls=labels_half: _event_mass(
                    history_probabilities(b.families["epr"]), 0, ls
                ),
                0.5,
            )
        )
    return Scenario("singlet-epr", 4, d.doc, tuple(expected))


def _mach_zehnder_toy() -> Scenario:
    d = _Doc(2)
    d.ket("in0", (1, 0))
    d.ket("in1", (0, 1))
    d.unitary("BS", np.array([[_R, _R], [_R, -_R]]))
    d.proj_diag("Path0", (1, 0))
    d.proj_diag("Path1", (0, 1))
    d.proj_diag("Anywhere", (1, 1))
    d.pdi("Spath", ("Path0", "Path1"))
    d.pdi("Striv", ("Anywhere",))
    times = ("t0", "t1", "t2")
    d.family("whichpath", "in0", times, ("BS", "BS"), ("Spath", "Spath"))
    d.family("interfere", "in0", times, ("BS", "BS"), ("Striv", "Spath"))
    d.queries(
        "validate",
        "consistency whichpath",
        "consistency interfere",
        "probs interfere",
    )
    expected = (
        Expectation(
            "whichpath_max_overlap",
            lambda b: consistency_check(b.families["whichpath"]).max_overlap,
            0.25,
        ),
        Expectation(
            "whichpath_probabilities_rejected",
            _raises(lambda b: history_probabilities(b.families["whichpath"]), Inconsistent),
            1.0, 0.0, "behavioral",
        ),
        Expectation(
            "interfere_consistent",
            lambda b: consistency_check(b.families["interfere"]).max_overlap,
            0.0,
        ),
        Expectation(
            "interfere_exit_port0",
            lambda b: history_probabilities(b.families["interfere"])
            .entries[("Anywhere", "Path0")],
            1.0,
        ),
        Expectation(
            "interfere_exit_port1",
            lambda b: history_probabilities(b.families["interfere"])
            .entries[("Anywhere", "Path1")],
            0.0,
        ),
    )
    return Scenario("mach-zehnder-toy", 2, d.doc, expected)
