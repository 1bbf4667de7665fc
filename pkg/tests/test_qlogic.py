import numpy as np
import pytest

from histories_lab.errors import (
    Incompatible,
    Incomplete,
    Meaningless,
    NotNormalized,
    NotOrthogonal,
    NotProjector,
    TooLarge,
)
from histories_lab.numerics import Ket, Operator, hermitian_eigensystem
from histories_lab.qlogic import (
    Projector,
    common_refinement,
    commutator_norm,
    conjunction,
    disjunction,
    event_algebra,
    frameworks_compatible,
    intersection_projector,
    negation,
    observable_decomposition,
    projector_from_ket,
    validate_pdi,
)

from helpers import random_basis, random_partition, blocks_pdi

R = 1 / np.sqrt(2)

ZP = projector_from_ket(Ket([1, 0]), "zp")
ZM = projector_from_ket(Ket([0, 1]), "zm")
XP = projector_from_ket(Ket([R, R]), "xp")
XM = projector_from_ket(Ket([R, -R]), "xm")


def diag_proj(bits, label):
    return Projector(Operator(np.diag(np.array(bits, dtype=complex))), label)


def test_projector_from_ket_standard_basis():
    np.testing.assert_allclose(ZP.mat, [[1, 0], [0, 0]])
    assert ZP.trace() == pytest.approx(1.0)


def test_projector_from_ket_superposition():
    # outer product of (1,1)/sqrt(2) with itself: all entries 1/2
    np.testing.assert_allclose(XP.mat, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)


def test_projector_from_ket_rejects_zero_vector():
    with pytest.raises(NotNormalized):
        projector_from_ket(Ket([0, 0]), "null")


def test_projector_validation():
    with pytest.raises(NotProjector):
        Projector(Operator([[0, 1], [0, 0]]), "skew")
    with pytest.raises(NotProjector):
        Projector(Operator([[2, 0], [0, 0]]), "stretch")


def test_negation_spin():
    assert np.linalg.norm(negation(ZP).mat - ZM.mat) == 0.0


def test_negation_oscillator_complement():
    # "energy below the gap" on a 4-level truncation: complement is levels 2 and 3
    p = diag_proj([1, 1, 0, 0], "low")
    want = diag_proj([0, 0, 1, 1], "high")
    assert np.array_equal(negation(p).mat, want.mat)


def test_negation_identity_gives_zero():
    ident = diag_proj([1, 1], "I")
    assert np.array_equal(negation(ident).mat, np.zeros((2, 2)))


def test_double_negation_exact():
    for p in (ZP, XP, diag_proj([1, 0, 1, 0], "alt")):
        again = negation(negation(p))
        assert np.array_equal(again.mat, p.mat)
        assert again.label == p.label


def test_conjunction_orthogonal_pair_is_false_not_meaningless():
    out = conjunction(ZP, ZM)
    assert np.array_equal(out.mat, np.zeros((2, 2)))


def test_conjunction_indicator_overlap():
    p = diag_proj([1, 1, 0, 0], "p01")
    q = diag_proj([0, 1, 1, 0], "q12")
    np.testing.assert_allclose(conjunction(p, q).mat, np.diag([0, 1, 0, 0]), atol=1e-15)


def test_conjunction_noncommuting_meaningless():
    # [z+][x+] = [[.5,.5],[0,0]] while [x+][z+] is its transpose; commutator
    # norm sqrt(1/2)
    with pytest.raises(Meaningless) as err:
        conjunction(ZP, XP)
    assert err.value.commutator_norm == pytest.approx(np.sqrt(0.5), abs=1e-12)


def test_disjunction_complementary_pair():
    np.testing.assert_allclose(disjunction(ZP, ZM).mat, np.eye(2), atol=1e-15)


def test_disjunction_indicator_union():
    p = diag_proj([1, 1, 0, 0], "p01")
    q = diag_proj([0, 1, 1, 0], "q12")
    np.testing.assert_allclose(disjunction(p, q).mat, np.diag([1, 1, 1, 0]), atol=1e-15)


def test_disjunction_noncommuting_meaningless():
    with pytest.raises(Meaningless):
        disjunction(ZP, XP)


def test_conjunction_symmetric_on_commuting(rng):
    basis = random_basis(rng, 4)
    pdi, _ = blocks_pdi(basis, [[0, 1], [2], [3]], "b")
    p, q = pdi.elements[0], pdi.elements[1]
    left, right = conjunction(p, q), conjunction(q, p)
    assert np.linalg.norm(left.mat - right.mat) < 1e-12


def test_intersection_matches_conjunction_when_commuting(rng):
    for _ in range(10):
        dim = int(rng.integers(2, 6))
        basis = random_basis(rng, dim)
        s1 = set(map(int, rng.choice(dim, size=max(1, dim // 2), replace=False)))
        s2 = set(map(int, rng.choice(dim, size=max(1, dim // 2), replace=False)))
        mk = lambda s, name: Projector(
            Operator(sum(np.outer(basis[:, k], basis[:, k].conj()) for k in s)
                     if s else np.zeros((dim, dim), dtype=complex)),
            name,
        )
        p, q = mk(s1, "p"), mk(s2, "q")
        got = conjunction(p, q)
        oracle = intersection_projector(p, q)
        indicator = mk(s1 & s2, "both")
        assert np.linalg.norm(got.mat - oracle.mat) < 1e-10 * dim
        assert np.linalg.norm(got.mat - indicator.mat) < 1e-10 * dim


def test_intersection_of_skew_rays_is_zero():
    # eigenvalues of [z+]+[x+] are 1 +/- 1/sqrt(2): no eigenvalue-2 subspace
    evals, _ = hermitian_eigensystem(Operator(ZP.mat + XP.mat))
    np.testing.assert_allclose(evals, [1 - R, 1 + R], atol=1e-12)
    out = intersection_projector(ZP, XP)
    assert np.linalg.norm(out.mat) < 1e-12


def test_intersection_with_identity():
    ident = diag_proj([1, 1], "I")
    out = intersection_projector(ident, ZP)
    np.testing.assert_allclose(out.mat, ZP.mat, atol=1e-12)


def test_validate_pdi_accepts_spin_pair():
    pdi = validate_pdi([ZP, ZM])
    assert pdi.labels == ("zp", "zm")


def test_validate_pdi_accepts_coarse_oscillator():
    pdi = validate_pdi(
        [diag_proj([1, 0, 0, 0], "n0"), diag_proj([0, 1, 0, 0], "n1"),
         diag_proj([0, 0, 1, 1], "rest")]
    )
    assert len(pdi) == 3


def test_validate_pdi_rejects_skew_pair():
    with pytest.raises(NotOrthogonal):
        validate_pdi([ZP, XP])


def test_validate_pdi_incomplete():
    with pytest.raises(Incomplete):
        validate_pdi([diag_proj([1, 0, 0, 0], "n0"), diag_proj([0, 1, 0, 0], "n1")])


def test_validate_pdi_rejects_zero_element():
    with pytest.raises(NotProjector):
        validate_pdi([diag_proj([1, 1], "I"), diag_proj([0, 0], "zero")])


def test_observable_decomposition_spin_z():
    obs = observable_decomposition(Operator([[0.5, 0], [0, -0.5]]))
    assert obs.eigenvalues == pytest.approx((-0.5, 0.5))
    np.testing.assert_allclose(obs.pairs[0][1].mat, ZM.mat, atol=1e-12)
    np.testing.assert_allclose(obs.pairs[1][1].mat, ZP.mat, atol=1e-12)


def test_observable_decomposition_identity_single_block():
    obs = observable_decomposition(Operator.identity(3))
    assert len(obs.pairs) == 1
    np.testing.assert_allclose(obs.pairs[0][1].mat, np.eye(3), atol=1e-12)


def test_observable_decomposition_degenerate_grouping():
    obs = observable_decomposition(Operator(np.diag([1.0, 1.0, 2.0])))
    assert len(obs.pairs) == 2
    np.testing.assert_allclose(obs.pairs[0][1].mat, np.diag([1, 1, 0]), atol=1e-12)
    np.testing.assert_allclose(obs.pairs[1][1].mat, np.diag([0, 0, 1]), atol=1e-12)


def test_observable_reconstruction(rng):
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m = Operator(a + a.conj().T)
    obs = observable_decomposition(m)
    assert np.linalg.norm(obs.reconstruct().mat - m.mat) <= 1e-10 * 5
    assert obs.decomposition().dim == 5


OSC = {
    "P": diag_proj([1, 1, 0, 0], "P"),
    "R": diag_proj([0, 0, 1, 1], "R"),
    "n0": diag_proj([1, 0, 0, 0], "n0"),
    "n1": diag_proj([0, 1, 0, 0], "n1"),
    "plus": projector_from_ket(Ket([R, R, 0, 0]), "plus"),
    "minus": projector_from_ket(Ket([R, -R, 0, 0]), "minus"),
}

F1 = validate_pdi([OSC["P"], OSC["R"]])
F2 = validate_pdi([OSC["n0"], OSC["n1"], OSC["R"]])
F3 = validate_pdi([OSC["plus"], OSC["minus"], OSC["R"]])


def test_frameworks_compatible_reflexive():
    assert frameworks_compatible(F2, F2)


def test_framework_compatibility_matrix():
    assert frameworks_compatible(F1, F2)
    assert frameworks_compatible(F1, F3)
    assert not frameworks_compatible(F2, F3)
    assert not frameworks_compatible(F3, F2)


def test_common_refinement_of_coarse_and_fine():
    refined = common_refinement(F1, F2)
    assert len(refined) == 3
    for got, want in zip(refined, F2):
        assert np.linalg.norm(got.mat - want.mat) < 1e-10


def test_common_refinement_idempotent():
    refined = common_refinement(F2, F2)
    assert len(refined) == 3
    for got, want in zip(refined, F2):
        assert np.linalg.norm(got.mat - want.mat) < 1e-12


def test_common_refinement_incompatible_raises():
    with pytest.raises(Incompatible):
        common_refinement(F2, F3)


def test_refinement_refines_both_inputs(rng):
    basis = random_basis(rng, 5)
    s1, _ = blocks_pdi(basis, random_partition(rng, 5), "a")
    s2, _ = blocks_pdi(basis, random_partition(rng, 5), "b")
    refined = common_refinement(s1, s2)
    for original in (s1, s2):
        for p in original:
            parts = [q.mat for q in refined if np.linalg.norm(p.mat @ q.mat) > 1e-8]
            assert np.linalg.norm(sum(parts) - p.mat) < 1e-10 * 5


def test_event_algebra_spin():
    alg = event_algebra(validate_pdi([ZP, ZM]))
    assert len(alg) == 4
    assert np.linalg.norm(alg.projector_for(()).mat) == 0.0
    np.testing.assert_allclose(alg.projector_for(("zp", "zm")).mat, np.eye(2), atol=1e-15)


def test_event_algebra_sizes():
    assert len(event_algebra(F1)) == 4
    assert len(event_algebra(F2)) == 8


def test_event_algebra_membership():
    alg = event_algebra(F2)
    assert alg.contains_projector(OSC["P"])
    assert not alg.contains_projector(OSC["plus"])


def test_event_algebra_too_large():
    basis = np.eye(17)
    pdi, _ = blocks_pdi(basis, [[k] for k in range(17)], "e")
    with pytest.raises(TooLarge):
        event_algebra(pdi)


def test_event_algebra_mutually_commuting(rng):
    basis = random_basis(rng, 4)
    pdi, _ = blocks_pdi(basis, random_partition(rng, 4), "e")
    alg = event_algebra(pdi)
    for _, p in alg.elements:
        for _, q in alg.elements:
            assert commutator_norm(p, q) < 1e-10 * 4


def test_de_morgan_on_commuting_pairs(rng):
    for _ in range(20):
        dim = int(rng.integers(2, 6))
        basis = random_basis(rng, dim)
        bits1 = rng.integers(0, 2, size=dim)
        bits2 = rng.integers(0, 2, size=dim)
        mk = lambda bits, name: Projector(
            Operator(sum(b * np.outer(basis[:, k], basis[:, k].conj())
                         for k, b in enumerate(bits))),
            name,
        )
        p, q = mk(bits1, "p"), mk(bits2, "q")
        lhs = negation(disjunction(p, q))
        rhs = conjunction(negation(p), negation(q))
        assert np.linalg.norm(lhs.mat - rhs.mat) < 1e-10 * dim


def test_meaningless_symmetry():
    for op in (conjunction, disjunction):
        with pytest.raises(Meaningless):
            op(ZP, XP)
        with pytest.raises(Meaningless):
            op(XP, ZP)
