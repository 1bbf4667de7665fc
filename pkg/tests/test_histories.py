import numpy as np
import pytest

from histories_lab.errors import (
    BadLabel,
    DimensionMismatch,
    Inconsistent,
    InvalidSlot,
    NotNormalized,
    NotUnitary,
)
from histories_lab.numerics import Ket, Operator
from histories_lab.qlogic import Projector, projector_from_ket, validate_pdi
from histories_lab.histories import (
    StepUnitaries,
    Y0,
    backward_pre_probability,
    born_probability,
    chain_ket,
    consistency_check,
    evolve,
    history_probabilities,
    make_family,
    probability_via_preprobability,
)

from helpers import (
    evolved_basis_family,
    random_basis,
    random_state,
    random_unitary,
    rank1_pdi,
)

R = 1 / np.sqrt(2)

ZP_KET = Ket([1, 0])
XP_KET = Ket([R, R])
SZ = validate_pdi([projector_from_ket(Ket([1, 0]), "zp"), projector_from_ket(Ket([0, 1]), "zm")])
SX = validate_pdi([projector_from_ket(Ket([R, R]), "xp"), projector_from_ket(Ket([R, -R]), "xm")])
EYE = Operator.identity(2)


def minimal_family():
    return make_family(ZP_KET, ("t0", "t1"), (EYE,), (SZ,))


def quarter_overlap_family():
    """psi0 = |x+>, slots z-basis then x-basis, trivial steps."""
    return make_family(XP_KET, ("t0", "t1", "t2"), (EYE, EYE), (SZ, SX))


def test_make_family_minimal_sample_space():
    fam = minimal_family()
    assert fam.elementary_labels() == [("zp",), ("zm",)]
    space = fam.sample_space()
    assert len(space) == 3 and space[-1] is Y0


def test_make_family_rejects_unnormalized_initial():
    with pytest.raises(NotNormalized):
        make_family(Ket([1, 1]), ("t0", "t1"), (EYE,), (SZ,))


def test_make_family_rejects_dim_mismatch():
    slot3 = validate_pdi([Projector(Operator(np.diag([1, 0, 0]).astype(complex)), "a"),
                          Projector(Operator(np.diag([0, 1, 1]).astype(complex)), "b")])
    with pytest.raises(DimensionMismatch):
        make_family(ZP_KET, ("t0", "t1"), (EYE,), (slot3,))


def test_make_family_rejects_non_unitary_step():
    with pytest.raises(NotUnitary) as err:
        make_family(ZP_KET, ("t0", "t1"), (Operator([[1, 0], [0, 0.5]]),), (SZ,))
    assert err.value.index == 1


def test_make_family_slot_count():
    with pytest.raises(InvalidSlot):
        make_family(ZP_KET, ("t0", "t1", "t2"), (EYE, EYE), (SZ,))


def test_chain_kets_orthogonal_basis_case():
    fam = minimal_family()
    np.testing.assert_allclose(chain_ket(fam, ("zp",)).vec, [1, 0], atol=1e-15)
    np.testing.assert_allclose(chain_ket(fam, ("zm",)).vec, [0, 0], atol=1e-15)


def test_chain_ket_hand_computed_half():
    # [z+]|x+> = |z+>/sqrt(2), then [x+]|z+> = |x+>/sqrt(2): net (1/2)|x+>
    fam = quarter_overlap_family()
    got = chain_ket(fam, ("zp", "xp"))
    np.testing.assert_allclose(got.vec, 0.5 * XP_KET.vec, atol=1e-15)


def test_chain_ket_y0_vanishes_for_pure_initial():
    fam = minimal_family()
    assert chain_ket(fam, Y0).norm() < 1e-14


def test_chain_ket_bad_labels():
    fam = minimal_family()
    with pytest.raises(BadLabel):
        chain_ket(fam, ("nope",))
    with pytest.raises(BadLabel):
        chain_ket(fam, ("zp", "zp"))


def test_two_time_families_auto_consistent(rng):
    for _ in range(20):
        dim = int(rng.integers(2, 9))
        fam = make_family(
            random_state(rng, dim), ("t0", "t1"), (random_unitary(rng, dim),),
            (rank1_pdi(random_basis(rng, dim)),),
        )
        rep = consistency_check(fam)
        assert rep.consistent
        assert rep.max_overlap <= 1e-12 * dim


def test_quarter_overlap_family_inconsistent():
    rep = consistency_check(quarter_overlap_family())
    assert not rep.consistent
    assert rep.max_overlap == pytest.approx(0.25, abs=1e-12)
    labels = set(rep.worst_pair)
    assert labels in ({("zp", "xp"), ("zm", "xp")}, {("zp", "xm"), ("zm", "xm")})


def test_history_probabilities_minimal():
    table = history_probabilities(minimal_family())
    assert table[("zp",)] == pytest.approx(1.0, abs=1e-12)
    assert table[("zm",)] == pytest.approx(0.0, abs=1e-12)
    assert table[Y0] == pytest.approx(0.0, abs=1e-12)
    assert table.total() == pytest.approx(1.0, abs=1e-12)


def test_history_probabilities_rejects_inconsistent():
    with pytest.raises(Inconsistent) as err:
        history_probabilities(quarter_overlap_family())
    assert err.value.report.max_overlap == pytest.approx(0.25, abs=1e-12)


def test_two_time_reduces_to_born(rng):
    for _ in range(10):
        dim = int(rng.integers(2, 7))
        psi = random_state(rng, dim)
        u = random_unitary(rng, dim)
        basis = random_basis(rng, dim)
        fam = make_family(psi, ("t0", "t1"), (u,), (rank1_pdi(basis),))
        table = history_probabilities(fam)
        for k in range(dim):
            born = born_probability(psi, u, Ket(basis[:, k]))
            assert table[(f"e{k}",)] == pytest.approx(born, abs=1e-12)


def test_born_probability_basics():
    assert born_probability(ZP_KET, EYE, ZP_KET) == pytest.approx(1.0)
    assert born_probability(ZP_KET, EYE, XP_KET) == pytest.approx(0.5, abs=1e-15)


def test_born_probability_sums_to_one_over_basis(rng):
    dim = 5
    psi = random_state(rng, dim)
    u = random_unitary(rng, dim)
    basis = random_basis(rng, dim)
    total = sum(born_probability(psi, u, Ket(basis[:, k])) for k in range(dim))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_born_probability_validates_inputs():
    with pytest.raises(NotNormalized):
        born_probability(Ket([1, 1]), EYE, ZP_KET)
    with pytest.raises(NotUnitary):
        born_probability(ZP_KET, Operator([[1, 0], [0, 0.5]]), ZP_KET)


def test_backward_equals_forward(rng):
    for _ in range(20):
        dim = int(rng.integers(2, 7))
        psi = random_state(rng, dim)
        u = random_unitary(rng, dim)
        phi = random_state(rng, dim)
        assert backward_pre_probability(psi, u, phi) == pytest.approx(
            born_probability(psi, u, phi), abs=1e-12
        )


def test_backward_trivial_cases():
    assert backward_pre_probability(ZP_KET, EYE, ZP_KET) == pytest.approx(1.0)
    assert backward_pre_probability(ZP_KET, EYE, Ket([0, 1])) == pytest.approx(0.0)


def test_evolve_identity_at_start(rng):
    psi = random_state(rng, 3)
    steps = StepUnitaries(("t0", "t1"), (random_unitary(rng, 3),))
    np.testing.assert_allclose(evolve(psi, steps, "t0").vec, psi.vec)


def test_evolve_composition(rng):
    psi = random_state(rng, 4)
    u1, u2 = random_unitary(rng, 4), random_unitary(rng, 4)
    steps = StepUnitaries(("t0", "t1", "t2"), (u1, u2))
    direct = u2.mat @ (u1.mat @ psi.vec)
    np.testing.assert_allclose(evolve(psi, steps, "t2").vec, direct, atol=1e-14)
    with pytest.raises(BadLabel):
        evolve(psi, steps, "t9")


def test_preprobability_range_and_values():
    psi = XP_KET
    assert probability_via_preprobability(psi, projector_from_ket(ZP_KET, "zp")) == \
        pytest.approx(0.5, abs=1e-15)
    ident = Projector(Operator(np.eye(2, dtype=complex)), "I")
    assert probability_via_preprobability(psi, ident) == pytest.approx(1.0, abs=1e-15)
    orth = projector_from_ket(Ket([R, -R]), "xm")
    assert probability_via_preprobability(psi, orth) == pytest.approx(0.0, abs=1e-15)


def test_chain_kets_resolve_identity_even_when_inconsistent(rng):
    # sum of <alpha|alpha> is 1 for any family, consistent or not
    for _ in range(10):
        dim = int(rng.integers(2, 5))
        slots = []
        for _m in range(2):
            slots.append(rank1_pdi(random_basis(rng, dim), prefix=f"m{_m}_"))
        fam = make_family(
            random_state(rng, dim), ("t0", "t1", "t2"),
            (random_unitary(rng, dim), random_unitary(rng, dim)), slots,
        )
        total = sum(k.norm() ** 2 for k in fam.chain_kets().values())
        assert total == pytest.approx(1.0, abs=1e-12)


def test_trivial_slot_insertion_is_inert(rng):
    fam, _ = evolved_basis_family(rng, 4, 1)
    ident_slot = validate_pdi([Projector(Operator(np.eye(4, dtype=complex)), "all")])
    padded = make_family(
        fam.initial, ("t0", "tmid", "t1"),
        (Operator.identity(4), fam.steps.step(1)),
        (ident_slot, fam.slots[0]),
    )
    base = history_probabilities(fam)
    with_pad = history_probabilities(padded)
    assert consistency_check(padded).consistent
    for alpha, p in base.entries.items():
        if alpha is Y0:
            continue
        assert with_pad[("all",) + alpha] == pytest.approx(p, abs=1e-12)


def test_refine_then_marginalize_recovers_coarse(rng):
    from helpers import blocks_pdi, evolved_bases, random_partition, split_blocks

    for _ in range(5):
        dim = int(rng.integers(3, 6))
        psi = random_state(rng, dim)
        steps = [random_unitary(rng, dim), random_unitary(rng, dim)]
        bases = evolved_bases(steps, random_basis(rng, dim))
        coarse_blocks = [random_partition(rng, dim, max_blocks=2) for _ in range(2)]
        fine_blocks = [split_blocks(rng, b) for b in coarse_blocks]
        coarse_slots, fine_slots, parents = [], [], []
        for m in range(2):
            cs, cmap = blocks_pdi(bases[m], coarse_blocks[m], f"c{m}_")
            fs, fmap = blocks_pdi(bases[m], fine_blocks[m], f"f{m}_")
            coarse_slots.append(cs)
            fine_slots.append(fs)
            parent = {}
            for fl, fidx in fmap.items():
                for cl, cidx in cmap.items():
                    if fidx <= cidx:
                        parent[fl] = cl
            parents.append(parent)
        grid = ("t0", "t1", "t2")
        coarse_fam = make_family(psi, grid, steps, coarse_slots)
        fine_fam = make_family(psi, grid, steps, fine_slots)
        coarse_table = history_probabilities(coarse_fam)
        fine_table = history_probabilities(fine_fam)
        rollup: dict = {}
        for alpha, p in fine_table.entries.items():
            if alpha is Y0:
                continue
            key = tuple(parents[m][alpha[m]] for m in range(2))
            rollup[key] = rollup.get(key, 0.0) + p
        for alpha, p in coarse_table.entries.items():
            if alpha is Y0:
                continue
            assert rollup.get(alpha, 0.0) == pytest.approx(p, abs=1e-12)


def test_evolved_basis_families_consistent(rng):
    for _ in range(10):
        dim = int(rng.integers(2, 6))
        f = int(rng.integers(1, 4))
        fam, _ = evolved_basis_family(rng, dim, f)
        assert consistency_check(fam).consistent
