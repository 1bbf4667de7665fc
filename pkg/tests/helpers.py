"""Random constructions shared across the test modules.

The evolved-basis family generator is the workhorse: slot m groups the
rank-1 projectors of the step-evolved image of one fixed random basis, so
the chain kets of distinct histories select disjoint basis lines and the
family is consistent for *any* grouping at every time.  That gives a
supply of nontrivial consistent multi-time families without search.
"""

import numpy as np

from histories_lab.histories import make_family
from histories_lab.numerics import Ket, Operator
from histories_lab.qlogic import Projector, validate_pdi


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return Ket(v / np.linalg.norm(v))


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return Operator(q * (d / np.abs(d)))


def random_basis(rng, dim):
    """Columns form a random orthonormal basis."""
    return random_unitary(rng, dim).mat


def rank1_pdi(basis, prefix="e"):
    projs = [
        Projector(Operator(np.outer(basis[:, k], basis[:, k].conj())), f"{prefix}{k}")
        for k in range(basis.shape[1])
    ]
    return validate_pdi(projs)


def blocks_pdi(basis, blocks, prefix):
    """PDI whose elements sum the rank-1 projectors of the given index blocks.

    Returns (pdi, mapping label -> frozenset of basis indices).
    """
    projs = []
    mapping = {}
    for i, blk in enumerate(blocks):
        total = np.zeros((basis.shape[0], basis.shape[0]), dtype=np.complex128)
        for k in blk:
            total += np.outer(basis[:, k], basis[:, k].conj())
        label = f"{prefix}{i}"
        projs.append(Projector(Operator(total), label))
        mapping[label] = frozenset(blk)
    return validate_pdi(projs), mapping


def random_partition(rng, n, max_blocks=None):
    nb = int(rng.integers(1, (max_blocks or n) + 1))
    assignment = rng.integers(0, nb, size=n)
    blocks: dict[int, list[int]] = {}
    for idx, a in enumerate(assignment):
        blocks.setdefault(int(a), []).append(idx)
    return [sorted(b) for b in blocks.values()]


def split_blocks(rng, blocks):
    """A random refinement of a partition (splits some blocks further)."""
    out = []
    for blk in blocks:
        if len(blk) > 1 and rng.random() < 0.7:
            nb = int(rng.integers(1, len(blk) + 1))
            asg = rng.integers(0, nb, size=len(blk))
            sub: dict[int, list[int]] = {}
            for x, a in zip(blk, asg):
                sub.setdefault(int(a), []).append(x)
            out.extend(sorted(s) for s in sub.values())
        else:
            out.append(list(blk))
    return out


def evolved_bases(steps, basis):
    """Basis for each slot time: B at t1, then carried by each later step."""
    bases = [basis]
    for u in steps[1:]:
        bases.append(u.mat @ bases[-1])
    return bases


def evolved_basis_family(rng, dim, f, prefix="s", partitions=None):
    """A random consistent family (see module docstring).

    Returns (family, per-slot mapping label -> basis index set).
    """
    psi0 = random_state(rng, dim)
    steps = [random_unitary(rng, dim) for _ in range(f)]
    bases = evolved_bases(steps, random_basis(rng, dim))
    slots, maps = [], []
    for m, bm in enumerate(bases, start=1):
        blocks = partitions[m - 1] if partitions is not None else random_partition(rng, dim)
        pdi, mapping = blocks_pdi(bm, blocks, f"{prefix}{m}_")
        slots.append(pdi)
        maps.append(mapping)
    grid = tuple(f"t{k}" for k in range(f + 1))
    return make_family(psi0, grid, steps, slots), maps


def shared_coarse_pair(rng, dim, f):
    """Two consistent families refining the same coarse partitions.

    Returns (fam_f, fam_g, coarse_events) where coarse_events[m] is a list
    of (labels_in_f, coarse_index_set) for each coarse block at slot m.
    """
    psi0 = random_state(rng, dim)
    steps = [random_unitary(rng, dim) for _ in range(f)]
    bases = evolved_bases(steps, random_basis(rng, dim))
    slots_f, slots_g, coarse_events = [], [], []
    for m, bm in enumerate(bases, start=1):
        coarse = random_partition(rng, dim, max_blocks=min(3, dim))
        bf = split_blocks(rng, coarse)
        bg = split_blocks(rng, coarse)
        pdi_f, map_f = blocks_pdi(bm, bf, f"f{m}_")
        pdi_g, _ = blocks_pdi(bm, bg, f"g{m}_")
        slots_f.append(pdi_f)
        slots_g.append(pdi_g)
        events = []
        for blk in coarse:
            blk_set = frozenset(blk)
            labels = frozenset(l for l, idx in map_f.items() if idx <= blk_set)
            events.append((labels, blk_set))
        coarse_events.append(events)
    grid = tuple(f"t{k}" for k in range(f + 1))
    fam_f = make_family(psi0, grid, steps, slots_f)
    fam_g = make_family(psi0, grid, steps, slots_g)
    return fam_f, fam_g, coarse_events
