"""Dense complex linear algebra at desk scale (dimensions up to a few dozen).

``Ket`` and ``Operator`` are thin immutable wrappers around complex128
numpy arrays.  Scalars are plain Python/numpy complex numbers.  Tolerances
are ordinary floats; matrix comparisons scale the tolerance by the
dimension because rounding accumulates with size.

The composite index convention for tensor products is row-major with the
left factor slowest: entry ((i*dB + k), (j*dB + l)) of ``A (x) B`` equals
``A[i, j] * B[k, l]`` (this is what ``numpy.kron`` does).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotNormalized

DEFAULT_TOL = 1e-10

__all__ = [
    "DEFAULT_TOL",
    "Ket",
    "Operator",
    "approx_equal",
    "frobenius",
    "hermitian_eigensystem",
    "ket_tensor",
    "orthonormal_complement",
    "tensor_product",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _as_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"ket needs a nonempty 1-d amplitude vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("ket amplitudes must be finite")
    return _freeze(v.copy())


def _as_matrix(values) -> np.ndarray:
    m = np.asarray(values, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"operator needs a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("operator entries must be finite")
    return _freeze(m.copy())


@dataclass(eq=False)
class Ket:
    """A vector in the single-time space.  Not necessarily normalized:
    chain kets are legitimately sub-normalized or zero."""

    vec: np.ndarray

    def __post_init__(self):
        self.vec = _as_vector(self.vec)

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    @staticmethod
    def basis(dim: int, index: int) -> "Ket":
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return Ket(v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def inner(self, other: "Ket") -> complex:
        """<self|other>, conjugate-linear in self."""
        if self.dim != other.dim:
            raise DimensionMismatch(f"kets of dim {self.dim} and {other.dim}")
        return complex(np.vdot(self.vec, other.vec))

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def require_normalized(self, tol: float = DEFAULT_TOL, what: str = "ket") -> "Ket":
        if not self.is_normalized(tol):
            raise NotNormalized(f"{what} has norm {self.norm():.12g}, expected 1 within {tol:g}")
        return self


@dataclass(eq=False)
class Operator:
    """A dense square matrix on the single-time space."""

    mat: np.ndarray

    def __post_init__(self):
        self.mat = _as_matrix(self.mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @staticmethod
    def identity(dim: int) -> "Operator":
        return Operator(np.eye(dim, dtype=np.complex128))

    def adjoint(self) -> "Operator":
        return Operator(self.mat.conj().T)

    def apply(self, ket: Ket) -> Ket:
        if self.dim != ket.dim:
            raise DimensionMismatch(f"operator dim {self.dim} applied to ket dim {ket.dim}")
        return Ket(self.mat @ ket.vec)

    def compose(self, other: "Operator") -> "Operator":
        """self after other (matrix product self @ other)."""
        if self.dim != other.dim:
            raise DimensionMismatch(f"operators of dim {self.dim} and {other.dim}")
        return Operator(self.mat @ other.mat)

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.mat - self.mat.conj().T))

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return self.hermiticity_defect() <= tol * self.dim

    def is_unitary(self, tol: float = DEFAULT_TOL) -> bool:
        d = self.mat.conj().T @ self.mat - np.eye(self.dim)
        return float(np.linalg.norm(d)) <= tol * self.dim


def frobenius(a: Operator | np.ndarray) -> float:
    """Frobenius norm."""
    m = a.mat if isinstance(a, Operator) else a
    return float(np.linalg.norm(m))


def approx_equal(a: Operator, b: Operator, tol: float = DEFAULT_TOL) -> bool:
    """True iff ||A - B||_F <= tol * dim."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"comparing operators of dim {a.dim} and {b.dim}")
    return float(np.linalg.norm(a.mat - b.mat)) <= tol * a.dim


def hermitian_eigensystem(
    m: Operator, tol: float = DEFAULT_TOL, cluster_gap: float | None = None
) -> tuple[np.ndarray, list[Ket]]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian operator.

    Eigenvectors inside a degenerate cluster are re-orthonormalized by QR so
    that projector sums built from them are clean even when the backend
    returns a slightly skew basis.

    Raises:
        NotHermitian: when ||M - M^dag||_F > tol * dim.
    """
    defect = m.hermiticity_defect()
    if defect > tol * m.dim:
        raise NotHermitian(f"matrix is not Hermitian: defect {defect:.3g} > {tol * m.dim:.3g}")
    h = (m.mat + m.mat.conj().T) / 2.0
    evals, vecs = np.linalg.eigh(h)
    vecs = vecs.copy()
    if cluster_gap is None:
        spread = float(evals[-1] - evals[0]) if m.dim > 1 else 0.0
        cluster_gap = max(1e-12 * spread, 16 * np.finfo(float).eps)
    start = 0
    for k in range(1, m.dim + 1):
        if k == m.dim or evals[k] - evals[k - 1] > cluster_gap:
            if k - start > 1:
                q, _ = np.linalg.qr(vecs[:, start:k])
                vecs[:, start:k] = q
            start = k
    return evals, [Ket(vecs[:, j]) for j in range(m.dim)]


def tensor_product(a: Operator, b: Operator) -> Operator:
    """Kronecker product with the fixed row-major composite index order."""
    return Operator(np.kron(a.mat, b.mat))


def ket_tensor(a: Ket, b: Ket) -> Ket:
    """Composite ket under the same index convention as tensor_product."""
    return Ket(np.kron(a.vec, b.vec))


def orthonormal_complement(psi: Ket, tol: float = DEFAULT_TOL) -> list[Ket]:
    """Orthonormal basis of the orthogonal complement of a normalized ket.

    Deterministic: QR of [psi | I] keeps the first column along psi and
    fills the rest from the standard basis.
    """
    psi.require_normalized(tol)
    stacked = np.column_stack([psi.vec, np.eye(psi.dim, dtype=np.complex128)])
    q, _ = np.linalg.qr(stacked)
    return [Ket(q[:, j]) for j in range(1, psi.dim)]
