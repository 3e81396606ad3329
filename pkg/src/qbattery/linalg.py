"""Dense complex linear algebra for small bipartite systems.

Everything here works on plain ``numpy`` arrays in double precision; the
targeted scale is local dimension d <= 16 (total dimension d^2 <= 256), for
which dense eigensolvers are fast and well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "HERMITICITY_TOL",
    "PSD_TOL",
    "MAX_LOCAL_DIM",
    "DensityMatrix",
    "as_density",
    "dagger",
    "is_hermitian",
    "partial_trace",
    "partial_transpose",
    "partial_transpose_min_eig",
    "purity",
    "subsystem_permutation",
    "swap_operator",
    "random_hermitian",
    "random_density_matrix",
    "random_pure_state",
]

# Construction of thermal / mixture states incurs rounding at the 1e-12
# level; these tolerances accept that without letting real defects through.
HERMITICITY_TOL = 1e-9
PSD_TOL = -1e-9
MAX_LOCAL_DIM = 16


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    """Check Hermiticity in max-norm."""
    return bool(np.max(np.abs(a - dagger(a))) <= tol)


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density operator.

    Construction enforces Hermiticity and unit trace within
    ``HERMITICITY_TOL`` and positive semidefiniteness down to ``PSD_TOL``.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.data, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {a.shape}")
        if not is_hermitian(a):
            raise ValueError("density matrix must be Hermitian")
        tr = np.trace(a).real
        if abs(tr - 1.0) > HERMITICITY_TOL:
            raise ValueError(f"density matrix must have unit trace, got {tr}")
        lo = np.linalg.eigvalsh(a)[0]
        if lo < PSD_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lo}")
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def dim(self) -> int:
        return self.data.shape[0]


StateLike = Union[DensityMatrix, np.ndarray]


def as_density(rho: StateLike) -> DensityMatrix:
    """Coerce an array (or pass through a ``DensityMatrix``) with validation."""
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(np.asarray(rho))


def _raw(rho: StateLike) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)


def partial_trace(rho: StateLike, side: str, d: int):
    """Trace out one half of a d x d bipartite operator, keeping ``side``.

    ``side`` names the subsystem that is kept ('A' or 'B').  Density-matrix
    input yields density-matrix output; raw arrays pass through as arrays.
    """
    m = _raw(rho)
    if m.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d} x {d * d} operator, got shape {m.shape}")
    r4 = m.reshape(d, d, d, d)
    if side == "A":
        out = np.einsum("abcb->ac", r4)
    elif side == "B":
        out = np.einsum("abae->be", r4)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out)
    return out


def partial_transpose(rho: StateLike, d: int) -> np.ndarray:
    """Partial transpose on the first subsystem of a d x d bipartite operator."""
    m = _raw(rho)
    if m.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d} x {d * d} operator, got shape {m.shape}")
    return m.reshape(d, d, d, d).transpose(2, 1, 0, 3).reshape(d * d, d * d)


def partial_transpose_min_eig(rho: StateLike, d: int) -> float:
    """Minimum eigenvalue of the partial transpose; >= 0 means PPT."""
    return float(np.linalg.eigvalsh(partial_transpose(rho, d))[0])


def purity(rho: StateLike) -> float:
    """tr[rho^2], computed as the squared Frobenius norm of a Hermitian matrix."""
    m = _raw(rho)
    return float(np.sum(np.abs(m) ** 2))


def subsystem_permutation(perm: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Operator P with (P psi)(i_0, ..) = psi(i_perm[0], ..) on product indices."""
    dims = tuple(dims)
    total = int(np.prod(dims))
    src = np.arange(total).reshape(dims).transpose(perm).ravel()
    p = np.zeros((total, total))
    p[np.arange(total), src] = 1.0
    return p


def swap_operator(d: int) -> np.ndarray:
    """SWAP on two d-dimensional factors: S|a>|b> = |b>|a>."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    return subsystem_permutation((1, 0), (d, d))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with Gaussian entries (GUE-like, unnormalized)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g + dagger(g)) / 2


def random_pure_state(rng: np.random.Generator, dim: int) -> DensityMatrix:
    """Haar-random pure state as a rank-1 density matrix."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def random_density_matrix(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    """Random mixed state from a normalized Ginibre product G G^dag."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ dagger(g)
    return DensityMatrix(m / np.trace(m).real)
