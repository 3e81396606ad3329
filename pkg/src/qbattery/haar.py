"""Haar-random unitary sampling and closed-form one- and two-copy twirls.

Sampling uses a counter-based PRNG (Philox) keyed by (seed, stream), so
independent streams can be drawn without coordination and the sequence for a
given ``SamplerConfig`` is bit-for-bit reproducible.  Unitaries come from QR
of a complex Ginibre matrix with the phase of the triangular factor's
diagonal absorbed into the columns; plain QR alone is not Haar-distributed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import StateLike, _raw, subsystem_permutation, swap_operator

__all__ = [
    "SamplerConfig",
    "HaarSampler",
    "haar_unitary",
    "iter_pair_unitaries",
    "twirl1",
    "twirl2",
    "two_copy_local_twirl",
    "stream_configs",
]

#: Unitaries are drawn in chunks of this size by the Monte-Carlo drivers.
#: The value is part of the reproducibility contract only in the sense that
#: a fixed build draws identical streams for identical configs.
DEFAULT_CHUNK = 4096


@dataclass(frozen=True)
class SamplerConfig:
    """Addressable random stream: (d, seed, stream) fixes the sample sequence."""

    d: int
    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"dimension must be at least 2, got {self.d}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.stream < 0:
            raise ValueError("stream index must be non-negative")


def stream_configs(cfg: SamplerConfig, streams: int) -> list[SamplerConfig]:
    """Consecutive stream configs for parallel workers; merge in list order."""
    if streams < 1:
        raise ValueError("need at least one stream")
    return [SamplerConfig(cfg.d, cfg.seed, cfg.stream + s) for s in range(streams)]


class HaarSampler:
    """Stateful Haar sampler over U(d) for one (seed, stream) pair."""

    def __init__(self, cfg: SamplerConfig):
        self.cfg = cfg
        self._rng = np.random.Generator(np.random.Philox(key=[cfg.seed, cfg.stream]))

    def unitaries(self, n: int) -> np.ndarray:
        """Draw a batch of n Haar-random unitaries, shape (n, d, d)."""
        d = self.cfg.d
        z = self._rng.standard_normal((n, d, d)) + 1j * self._rng.standard_normal((n, d, d))
        q, r = np.linalg.qr(z / np.sqrt(2.0))
        diag = np.einsum("nii->ni", r)
        q = q * (diag / np.abs(diag))[:, None, :]
        return q

    def unitary(self) -> np.ndarray:
        return self.unitaries(1)[0]


def haar_unitary(cfg: SamplerConfig) -> np.ndarray:
    """First Haar-random unitary of the stream addressed by ``cfg``."""
    return HaarSampler(cfg).unitary()


def _split(n: int, parts: int) -> list[int]:
    base, extra = divmod(n, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def iter_pair_unitaries(
    cfg: SamplerConfig,
    n: int,
    *,
    streams: int = 1,
    chunk: int = DEFAULT_CHUNK,
):
    """Yield chunked batches (ua, ub) covering n independent unitary pairs.

    With ``streams`` > 1 the budget splits over consecutive stream indices,
    consumed in index order; that order is the reduction contract that keeps
    multi-worker estimates bitwise reproducible.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    for sub_cfg, quota in zip(stream_configs(cfg, streams), _split(n, streams)):
        sampler = HaarSampler(sub_cfg)
        left = quota
        while left > 0:
            k = min(chunk, left)
            ua = sampler.unitaries(k)
            ub = sampler.unitaries(k)
            yield ua, ub
            left -= k


def twirl1(x: np.ndarray) -> np.ndarray:
    """Average of U X U^dag over Haar U: (tr X / D) * identity."""
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    dim = x.shape[0]
    return (np.trace(x) / dim) * np.eye(dim, dtype=np.complex128)


def twirl2(x: np.ndarray) -> np.ndarray:
    """Average of U^(x)2 X (U^dag)^(x)2 over Haar U on a doubled space.

    The input lives on D^2 dimensions (two copies of a D-dimensional
    system); the result is a combination of the identity and the SWAP:

        (1/(D^2-1)) { [tr X - tr(S X)/D] 1 + [tr(S X) - tr X/D] S }.
    """
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    dim2 = x.shape[0]
    dim = int(round(np.sqrt(dim2)))
    if dim * dim != dim2:
        raise ValueError(f"matrix dimension {dim2} is not a perfect square")
    s = swap_operator(dim)
    trx = np.trace(x)
    trsx = np.trace(s @ x)
    coeff_id = trx - trsx / dim
    coeff_s = trsx - trx / dim
    return (coeff_id * np.eye(dim2, dtype=np.complex128) + coeff_s * s) / (dim2 - 1)


def two_copy_local_twirl(rho: StateLike, d: int) -> np.ndarray:
    """Closed form of rho^(x)2 averaged over independent local unitary pairs.

    The average of (U_A (x) U_B)^(x)2 rho^(x)2 (...)^dag depends on rho only
    through the sector lengths rA^2, rB^2, t^2 and is built from the local
    two-copy SWAPs.  Subsystem ordering of the returned d^4 x d^4 matrix is
    (A, B, A', B'), matching ``np.kron(rho, rho)``.
    """
    from .bloch import bloch_decompose

    form = bloch_decompose(rho, d)
    dims = (d, d, d, d)
    swap_a = subsystem_permutation((2, 1, 0, 3), dims)
    swap_b = subsystem_permutation((0, 3, 2, 1), dims)
    eye = np.eye(d**4)
    ga = d * swap_a - eye
    gb = d * swap_b - eye
    dd = d * d - 1
    out = eye + (form.r_a2 * ga + form.r_b2 * gb + form.t2 * (ga @ gb) / dd) / dd
    return out.astype(np.complex128) / d**4
