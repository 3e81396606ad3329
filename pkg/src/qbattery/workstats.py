"""Work under random local unitaries: exact values, closed forms, Monte Carlo.

The work of a local unitary pair is W(U_A, U_B) = tr[(rho - rho') H] with
rho' = (U_A (x) U_B) rho (U_A (x) U_B)^dag.  Over Haar-random pairs the mean
is E - tr[H]/d^2 (the average final state is maximally mixed) and the
variance has the closed form

    Var = ( rA^2 ha^2 + rB^2 hb^2 + t^2 g^2 v^2 / (d^2-1) ) / (d^2-1),

so only the sector lengths of the state and the traceless weights of the
Hamiltonian enter.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .battery import BatteryHamiltonian
from .bloch import bloch_decompose
from .haar import DEFAULT_CHUNK, SamplerConfig, iter_pair_unitaries
from .linalg import StateLike, as_density
from .montecarlo import MomentAccumulator

__all__ = [
    "WorkStatistics",
    "WorkHistogram",
    "work",
    "analytic_work_mean",
    "analytic_work_variance",
    "mc_work_statistics",
    "work_histogram",
    "work_sample_summary",
]


@dataclass(frozen=True)
class WorkStatistics:
    """Mean/variance of work over unitary pairs; analytic results carry n = 0."""

    mean: float
    variance: float
    n_samples: int = 0
    se_mean: float = 0.0
    se_variance: float = 0.0


@dataclass(frozen=True)
class WorkHistogram:
    """Counts of work values in bins of fixed width anchored at zero."""

    bin_width: float
    origin: float
    counts: np.ndarray
    n_samples: int

    def edges(self) -> np.ndarray:
        return self.origin + self.bin_width * np.arange(len(self.counts) + 1)


def work(rho: StateLike, h: BatteryHamiltonian, ua: np.ndarray, ub: np.ndarray) -> float:
    """Exact work extracted by one local unitary pair."""
    m = as_density(rho).data
    if m.shape[0] != h.d**2:
        raise ValueError(f"state dimension {m.shape[0]} does not match battery d^2 = {h.d ** 2}")
    u = np.kron(ua, ub)
    total = h.total
    return float(np.trace((m - u @ m @ u.conj().T) @ total).real)


def analytic_work_mean(rho: StateLike, h: BatteryHamiltonian) -> float:
    """Haar-averaged work E - tr[H]/d^2."""
    m = as_density(rho).data
    total = h.total
    return float((np.trace(m @ total) - np.trace(total) / h.d**2).real)


def analytic_work_variance(rho: StateLike, h: BatteryHamiltonian) -> WorkStatistics:
    """Closed-form work variance over Haar-random local unitary pairs."""
    form = bloch_decompose(rho, h.d)
    dd = h.d**2 - 1
    var = (form.r_a2 * h.ha2 + form.r_b2 * h.hb2 + form.t2 * h.g2v2 / dd) / dd
    return WorkStatistics(mean=analytic_work_mean(rho, h), variance=var)


def pair_kron(ua: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Batched Kronecker product of local unitary stacks."""
    k, d = ua.shape[0], ua.shape[1]
    return np.einsum("nab,ncd->nacbd", ua, ub).reshape(k, d * d, d * d)


def conjugation_traces(u: np.ndarray, m: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """Batched tr[U m U^dag obs] for a stack of unitaries."""
    rotated = u @ m @ u.conj().transpose(0, 2, 1)
    return np.einsum("nij,ji->n", rotated, obs).real


def iter_work_values(
    rho: StateLike,
    h: BatteryHamiltonian,
    n: int,
    cfg: SamplerConfig,
    *,
    streams: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> Iterator[np.ndarray]:
    """Yield chunks of exact work values for n Haar-random unitary pairs."""
    if cfg.d != h.d:
        raise ValueError(f"sampler dimension {cfg.d} does not match battery d = {h.d}")
    m = as_density(rho).data
    total = h.total
    energy = float(np.trace(m @ total).real)
    for ua, ub in iter_pair_unitaries(cfg, n, streams=streams, chunk=chunk):
        yield energy - conjugation_traces(pair_kron(ua, ub), m, total)


def work_sample_summary(
    rho: StateLike,
    h: BatteryHamiltonian,
    n: int,
    cfg: SamplerConfig,
    *,
    bin_width: float | None = None,
    streams: int = 1,
) -> tuple[WorkStatistics, WorkHistogram | None]:
    """One pass over n work samples: moments plus an optional histogram."""
    if n < 2:
        raise ValueError(f"need at least two samples, got {n}")
    if bin_width is not None and bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    acc = MomentAccumulator()
    bins: Counter[int] = Counter()
    for values in iter_work_values(rho, h, n, cfg, streams=streams):
        acc.add_chunk(values)
        if bin_width is not None:
            idx, cnt = np.unique(np.floor(values / bin_width).astype(np.int64), return_counts=True)
            for i, c in zip(idx, cnt):
                bins[int(i)] += int(c)
    stats = WorkStatistics(
        mean=acc.mean,
        variance=acc.variance,
        n_samples=acc.n,
        se_mean=acc.se_mean,
        se_variance=acc.se_variance,
    )
    hist = None
    if bin_width is not None:
        lo, hi = min(bins), max(bins)
        counts = np.zeros(hi - lo + 1, dtype=np.int64)
        for i, c in bins.items():
            counts[i - lo] = c
        hist = WorkHistogram(bin_width=bin_width, origin=lo * bin_width, counts=counts, n_samples=n)
    return stats, hist


def mc_work_statistics(
    rho: StateLike,
    h: BatteryHamiltonian,
    n: int,
    cfg: SamplerConfig,
    *,
    streams: int = 1,
) -> WorkStatistics:
    """Monte-Carlo mean/variance of work over n unitary pairs, with SEs."""
    stats, _ = work_sample_summary(rho, h, n, cfg, streams=streams)
    return stats


def work_histogram(
    rho: StateLike,
    h: BatteryHamiltonian,
    n: int,
    bin_width: float,
    cfg: SamplerConfig,
    *,
    streams: int = 1,
) -> WorkHistogram:
    """Histogram of n work samples in bins of ``bin_width`` anchored at 0."""
    _, hist = work_sample_summary(rho, h, n, cfg, bin_width=bin_width, streams=streams)
    assert hist is not None
    return hist
