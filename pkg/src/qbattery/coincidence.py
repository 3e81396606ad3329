"""Two-copy noisy energy-coincidence measurement.

Two copies of the battery state receive the *same* random local unitary
pair, then each side tests whether its two copies produce the same noisy
energy outcome.  The per-unitary coincidence probability is the purity-like
quantity C(U) = sum_ij m_ij(U)^2 with m_ij the joint noisy outcome
probabilities; averaged over Haar pairs it has the closed form

    C = (1/d^2) [ 1 + (rA^2 epsA^2 + rB^2 epsB^2)/(d+1)
                    + t^2 epsA^2 epsB^2/(d+1)^2 ],

which rises with every sector length, so coincidences upper-bound by a
function of the work variance.  Coincidence is outcome-indexed: degenerate
energies count as distinct outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .battery import BatteryHamiltonian, SpectralDecomposition
from .bloch import bloch_decompose
from .haar import DEFAULT_CHUNK, SamplerConfig, iter_pair_unitaries
from .linalg import StateLike, as_density
from .montecarlo import MomentAccumulator
from .workstats import analytic_work_variance

__all__ = [
    "CoincidenceReport",
    "coincidence_povm",
    "avg_coincidence_closed",
    "mc_coincidence",
    "coincidence_bound",
]


def _check_eps(eps: float, name: str = "epsilon") -> None:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {eps}")


def coincidence_povm(spec: SpectralDecomposition, side: str, epsilon: float) -> np.ndarray:
    """Dichotomic same-outcome POVM element on the doubled local space.

    P = eps^2 * sum_i Pi_i (x) Pi_i + (1 - eps^2)/d * 1, satisfying
    0 <= P <= 1 and tr[P] = d for every eps.
    """
    _check_eps(epsilon)
    if side == "A":
        proj = spec.proj_a
    elif side == "B":
        proj = spec.proj_b
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    d = spec.d
    pair = np.einsum("iab,icd->acbd", proj, proj).reshape(d * d, d * d)
    return epsilon**2 * pair + (1.0 - epsilon**2) / d * np.eye(d * d)


def avg_coincidence_closed(
    rho: StateLike, spec: SpectralDecomposition, eps_a: float, eps_b: float
) -> float:
    """Haar-averaged two-copy coincidence probability (closed form).

    Depends on the state only through its sector lengths; the choice of
    rank-1 eigenprojectors drops out of the average.
    """
    _check_eps(eps_a, "eps_a")
    _check_eps(eps_b, "eps_b")
    d = spec.d
    form = bloch_decompose(rho, d)
    return (
        1.0
        + (form.r_a2 * eps_a**2 + form.r_b2 * eps_b**2) / (d + 1)
        + form.t2 * eps_a**2 * eps_b**2 / (d + 1) ** 2
    ) / d**2


def coincidence_probability(
    rho: np.ndarray,
    spec: SpectralDecomposition,
    eps_a: float,
    eps_b: float,
) -> float:
    """Exact two-copy coincidence probability of a (rotated) state.

    Equal to tr[(P_AA' (x) P_BB') rho (x) rho] = sum_ij m_ij^2 with
    m_ij = tr[(P_i^A (x) P_j^B) rho].
    """
    return float(_coincidence_batch(rho[None, ...], spec, eps_a, eps_b)[0])


def _coincidence_batch(
    rotated: np.ndarray, spec: SpectralDecomposition, eps_a: float, eps_b: float
) -> np.ndarray:
    d = spec.d
    r4 = rotated.reshape(-1, d, d, d, d)
    q = np.einsum("nabce,ica,jeb->nij", r4, spec.proj_a, spec.proj_b, optimize=True).real
    qa = q.sum(axis=2)
    qb = q.sum(axis=1)
    m = (
        eps_a * eps_b * q
        + eps_a * (1.0 - eps_b) / d * qa[:, :, None]
        + (1.0 - eps_a) * eps_b / d * qb[:, None, :]
        + (1.0 - eps_a) * (1.0 - eps_b) / d**2
    )
    return np.einsum("nij,nij->n", m, m)


def mc_coincidence(
    rho: StateLike,
    spec: SpectralDecomposition,
    eps_a: float,
    eps_b: float,
    n: int,
    cfg: SamplerConfig,
    *,
    streams: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> tuple[float, float]:
    """Monte-Carlo estimate (mean, standard error) of the coincidence average.

    Both copies share one unitary pair per sample; the protocol has no
    independent-rotations mode because the closed form requires identical
    rotations on the copies.
    """
    if n < 2:
        raise ValueError(f"need at least two samples, got {n}")
    _check_eps(eps_a, "eps_a")
    _check_eps(eps_b, "eps_b")
    if cfg.d != spec.d:
        raise ValueError(f"sampler dimension {cfg.d} does not match battery d = {spec.d}")
    m = as_density(rho).data
    acc = MomentAccumulator()
    for ua, ub in iter_pair_unitaries(cfg, n, streams=streams, chunk=chunk):
        k, d = ua.shape[0], spec.d
        u = np.einsum("nab,ncd->nacbd", ua, ub).reshape(k, d * d, d * d)
        rotated = u @ m @ u.conj().transpose(0, 2, 1)
        acc.add_chunk(_coincidence_batch(rotated, spec, eps_a, eps_b))
    return acc.mean, acc.se_mean


@dataclass(frozen=True)
class CoincidenceReport:
    """Closed-form coincidence, optional MC estimate, and the variance bound.

    ``c_excess`` is the part of the interaction weight beyond h^2 eps^2 in
    g^2 v^2 = (d-1)(h^2 eps^2 + c); only its negative part enters the bound.
    ``slack`` = bound_rhs - cbar_closed is non-negative whenever h^2 > 0.
    """

    d: int
    eps_a: float
    eps_b: float
    cbar_closed: float
    bound_rhs: float
    slack: float
    c_excess: float
    h2_min: float
    variance: float
    t2: float
    cbar_mc: float | None = None
    cbar_mc_se: float | None = None

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "eps_a": self.eps_a,
            "eps_b": self.eps_b,
            "cbar_closed": self.cbar_closed,
            "bound_rhs": self.bound_rhs,
            "slack": self.slack,
            "c_excess": self.c_excess,
            "h2_min": self.h2_min,
            "variance": self.variance,
            "t2": self.t2,
            "cbar_mc": self.cbar_mc,
            "cbar_mc_se": self.cbar_mc_se,
        }


def coincidence_bound(
    rho: StateLike,
    h: BatteryHamiltonian,
    spec: SpectralDecomposition,
    epsilon: float,
) -> CoincidenceReport:
    """Upper bound on the averaged coincidence from the work variance.

    With symmetric detector error eps and h^2 = min(ha2, hb2) > 0, writing
    g^2 v^2 = (d-1)(h^2 eps^2 + c),

        C <= (1/d^2) [ 1 + (d-1) eps^2 Var/h^2
                         + t^2 eps^2 (|c| - c) / (2 (d+1)^2 h^2) ].
    """
    _check_eps(epsilon)
    d = h.d
    h2 = min(h.ha2, h.hb2)
    if h2 <= 0:
        raise ValueError("the bound is undefined for vanishing local weight h^2 = 0")
    form = bloch_decompose(rho, d)
    var = analytic_work_variance(rho, h).variance
    c = h.g2v2 / (d - 1) - h2 * epsilon**2
    rhs = (
        1.0
        + (d - 1) * epsilon**2 * var / h2
        + form.t2 * epsilon**2 * (abs(c) - c) / (2 * (d + 1) ** 2 * h2)
    ) / d**2
    lhs = avg_coincidence_closed(rho, spec, epsilon, epsilon)
    return CoincidenceReport(
        d=d,
        eps_a=epsilon,
        eps_b=epsilon,
        cbar_closed=lhs,
        bound_rhs=rhs,
        slack=rhs - lhs,
        c_excess=c,
        h2_min=h2,
        variance=var,
        t2=form.t2,
    )
