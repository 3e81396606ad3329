"""Noisy two-point measurement (TPM) of battery energy with random rotations.

Each side measures a noisy version of its local energy eigenbasis: outcome i
fires on the POVM element P_i = eps * Pi_i + (1 - eps)/d * 1.  The state
updates through the von Neumann-Lueders instrument (conjugation by sqrt(P)),
a random local unitary pair acts, and the measurement repeats.  Outcomes
carry rescaled energy labels e_ij chosen so that the label-weighted
probabilities stay unbiased for the diagonal Hamiltonian

    H_D = H - g V_od = sum_ij E_ij Pi_i^A (x) Pi_j^B,   E_ij = E_i^A + E_j^B + g D_ij.

The presumed per-unitary work is W = sum m_ij m_kl|ij (e_ij - e_kl), and its
Haar variance decomposes exactly into ideal / projective / noise-induced
contributions with weights n0 + n1 + n_noisy = 1.  Labels diverge at
eps = 0, so simulation requires eps > 0 while the weights and the
closed-form variance extend continuously to the eps -> 0 limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .battery import SpectralDecomposition
from .bloch import bloch_decompose, gell_mann_basis
from .haar import DEFAULT_CHUNK, SamplerConfig, iter_pair_unitaries
from .linalg import StateLike, as_density
from .montecarlo import MomentAccumulator
from .workstats import WorkStatistics, conjugation_traces, pair_kron

__all__ = [
    "NoisyPovm",
    "TpmWeights",
    "TpmSpectralStats",
    "TpmVarianceReport",
    "povm_root_coeffs",
    "noisy_povm",
    "energy_labels",
    "instrument_average",
    "tpm_run",
    "tpm_work_mean",
    "tpm_shot_sample",
    "mc_tpm_statistics",
    "tpm_weights",
    "tpm_spectral_stats",
    "diagonal_work_variance",
    "tpm_integral_terms",
    "tpm_variance_closed_form",
]


def _check_eps(eps: float, name: str = "epsilon") -> None:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {eps}")


def povm_root_coeffs(epsilon: float, d: int) -> tuple[float, float]:
    """Coefficients (f, g) with sqrt(P_i) = f * Pi_i + g * 1.

    f = sqrt(eps + (1-eps)/d) - sqrt((1-eps)/d), g = sqrt((1-eps)/d); the
    normalization f^2 + 2 f g + d g^2 = 1 holds identically.
    """
    _check_eps(epsilon)
    g = np.sqrt((1.0 - epsilon) / d)
    f = np.sqrt(epsilon + (1.0 - epsilon) / d) - g
    return float(f), float(g)


@dataclass(frozen=True)
class NoisyPovm:
    """Noisy local energy POVM with closed-form square roots.

    elements[i] = eps * Pi_i + (1-eps)/d * 1 and roots[i] = sqrt(elements[i])
    = f * Pi_i + g * 1; the POVM sums to the identity for every eps.
    """

    d: int
    epsilon: float
    elements: np.ndarray  # (d, d, d)
    roots: np.ndarray  # (d, d, d)
    f: float
    g: float


def noisy_povm(spec: SpectralDecomposition, side: str, epsilon: float) -> NoisyPovm:
    """POVM elements eps * Pi_i + (1-eps)/d * 1 for one side's projectors."""
    _check_eps(epsilon)
    if side == "A":
        proj = spec.proj_a
    elif side == "B":
        proj = spec.proj_b
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    f, g = povm_root_coeffs(epsilon, spec.d)
    eye = np.eye(spec.d)
    return NoisyPovm(
        d=spec.d,
        epsilon=epsilon,
        elements=epsilon * proj + (1.0 - epsilon) / spec.d * eye,
        roots=f * proj + g * eye,
        f=f,
        g=g,
    )


def energy_labels(
    spec: SpectralDecomposition, eps_a: float, eps_b: float, g: float | None = None
) -> np.ndarray:
    """Outcome energy labels e_ij making the noisy estimate unbiased.

    e_ij = E_i^A/eps_A + E_j^B/eps_B + g D_ij/(eps_A eps_B)
           - (1-eps_A)/(d eps_A) tr[H_A] - (1-eps_B)/(d eps_B) tr[H_B],

    which is exactly the decomposition H_D = sum_ij e_ij P_i^A (x) P_j^B.
    Labels attach to outcome indices, so degenerate energies stay distinct.
    """
    _check_eps(eps_a, "eps_a")
    _check_eps(eps_b, "eps_b")
    if eps_a == 0.0 or eps_b == 0.0:
        raise ValueError("energy labels diverge at epsilon = 0 (weak-measurement limit)")
    g = spec.g if g is None else g
    d = spec.d
    tra = float(spec.energies_a.sum())
    trb = float(spec.energies_b.sum())
    return (
        spec.energies_a[:, None] / eps_a
        + spec.energies_b[None, :] / eps_b
        + g * spec.d_mat / (eps_a * eps_b)
        - (1.0 - eps_a) / (d * eps_a) * tra
        - (1.0 - eps_b) / (d * eps_b) * trb
    )


def instrument_average(
    rho: StateLike, spec: SpectralDecomposition, eps_a: float, eps_b: float
) -> np.ndarray:
    """Outcome-summed post-measurement state sum_ij sqrt(P) rho sqrt(P).

    Expands to f_A^2 f_B^2 * (jointly dephased rho) + kappa_A * (A-dephased)
    + kappa_B * (B-dephased) + kappa_AB * rho; the per-unitary presumed work
    is tr[rho H_D] minus this operator's rotated overlap with H_D.
    """
    m = as_density(rho).data
    ra = noisy_povm(spec, "A", eps_a).roots
    rb = noisy_povm(spec, "B", eps_b).roots
    kr = np.einsum("iab,jcd->ijacbd", ra, rb).reshape(spec.d**2, spec.d**2, spec.d**2)
    return np.einsum("mab,bc,mdc->ad", kr, m, kr.conj())


def tpm_run(
    rho: StateLike,
    spec: SpectralDecomposition,
    eps_a: float,
    eps_b: float,
    ua: np.ndarray,
    ub: np.ndarray,
) -> float:
    """Exact presumed work of one noisy TPM round at a fixed unitary pair.

    Enumerates all (i, j) -> (k, l) outcome branches; a branch with zero
    first-outcome probability has a vanishing update operator and simply
    contributes zero weight.
    """
    m = as_density(rho).data
    d = spec.d
    labels = energy_labels(spec, eps_a, eps_b).ravel()
    pa = noisy_povm(spec, "A", eps_a)
    pb = noisy_povm(spec, "B", eps_b)
    povm = np.einsum("iab,jcd->ijacbd", pa.elements, pb.elements).reshape(d * d, d * d, d * d)
    kr = np.einsum("iab,jcd->ijacbd", pa.roots, pb.roots).reshape(d * d, d * d, d * d)

    first = np.einsum("mab,ba->m", povm, m).real
    joint = np.einsum("mab,bc,mdc->mad", kr, m, kr.conj())
    u = np.kron(ua, ub)
    rotated = np.einsum("ab,mbc,dc->mad", u, joint, u.conj())
    second = np.einsum("oab,mba->mo", povm, rotated).real
    return float(first @ labels - second.sum(axis=0) @ labels)


def tpm_work_mean(rho: StateLike, spec: SpectralDecomposition) -> float:
    """Haar average of the presumed TPM work: tr[rho H_D] - tr[H_D]/d^2."""
    m = as_density(rho).data
    return float((np.trace(m @ spec.h_diag) - np.trace(spec.h_diag) / spec.d**2).real)


def tpm_shot_sample(
    rho: StateLike,
    spec: SpectralDecomposition,
    eps_a: float,
    eps_b: float,
    ua: np.ndarray,
    ub: np.ndarray,
    shots: int,
    rng: np.random.Generator,
) -> float:
    """Finite-shot demonstration of one TPM round (sampled outcome pairs).

    Draws ``shots`` outcome trajectories instead of summing exact branch
    probabilities and returns the empirical mean presumed work; converges to
    ``tpm_run`` as shots grow.  Demonstration only; the estimators elsewhere
    use exact per-unitary expectations.
    """
    if shots < 1:
        raise ValueError(f"need at least one shot, got {shots}")
    m = as_density(rho).data
    d = spec.d
    labels = energy_labels(spec, eps_a, eps_b).ravel()
    pa = noisy_povm(spec, "A", eps_a)
    pb = noisy_povm(spec, "B", eps_b)
    povm = np.einsum("iab,jcd->ijacbd", pa.elements, pb.elements).reshape(d * d, d * d, d * d)
    kr = np.einsum("iab,jcd->ijacbd", pa.roots, pb.roots).reshape(d * d, d * d, d * d)
    first_probs = np.clip(np.einsum("mab,ba->m", povm, m).real, 0.0, None)
    first_probs /= first_probs.sum()
    u = np.kron(ua, ub)
    counts = rng.multinomial(shots, first_probs)
    total = 0.0
    for idx in np.nonzero(counts)[0]:
        joint = u @ (kr[idx] @ m @ kr[idx]) @ u.conj().T
        cond = np.clip(np.einsum("oab,ba->o", povm, joint).real, 0.0, None)
        cond /= cond.sum()
        second = rng.multinomial(counts[idx], cond)
        total += counts[idx] * labels[idx] - float(second @ labels)
    return total / shots


def mc_tpm_statistics(
    rho: StateLike,
    spec: SpectralDecomposition,
    eps_a: float,
    eps_b: float,
    n: int,
    cfg: SamplerConfig,
    *,
    streams: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> WorkStatistics:
    """Monte-Carlo moments of the presumed TPM work over n unitary pairs.

    Uses the exact per-unitary identity W(U) = tr[rho H_D] - tr[U Xi U^dag H_D]
    with Xi the outcome-summed instrument output, so each sample costs one
    conjugation instead of a branch enumeration.
    """
    if n < 2:
        raise ValueError(f"need at least two samples, got {n}")
    if eps_a == 0.0 or eps_b == 0.0:
        raise ValueError("simulation requires epsilon > 0; labels diverge at 0")
    if cfg.d != spec.d:
        raise ValueError(f"sampler dimension {cfg.d} does not match battery d = {spec.d}")
    m = as_density(rho).data
    xi = instrument_average(m, spec, eps_a, eps_b)
    base = float(np.trace(m @ spec.h_diag).real)
    acc = MomentAccumulator()
    for ua, ub in iter_pair_unitaries(cfg, n, streams=streams, chunk=chunk):
        acc.add_chunk(base - conjugation_traces(pair_kron(ua, ub), xi, spec.h_diag))
    return WorkStatistics(
        mean=acc.mean,
        variance=acc.variance,
        n_samples=acc.n,
        se_mean=acc.se_mean,
        se_variance=acc.se_variance,
    )


@dataclass(frozen=True)
class TpmWeights:
    """Noise-mixing coefficients of the TPM variance decomposition.

    n0 weighs the ideal work variance, n1 the noiseless projective TPM, and
    n_noisy the cross terms; they are non-negative and sum to one for all
    error levels (n0(0) = 1, n1(1) = 1).
    """

    d: int
    eps_a: float
    eps_b: float
    f_a: float
    g_a: float
    f_b: float
    g_b: float
    kappa_a: float
    kappa_b: float
    kappa_ab: float
    gamma_a: float
    gamma_b: float
    gamma_ab: float
    n0: float
    n1: float
    n_noisy: float

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "eps_a": self.eps_a,
            "eps_b": self.eps_b,
            "f_a": self.f_a,
            "g_a": self.g_a,
            "f_b": self.f_b,
            "g_b": self.g_b,
            "kappa_a": self.kappa_a,
            "kappa_b": self.kappa_b,
            "kappa_ab": self.kappa_ab,
            "gamma_a": self.gamma_a,
            "gamma_b": self.gamma_b,
            "gamma_ab": self.gamma_ab,
            "n0": self.n0,
            "n1": self.n1,
            "n_noisy": self.n_noisy,
        }


def tpm_weights(eps_a: float, eps_b: float, d: int) -> TpmWeights:
    """All kappa/gamma/n coefficients for given detector errors.

    kappa_AB uses the product form g_A g_B (2 f_A + d g_A)(2 f_B + d g_B),
    equal to kappa_A kappa_B / (f_A^2 f_B^2) wherever the latter is defined
    and regular at eps = 0.
    """
    fa, ga = povm_root_coeffs(eps_a, d)
    fb, gb = povm_root_coeffs(eps_b, d)
    kappa_a = fa**2 * gb * (2 * fb + d * gb)
    kappa_b = fb**2 * ga * (2 * fa + d * ga)
    kappa_ab = ga * gb * (2 * fa + d * ga) * (2 * fb + d * gb)
    ff = fa**2 * fb**2
    ksum = kappa_a + kappa_b + kappa_ab
    gamma_a = ff * ksum + kappa_a * (kappa_b + kappa_ab)
    gamma_b = ff * ksum + kappa_b * (kappa_a + kappa_ab)
    gamma_ab = ff * ksum + kappa_a * kappa_b
    n0 = kappa_ab**2
    n1 = ff**2 + kappa_a**2 + kappa_b**2
    n_noisy = 2 * (ff * ksum + kappa_a * kappa_b + kappa_a * kappa_ab + kappa_b * kappa_ab)
    return TpmWeights(
        d=d,
        eps_a=eps_a,
        eps_b=eps_b,
        f_a=fa,
        g_a=ga,
        f_b=fb,
        g_b=gb,
        kappa_a=kappa_a,
        kappa_b=kappa_b,
        kappa_ab=kappa_ab,
        gamma_a=gamma_a,
        gamma_b=gamma_b,
        gamma_ab=gamma_ab,
        n0=n0,
        n1=n1,
        n_noisy=n_noisy,
    )


@dataclass(frozen=True)
class TpmSpectralStats:
    """Populations of the joint eigenbasis and basis-overlap matrices.

    zeta_a[a, b] = sum_i tr(Pi_i lam_a Pi_i lam_b) / d encodes how much of
    each basis direction survives dephasing in the A eigenbasis (likewise
    zeta_b).
    """

    p_joint: np.ndarray  # (d, d)
    p_a: np.ndarray
    p_b: np.ndarray
    p_ab2: float
    p_a2: float
    p_b2: float
    zeta_a: np.ndarray  # (d^2-1, d^2-1)
    zeta_b: np.ndarray


def _zeta(proj: np.ndarray, lam: np.ndarray, d: int) -> np.ndarray:
    return np.einsum("nab,ibc,ncd,jda->ij", proj, lam, proj, lam, optimize=True).real / d


def tpm_spectral_stats(rho: StateLike, spec: SpectralDecomposition) -> TpmSpectralStats:
    """Joint-population matrix, its marginals, and the dephasing overlaps."""
    m = as_density(rho).data
    d = spec.d
    m4 = m.reshape(d, d, d, d)
    p_joint = np.einsum("abce,ica,jeb->ij", m4, spec.proj_a, spec.proj_b).real
    p_a = p_joint.sum(axis=1)
    p_b = p_joint.sum(axis=0)
    lam = gell_mann_basis(d).matrices
    return TpmSpectralStats(
        p_joint=p_joint,
        p_a=p_a,
        p_b=p_b,
        p_ab2=float(np.sum(p_joint**2)),
        p_a2=float(np.sum(p_a**2)),
        p_b2=float(np.sum(p_b**2)),
        zeta_a=_zeta(spec.proj_a, lam, d),
        zeta_b=_zeta(spec.proj_b, lam, d),
    )


def _local_weight(energies: np.ndarray, d: int) -> float:
    """Traceless squared weight of a local Hamiltonian from its spectrum."""
    return float(np.sum(energies**2) / d - (np.sum(energies) / d) ** 2)


def diagonal_work_variance(rho: StateLike, spec: SpectralDecomposition) -> float:
    """Work variance of the diagonal Hamiltonian H_D (off-diagonal part off).

    Same closed form as the ideal variance, with the interaction weight
    g^2 v^2 replaced by g^2 (sum_ij D_ij^2) / d^2.
    """
    d = spec.d
    form = bloch_decompose(rho, d)
    ha2 = _local_weight(spec.energies_a, d)
    hb2 = _local_weight(spec.energies_b, d)
    gv2 = spec.g**2 * float(np.sum(spec.d_mat**2)) / d**2
    dd = d * d - 1
    return (form.r_a2 * ha2 + form.r_b2 * hb2 + form.t2 * gv2 / dd) / dd


def tpm_integral_terms(
    rho: StateLike, spec: SpectralDecomposition, eps_a: float, eps_b: float
) -> dict[str, float]:
    """The ten Haar integrals whose (cross terms doubled) sum is the variance.

    Keys: 'joint' / 'local_a' / 'local_b' for the dephased-state integrals,
    'state' for the undisturbed-state one, and 'cross_*' for the six mixed
    products.  The variance equals joint + local_a + local_b + state
    + 2 * sum(cross terms); the report's ideal/projective/noisy split is a
    regrouping of exactly these pieces.
    """
    d = spec.d
    w = tpm_weights(eps_a, eps_b, d)
    stats = tpm_spectral_stats(rho, spec)
    form = bloch_decompose(rho, d)
    ha2 = _local_weight(spec.energies_a, d)
    hb2 = _local_weight(spec.energies_b, d)
    gv2 = spec.g**2 * float(np.sum(spec.d_mat**2)) / d**2
    dd = d * d - 1

    c1 = d * stats.p_a2 - 1.0
    c2 = d * stats.p_b2 - 1.0
    c3 = d * d * stats.p_ab2 - d * stats.p_a2 - d * stats.p_b2 + 1.0
    ca = float(np.sum(stats.zeta_a * (form.t @ form.t.T)))
    cb = float(np.sum(stats.zeta_b * (form.t.T @ form.t)))

    bracket_joint = c1 * ha2 + c2 * hb2 + c3 * gv2 / dd
    bracket_a = c1 * ha2 + form.r_b2 * hb2 + gv2 * ca / dd
    bracket_b = form.r_a2 * ha2 + c2 * hb2 + gv2 * cb / dd
    ff = w.f_a**2 * w.f_b**2

    return {
        "joint": ff**2 * bracket_joint / dd,
        "local_a": w.kappa_a**2 * bracket_a / dd,
        "local_b": w.kappa_b**2 * bracket_b / dd,
        "state": w.kappa_ab**2 * diagonal_work_variance(rho, spec),
        "cross_joint_a": ff * w.kappa_a * bracket_joint / dd,
        "cross_joint_b": ff * w.kappa_b * bracket_joint / dd,
        "cross_a_b": w.kappa_a * w.kappa_b * bracket_joint / dd,
        "cross_joint_state": ff * w.kappa_ab * bracket_joint / dd,
        "cross_a_state": w.kappa_a * w.kappa_ab * bracket_a / dd,
        "cross_b_state": w.kappa_b * w.kappa_ab * bracket_b / dd,
    }


@dataclass(frozen=True)
class TpmVarianceReport:
    """Closed-form TPM variance with its ideal/projective/noisy split.

    var_tpm = ideal_term + projective_term + noisy_term
            = n0 * var_diag + n1 * var_projective + n_noisy * var_noisy,
    and var_tpm <= var_diag for every error pair (saturated as eps -> 0).
    """

    d: int
    eps_a: float
    eps_b: float
    mean_tpm: float
    var_tpm: float
    var_diag: float
    var_projective: float
    var_noisy: float
    ideal_term: float
    projective_term: float
    noisy_term: float
    ha2: float
    hb2: float
    g2v2_diag: float
    weights: TpmWeights

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "eps_a": self.eps_a,
            "eps_b": self.eps_b,
            "mean_tpm": self.mean_tpm,
            "var_tpm": self.var_tpm,
            "var_diag": self.var_diag,
            "var_projective": self.var_projective,
            "var_noisy": self.var_noisy,
            "ideal_term": self.ideal_term,
            "projective_term": self.projective_term,
            "noisy_term": self.noisy_term,
            "ha2": self.ha2,
            "hb2": self.hb2,
            "g2v2_diag": self.g2v2_diag,
            "weights": self.weights.to_dict(),
        }


def tpm_variance_closed_form(
    rho: StateLike, spec: SpectralDecomposition, eps_a: float, eps_b: float
) -> TpmVarianceReport:
    """Closed-form variance of the presumed TPM work over Haar unitary pairs.

    The trace of H_D is irrelevant here (work values are label differences),
    so the formulas are evaluated for the traceless shift of H_D implicitly.
    """
    d = spec.d
    w = tpm_weights(eps_a, eps_b, d)
    stats = tpm_spectral_stats(rho, spec)
    form = bloch_decompose(rho, d)
    ha2 = _local_weight(spec.energies_a, d)
    hb2 = _local_weight(spec.energies_b, d)
    gv2 = spec.g**2 * float(np.sum(spec.d_mat**2)) / d**2
    dd = d * d - 1

    c1 = d * stats.p_a2 - 1.0
    c2 = d * stats.p_b2 - 1.0
    c3 = d * d * stats.p_ab2 - d * stats.p_a2 - d * stats.p_b2 + 1.0
    ca = float(np.sum(stats.zeta_a * (form.t @ form.t.T)))
    cb = float(np.sum(stats.zeta_b * (form.t.T @ form.t)))
    ff = w.f_a**2 * w.f_b**2

    var_diag = (form.r_a2 * ha2 + form.r_b2 * hb2 + form.t2 * gv2 / dd) / dd
    ideal = w.kappa_ab**2 * var_diag
    proj = (
        ((ff**2 + w.kappa_a**2) * c1 + w.kappa_b**2 * form.r_a2) * ha2
        + ((ff**2 + w.kappa_b**2) * c2 + w.kappa_a**2 * form.r_b2) * hb2
        + gv2 / dd * (ff**2 * c3 + w.kappa_a**2 * ca + w.kappa_b**2 * cb)
    ) / dd
    noisy = (
        2.0
        * (
            (w.gamma_a * c1 + w.kappa_b * w.kappa_ab * form.r_a2) * ha2
            + (w.gamma_b * c2 + w.kappa_a * w.kappa_ab * form.r_b2) * hb2
            + gv2 / dd * (w.gamma_ab * c3 + w.kappa_a * w.kappa_ab * ca + w.kappa_b * w.kappa_ab * cb)
        )
        / dd
    )
    var_tpm = ideal + proj + noisy
    return TpmVarianceReport(
        d=d,
        eps_a=eps_a,
        eps_b=eps_b,
        mean_tpm=tpm_work_mean(rho, spec),
        var_tpm=var_tpm,
        var_diag=var_diag,
        var_projective=proj / w.n1 if w.n1 > 0 else 0.0,
        var_noisy=noisy / w.n_noisy if w.n_noisy > 0 else 0.0,
        ideal_term=ideal,
        projective_term=proj,
        noisy_term=noisy,
        ha2=ha2,
        hb2=hb2,
        g2v2_diag=gv2,
        weights=w,
    )
