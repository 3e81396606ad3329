"""Bipartite battery Hamiltonians, example families, and spectral views.

A battery is a d x d system with H = H_A (x) 1 + 1 (x) H_B + g V where the
interaction V carries no identity or single-sided components.  Arbitrary
input interactions are canonicalized to that form: extracted local parts are
folded (scaled by g) into H_A, H_B and the identity offset is dropped with a
warning, since it cannot affect any work value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bloch import interaction_coeffs, operator_coeffs
from .linalg import (
    DensityMatrix,
    StateLike,
    dagger,
    is_hermitian,
    partial_trace,
    _raw,
)

__all__ = [
    "BatteryHamiltonian",
    "SpectralDecomposition",
    "battery_hamiltonian",
    "ising_battery",
    "gibbs_state",
    "thermal_mixture_state",
    "spectral_decomposition",
]


@dataclass(frozen=True)
class BatteryHamiltonian:
    """H = ha (x) 1 + 1 (x) hb + g * v with a canonical (no local parts) v.

    The derived coefficient vectors/matrix expand the traceless parts of
    ha, hb and v over the generalized basis; the squared norms ha2, hb2, v2
    deliberately exclude identity components, which is forced by the shift
    invariance of extracted work.
    """

    d: int
    ha: np.ndarray
    hb: np.ndarray
    v: np.ndarray
    g: float
    ha_vec: np.ndarray
    hb_vec: np.ndarray
    v_mat: np.ndarray

    @property
    def ha2(self) -> float:
        return float(np.dot(self.ha_vec, self.ha_vec))

    @property
    def hb2(self) -> float:
        return float(np.dot(self.hb_vec, self.hb_vec))

    @property
    def v2(self) -> float:
        return float(np.sum(self.v_mat * self.v_mat))

    @property
    def g2v2(self) -> float:
        return self.g**2 * self.v2

    @property
    def total(self) -> np.ndarray:
        """Full d^2 x d^2 Hamiltonian matrix."""
        eye = np.eye(self.d)
        return np.kron(self.ha, eye) + np.kron(eye, self.hb) + self.g * self.v


def battery_hamiltonian(
    ha: np.ndarray,
    hb: np.ndarray,
    v: np.ndarray,
    g: float,
    *,
    atol: float = 1e-12,
) -> BatteryHamiltonian:
    """Assemble and canonicalize a battery Hamiltonian.

    ``ha``/``hb`` are Hermitian d x d local terms; ``v`` is a Hermitian
    d^2 x d^2 interaction; ``g`` its coupling strength.
    """
    ha = np.asarray(ha, dtype=np.complex128)
    hb = np.asarray(hb, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    d = ha.shape[0]
    if ha.shape != (d, d) or hb.shape != (d, d):
        raise ValueError("local Hamiltonians must be square and equal-sized")
    if v.shape != (d * d, d * d):
        raise ValueError(f"interaction must be {d * d} x {d * d}, got {v.shape}")
    for name, m in (("ha", ha), ("hb", hb), ("v", v)):
        if not is_hermitian(m, tol=1e-10):
            raise ValueError(f"{name} must be Hermitian")

    # Split off identity and single-sided components of v.
    offset = np.trace(v).real / d**2
    eye = np.eye(d)
    local_a = partial_trace(v, "A", d) / d - offset * eye
    local_b = partial_trace(v, "B", d) / d - offset * eye
    v_corr = v - offset * np.eye(d * d) - np.kron(local_a, eye) - np.kron(eye, local_b)
    moved = max(abs(offset), np.max(np.abs(local_a)), np.max(np.abs(local_b)))
    if moved > atol:
        warnings.warn(
            "interaction had identity/local components; local parts were folded "
            "(scaled by g) into the local Hamiltonians and the identity offset dropped",
            stacklevel=2,
        )
        ha = ha + g * local_a
        hb = hb + g * local_b
        v = v_corr

    return BatteryHamiltonian(
        d=d,
        ha=ha,
        hb=hb,
        v=v,
        g=float(g),
        ha_vec=operator_coeffs(ha, d),
        hb_vec=operator_coeffs(hb, d),
        v_mat=interaction_coeffs(v, d),
    )


_PAULI_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def ising_battery(j1: float, j2: float, j3: float, b: float) -> BatteryHamiltonian:
    """Four-qubit Ising chain with a homogeneous Z field, split (1,2 | 3,4).

    Each battery half is a two-qubit system (d = 4) with ZZ coupling j1
    (resp. j3) and field b; the halves couple through the middle ZZ bond of
    strength j2, i.e. Z on qubit 2 with Z on qubit 3.  The derived scalars
    satisfy ha2 = j1^2 + 2 b^2, hb2 = j3^2 + 2 b^2 and g2v2 = j2^2.
    """
    eye2 = np.eye(2)
    zz = np.kron(_PAULI_Z, _PAULI_Z)
    field = np.kron(_PAULI_Z, eye2) + np.kron(eye2, _PAULI_Z)
    ha = j1 * zz + b * field
    hb = j3 * zz + b * field
    v = np.kron(np.kron(eye2, _PAULI_Z), np.kron(_PAULI_Z, eye2))
    return battery_hamiltonian(ha, hb, v, g=j2)


def gibbs_state(h: np.ndarray, temperature: float) -> DensityMatrix:
    """Thermal state exp(-H/T)/Z via eigendecomposition (shift-stabilized)."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    h = np.asarray(h, dtype=np.complex128)
    w, u = np.linalg.eigh(h)
    x = np.exp(-(w - w.min()) / temperature)
    rho = (u * x) @ dagger(u)
    return DensityMatrix(rho / np.trace(rho).real)


def _fix_phases(u: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry real positive."""
    idx = np.argmax(np.abs(u), axis=0)
    lead = u[idx, np.arange(u.shape[1])]
    lead = np.where(np.abs(lead) > 0, lead, 1.0)
    return u * (np.abs(lead) / lead)


def thermal_mixture_state(
    alpha: float,
    tau_a: StateLike,
    tau_b: StateLike,
    *,
    spectrum_tol: float = 1e-9,
) -> DensityMatrix:
    """Mixture of a correlated pure state with the product of its marginals.

    rho = alpha |phi><phi| + (1 - alpha) tau_A (x) tau_B, where
    |phi> = sum_i sqrt(p_i) |e_i>|f_i> pairs the eigenvectors of tau_A and
    tau_B in descending-eigenvalue order.  Both marginals of rho equal the
    given tau's for every alpha, which requires the two spectra to agree
    within ``spectrum_tol``.  The pairing freedom (phases, degenerate
    rotations) amounts to a local unitary and leaves all sector lengths
    unchanged.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"mixing ratio must lie in [0, 1], got {alpha}")
    ta = _raw(tau_a)
    tb = _raw(tau_b)
    if ta.shape != tb.shape:
        raise ValueError("marginals must have equal dimension")
    wa, ua = np.linalg.eigh(ta)
    wb, ub = np.linalg.eigh(tb)
    wa, ua = wa[::-1], _fix_phases(ua[:, ::-1])
    wb, ub = wb[::-1], _fix_phases(ub[:, ::-1])
    if np.max(np.abs(wa - wb)) > spectrum_tol:
        raise ValueError(
            "incompatible marginals: tau_A and tau_B spectra differ beyond tolerance, "
            "no correlated pure state has both as reductions"
        )
    p = np.clip((wa + wb) / 2, 0.0, None)
    phi = np.einsum("i,ai,bi->ab", np.sqrt(p), ua, ub).ravel()
    rho = alpha * np.outer(phi, phi.conj()) + (1.0 - alpha) * np.kron(ta, tb)
    return DensityMatrix(rho)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Rank-1 local eigenprojectors and the diagonal part of the interaction.

    ``d_mat`` holds the interaction's diagonal matrix elements in the local
    product eigenbasis; ``v_od`` the off-diagonal remainder.  The joint
    diagonal spectrum is e_joint[i, j] = E_i^A + E_j^B + g * d_mat[i, j] and
    h_diag = H - g * v_od = sum_ij e_joint[i, j] P_i^A (x) P_j^B.
    """

    d: int
    g: float
    energies_a: np.ndarray  # (d,)
    energies_b: np.ndarray
    proj_a: np.ndarray  # (d, d, d) stack of rank-1 projectors
    proj_b: np.ndarray
    vecs_a: np.ndarray  # (d, d), columns are the projector vectors
    vecs_b: np.ndarray
    d_mat: np.ndarray  # (d, d)
    v_od: np.ndarray  # (d^2, d^2)
    e_joint: np.ndarray  # (d, d)
    h_diag: np.ndarray  # (d^2, d^2)


def _local_eigenbasis(h: np.ndarray, atol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Energies and eigenvector columns with a deterministic ordering.

    A Hamiltonian diagonal in the computational basis keeps that basis and
    ordering (covers degenerate spectra of Z-type models); otherwise
    eigenvectors are sorted by descending energy, ties broken by the index
    of each vector's largest-magnitude component.
    """
    d = h.shape[0]
    if np.max(np.abs(h - np.diag(np.diagonal(h)))) <= atol:
        return np.diagonal(h).real.copy(), np.eye(d, dtype=np.complex128)
    w, u = np.linalg.eigh(h)
    u = _fix_phases(u)
    lead = np.argmax(np.abs(u), axis=0)
    order = sorted(range(d), key=lambda i: (-w[i], lead[i]))
    return w[order], u[:, order]


def spectral_decomposition(h: BatteryHamiltonian) -> SpectralDecomposition:
    """Split the interaction into level shifts and eigenbasis changes."""
    d = h.d
    ea, ua = _local_eigenbasis(h.ha)
    eb, ub = _local_eigenbasis(h.hb)
    proj_a = np.einsum("ai,bi->iab", ua, ua.conj())
    proj_b = np.einsum("ai,bi->iab", ub, ub.conj())
    v4 = h.v.reshape(d, d, d, d)
    d_mat = np.einsum("abce,ica,jeb->ij", v4, proj_a, proj_b).real
    v_diag = np.einsum("ij,iab,jcd->acbd", d_mat, proj_a, proj_b).reshape(d * d, d * d)
    v_od = h.v - v_diag
    e_joint = ea[:, None] + eb[None, :] + h.g * d_mat
    h_diag = h.total - h.g * v_od
    return SpectralDecomposition(
        d=d,
        g=h.g,
        energies_a=ea,
        energies_b=eb,
        proj_a=proj_a,
        proj_b=proj_b,
        vecs_a=ua,
        vecs_b=ub,
        d_mat=d_mat,
        v_od=v_od,
        e_joint=e_joint,
        h_diag=h_diag,
    )
