"""Configuration-driven experiment runner: sweeps, histograms, verification.

Configs are JSON dicts with the sections ``battery``, ``state``,
``protocol``, ``parameters``, ``sampling`` and ``output`` (see
``serialization`` for the battery/state formats).  Sweeps emit one CSV row
per grid point with the swept parameters echoed, so any row can be
reproduced by a direct library call; CSV files start with a versioned
schema comment.  A seed is mandatory for anything that samples unitaries.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .battery import BatteryHamiltonian, gibbs_state, spectral_decomposition, thermal_mixture_state
from .bloch import bloch_decompose
from .coincidence import avg_coincidence_closed, coincidence_bound, mc_coincidence
from .haar import HaarSampler, SamplerConfig, iter_pair_unitaries, twirl1, twirl2, two_copy_local_twirl
from .linalg import random_density_matrix, random_hermitian
from .serialization import ConfigError, battery_from_spec, state_from_spec
from .tpm import (
    mc_tpm_statistics,
    tpm_spectral_stats,
    tpm_variance_closed_form,
    tpm_weights,
    tpm_work_mean,
)
from .witness import detect_schmidt_number
from .workstats import analytic_work_variance, mc_work_statistics, work_sample_summary
from . import battery as battery_mod

__all__ = [
    "ExperimentConfig",
    "run_variance_sweep",
    "run_tpm_sweep",
    "run_histogram",
    "run_point",
    "run_verify",
    "write_rows_csv",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1

DEFAULT_BATTERY = {"ising": {"J1": 0.5, "J2": 1.0, "J3": 0.5, "b": 0.45}}
DEFAULT_STATE = {"thermal_mixture": {"alpha": 0.96, "T": 1.5}}
DEFAULT_VERIFY_SEED = 20240901


@dataclass
class ExperimentConfig:
    """Validated runner configuration with round-trippable serialization."""

    protocol: str = "variance"
    battery: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_BATTERY)))
    state: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_STATE)))
    parameters: dict = field(default_factory=dict)
    sampling: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    KNOWN_PROTOCOLS = ("variance", "witness", "histogram", "tpm", "coincidence", "verify")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config", "top level must be a JSON object")
        unknown = set(obj) - {"protocol", "battery", "state", "parameters", "sampling", "output"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        cfg = cls(
            protocol=obj.get("protocol", "variance"),
            battery=obj.get("battery", json.loads(json.dumps(DEFAULT_BATTERY))),
            state=obj.get("state", json.loads(json.dumps(DEFAULT_STATE))),
            parameters=obj.get("parameters", {}),
            sampling=obj.get("sampling", {}),
            output=obj.get("output", {}),
        )
        if cfg.protocol not in cls.KNOWN_PROTOCOLS:
            raise ConfigError("protocol", f"unknown protocol {cfg.protocol!r}")
        for key in ("parameters", "sampling", "output", "battery", "state"):
            if not isinstance(getattr(cfg, key), dict):
                raise ConfigError(key, "must be a JSON object")
        grids = [k for k in cfg.parameters if k.endswith("_grid")]
        for k in grids:
            if len(cfg.parameters[k]) == 0:
                raise ConfigError(f"parameters.{k}", "grid must be non-empty")
        return cfg

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "battery": self.battery,
            "state": self.state,
            "parameters": self.parameters,
            "sampling": self.sampling,
            "output": self.output,
        }

    def sampler(self, d: int, *, required: bool = True) -> SamplerConfig | None:
        """Sampler config from the sampling section; seed is mandatory."""
        seed = self.sampling.get("seed")
        if seed is None:
            if required:
                raise ConfigError("sampling.seed", "a seed is mandatory for Monte-Carlo runs")
            return None
        return SamplerConfig(d=d, seed=int(seed), stream=int(self.sampling.get("stream", 0)))

    def n_unitaries(self, default: int = 100_000) -> int:
        n = int(self.sampling.get("n_unitaries", default))
        if n < 2:
            raise ConfigError("sampling.n_unitaries", f"need at least 2 samples, got {n}")
        return n

    def streams(self) -> int:
        return int(self.sampling.get("streams", 1))


def _ising_params(cfg: ExperimentConfig) -> dict:
    if "ising" not in cfg.battery:
        raise ConfigError("battery", "this sweep requires the 'ising' battery family")
    return dict(cfg.battery["ising"])


def _thermal_params(cfg: ExperimentConfig) -> dict:
    if "thermal_mixture" not in cfg.state:
        raise ConfigError("state", "this sweep requires the 'thermal_mixture' state family")
    return dict(cfg.state["thermal_mixture"])


def _build_point(cfg: ExperimentConfig):
    h = battery_from_spec(cfg.battery)
    rho = state_from_spec(cfg.state, h)
    return h, rho


def run_variance_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Closed-form variance, per-k bounds, detected level, and PPT on a (b, alpha) grid.

    The default grid spans field strengths 0..0.9 and mixing ratios 0..1 for
    the Ising family, the setting in which stronger mixing crosses the
    detection thresholds.
    """
    ip = _ising_params(cfg)
    tp = _thermal_params(cfg)
    b_grid = [float(x) for x in cfg.parameters.get("b_grid", np.round(np.arange(0.0, 0.901, 0.05), 10))]
    a_grid = [float(x) for x in cfg.parameters.get("alpha_grid", np.round(np.arange(0.0, 1.001, 0.04), 10))]
    rows = []
    for b in b_grid:
        h = battery_from_spec({"ising": {**ip, "b": b}})
        tau_a = gibbs_state(h.ha, float(tp["T"]))
        tau_b = gibbs_state(h.hb, float(tp["T"]))
        for alpha in a_grid:
            rho = thermal_mixture_state(alpha, tau_a, tau_b)
            rep = detect_schmidt_number(rho, h)
            row = {
                "J1": float(ip["J1"]),
                "J2": float(ip["J2"]),
                "J3": float(ip["J3"]),
                "T": float(tp["T"]),
                "b": b,
                "alpha": alpha,
                "variance": rep.variance_used,
                "detected_sn": rep.detected_sn_lower_bound,
                "ppt_min_eig": rep.ppt_min_eig,
            }
            for k, bound in rep.thresholds[:-1]:  # k = d is never violable
                row[f"bound_k{k}"] = bound
            rows.append(row)
    return rows


def run_tpm_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Closed-form TPM variance and weights on an (alpha, eps) grid.

    Monte-Carlo columns appear when the sampling section provides a seed and
    ``mc: true``.
    """
    ip = _ising_params(cfg)
    tp = _thermal_params(cfg)
    eps_grid = [float(x) for x in cfg.parameters.get("eps_grid", (0.2, 0.5, 1.0))]
    a_grid = [float(x) for x in cfg.parameters.get("alpha_grid", np.round(np.arange(0.0, 1.001, 0.05), 10))]
    with_mc = bool(cfg.sampling.get("mc", False))
    h = battery_from_spec({"ising": ip})
    spec = spectral_decomposition(h)
    tau_a = gibbs_state(h.ha, float(tp["T"]))
    tau_b = gibbs_state(h.hb, float(tp["T"]))
    sampler = cfg.sampler(h.d) if with_mc else None
    rows = []
    for alpha in a_grid:
        rho = thermal_mixture_state(alpha, tau_a, tau_b)
        for eps in eps_grid:
            rep = tpm_variance_closed_form(rho, spec, eps, eps)
            row = {
                "J1": float(ip["J1"]),
                "J2": float(ip["J2"]),
                "J3": float(ip["J3"]),
                "b": float(ip["b"]),
                "T": float(tp["T"]),
                "alpha": alpha,
                "eps_a": eps,
                "eps_b": eps,
                "var_tpm": rep.var_tpm,
                "var_diag": rep.var_diag,
                "n0": rep.weights.n0,
                "n1": rep.weights.n1,
                "n_noisy": rep.weights.n_noisy,
            }
            if with_mc and sampler is not None:
                stats = mc_tpm_statistics(
                    rho, spec, eps, eps, cfg.n_unitaries(), sampler, streams=cfg.streams()
                )
                row.update(
                    mc_mean=stats.mean,
                    mc_variance=stats.variance,
                    mc_se_variance=stats.se_variance,
                )
            rows.append(row)
    return rows


def run_histogram(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Binned work counts plus a summary with sample mean/variance and SEs."""
    h, rho = _build_point(cfg)
    bin_width = float(cfg.parameters.get("bin_width", 0.1))
    if bin_width <= 0:
        raise ConfigError("parameters.bin_width", f"must be positive, got {bin_width}")
    n = cfg.n_unitaries()
    sampler = cfg.sampler(h.d)
    stats, hist = work_sample_summary(rho, h, n, sampler, bin_width=bin_width, streams=cfg.streams())
    assert hist is not None
    rows = [
        {"bin_left": hist.origin + i * bin_width, "bin_right": hist.origin + (i + 1) * bin_width, "count": int(c)}
        for i, c in enumerate(hist.counts)
    ]
    closed = analytic_work_variance(rho, h)
    summary = {
        "n_samples": stats.n_samples,
        "mean": stats.mean,
        "variance": stats.variance,
        "se_mean": stats.se_mean,
        "se_variance": stats.se_variance,
        "closed_form_mean": closed.mean,
        "closed_form_variance": closed.variance,
        "bin_width": bin_width,
        "origin": hist.origin,
    }
    return rows, summary


def run_point(cfg: ExperimentConfig) -> dict:
    """Single-point evaluation for the variance/witness/tpm/coincidence protocols."""
    h, rho = _build_point(cfg)
    protocol = cfg.protocol
    want_mc = bool(cfg.sampling.get("mc", False)) or "n_unitaries" in cfg.sampling
    if protocol == "variance":
        stats = analytic_work_variance(rho, h)
        out = {"protocol": protocol, "mean": stats.mean, "variance": stats.variance}
        if want_mc:
            mc = mc_work_statistics(rho, h, cfg.n_unitaries(), cfg.sampler(h.d), streams=cfg.streams())
            out["mc"] = {
                "n": mc.n_samples,
                "mean": mc.mean,
                "se_mean": mc.se_mean,
                "variance": mc.variance,
                "se_variance": mc.se_variance,
            }
        return out
    if protocol == "witness":
        return {"protocol": protocol, **detect_schmidt_number(rho, h).to_dict()}
    if protocol == "tpm":
        spec = spectral_decomposition(h)
        eps_a = float(cfg.parameters.get("eps_a", cfg.parameters.get("eps", 1.0)))
        eps_b = float(cfg.parameters.get("eps_b", cfg.parameters.get("eps", 1.0)))
        out = {"protocol": protocol, **tpm_variance_closed_form(rho, spec, eps_a, eps_b).to_dict()}
        if want_mc:
            mc = mc_tpm_statistics(rho, spec, eps_a, eps_b, cfg.n_unitaries(), cfg.sampler(h.d), streams=cfg.streams())
            out["mc"] = {
                "n": mc.n_samples,
                "mean": mc.mean,
                "se_mean": mc.se_mean,
                "variance": mc.variance,
                "se_variance": mc.se_variance,
            }
        return out
    if protocol == "coincidence":
        spec = spectral_decomposition(h)
        eps = float(cfg.parameters.get("eps", 1.0))
        rep = coincidence_bound(rho, h, spec, eps)
        out = {"protocol": protocol, **rep.to_dict()}
        if want_mc:
            mean, se = mc_coincidence(rho, spec, eps, eps, cfg.n_unitaries(), cfg.sampler(h.d), streams=cfg.streams())
            out["cbar_mc"] = mean
            out["cbar_mc_se"] = se
        return out
    raise ConfigError("protocol", f"{protocol!r} is not a single-point protocol")


# ---------------------------------------------------------------------------
# Verification suite: every closed form against an independent Monte-Carlo
# or sweep oracle, reported with measured deviations.
# ---------------------------------------------------------------------------


def _mc_matrix_mean(sample_chunks, shape) -> tuple[np.ndarray, np.ndarray, int]:
    """Elementwise mean and standard error (real/imag stacked) of MC matrices."""
    n = 0
    s = np.zeros(shape, dtype=np.complex128)
    sq = np.zeros((2,) + shape)
    for chunk in sample_chunks:
        n += chunk.shape[0]
        s += chunk.sum(axis=0)
        sq[0] += np.sum(chunk.real**2, axis=0)
        sq[1] += np.sum(chunk.imag**2, axis=0)
    mean = s / n
    var = np.empty_like(sq)
    var[0] = np.clip(sq[0] / n - mean.real**2, 0, None)
    var[1] = np.clip(sq[1] / n - mean.imag**2, 0, None)
    se = np.sqrt(var * n / max(n - 1, 1) / n)
    return mean, se, n


def _max_se_ratio(mc_mean, se, target, floor: float = 1e-12) -> float:
    dev = np.stack([np.abs(mc_mean.real - target.real), np.abs(mc_mean.imag - target.imag)])
    return float(np.max(dev / (se + floor)))


def _check_single_copy_twirl(rng, d, n, cfg) -> dict:
    x = random_hermitian(rng, d)
    target = twirl1(x)
    sampler = HaarSampler(cfg)

    def chunks():
        left = n
        while left > 0:
            k = min(4096, left)
            u = sampler.unitaries(k)
            yield u @ x @ u.conj().transpose(0, 2, 1)
            left -= k

    mean, se, _ = _mc_matrix_mean(chunks(), (d, d))
    return {"deviation": _max_se_ratio(mean, se, target)}


def _check_two_copy_twirl(rng, d, n, cfg) -> dict:
    x = random_hermitian(rng, d * d)
    target = twirl2(x)
    sampler = HaarSampler(cfg)

    def chunks():
        left = n
        while left > 0:
            k = min(2048, left)
            u = sampler.unitaries(k)
            uu = np.einsum("nab,ncd->nacbd", u, u).reshape(k, d * d, d * d)
            yield uu @ x @ uu.conj().transpose(0, 2, 1)
            left -= k

    mean, se, _ = _mc_matrix_mean(chunks(), (d * d, d * d))
    return {"deviation": _max_se_ratio(mean, se, target)}


def _check_two_copy_local_twirl(rng, d, n, cfg) -> dict:
    rho = random_density_matrix(rng, d * d)
    target = two_copy_local_twirl(rho, d)
    m = rho.data

    def chunks():
        for ua, ub in iter_pair_unitaries(cfg, n, chunk=512):
            k = ua.shape[0]
            u = np.einsum("nab,ncd->nacbd", ua, ub).reshape(k, d * d, d * d)
            rot = u @ m @ u.conj().transpose(0, 2, 1)
            yield np.einsum("nab,ncd->nacbd", rot, rot).reshape(k, d**4, d**4)

    mean, se, _ = _mc_matrix_mean(chunks(), (d**4, d**4))
    return {"deviation": _max_se_ratio(mean, se, target)}


def _random_battery(rng, d) -> BatteryHamiltonian:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return battery_mod.battery_hamiltonian(
            random_hermitian(rng, d), random_hermitian(rng, d), random_hermitian(rng, d * d), g=1.0
        )


def _check_work_variance(rng, d, n, cfg) -> dict:
    h = _random_battery(rng, d)
    rho = random_density_matrix(rng, d * d)
    closed = analytic_work_variance(rho, h).variance
    mc = mc_work_statistics(rho, h, n, cfg)
    return {"deviation": abs(mc.variance - closed) / (mc.se_variance + 1e-12)}


def _check_tpm_mean(rng, d, n, cfg) -> dict:
    h = _random_battery(rng, d)
    spec = spectral_decomposition(h)
    rho = random_density_matrix(rng, d * d)
    mc = mc_tpm_statistics(rho, spec, 0.6, 0.8, n, cfg)
    return {"deviation": abs(mc.mean - tpm_work_mean(rho, spec)) / (mc.se_mean + 1e-12)}


def _check_tpm_variance(rng, d, n, cfg) -> dict:
    h = _random_battery(rng, d)
    spec = spectral_decomposition(h)
    rho = random_density_matrix(rng, d * d)
    closed = tpm_variance_closed_form(rho, spec, 0.6, 0.8).var_tpm
    mc = mc_tpm_statistics(rho, spec, 0.6, 0.8, n, cfg)
    return {"deviation": abs(mc.variance - closed) / (mc.se_variance + 1e-12)}


def _check_coincidence(rng, d, n, cfg) -> dict:
    h = _random_battery(rng, d)
    spec = spectral_decomposition(h)
    rho = random_density_matrix(rng, d * d)
    closed = avg_coincidence_closed(rho, spec, 0.7, 0.4)
    mean, se = mc_coincidence(rho, spec, 0.7, 0.4, n, cfg)
    return {"deviation": abs(mean - closed) / (se + 1e-12)}


def _check_proof_inequalities(rng, d, n, cfg) -> dict:
    """Population/sector-length inequalities behind the TPM noise bound."""
    worst = np.inf
    closing_dev = 0.0
    for _ in range(50):
        h = _random_battery(rng, d)
        spec = spectral_decomposition(h)
        rho = random_density_matrix(rng, d * d)
        form = bloch_decompose(rho, d)
        st = tpm_spectral_stats(rho, spec)
        ca = float(np.sum(st.zeta_a * (form.t @ form.t.T)))
        cb = float(np.sum(st.zeta_b * (form.t.T @ form.t)))
        slacks = [
            form.r_a2 - (d * st.p_a2 - 1),
            form.r_b2 - (d * st.p_b2 - 1),
            form.t2 - (d * d * st.p_ab2 - d * st.p_a2 - d * st.p_b2 + 1),
            form.t2 - ca,
            form.t2 - cb,
        ]
        worst = min(worst, min(slacks))
        closing = float(np.einsum("ab,cd,ac,bd->", form.t, form.t, st.zeta_a, st.zeta_b))
        closing_dev = max(
            closing_dev,
            abs(closing - (d * d * st.p_ab2 - d * st.p_a2 - d * st.p_b2 + 1)),
        )
    # report the worst violation (positive = ok) through the same ratio slot
    return {"deviation": max(-worst, closing_dev) / 1e-10, "detail": {"min_slack": worst, "closing_dev": closing_dev}}


def _check_weight_functions(rng, d, n, cfg) -> dict:
    eps = np.linspace(0.0, 1.0, 101)
    worst = 0.0
    for e in eps:
        w = tpm_weights(float(e), float(e), d)
        vals = (w.n0, w.n1, w.n_noisy)
        worst = max(worst, abs(sum(vals) - 1.0))
        if min(vals) < -1e-15 or max(vals) > 1 + 1e-15:
            worst = max(worst, 1.0)
    return {"deviation": worst / 1e-12}


CHECKS: dict[str, Callable] = {
    "single_copy_twirl_vs_mc": _check_single_copy_twirl,
    "two_copy_twirl_vs_mc": _check_two_copy_twirl,
    "two_copy_local_twirl_vs_mc": _check_two_copy_local_twirl,
    "work_variance_vs_mc": _check_work_variance,
    "tpm_mean_vs_mc": _check_tpm_mean,
    "tpm_variance_vs_mc": _check_tpm_variance,
    "coincidence_vs_mc": _check_coincidence,
    "proof_inequalities": _check_proof_inequalities,
    "weight_functions": _check_weight_functions,
}


def run_verify(cfg: ExperimentConfig) -> dict:
    """Cross-check every closed form against its independent oracle.

    MC checks pass when the measured deviation stays below ``se_multiplier``
    standard errors (default 5); identity sweeps use fixed tolerances.  The
    report echoes seed and sizes so a rerun reproduces it bit for bit.
    """
    p = cfg.parameters
    d = int(p.get("d", 2))
    n = int(p.get("n", cfg.sampling.get("n_unitaries", 10_000)))
    seed = int(cfg.sampling.get("seed", DEFAULT_VERIFY_SEED))
    multiplier = float(p.get("se_multiplier", 5.0))
    checks = []
    all_passed = True
    for idx, (name, fn) in enumerate(CHECKS.items()):
        rng = np.random.default_rng(seed + 10_000 + idx)
        cfg_s = SamplerConfig(d=d, seed=seed, stream=idx)
        result = fn(rng, d, n, cfg_s)
        deviation = float(result["deviation"])
        threshold = 1.0 if name in ("proof_inequalities", "weight_functions") else multiplier
        passed = bool(deviation <= threshold)
        all_passed &= passed
        entry = {"name": name, "passed": passed, "deviation": deviation, "threshold": threshold}
        if "detail" in result:
            entry["detail"] = result["detail"]
        checks.append(entry)
    return {"seed": seed, "d": d, "n": n, "se_multiplier": multiplier, "passed": all_passed, "checks": checks}


def rows_to_csv(rows: list[dict], stream) -> None:
    fields = list(rows[0].keys())
    writer = csv.DictWriter(stream, fieldnames=fields)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def write_rows_csv(rows: list[dict], path_or_stream, schema: str) -> None:
    """CSV with a versioned schema comment; '.' decimals, no locale."""
    if not rows:
        raise ValueError("no rows to write")
    header = f"# schema=qbattery.{schema}.v{SCHEMA_VERSION}\n"
    if isinstance(path_or_stream, str):
        with open(path_or_stream, "w", newline="") as fh:
            fh.write(header)
            rows_to_csv(rows, fh)
    else:
        path_or_stream.write(header)
        rows_to_csv(rows, path_or_stream)
