"""Seeded, chunked Monte Carlo estimation of every link metric.

Realization ``i`` of a run always draws from counter window ``base + i``
(see :mod:`nomacast.rng`), so the estimate is bit-identical for any chunking
of the index range and any worker count.  Chunks are reduced to running
moments and combined in index order; workers only parallelize chunk
evaluation.

Two sampling modes: ``direct_gains`` draws the effective gains from their
known distributions (fast; valid only for MRT toward the unicast user
without scheduling) and ``full_matrix`` materializes the channel matrices
(needed for scheduling and for non-MRT OMA beamformers).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import transmission as tx
from .channel import EQUAL_GAIN, MRT, RANDOM, channels_from_normals
from .rng import (DOMAIN_DIRECT_GAINS, DOMAIN_FULL_MATRIX, bits_to_exponential,
                  bits_to_normal, window_bits)
from .transmission import RATE_EQ_GUARD, LinkConfig

FULL_MATRIX = "full_matrix"
DIRECT_GAINS = "direct_gains"

_CHUNK = 1 << 16
_Z95 = 1.959963984540054


class MetricKind(Enum):
    MULTICAST_OUTAGE = "multicast_outage"
    UNICAST_OUTAGE = "unicast_outage"
    UNICAST_OUTAGE_OMA = "unicast_outage_oma"
    SECRECY_OUTAGE = "secrecy_outage"
    SECRECY_OUTAGE_OMA = "secrecy_outage_oma"
    NOMA_TRAILS_OMA = "noma_trails_oma"
    MEAN_NOMA_UNICAST_RATE = "mean_noma_unicast_rate"
    MEAN_OMA_UNICAST_RATE = "mean_oma_unicast_rate"
    MEAN_NOMA_SECRECY_RATE = "mean_noma_secrecy_rate"
    MEAN_OMA_SECRECY_RATE = "mean_oma_secrecy_rate"
    OUTAGE_RATE_UNICAST = "outage_rate_unicast"
    OUTAGE_RATE_UNICAST_OMA = "outage_rate_unicast_oma"
    OUTAGE_RATE_SECRECY = "outage_rate_secrecy"
    OUTAGE_RATE_SECRECY_OMA = "outage_rate_secrecy_oma"


_PROBABILITY_METRICS = {
    MetricKind.MULTICAST_OUTAGE, MetricKind.UNICAST_OUTAGE,
    MetricKind.UNICAST_OUTAGE_OMA, MetricKind.SECRECY_OUTAGE,
    MetricKind.SECRECY_OUTAGE_OMA, MetricKind.NOMA_TRAILS_OMA,
}

# metric -> (per-realization field, outage-rate target attribute or None)
_METRIC_FIELDS = {
    MetricKind.MULTICAST_OUTAGE: ("multicast_outage", None),
    MetricKind.UNICAST_OUTAGE: ("noma_unicast_outage", None),
    MetricKind.UNICAST_OUTAGE_OMA: ("oma_unicast_outage", None),
    MetricKind.SECRECY_OUTAGE: ("noma_secrecy_outage", None),
    MetricKind.SECRECY_OUTAGE_OMA: ("oma_secrecy_outage", None),
    MetricKind.NOMA_TRAILS_OMA: ("noma_trails_oma", None),
    MetricKind.MEAN_NOMA_UNICAST_RATE: ("noma_unicast_rate", None),
    MetricKind.MEAN_OMA_UNICAST_RATE: ("oma_unicast_rate", None),
    MetricKind.MEAN_NOMA_SECRECY_RATE: ("noma_secrecy_rate", None),
    MetricKind.MEAN_OMA_SECRECY_RATE: ("oma_secrecy_rate", None),
    MetricKind.OUTAGE_RATE_UNICAST: ("noma_unicast_outage", "r_u"),
    MetricKind.OUTAGE_RATE_UNICAST_OMA: ("oma_unicast_outage", "r_u"),
    MetricKind.OUTAGE_RATE_SECRECY: ("noma_secrecy_outage", "r_s"),
    MetricKind.OUTAGE_RATE_SECRECY_OMA: ("oma_secrecy_outage", "r_s"),
}

_FIELDS = ("multicast_outage", "noma_unicast_outage", "oma_unicast_outage",
           "noma_secrecy_outage", "oma_secrecy_outage", "noma_trails_oma",
           "noma_unicast_rate", "oma_unicast_rate", "noma_secrecy_rate",
           "oma_secrecy_rate", "secrecy_gap", "secrecy_violation", "sched_ok")


@dataclass(frozen=True)
class SimulationPlan:
    """How to run a Monte Carlo estimate."""

    samples: int
    seed: int
    mode: str = DIRECT_GAINS
    scheduling: bool = False
    oma_beamformer: str = MRT
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"need at least one sample, got {self.samples}")
        if self.mode not in (FULL_MATRIX, DIRECT_GAINS):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.oma_beamformer not in (MRT, EQUAL_GAIN, RANDOM):
            raise ValueError(f"unknown OMA beamformer {self.oma_beamformer!r}")
        if self.scheduling and self.mode != FULL_MATRIX:
            raise ValueError("scheduling requires full_matrix sampling")
        if self.mode == DIRECT_GAINS and self.oma_beamformer != MRT:
            raise ValueError("direct_gains sampling is only valid with the MRT "
                             "OMA beamformer")
        if self.workers < 1:
            raise ValueError(f"need at least one worker, got {self.workers}")


@dataclass(frozen=True)
class Estimate:
    """Sample mean with standard error and a 95% normal interval."""

    value: float
    stderr: float
    ci_low: float
    ci_high: float
    samples: int


@dataclass(frozen=True)
class SecrecyComparison:
    """Per-realization NOMA vs OMA secrecy rate comparison.

    ``violation_fraction`` counts realizations where the NOMA secrecy rate
    falls below the OMA one by more than the floating-point guard;
    ``mean_gap`` is the average NOMA-minus-OMA secrecy rate.
    """

    violation_fraction: Estimate
    mean_gap: Estimate


def _chunk_moments(args):
    """Per-realization outcomes for window indices [lo, hi), reduced to moments."""
    cfg, m, k, plan, base, lo, hi = args
    n = hi - lo
    if plan.mode == DIRECT_GAINS:
        bits = window_bits(plan.seed, DOMAIN_DIRECT_GAINS, base + lo, n, m + k - 1)
        e = bits_to_exponential(bits)
        z1 = e[:, :m].sum(axis=1)
        others = e[:, m:]
        z1_oma, others_oma = z1, others
    else:
        width = 2 * k * m + (2 * m if plan.oma_beamformer == RANDOM else 0)
        bits = window_bits(plan.seed, DOMAIN_FULL_MATRIX, base + lo, n, width)
        g = bits_to_normal(bits[:, :2 * k * m])
        h = channels_from_normals(g, k, m)
        norms = (h.real**2 + h.imag**2).sum(axis=2)
        rows = np.arange(n)
        sel = norms.argmax(axis=1) if plan.scheduling else np.zeros(n, dtype=np.intp)
        h_sel = h[rows, sel]
        z1 = norms[rows, sel]
        proj = np.abs(np.einsum("rkm,rm->rk", h, h_sel.conj())) ** 2 / z1[:, None]
        keep = np.ones((n, k), dtype=bool)
        keep[rows, sel] = False
        others = proj[keep].reshape(n, k - 1)
        if plan.oma_beamformer == MRT:
            z1_oma, others_oma = z1, others
        else:
            if plan.oma_beamformer == EQUAL_GAIN:
                p_bf = np.full((n, m), 1.0 / math.sqrt(m), dtype=np.complex128)
            else:
                gp = bits_to_normal(bits[:, 2 * k * m:])
                p_bf = gp[:, 0::2] + 1j * gp[:, 1::2]
                p_bf /= np.linalg.norm(p_bf, axis=1, keepdims=True)
            proj_o = np.abs(np.einsum("rkm,rm->rk", h, p_bf)) ** 2
            z1_oma = proj_o[rows, sel]
            others_oma = proj_o[keep].reshape(n, k - 1)

    u = others.min(axis=1)
    v = others.max(axis=1)
    thr = cfg.eps_m / cfg.rho
    alpha_u2 = tx.power_fraction(z1, others, cfg)
    gamma = tx.time_fraction(z1_oma, others_oma, cfg)

    r1_noma = tx.noma_rate(z1, alpha_u2, cfg)
    eaves_noma = tx.noma_rate(v, alpha_u2, cfg)  # rates increase with gain
    r1_oma = tx.oma_rate(z1_oma, gamma, cfg)
    eaves_oma = tx.oma_rate(others_oma.max(axis=1), gamma, cfg)
    rs_noma = tx.secrecy_rate(r1_noma, eaves_noma)
    rs_oma = tx.secrecy_rate(r1_oma, eaves_oma)
    gap = rs_noma - rs_oma

    fields = {
        "multicast_outage": np.minimum(z1, u) < thr,
        "noma_unicast_outage": z1 * alpha_u2 < cfg.eps_u / cfg.rho,
        "oma_unicast_outage": r1_oma < cfg.r_u,
        "noma_secrecy_outage": (z1 - 2.0**cfg.r_s * v) * alpha_u2 < cfg.eps_s / cfg.rho,
        "oma_secrecy_outage": rs_oma < cfg.r_s,
        "noma_trails_oma": r1_noma <= r1_oma + RATE_EQ_GUARD,
        "noma_unicast_rate": r1_noma,
        "oma_unicast_rate": r1_oma,
        "noma_secrecy_rate": rs_noma,
        "oma_secrecy_rate": rs_oma,
        "secrecy_gap": gap,
        "secrecy_violation": gap < -RATE_EQ_GUARD,
        "sched_ok": z1 >= u,
    }
    sums = np.empty(len(_FIELDS))
    sumsqs = np.empty(len(_FIELDS))
    for i, name in enumerate(_FIELDS):
        x = fields[name].astype(np.float64, copy=False)
        sums[i] = x.sum()
        sumsqs[i] = (x * x).sum()
    return n, sums, sumsqs


def _run_moments(cfg: LinkConfig, system, plan: SimulationPlan, base: int):
    """Accumulate per-field moments over all realizations of a run."""
    m, k = system
    if k < 2:
        raise ValueError(f"need at least 2 users, got {k}")
    if m < 1:
        raise ValueError(f"need at least 1 antenna, got {m}")
    chunks = [(cfg, m, k, plan, base, lo, min(lo + _CHUNK, plan.samples))
              for lo in range(0, plan.samples, _CHUNK)]
    if plan.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            results = list(pool.map(_chunk_moments, chunks, chunksize=1))
    else:
        results = [_chunk_moments(c) for c in chunks]
    total = 0
    sums = np.zeros(len(_FIELDS))
    sumsqs = np.zeros(len(_FIELDS))
    for n, s, ss in results:  # fixed chunk order keeps the reduction exact
        total += n
        sums += s
        sumsqs += ss
    return total, dict(zip(_FIELDS, sums)), dict(zip(_FIELDS, sumsqs))


def _moment_estimate(n: int, s: float, ssq: float, probability: bool) -> Estimate:
    mean = s / n
    var = max(0.0, ssq - s * s / n) / (n - 1) if n > 1 else 0.0
    stderr = math.sqrt(var / n)
    lo, hi = mean - _Z95 * stderr, mean + _Z95 * stderr
    if probability:
        lo, hi = max(0.0, lo), min(1.0, hi)
    return Estimate(mean, stderr, lo, hi, n)


def _metric_estimate(metric: MetricKind, cfg: LinkConfig, n, sums, sumsqs) -> Estimate:
    field, rate_attr = _METRIC_FIELDS[metric]
    base = _moment_estimate(n, sums[field], sumsqs[field],
                            probability=metric in _PROBABILITY_METRICS
                            or rate_attr is not None)
    if rate_attr is None:
        return base
    target = getattr(cfg, rate_attr)
    if not target > 0:
        raise ValueError(f"{metric.value} needs a positive {rate_attr} target")
    # outage rate (1 - P) * target, derived from the outage indicator moments
    return Estimate(target * (1.0 - base.value), target * base.stderr,
                    target * (1.0 - base.ci_high), target * (1.0 - base.ci_low),
                    n)


def estimate_many(metrics, cfg: LinkConfig, system, plan: SimulationPlan,
                  stream_base: int = 0) -> dict:
    """Estimate several metrics from one shared set of realizations."""
    n, sums, sumsqs = _run_moments(cfg, system, plan, stream_base)
    return {m: _metric_estimate(m, cfg, n, sums, sumsqs) for m in metrics}


def estimate(metric: MetricKind, cfg: LinkConfig, system,
             plan: SimulationPlan, stream_base: int = 0) -> Estimate:
    """Monte Carlo estimate of one metric.

    Deterministic for fixed (seed, samples, mode, scheduling, beamformer)
    regardless of worker count: realization ``i`` always consumes counter
    window ``stream_base + i``.
    """
    return estimate_many([metric], cfg, system, plan, stream_base)[metric]


def sweep(metric: MetricKind, cfg: LinkConfig, snr_grid_db, system,
          plan: SimulationPlan):
    """One estimate per SNR grid point (dB); points use disjoint substreams."""
    snr_grid_db = list(snr_grid_db)
    if not snr_grid_db:
        raise ValueError("empty SNR grid")
    out = []
    for idx, snr_db in enumerate(snr_grid_db):
        point_cfg = replace(cfg, rho=10.0 ** (snr_db / 10.0))
        out.append((snr_db, estimate(metric, point_cfg, system, plan,
                                     stream_base=idx * plan.samples)))
    return out


def scheduling_check(cfg: LinkConfig, system, plan: SimulationPlan) -> Estimate:
    """Fraction of realizations with z1 >= u (must be 1.0 under scheduling)."""
    n, sums, sumsqs = _run_moments(cfg, system, plan, 0)
    return _moment_estimate(n, sums["sched_ok"], sumsqs["sched_ok"], probability=True)


def compare_secrecy_rates(cfg: LinkConfig, system, plan: SimulationPlan,
                          rho_db: float | None = None) -> SecrecyComparison:
    """Head-to-head NOMA vs OMA secrecy rates over shared realizations."""
    if rho_db is not None:
        cfg = replace(cfg, rho=10.0 ** (rho_db / 10.0))
    n, sums, sumsqs = _run_moments(cfg, system, plan, 0)
    violation = _moment_estimate(n, sums["secrecy_violation"],
                                 sumsqs["secrecy_violation"], probability=True)
    gap = _moment_estimate(n, sums["secrecy_gap"], sumsqs["secrecy_gap"],
                           probability=False)
    return SecrecyComparison(violation, gap)
