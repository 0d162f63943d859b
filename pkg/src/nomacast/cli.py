"""Command-line front end: scenario runs, SNR sweeps, CSV, comparisons.

A scenario bundles the system size, rate targets, SNR grid, metrics, and
Monte Carlo budget.  The five ``fig*`` presets reproduce the reference
operating points; arbitrary scenarios load from a flat key=value config
file (see the README for the grammar).  Each run writes one CSV per metric
plus a text report comparing analytic and Monte Carlo values wherever both
exist.

Exit codes: 0 all comparisons pass (or nothing to compare), 1 a comparison
failed, 2 configuration error, 3 analytics unsupported for the request.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import (AnalysisParams, UnsupportedAnalyticsError, chebyshev_rule,
                       multicast_outage_prob, secrecy_outage_prob,
                       unicast_outage_prob)
from .channel import BEAMFORMER_KINDS, MRT
from .montecarlo import (DIRECT_GAINS, FULL_MATRIX, MetricKind, SimulationPlan,
                         estimate_many)
from .transmission import LinkConfig

EXIT_OK = 0
EXIT_COMPARISON_FAIL = 1
EXIT_CONFIG_ERROR = 2
EXIT_UNSUPPORTED = 3

CSV_HEADER = ("snr_db", "metric", "method", "value", "stderr", "ci_low", "ci_high")

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 12345

# Absolute comparison tolerance per probability metric; outage-rate rows
# scale the probability tolerance by the target rate.
_PROB_TOL = {
    MetricKind.MULTICAST_OUTAGE: 0.005,
    MetricKind.UNICAST_OUTAGE: 0.005,
    MetricKind.SECRECY_OUTAGE: 0.01,
    MetricKind.OUTAGE_RATE_UNICAST: 0.005,
    MetricKind.OUTAGE_RATE_SECRECY: 0.01,
}


class ScenarioError(Exception):
    """Unknown scenario name or malformed configuration."""


@dataclass(frozen=True)
class Scenario:
    name: str
    m: int
    k: int
    r_m: float
    r_u: float
    r_s: float
    snr_grid_db: tuple
    na: int
    metrics: tuple
    scheduling: bool = False
    oma_beamformer: str = MRT
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED

    def validate(self):
        if self.m < 1 or self.k < 2:
            raise ScenarioError(f"invalid system size M={self.m}, K={self.k}")
        if not self.snr_grid_db:
            raise ScenarioError("empty SNR grid")
        if self.na < 1:
            raise ScenarioError(f"invalid node count {self.na}")
        if self.oma_beamformer not in BEAMFORMER_KINDS:
            raise ScenarioError(f"unknown OMA beamformer {self.oma_beamformer!r}")
        if not self.metrics:
            raise ScenarioError("no metrics requested")
        return self


_UNICAST_METRICS = (MetricKind.UNICAST_OUTAGE, MetricKind.UNICAST_OUTAGE_OMA,
                    MetricKind.OUTAGE_RATE_UNICAST, MetricKind.OUTAGE_RATE_UNICAST_OMA)
_SECRECY_METRICS = (MetricKind.SECRECY_OUTAGE, MetricKind.SECRECY_OUTAGE_OMA,
                    MetricKind.OUTAGE_RATE_SECRECY, MetricKind.OUTAGE_RATE_SECRECY_OMA)


def _presets():
    grid4 = tuple(float(s) for s in range(0, 41, 4))
    grid5 = tuple(float(s) for s in range(0, 41, 5))
    fig1 = Scenario("fig1", m=10, k=11, r_m=1.0, r_u=6.0, r_s=0.0,
                    snr_grid_db=grid4, na=20, metrics=_UNICAST_METRICS)
    fig2 = Scenario("fig2", m=2, k=11, r_m=1.0, r_u=7.0, r_s=0.0,
                    snr_grid_db=grid4, na=20, metrics=_UNICAST_METRICS)
    fig3 = Scenario("fig3", m=10, k=11, r_m=1.0, r_u=6.0, r_s=0.0,
                    snr_grid_db=grid4, na=20,
                    metrics=(MetricKind.OUTAGE_RATE_UNICAST,
                             MetricKind.OUTAGE_RATE_UNICAST_OMA))
    fig4 = Scenario("fig4", m=10, k=11, r_m=1.0, r_u=6.0, r_s=2.0,
                    snr_grid_db=grid5, na=500, metrics=_SECRECY_METRICS)
    fig5 = Scenario("fig5", m=10, k=11, r_m=1.0, r_u=6.0, r_s=2.0,
                    snr_grid_db=grid5, na=500, metrics=_SECRECY_METRICS)
    return {
        "fig1": [fig1],
        "fig2": [replace(fig2, name="fig2_nosched"),
                 replace(fig2, name="fig2_sched", scheduling=True)],
        "fig3": [replace(fig3, name=f"fig3_{kind}", oma_beamformer=kind)
                 for kind in BEAMFORMER_KINDS],
        "fig4": [replace(fig4, name=f"fig4_rs{r}", r_s=float(r)) for r in (1, 2, 3)],
        "fig5": [replace(fig5, name="fig5_nosched"),
                 replace(fig5, name="fig5_sched", scheduling=True)],
    }


PRESETS = _presets()


@dataclass(frozen=True)
class ReportRow:
    snr_db: float
    metric: MetricKind
    analytic: float
    mc_value: float
    mc_stderr: float

    @property
    def abs_diff(self) -> float:
        return abs(self.analytic - self.mc_value)

    def tolerance(self, cfg: LinkConfig) -> float:
        base = _PROB_TOL.get(self.metric, 0.01)
        if self.metric is MetricKind.OUTAGE_RATE_UNICAST:
            base *= cfg.r_u
        elif self.metric is MetricKind.OUTAGE_RATE_SECRECY:
            base *= cfg.r_s
        return max(base, 3.0 * self.mc_stderr)


_GAP_PAIRS = (
    (MetricKind.OUTAGE_RATE_UNICAST, MetricKind.OUTAGE_RATE_UNICAST_OMA,
     "unicast outage-rate gap"),
    (MetricKind.OUTAGE_RATE_SECRECY, MetricKind.OUTAGE_RATE_SECRECY_OMA,
     "secrecy outage-rate gap"),
)


@dataclass
class ComparisonReport:
    scenario: Scenario
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    gaps: list = field(default_factory=list)  # (snr_db, label, noma - oma)

    @property
    def all_pass(self) -> bool:
        return all(v == "PASS" for v in self.verdicts)

    def render(self) -> str:
        lines = [f"scenario {self.scenario.name}: M={self.scenario.m} "
                 f"K={self.scenario.k} r_m={self.scenario.r_m:g} "
                 f"r_u={self.scenario.r_u:g} r_s={self.scenario.r_s:g} "
                 f"scheduling={'on' if self.scenario.scheduling else 'off'} "
                 f"oma={self.scenario.oma_beamformer} samples={self.scenario.samples} "
                 f"seed={self.scenario.seed}"]
        for note in self.notes:
            lines.append(f"  note: {note}")
        if not self.rows:
            lines.append("  no analytic/Monte-Carlo pairs to compare")
        for row, verdict in zip(self.rows, self.verdicts):
            lines.append(f"  {row.snr_db:6.1f} dB  {row.metric.value:<26} "
                         f"analytic={row.analytic:.6g} mc={row.mc_value:.6g} "
                         f"|diff|={row.abs_diff:.3g}  {verdict}")
        for snr_db, label, gap in self.gaps:
            lines.append(f"  {snr_db:6.1f} dB  {label}: {gap:+.3f} BPCU")
        lines.append(f"  verdict: {'PASS' if self.all_pass else 'FAIL'}")
        return "\n".join(lines)


def analytic_value(metric: MetricKind, cfg: LinkConfig, m: int, k: int, na: int,
                   scheduling: bool = False):
    """Closed-form value of a metric, or None when no closed form applies.

    Scheduling changes the gain distributions, so no closed form applies
    there; secrecy analytics additionally need K >= 3 (raised as
    UnsupportedAnalyticsError so pure-analytic runs can exit distinctly).
    """
    if scheduling:
        return None
    if metric is MetricKind.MULTICAST_OUTAGE:
        return multicast_outage_prob(AnalysisParams.from_link(m, k, cfg))
    if metric in (MetricKind.UNICAST_OUTAGE, MetricKind.OUTAGE_RATE_UNICAST):
        p = unicast_outage_prob(AnalysisParams.from_link(m, k, cfg),
                                chebyshev_rule(na)).total
        return p if metric is MetricKind.UNICAST_OUTAGE else (1.0 - p) * cfg.r_u
    if metric in (MetricKind.SECRECY_OUTAGE, MetricKind.OUTAGE_RATE_SECRECY):
        p = secrecy_outage_prob(AnalysisParams.from_link(m, k, cfg),
                                chebyshev_rule(na)).total
        return p if metric is MetricKind.SECRECY_OUTAGE else (1.0 - p) * cfg.r_s
    return None


def emit_csv(rows, path):
    """Write metric rows with the fixed schema and deterministic order."""
    rows = sorted(rows, key=lambda r: (r["snr_db"], r["metric"], r["method"]))
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([f"{r['snr_db']:.9g}", r["metric"], r["method"],
                             f"{r['value']:.9g}", f"{r['stderr']:.9g}",
                             f"{r['ci_low']:.9g}", f"{r['ci_high']:.9g}"])
    return path


def read_csv(path):
    """Parse a metric CSV back into row dicts (floats for numeric columns)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ScenarioError(f"unexpected CSV header in {path}")
        for rec in reader:
            out.append({"snr_db": float(rec["snr_db"]), "metric": rec["metric"],
                        "method": rec["method"], "value": float(rec["value"]),
                        "stderr": float(rec["stderr"]),
                        "ci_low": float(rec["ci_low"]),
                        "ci_high": float(rec["ci_high"])})
    return out


def run_scenario(scenario: Scenario, out_dir=".", mode: str = "both",
                 workers: int = 1):
    """Execute one scenario variant; returns (report, list of CSV paths)."""
    scenario.validate()
    if mode not in ("analytic", "mc", "both"):
        raise ScenarioError(f"unknown mode {mode!r}")
    run_mc = mode in ("mc", "both")
    run_analytic = mode in ("analytic", "both")
    if run_mc and scenario.samples < 1:
        raise ScenarioError("Monte Carlo requested with samples < 1")

    sampling = (DIRECT_GAINS if not scenario.scheduling
                and scenario.oma_beamformer == MRT else FULL_MATRIX)
    plan = (SimulationPlan(scenario.samples, scenario.seed, sampling,
                           scenario.scheduling, scenario.oma_beamformer, workers)
            if run_mc else None)

    report = ComparisonReport(scenario)
    csv_rows = {metric: [] for metric in scenario.metrics}
    analytic_seen = False
    for idx, snr_db in enumerate(sorted(scenario.snr_grid_db)):
        cfg = LinkConfig(10.0 ** (snr_db / 10.0), scenario.r_m, scenario.r_u,
                         scenario.r_s)
        mc = (estimate_many(scenario.metrics, cfg, (scenario.m, scenario.k), plan,
                            stream_base=idx * scenario.samples) if run_mc else {})
        for metric in scenario.metrics:
            analytic = None
            if run_analytic:
                try:
                    analytic = analytic_value(metric, cfg, scenario.m, scenario.k,
                                              scenario.na, scenario.scheduling)
                except UnsupportedAnalyticsError as exc:
                    if mode == "analytic":
                        raise
                    if str(exc) not in report.notes:
                        report.notes.append(str(exc))
            if analytic is not None:
                analytic_seen = True
                csv_rows[metric].append({
                    "snr_db": snr_db, "metric": metric.value, "method": "analytic",
                    "value": analytic, "stderr": 0.0, "ci_low": analytic,
                    "ci_high": analytic})
            if metric in mc:
                est = mc[metric]
                csv_rows[metric].append({
                    "snr_db": snr_db, "metric": metric.value, "method": "mc",
                    "value": est.value, "stderr": est.stderr,
                    "ci_low": est.ci_low, "ci_high": est.ci_high})
            if analytic is not None and metric in mc:
                row = ReportRow(snr_db, metric, analytic, mc[metric].value,
                                mc[metric].stderr)
                report.rows.append(row)
                report.verdicts.append(
                    "PASS" if row.abs_diff <= row.tolerance(cfg) else "FAIL")
        for noma_metric, oma_metric, label in _GAP_PAIRS:
            if noma_metric in mc and oma_metric in mc:
                report.gaps.append((snr_db, label,
                                    mc[noma_metric].value - mc[oma_metric].value))
    if mode == "analytic" and not analytic_seen:
        raise UnsupportedAnalyticsError(
            f"no closed form applies to scenario {scenario.name!r} "
            f"(scheduling={'on' if scenario.scheduling else 'off'})")

    paths = [emit_csv(rows, Path(out_dir) / f"{scenario.name}_{metric.value}.csv")
             for metric, rows in csv_rows.items() if rows]
    return report, paths


# --- configuration loading ----------------------------------------------------

def parse_snr_grid(text: str):
    """Parse 'LO:HI:STEP' (inclusive) or a comma-separated list of dB values."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            return tuple(np.arange(lo, hi + step / 2, step).tolist())
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ScenarioError(f"cannot parse SNR grid {text!r}") from None


def parse_metrics(items):
    out = []
    for item in items:
        try:
            out.append(MetricKind(item.strip()))
        except ValueError:
            valid = ", ".join(m.value for m in MetricKind)
            raise ScenarioError(f"unknown metric {item!r}; valid: {valid}") from None
    return tuple(out)


def _parse_bool(text: str) -> bool:
    if text.lower() in ("on", "true", "yes", "1"):
        return True
    if text.lower() in ("off", "false", "no", "0"):
        return False
    raise ScenarioError(f"cannot parse boolean {text!r}")


def load_scenario_file(path) -> Scenario:
    """Load a scenario from a [scenario] section of key=value lines."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = parser.read(path)
    if not read:
        raise ScenarioError(f"cannot read config file {path}")
    if not parser.has_section("scenario"):
        raise ScenarioError(f"{path} has no [scenario] section")
    sec = parser["scenario"]
    for req in ("m", "k", "r_m", "r_u", "metrics"):
        if req not in sec:
            raise ScenarioError(f"{path}: missing required key {req!r}")
    try:
        return Scenario(
            name=sec.get("name", Path(path).stem),
            m=sec.getint("m"),
            k=sec.getint("k"),
            r_m=sec.getfloat("r_m"),
            r_u=sec.getfloat("r_u"),
            r_s=sec.getfloat("r_s", 0.0),
            snr_grid_db=parse_snr_grid(sec.get("snr_db", "0:40:4")),
            na=sec.getint("na", 20),
            metrics=parse_metrics(sec.get("metrics").split(",")),
            scheduling=_parse_bool(sec.get("scheduling", "off")),
            oma_beamformer=sec.get("oma_beamformer", MRT),
            samples=sec.getint("samples", DEFAULT_SAMPLES),
            seed=sec.getint("seed", DEFAULT_SEED),
        ).validate()
    except (configparser.Error, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario config {path}: {exc}") from None


def resolve_scenarios(name=None, config_path=None):
    if name is not None:
        if name not in PRESETS:
            raise ScenarioError(f"unknown scenario {name!r}; presets: "
                                f"{', '.join(sorted(PRESETS))}")
        return list(PRESETS[name]), name
    scenario = load_scenario_file(config_path)
    return [scenario], scenario.name


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    updates = {}
    if args.metric:
        updates["metrics"] = parse_metrics(args.metric)
    if args.samples is not None:
        updates["samples"] = args.samples
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.snr is not None:
        updates["snr_grid_db"] = parse_snr_grid(args.snr)
    if args.na is not None:
        updates["na"] = args.na
    if args.scheduling is not None:
        updates["scheduling"] = _parse_bool(args.scheduling)
    if args.oma_beamformer is not None:
        updates["oma_beamformer"] = args.oma_beamformer
    for dim in ("m", "k", "r_m", "r_u", "r_s"):
        if getattr(args, dim) is not None:
            updates[dim] = getattr(args, dim)
    return replace(scenario, **updates) if updates else scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nomacast",
        description="Link-level NOMA multicast/unicast simulator and "
                    "outage calculator")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", help="preset name (fig1..fig5)")
    source.add_argument("--config", help="path to a scenario config file")
    parser.add_argument("--metric", action="append",
                        help="metric to evaluate (repeatable); overrides the "
                             "scenario's list")
    parser.add_argument("--mode", choices=("analytic", "mc", "both"),
                        default="both")
    parser.add_argument("--samples", type=int, help="Monte Carlo samples per point")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--snr", help="grid as LO:HI:STEP (dB) or comma list")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--na", type=int, help="quadrature node count")
    parser.add_argument("--scheduling", choices=("on", "off"))
    parser.add_argument("--oma-beamformer", dest="oma_beamformer",
                        choices=BEAMFORMER_KINDS)
    parser.add_argument("--m", type=int, help="antenna count override")
    parser.add_argument("--k", type=int, help="user count override")
    parser.add_argument("--r-m", dest="r_m", type=float, help="multicast rate")
    parser.add_argument("--r-u", dest="r_u", type=float, help="unicast rate")
    parser.add_argument("--r-s", dest="r_s", type=float, help="secrecy rate")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenarios, run_name = resolve_scenarios(args.scenario, args.config)
        scenarios = [_apply_overrides(s, args).validate() for s in scenarios]
        reports = []
        for scenario in scenarios:
            report, paths = run_scenario(scenario, out_dir=args.out,
                                         mode=args.mode, workers=args.workers)
            reports.append(report)
            for p in paths:
                print(f"wrote {p}")
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except UnsupportedAnalyticsError as exc:
        print(f"unsupported analytics: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    summary = "\n\n".join(r.render() for r in reports)
    summary_path = Path(args.out) / f"{run_name}_report.txt"
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    summary_path.write_text(summary + "\n")
    print(summary)
    print(f"wrote {summary_path}")
    return EXIT_OK if all(r.all_pass for r in reports) else EXIT_COMPARISON_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
