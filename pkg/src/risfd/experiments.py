"""Monte-Carlo experiment harness: sweeps, CSV records and simple SVG charts.

Each experiment kind sweeps one knob (RIS size, downlink subspace dimension,
phase resolution, ADC resolution or deviation spread) over independent channel
trials and appends one record per method per (sweep point, trial).  All
randomness is derived from (base seed, trial) keyed counter-based streams, so
a spec rerun reproduces its CSV byte for byte regardless of scheduling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ideal import optimize_ideal
from .rates import design_downlink, design_softnull, evaluate_link
from .ris import RisState
from .scene import Scenario, synthesize_channels, tagged_rng
from .sim import AoOptions, joint_sim_design, residual_si_metric

KINDS = ("convergence", "kappa_vs_md", "kappa_vs_bits",
         "rates_vs_md", "rates_vs_enob", "phase_deviation")

DEFAULT_SWEEPS = {
    "convergence": ["4x4", "8x8", "16x16"],
    "kappa_vs_md": [3, 4, 5, 6, 7, 8],
    "kappa_vs_bits": [2, 3, 4, 5, 6],
    "rates_vs_md": [3, 4, 5, 6, 7, 8],
    "rates_vs_enob": [8, 9, 10, 11, 12],
    "phase_deviation": [0, 5, 10, 15, 20, 25, 30],
}

# ADC resolution used whenever the kind does not sweep it.
DEFAULT_ENOB = 12.0

CSV_COLUMNS = ("kind", "method", "sweep_point", "trial", "seed", "ul_rate",
               "dl_rate", "sum_rate", "kappa_db", "iterations",
               "terminal_cost", "wall_ms")

_KAPPA_FLOOR = 1e-300


class ConfigError(ValueError):
    """Invalid experiment specification or config file."""


@dataclass
class ExperimentSpec:
    """One experiment: a kind, a base scenario, sweep points and a trial count."""

    kind: str
    scenario: Scenario = field(default_factory=Scenario)
    sweep: list = None
    trials: int = 50
    out_path: str = "results.csv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.sweep is None:
            self.sweep = list(DEFAULT_SWEEPS[self.kind])
        if not isinstance(self.sweep, (list, tuple)) or len(self.sweep) == 0:
            raise ConfigError("sweep must be a non-empty list")
        self.sweep = list(self.sweep)
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {"kind", "scenario", "sweep", "trials", "out_path"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown spec fields: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("spec needs a 'kind'")
        scenario = data.get("scenario", {})
        if isinstance(scenario, dict):
            try:
                scenario = Scenario.from_dict(scenario)
            except ValueError as err:
                raise ConfigError(str(err)) from err
        return cls(kind=data["kind"], scenario=scenario, sweep=data.get("sweep"),
                   trials=data.get("trials", 50), out_path=data.get("out_path", "results.csv"))


@dataclass(frozen=True)
class ResultRecord:
    """One CSV row.  ``terminal_cost`` is the design optimizer's final
    objective (residual interference power for the nulling methods, negative
    sum rate for the ideal benchmark).  ``wall_ms`` is fixed at 0.0: emitting
    measured timings would break the byte-identical rerun contract."""

    kind: str
    method: str
    sweep_point: object
    trial: int
    seed: int
    ul_rate: float
    dl_rate: float
    sum_rate: float
    kappa_db: float
    iterations: int
    terminal_cost: float
    wall_ms: float = 0.0


def parse_ris_size(token: str) -> tuple[int, int]:
    """Parse a 'RxC' RIS size token such as '16x16'."""
    try:
        rows, cols = token.lower().split("x")
        rows, cols = int(rows), int(cols)
    except (ValueError, AttributeError) as err:
        raise ConfigError(f"bad RIS size {token!r}, expected e.g. '16x16'") from err
    if rows < 1 or cols < 1:
        raise ConfigError(f"bad RIS size {token!r}")
    return rows, cols


def trial_seed(base_seed: int, trial: int) -> int:
    """Stable per-trial seed; identifies the channel draw across sweep points."""
    return int(np.random.SeedSequence((int(base_seed), int(trial))).generate_state(1)[0])


def deviated_state(ris: RisState, sigma_p_deg: float, seed: int) -> RisState:
    """Realized RIS with per-element phase deviations uniform on +-sigma_p.

    The underlying unit draws are keyed by the seed alone, so sweeping the
    spread reuses the same deviation pattern at growing amplitude.  The
    realized phases leave the quantization grid, hence the continuous state.
    """
    if sigma_p_deg < 0:
        raise ValueError("deviation spread must be nonnegative")
    unit = tagged_rng(seed, "phase_dev").uniform(-1.0, 1.0, size=ris.m_ris)
    delta = math.radians(sigma_p_deg) * unit
    return RisState(ris.d * np.exp(1j * delta), bits=math.inf)


def _scenario_at(spec: ExperimentSpec, point) -> tuple[Scenario, float, float]:
    """Scenario, ADC resolution and deviation spread for one sweep point."""
    scn, enob, sigma_p = spec.scenario, DEFAULT_ENOB, 0.0
    if spec.kind == "convergence":
        rows, cols = parse_ris_size(point)
        scn = scn.with_(ris_rows=rows, ris_cols=cols)
    elif spec.kind in ("kappa_vs_md", "rates_vs_md"):
        scn = scn.with_(m_d=int(point))
    elif spec.kind == "kappa_vs_bits":
        bits = math.inf if point in ("inf", math.inf) else int(point)
        scn = scn.with_(ris_bits=bits)
    elif spec.kind == "rates_vs_enob":
        enob = float(point)
    elif spec.kind == "phase_deviation":
        sigma_p = float(point)
    return scn, enob, sigma_p


def _point_records(spec: ExperimentSpec, point, trial: int,
                   ao_opts: Optional[AoOptions]) -> list[ResultRecord]:
    scn, enob, sigma_p = _scenario_at(spec, point)
    seed = trial_seed(scn.seed, trial)
    scn = scn.with_(seed=seed)
    channels = synthesize_channels(scn)

    p_sim, ris, trace = joint_sim_design(channels, scn.m_d, scn.ris_bits,
                                         opts=ao_opts, seed=seed)
    bundle = design_downlink(channels, ris, p_sim, scn)
    actual = deviated_state(ris, sigma_p, seed) if sigma_p > 0 else ris
    report = evaluate_link(channels, ris, actual, bundle, scn, enob=enob)

    def record(method, rep, kappa, iterations, terminal_cost):
        return ResultRecord(
            kind=spec.kind, method=method, sweep_point=point, trial=trial,
            seed=seed, ul_rate=rep.ul_rate_bps_hz,
            dl_rate=float(np.sum(rep.dl_rates_bps_hz)), sum_rate=rep.sum_rate,
            kappa_db=10.0 * math.log10(max(kappa, _KAPPA_FLOOR)),
            iterations=iterations, terminal_cost=terminal_cost)

    rows = [record("raibfd", report, report.kappa,
                   trace.inner_iterations, trace.terminal_cost)]
    if spec.kind == "rates_vs_enob":
        bare = channels.without_ris()
        flat = RisState(np.ones(channels.m_ris, dtype=complex))
        sn_bundle = design_softnull(channels, scn)
        sn_report = evaluate_link(bare, flat, flat, sn_bundle, scn, enob=enob)
        rows.append(record("softnull", sn_report, sn_report.kappa, 0,
                           sn_report.kappa * channels.m_r))

        design, opt = optimize_ideal(channels, scn, seed=seed)
        ideal_kappa = residual_si_metric(channels, design.ris,
                                         np.eye(channels.m_t, dtype=complex))
        rows.append(ResultRecord(
            kind=spec.kind, method="ideal", sweep_point=point, trial=trial,
            seed=seed, ul_rate=design.ul_rate, dl_rate=design.dl_rate,
            sum_rate=design.sum_rate,
            kappa_db=10.0 * math.log10(max(ideal_kappa, _KAPPA_FLOOR)),
            iterations=opt.iterations, terminal_cost=opt.costs[-1]))
    return rows


def run_experiment(spec: ExperimentSpec,
                   ao_opts: Optional[AoOptions] = None) -> list[ResultRecord]:
    """Run every (sweep point, trial) pair and return records in canonical order.

    Channel draws are keyed by (base seed, trial), so the same trial index
    sees the same user channels at every sweep point whose dimensions agree.
    """
    records = []
    for point in spec.sweep:
        for trial in range(spec.trials):
            records.extend(_point_records(spec, point, trial, ao_opts))
    return records


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise TypeError("unexpected bool field")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_csv(records: list[ResultRecord], path: str) -> None:
    """Write records as UTF-8 CSV with the fixed column order.

    Floats are rendered in shortest round-trip decimal; an empty record list
    yields a header-only file.
    """
    kinds = {r.kind for r in records}
    if len(kinds) > 1:
        raise ValueError(f"records mix experiment kinds: {sorted(kinds)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([_fmt(getattr(r, col)) for col in CSV_COLUMNS])


def headline_metric(kind: str) -> str:
    """The record field a kind's chart plots."""
    if kind.startswith("kappa"):
        return "kappa_db"
    if kind == "convergence":
        return "terminal_cost"
    return "sum_rate"


def aggregate(records: list[ResultRecord], metric: Optional[str] = None):
    """Per (method, sweep point) mean and sample standard deviation.

    Returns ``{method: [(sweep_point, mean, std, n), ...]}`` with sweep points
    in first-seen order.
    """
    if not records:
        return {}
    metric = metric or headline_metric(records[0].kind)
    order: dict = {}
    for r in records:
        order.setdefault(r.method, {}).setdefault(r.sweep_point, []).append(getattr(r, metric))
    out = {}
    for method, points in order.items():
        rows = []
        for point, vals in points.items():
            arr = np.asarray(vals, dtype=float)
            std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            rows.append((point, float(arr.mean()), std, arr.size))
        out[method] = rows
    return out


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def emit_svg(records: list[ResultRecord], path: str, metric: Optional[str] = None) -> None:
    """Line chart of per-sweep-point mean with +-1 sample-std whiskers.

    One polyline per method; the numbers embedded in the markup are exactly
    the :func:`aggregate` output, so the chart is reproducible byte for byte.
    """
    if not records:
        raise ValueError("nothing to plot")
    metric = metric or headline_metric(records[0].kind)
    series = aggregate(records, metric)
    points = list(dict.fromkeys(r.sweep_point for r in records))
    width, height, ml, mr, mt, mb = 640, 420, 70, 20, 30, 50
    lo = min(m - s for rows in series.values() for _, m, s, _ in rows)
    hi = max(m + s for rows in series.values() for _, m, s, _ in rows)
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def x_of(i):
        if len(points) == 1:
            return ml + (width - ml - mr) / 2
        return ml + (width - ml - mr) * i / (len(points) - 1)

    def y_of(v):
        return mt + (height - mt - mb) * (hi - v) / (hi - lo)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
             f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>']
    for i, p in enumerate(points):
        parts.append(f'<text x="{x_of(i):.2f}" y="{height - mb + 18}" font-size="12" '
                     f'text-anchor="middle">{p}</text>')
    for frac in (0.0, 0.5, 1.0):
        v = lo + frac * (hi - lo)
        parts.append(f'<text x="{ml - 8}" y="{y_of(v):.2f}" font-size="11" '
                     f'text-anchor="end">{v:.4g}</text>')
    parts.append(f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 8}" font-size="12" '
                 f'text-anchor="middle">{records[0].kind} sweep</text>')
    parts.append(f'<text x="14" y="{mt - 10}" font-size="12">{metric}</text>')

    for ci, (method, rows) in enumerate(sorted(series.items())):
        color = _SVG_COLORS[ci % len(_SVG_COLORS)]
        by_point = {p: (m, s) for p, m, s, _ in rows}
        coords = []
        for i, p in enumerate(points):
            if p not in by_point:
                continue
            mean, std = by_point[p]
            x, y = x_of(i), y_of(mean)
            coords.append(f"{x:.2f},{y:.2f}")
            parts.append(f'<line x1="{x:.2f}" y1="{y_of(mean - std):.2f}" '
                         f'x2="{x:.2f}" y2="{y_of(mean + std):.2f}" stroke="{color}"/>')
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}">'
                         f'<title>{method} {p}: mean={mean!r} std={std!r}</title></circle>')
        parts.append(f'<polyline points="{" ".join(coords)}" fill="none" stroke="{color}"/>')
        parts.append(f'<text x="{width - mr - 5}" y="{mt + 16 * (ci + 1)}" font-size="12" '
                     f'text-anchor="end" fill="{color}">{method}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")
