"""Experiment drivers behind the CLI.

Each ``run_*`` function takes an ``ExperimentConfig`` and returns a
``Table``: column names, rows and trailing notes. Writing is separate so
the tables can be used directly from Python.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .conditions import ConditionReport, modified_report, resolve_prefactor, residual_trace
from .errors import ParameterError, RuntimeGuardError
from .evolution import METHODS, IntegratorSpec, evolve
from .hamiltonian import (
    RotatingFieldParams,
    derived_frequencies,
    oracle_coefficients,
    oracle_state,
    rotating_field,
)
from .phase import ENGINES, gap_ledger, linearity_experiment

RUNTIME_GUARD = 5e8
MIN_SAMPLES = 16
RESIDUAL_SAMPLES_PER_PERIOD = 64


@dataclass(frozen=True)
class ExperimentConfig:
    omega0: float = 10.0
    omega: float = 0.01
    theta: float = math.pi / 6
    horizon: Optional[float] = None
    horizon_periods: Optional[float] = None
    samples: Optional[int] = None
    step: float = 2e-3
    integrator: str = "rk4"
    renormalize_every: int = 1000
    engine: Optional[str] = None
    gauge: str = "analytic"
    threshold: float = 0.01
    out: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.horizon is not None and self.horizon_periods is not None:
            raise ParameterError("give either horizon or horizon_periods, not both")
        if self.horizon is not None and not self.horizon > 0:
            raise ParameterError(f"horizon must be > 0, got {self.horizon}")
        if self.horizon_periods is not None and not self.horizon_periods > 0:
            raise ParameterError(f"horizon_periods must be > 0, got {self.horizon_periods}")
        if self.samples is not None and self.samples < MIN_SAMPLES:
            raise ParameterError(f"samples must be >= {MIN_SAMPLES}, got {self.samples}")
        if self.engine is not None and self.engine not in ENGINES:
            raise ParameterError(f"engine must be one of {ENGINES}")
        if self.integrator not in METHODS:
            raise ParameterError(f"integrator must be one of {METHODS}")
        if self.gauge not in ("analytic", "transport"):
            raise ParameterError("gauge must be 'analytic' or 'transport'")
        if not 0 < self.threshold < 1:
            raise ParameterError("threshold must lie in (0, 1)")
        self.params  # validates the model parameters

    @property
    def params(self) -> RotatingFieldParams:
        return RotatingFieldParams(self.omega0, self.omega, self.theta)

    @property
    def integrator_spec(self) -> IntegratorSpec:
        return IntegratorSpec(step=self.step, method=self.integrator, renormalize_every=self.renormalize_every)

    def resolve_horizon(self, default_periods: float | None = None, default_time: float | None = None) -> float:
        t0 = derived_frequencies(self.params).t0
        if self.horizon is not None:
            return float(self.horizon)
        periods = self.horizon_periods if self.horizon_periods is not None else default_periods
        if periods is not None:
            if not math.isfinite(t0):
                raise ParameterError("omega = 0 has no field period; give --horizon in time units")
            return float(periods * t0)
        if default_time is None:
            raise ParameterError("no horizon given")
        return float(default_time)

    def with_defaults(self, **defaults) -> "ExperimentConfig":
        """Fill fields that are still None."""
        return replace(self, **{k: v for k, v in defaults.items() if getattr(self, k) is None})

    def items(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)


@dataclass
class Table:
    columns: list[str]
    rows: np.ndarray
    notes: list[str] = field(default_factory=list)
    config: Optional[ExperimentConfig] = None
    resolved: dict = field(default_factory=dict)


def check_runtime_guard(config: ExperimentConfig, horizon: float) -> None:
    wbar = derived_frequencies(config.params).omega_bar
    load = horizon * wbar / config.step
    if load > RUNTIME_GUARD:
        raise RuntimeGuardError(
            f"integrator load horizon*omega_bar/step = {load:.3g} exceeds {RUNTIME_GUARD:.0e}; "
            "use --engine oracle or a shorter horizon"
        )


def run_gap(config: ExperimentConfig) -> Table:
    config = config.with_defaults(engine="oracle", samples=2000)
    horizon = config.resolve_horizon(default_periods=5000)
    if config.engine == "integrator":
        check_runtime_guard(config, horizon)
    p = config.params
    f = derived_frequencies(p)
    grid = np.linspace(0.0, horizon, config.samples)
    ledger = gap_ledger(p, grid, config.engine, config.integrator_spec, config.gauge)
    tau_over_t0 = grid / f.t0
    rows = np.column_stack(
        [grid, tau_over_t0, ledger.predicted, ledger.actual, ledger.gap, f.gap_slope * grid]
    )
    slope = float(np.polyfit(grid, ledger.gap, 1)[0])
    notes = [
        f"fitted_slope = {slope:.15e}",
        f"asymptotic_slope = {f.gap_slope:.15e}",
    ]
    columns = ["tau", "tau_over_t0", "gamma_predicted", "gamma_actual", "d_tau", "d_asymptote"]
    return Table(columns, rows, notes, config, {"horizon": horizon})


def run_linearity(config: ExperimentConfig) -> Table:
    config = config.with_defaults(engine="oracle", samples=4001)
    horizon = config.resolve_horizon(default_periods=8000)
    taus = np.linspace(0.0, horizon, config.samples)
    p = config.params
    if config.engine == "oracle":
        result = linearity_experiment(p, taus)
        overlap, comparator = np.abs(result.overlap), result.comparator
    else:
        check_runtime_guard(config, horizon)
        overlap, comparator = _linearity_integrated(p, taus, config)
    i = int(np.argmin(overlap))
    t0 = derived_frequencies(p).t0
    notes = [
        f"min_overlap = {overlap[i]:.15e}",
        f"argmin_tau = {taus[i]:.15e}",
        f"argmin_tau_over_t0 = {taus[i] / t0:.15e}",
        f"max_abs_deviation = {np.max(np.abs(overlap - np.abs(comparator))):.15e}",
    ]
    rows = np.column_stack([taus, overlap, comparator])
    return Table(["tau", "overlap_abs", "cos_gap_comparator"], rows, notes, config, {"horizon": horizon})


def _linearity_integrated(p, taus, config):
    from .phase import SQRT_HALF, linear_prediction, model_frames, phase_ledger

    spec = config.integrator_spec
    traj, frames, connection = model_frames(p, taus, config.gauge)
    v = frames.vectors
    sup = evolve(traj, SQRT_HALF * (v[0, :, 0] + v[0, :, 1]), taus, spec).states
    single = evolve(traj, v[0, :, 0], taus, spec).states
    ledger = phase_ledger(single, frames, 0, connection)
    pred = linear_prediction(v[:, :, 0], v[:, :, 1], -1j * ledger.predicted)
    overlap = np.abs(np.einsum("ij,ij->i", pred.conj(), sup))
    return overlap, np.cos(ledger.gap)


def run_residual(config: ExperimentConfig) -> Table:
    p = config.params
    f = derived_frequencies(p)
    fast = 2 * math.pi / f.omega_bar
    horizon = config.resolve_horizon(default_time=50 * fast)
    samples = config.samples or int(math.ceil(horizon / fast * RESIDUAL_SAMPLES_PER_PERIOD)) + 1
    grid = np.linspace(0.0, horizon, samples)
    tr = residual_trace(p, grid)
    rows = np.column_stack(
        [
            grid,
            tr.integrand.real,
            tr.integrand.imag,
            tr.cumulative.real,
            tr.cumulative.imag,
            tr.comparator_derived.real,
            tr.comparator_derived.imag,
            tr.comparator_paper_im,
            tr.comparator_paper_re,
        ]
    )
    pref = resolve_prefactor(tr)
    notes = [
        f"max_abs_cumulative_minus_identity = {pref['identity_max_error']:.15e}",
        f"max_abs_cumulative_minus_derived = {np.max(np.abs(tr.cumulative - tr.comparator_derived)):.15e}",
        f"fit_factor_vs_derived = {pref['derived'].real:.15e} {pref['derived'].imag:+.15e}j",
        f"fit_factor_vs_doubled = {pref['doubled'].real:.15e} {pref['doubled'].imag:+.15e}j",
    ]
    columns = [
        "t",
        "integrand_re",
        "integrand_im",
        "cumulative_re",
        "cumulative_im",
        "comparator_derived_re",
        "comparator_derived_im",
        "comparator_paper_im",
        "comparator_paper_re",
    ]
    return Table(columns, rows, notes, config, {"horizon": horizon, "samples": samples})


def run_validate(config: ExperimentConfig, levels: int = 3) -> Table:
    config = config.with_defaults(engine="integrator", samples=MIN_SAMPLES)
    if config.engine != "integrator":
        raise ParameterError("validate runs the integrator; engine must be 'integrator'")
    p = config.params
    horizon = config.resolve_horizon(default_periods=10)
    steps = [config.step * 2 ** (levels - 1 - i) for i in range(levels)]
    check_runtime_guard(config, horizon)
    traj = rotating_field(p)
    grid = np.linspace(0.0, horizon, config.samples)
    exact = oracle_state(p, grid[-1])
    a_end = oracle_coefficients(p, grid[-1]).a
    rows = []
    for step in steps:
        spec = IntegratorSpec(step=step, method=config.integrator, renormalize_every=config.renormalize_every)
        rec = evolve(traj, oracle_state(p, 0.0), grid, spec)
        psi = rec.states[-1]
        err = float(np.linalg.norm(psi - exact))
        v1 = traj.eigensystem(grid[-1])[1][:, 0]
        phase_err = float(np.angle(np.vdot(v1, psi) * np.conj(a_end)))
        rows.append([rec.step, err, rec.norm_drift, phase_err])
    rows = np.array(rows)
    notes = []
    for i in range(1, len(rows)):
        ratio = rows[i - 1, 1] / rows[i, 1]
        notes.append(f"error_ratio_{i} = {ratio:.6e} order = {math.log2(ratio):.6f}")
    columns = ["step", "terminal_state_error", "norm_drift", "phase_error"]
    return Table(columns, rows, notes, config, {"horizon": horizon, "steps": steps})


def run_conditions(config: ExperimentConfig) -> tuple[str, ConditionReport]:
    report = modified_report(config.params, config.threshold)
    lines = []
    for pr in report.pairs:
        lines.append(
            f"pair ({pr.n + 1},{pr.m + 1}): |<E_n|dE_m/dt>| = {pr.coupling_mag:.6e}  "
            f"|E_n - E_m| = {pr.gap:.6e}  ratio = {pr.ratio:.6e}  "
            f"traditional: {'satisfied' if pr.satisfied else 'VIOLATED'}"
        )
    eff = report.modified_coupling / report.modified_oscillation_rate if report.modified_oscillation_rate > 0 else math.inf
    lines.append(
        f"modified: omega*sin(theta) = {report.modified_coupling:.6e}  "
        f"rate omega0+omega*cos(theta) = {report.modified_oscillation_rate:.6e}  "
        f"ratio = {eff:.6e}  {'satisfied' if report.modified_satisfied else 'VIOLATED'}"
    )
    lines.append(f"threshold = {report.threshold}")
    return "\n".join(lines) + "\n", report


def format_value(x) -> str:
    return f"{float(x) + 0.0:.15e}"


def render_csv(table: Table, command: str, config: ExperimentConfig) -> str:
    buf = io.StringIO()
    config = table.config or config
    buf.write(f"# adiaphase {command}\n")
    for key, value in config.items():
        buf.write(f"# {key} = {value!r}\n")
    for key, value in table.resolved.items():
        buf.write(f"# resolved_{key} = {value!r}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(format_value(x) for x in row) + "\n")
    for note in table.notes:
        buf.write(f"# {note}\n")
    return buf.getvalue()
