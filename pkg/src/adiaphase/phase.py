"""Predicted vs actual total phase, the gap between them, and the
superposition (linearity) comparison.

Sign convention: ``gap = actual - predicted``. For the rotating-field model
the gap decreases linearly, d(tau) ~ -(omega_bar - omega_star) tau / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GaugeError,
    NotAdiabaticError,
    ParameterError,
    UndersampledError,
    UnreliableDerivativeError,
    UnsupportedModelError,
)
from .evolution import IntegratorSpec, evolve
from .hamiltonian import (
    SQRT_HALF,
    RotatingFieldParams,
    analytic_eigensystem,
    derived_frequencies,
    oracle_gap,
    oracle_state,
    oracle_superposition_state,
    rotating_field,
)
from .numerics import accurate_cumsum, cumquad_uniform
from .spectral import CONTINUITY_LIMIT, SpectralFrameSequence, track_frames

ENGINES = ("oracle", "integrator")
MIN_POPULATION = 0.9


@dataclass(frozen=True)
class PhaseLedger:
    grid: np.ndarray
    dynamical: np.ndarray
    geometric: np.ndarray
    predicted: np.ndarray
    actual: np.ndarray
    gap: np.ndarray
    level: int


def predicted_phase(frames: SpectralFrameSequence, k: int = 0, connection=None):
    """Adiabatic prediction -int E_k + i int <E_k|dE_k/dt>, per grid time.

    ``connection`` holds samples of <E_k|dE_k/dt> on the frame grid and is
    integrated with cumulative Simpson. Without it the geometric part comes
    from link overlaps of neighbouring frames, which is gauge covariant frame
    by frame (any redressing of the vectors moves it by exactly the same
    phase as it moves the projections onto them).

    Returns ``(dynamical, geometric, predicted)``.
    """
    h = frames.step
    dynamical = -cumquad_uniform(frames.energies[:, k], h)
    if connection is not None:
        connection = np.asarray(connection, dtype=complex)
        if connection.shape != (len(frames),):
            raise ParameterError("connection must hold one sample per frame")
        scale = max(1.0, float(np.max(np.abs(connection))))
        if np.max(np.abs(connection.real)) > 1e-6 * scale:
            raise GaugeError("diagonal connection has a real part; frames are not normalized consistently")
        geometric = -cumquad_uniform(connection.imag, h)
    else:
        if frames.continuity > CONTINUITY_LIMIT:
            raise UnreliableDerivativeError(
                f"frame continuity {frames.continuity:.3g} exceeds {CONTINUITY_LIMIT}; "
                "refine the grid or pass an analytic connection"
            )
        link_phase = np.angle(frames.links()[:, k])
        geometric = np.zeros(len(frames))
        geometric[1:] = -accurate_cumsum(link_phase)
    return dynamical, geometric, dynamical + geometric


def project(states, frames: SpectralFrameSequence, k: int = 0) -> np.ndarray:
    """<v_k(t)|psi(t)> per grid time."""
    states = np.asarray(states, dtype=complex)
    return np.einsum("ij,ij->i", frames.vectors[:, :, k].conj(), states)


def _tracked_amplitude(states, frames, k) -> np.ndarray:
    c = project(states, frames, k)
    pop = np.abs(c)
    if np.min(pop) < MIN_POPULATION:
        i = int(np.argmin(pop))
        raise NotAdiabaticError(f"|<v_{k}|psi>| = {pop[i]:.3f} < {MIN_POPULATION} at t={frames.times[i]}")
    return c


def unwrap_phase(raw) -> np.ndarray:
    """Unwrap a sampled argument; refuses if any step is ambiguous.

    A wrapped step of pi/2 or more cannot be told apart from a 2 pi jump in
    the other direction, so that counts as undersampling.
    """
    raw = np.asarray(raw, dtype=float)
    steps = np.angle(np.exp(1j * np.diff(raw)))
    if steps.size and np.max(np.abs(steps)) >= math.pi / 2:
        i = int(np.argmax(np.abs(steps)))
        raise UndersampledError(f"phase step {steps[i]:.3f} rad at sample {i} is >= pi/2; sample more densely")
    return np.unwrap(raw)


def actual_phase(states, frames: SpectralFrameSequence, k: int = 0, carrier=None) -> np.ndarray:
    """Unwrapped arg <v_k(t)|psi(t)>.

    With ``carrier`` (a known phase track, typically the prediction) the
    argument of the demodulated amplitude is unwrapped instead and the carrier
    added back. This only needs the residual, not the full winding, to be
    resolved by the grid.
    """
    c = _tracked_amplitude(states, frames, k)
    if carrier is None:
        # aliased windings are invisible to the wrapped steps themselves
        rate = float(np.max(np.abs(frames.energies[:, k])))
        if len(frames) > 1 and frames.step * rate >= math.pi / 2:
            raise UndersampledError(
                f"grid spacing {frames.step:.4g} exceeds pi/(2|E_{k}|) = {math.pi / (2 * rate):.4g}; "
                "sample more densely or pass a carrier"
            )
        return unwrap_phase(np.angle(c))
    carrier = np.asarray(carrier, dtype=float)
    return unwrap_phase(np.angle(c * np.exp(-1j * carrier))) + carrier


def phase_gap(predicted, actual) -> np.ndarray:
    return np.asarray(actual) - np.asarray(predicted)


def asymptotic_gap_slope(params: RotatingFieldParams) -> float:
    """d(gap)/d(tau) for the model: -(omega_bar - omega_star) / 2."""
    return derived_frequencies(params).gap_slope


def fitted_gap_slope(ledger: PhaseLedger) -> float:
    slope, _ = np.polyfit(ledger.grid, ledger.gap, 1)
    return float(slope)


def phase_ledger(states, frames: SpectralFrameSequence, k: int = 0, connection=None) -> PhaseLedger:
    """Predicted and actual phase of level ``k`` along a state trajectory."""
    dyn, geo, pred = predicted_phase(frames, k, connection)
    c = _tracked_amplitude(states, frames, k)
    # unwrap the slowly varying residual directly; actual is rebuilt from it
    residual = unwrap_phase(np.angle(c * np.exp(-1j * pred)))
    actual = pred + residual
    return PhaseLedger(frames.times, dyn, geo, pred, actual, actual - pred, k)


def model_frames(params: RotatingFieldParams, grid, gauge: str = "analytic"):
    """Frames and (when available) closed-form connection for the model."""
    traj = rotating_field(params)
    frames = track_frames(traj, grid, gauge)
    connection = traj.connection(frames.times)[:, 0] if frames.gauge == "analytic" else None
    return traj, frames, connection


def gap_ledger(
    params: RotatingFieldParams,
    grid,
    engine: str = "oracle",
    spec: IntegratorSpec | None = None,
    gauge: str = "analytic",
) -> PhaseLedger:
    """Phase ledger of the tracked level for the model started in |E1(0)>."""
    if engine not in ENGINES:
        raise ParameterError(f"unknown engine {engine!r}")
    traj, frames, connection = model_frames(params, grid, gauge)
    if engine == "oracle":
        states = oracle_state(params, frames.times)
    else:
        states = evolve(traj, frames.vectors[0, :, 0], frames.times, spec or IntegratorSpec()).states
    return phase_ledger(states, frames, 0, connection)


@dataclass(frozen=True)
class LinearityResult:
    """Superposition run compared with the linear-combination prediction.

    Fields are arrays when ``tau`` is an array.
    """

    tau: np.ndarray
    alpha: np.ndarray
    predicted_state: np.ndarray
    exact_state: np.ndarray
    overlap: np.ndarray
    comparator: np.ndarray


def linear_prediction(v1, v2, alpha) -> np.ndarray:
    """(e^{-alpha}|E1> + e^{alpha}|E2>)/sqrt(2)."""
    alpha = np.asarray(alpha)[..., None]
    return SQRT_HALF * (np.exp(-alpha) * v1 + np.exp(alpha) * v2)


def linearity_experiment(
    params: RotatingFieldParams,
    tau,
    engine: str = "oracle",
    spec: IntegratorSpec | None = None,
    samples_per_radian: float = 1.0,
) -> LinearityResult:
    """Evolve (|E1(0)> + |E2(0)>)/sqrt(2) and compare with the prediction
    obtained by giving each eigenstate its own adiabatic phase.

    alpha = i int E1 + int <E1|dE1/dt> = -i * predicted phase of level 1.
    The comparator is cos(gap(tau)) from a run started in |E1(0)>.
    """
    if not isinstance(params, RotatingFieldParams):
        raise UnsupportedModelError("linearity_experiment is defined for the rotating-field model")
    if engine == "oracle":
        tau = np.asarray(tau, dtype=float)
        traj = rotating_field(params)
        e1, _, v1, v2 = analytic_eigensystem(params, tau)
        predicted = -e1 * tau + (1j * traj.connection(tau)[..., 0] * tau).real
        alpha = -1j * predicted
        pred_state = linear_prediction(v1, v2, alpha)
        exact = oracle_superposition_state(params, tau)
        comparator = np.cos(oracle_gap(params, tau))
    elif engine == "integrator":
        tau = float(tau)
        if tau <= 0:
            raise ParameterError("integrator engine needs tau > 0")
        f = derived_frequencies(params)
        n = max(3, math.ceil(tau * f.omega_bar / samples_per_radian) + 1)
        grid = np.linspace(0.0, tau, n)
        spec = spec or IntegratorSpec()
        traj, frames, connection = model_frames(params, grid)
        v = frames.vectors[0]
        psi0 = SQRT_HALF * (v[:, 0] + v[:, 1])
        exact = evolve(traj, psi0, grid, spec).states[-1]
        single = evolve(traj, v[:, 0], grid, spec).states
        ledger = phase_ledger(single, frames, 0, connection)
        alpha = -1j * ledger.predicted[-1]
        vt = frames.vectors[-1]
        pred_state = linear_prediction(vt[:, 0], vt[:, 1], alpha)
        comparator = np.cos(ledger.gap[-1])
        tau = np.asarray(tau)
    else:
        raise ParameterError(f"unknown engine {engine!r}")
    overlap = np.einsum("...j,...j->...", pred_state.conj(), exact)
    return LinearityResult(tau, np.asarray(alpha), pred_state, exact, overlap, np.asarray(comparator))
