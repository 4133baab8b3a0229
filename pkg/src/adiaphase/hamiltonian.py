"""Time-dependent Hamiltonians and the rotating-field spin-half model.

All callables are vectorized over time: a scalar ``t`` gives a ``(d, d)``
matrix, an array of shape ``(n,)`` gives ``(n, d, d)``.

Level ordering for the rotating-field model follows the tracked-level
convention: index 0 is the upper level ``E1 = +omega0/2`` that the system
starts in, index 1 is ``E2 = -omega0/2``.

Units: hbar = 1, frequencies in rad per time unit, phases in rad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError
from .numerics import as_hermitian

SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class HamiltonianTrajectory:
    """A Hermitian operator-valued function of time with analytic derivative.

    ``eigensystem`` and ``connection`` are optional closed forms a model can
    supply: ``eigensystem(t) -> (energies, vectors)`` with vectors as columns
    in a smooth reference gauge, and ``connection(t)`` giving the diagonal
    ``<E_n|dE_n/dt>`` in that same gauge.
    """

    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    eigensystem: Optional[Callable] = None
    connection: Optional[Callable] = None
    params: Optional["RotatingFieldParams"] = None
    label: str = "custom"

    def check_hermitian(self, t) -> np.ndarray:
        return as_hermitian(self.value(t))


@dataclass(frozen=True)
class RotatingFieldParams:
    """Spin-half in a magnetic field precessing on a cone.

    omega0: level splitting; omega: rotation frequency of the field;
    theta: cone half-angle in radians.
    """

    omega0: float = 10.0
    omega: float = 0.01
    theta: float = math.pi / 6

    def __post_init__(self):
        for name in ("omega0", "omega", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.omega0 <= 0:
            raise ParameterError(f"omega0 must be > 0, got {self.omega0}")
        if self.omega < 0:
            raise ParameterError(f"omega must be >= 0, got {self.omega}")
        if not 0.0 <= self.theta <= math.pi:
            raise ParameterError(f"theta must lie in [0, pi], got {self.theta}")


REFERENCE_PARAMS = RotatingFieldParams(omega0=10.0, omega=0.01, theta=math.pi / 6)


@dataclass(frozen=True)
class DerivedFrequencies:
    """Frequencies derived from the model parameters.

    omega_bar is the exact precession rate, omega_star the rate predicted by
    the adiabatic approximation, t0 the field period (inf for a static field).
    """

    omega_bar: float
    omega_star: float
    t0: float
    # omega_bar - omega_star, evaluated without cancellation
    detuning: float = field(default=0.0)

    @property
    def gap_slope(self) -> float:
        """Asymptotic slope of d(tau) = actual - predicted (negative here)."""
        return -0.5 * self.detuning


def derived_frequencies(params: RotatingFieldParams) -> DerivedFrequencies:
    w0, w, th = params.omega0, params.omega, params.theta
    omega_star = w0 + w * math.cos(th)
    omega_bar = math.sqrt(w * w + w0 * w0 + 2.0 * w * w0 * math.cos(th))
    s2 = (w * math.sin(th)) ** 2
    denom = omega_bar + omega_star
    # omega_bar^2 - omega_star^2 == (w sin th)^2
    detuning = s2 / denom if denom > 0 else omega_bar - omega_star
    t0 = 2.0 * math.pi / w if w > 0 else math.inf
    return DerivedFrequencies(omega_bar, omega_star, t0, detuning)


def rotating_field(params: RotatingFieldParams) -> HamiltonianTrajectory:
    """H(t) = -(omega0/2) [[cos th, sin th e^{-i w t}], [sin th e^{i w t}, -cos th]]."""
    w0, w, th = params.omega0, params.omega, params.theta
    c, s = math.cos(th), math.sin(th)

    def value(t):
        t = np.asarray(t, dtype=float)
        ph = np.exp(-1j * w * t)
        H = np.empty(t.shape + (2, 2), dtype=complex)
        H[..., 0, 0] = -0.5 * w0 * c
        H[..., 1, 1] = 0.5 * w0 * c
        H[..., 0, 1] = -0.5 * w0 * s * ph
        H[..., 1, 0] = -0.5 * w0 * s * np.conj(ph)
        return H

    def derivative(t):
        t = np.asarray(t, dtype=float)
        ph = np.exp(-1j * w * t)
        D = np.zeros(t.shape + (2, 2), dtype=complex)
        D[..., 0, 1] = 0.5j * w0 * w * s * ph
        D[..., 1, 0] = -0.5j * w0 * w * s * np.conj(ph)
        return D

    def eigensystem(t):
        e1, e2, v1, v2 = analytic_eigensystem(params, t)
        t = np.asarray(t, dtype=float)
        energies = np.empty(t.shape + (2,))
        energies[..., 0] = e1
        energies[..., 1] = e2
        return energies, np.stack([v1, v2], axis=-1)

    def connection(t):
        t = np.asarray(t, dtype=float)
        A = np.empty(t.shape + (2,), dtype=complex)
        A[..., 0] = 0.5j * w * c
        A[..., 1] = -0.5j * w * c
        return A

    return HamiltonianTrajectory(
        dim=2,
        value=value,
        derivative=derivative,
        eigensystem=eigensystem,
        connection=connection,
        params=params,
        label="rotating-field",
    )


def linear_trajectory(A, B) -> HamiltonianTrajectory:
    """H(t) = A + t B for fixed Hermitian A, B."""
    A = as_hermitian(A)
    B = as_hermitian(B)

    def value(t):
        t = np.asarray(t, dtype=float)
        return A + t[..., None, None] * B

    def derivative(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(B, t.shape + B.shape).copy()

    return HamiltonianTrajectory(dim=A.shape[0], value=value, derivative=derivative, label="linear")


def analytic_eigensystem(params: RotatingFieldParams, t):
    """(E1, E2, v1, v2) in the closed-form gauge; vectors have shape t.shape + (2,)."""
    t = np.asarray(t, dtype=float)
    w = params.omega
    sh, ch = math.sin(params.theta / 2), math.cos(params.theta / 2)
    lo = np.exp(-0.5j * w * t)
    hi = np.exp(0.5j * w * t)
    v1 = np.stack([lo * sh, -hi * ch], axis=-1)
    v2 = np.stack([lo * ch, hi * sh], axis=-1)
    return 0.5 * params.omega0, -0.5 * params.omega0, v1, v2


@dataclass(frozen=True)
class OracleCoefficients:
    """Exact amplitudes on (|E1(t)>, |E2(t)>) starting from |E1(0)>."""

    a: np.ndarray
    b: np.ndarray


def oracle_coefficients(params: RotatingFieldParams, t) -> OracleCoefficients:
    f = derived_frequencies(params)
    x = 0.5 * f.omega_bar * np.asarray(t, dtype=float)
    sx = np.sin(x)
    a = np.cos(x) - 1j * (f.omega_star / f.omega_bar) * sx
    b = 1j * (params.omega * math.sin(params.theta) / f.omega_bar) * sx
    return OracleCoefficients(a=np.asarray(a, dtype=complex), b=np.asarray(b, dtype=complex))


def oracle_state(params: RotatingFieldParams, t) -> np.ndarray:
    """Exact |psi(t)> for the initial state |E1(0)>."""
    co = oracle_coefficients(params, t)
    _, _, v1, v2 = analytic_eigensystem(params, t)
    return co.a[..., None] * v1 + co.b[..., None] * v2


def oracle_superposition_state(params: RotatingFieldParams, t) -> np.ndarray:
    """Exact |psi(t)> for the initial state (|E1(0)> + |E2(0)>)/sqrt(2).

    In the eigenframe the propagator is SU(2) with first column (a, b), so
    |E2(0)> evolves to -conj(b)|E1> + conj(a)|E2>.
    """
    co = oracle_coefficients(params, t)
    _, _, v1, v2 = analytic_eigensystem(params, t)
    c1 = SQRT_HALF * (co.a - np.conj(co.b))
    c2 = SQRT_HALF * (co.b + np.conj(co.a))
    return c1[..., None] * v1 + c2[..., None] * v2


def oracle_total_phase(params: RotatingFieldParams, t) -> np.ndarray:
    """Unwrapped arg a(t), in closed form.

    arg a = -x + arg(e^{ix} a) with x = omega_bar t / 2; the second factor has
    positive real part so its principal arg needs no unwrapping.
    """
    f = derived_frequencies(params)
    x = 0.5 * f.omega_bar * np.asarray(t, dtype=float)
    r = f.omega_star / f.omega_bar
    sx, cx = np.sin(x), np.cos(x)
    return -x + np.arctan2((1.0 - r) * sx * cx, cx * cx + r * sx * sx)


def oracle_gap(params: RotatingFieldParams, t) -> np.ndarray:
    """Closed-form d(t) = arg a(t) + omega_star t / 2 without large cancellations."""
    f = derived_frequencies(params)
    t = np.asarray(t, dtype=float)
    x = 0.5 * f.omega_bar * t
    r = f.omega_star / f.omega_bar
    sx, cx = np.sin(x), np.cos(x)
    return -0.5 * f.detuning * t + np.arctan2((1.0 - r) * sx * cx, cx * cx + r * sx * sx)
