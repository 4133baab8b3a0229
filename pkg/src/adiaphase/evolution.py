"""Schrödinger integration and eigenbasis coefficients.

Two fixed-step propagators for i dpsi/dt = H(t) psi:

* ``rk4`` -- classical fourth-order Runge-Kutta, optional periodic
  renormalization.
* ``unitary-midpoint`` -- psi <- exp(-i H(t + h/2) h) psi, exactly unitary
  per step, second order.

H is sampled in vectorized chunks and the sequential loop runs in numba.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .errors import (
    AccuracyError,
    AlignmentError,
    ParameterError,
    StabilityError,
    UnreliableDerivativeError,
)
from .hamiltonian import HamiltonianTrajectory
from .numerics import as_state, uniform_step
from .spectral import CONTINUITY_LIMIT, SpectralFrameSequence, connection_integral, energy_integral

METHODS = ("rk4", "unitary-midpoint")
CONVENTIONS = ("raw", "dyn-peeled", "full-peeled")
STABILITY_LIMIT = 0.2
RECOMMENDED_LIMIT = 0.02
NORM_TOL = 1e-6
_CHUNK_STEPS = 1 << 16


@dataclass(frozen=True)
class IntegratorSpec:
    step: float = 2e-3
    method: str = "rk4"
    renormalize_every: int = 1000

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ParameterError(f"step must be positive, got {self.step}")
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.renormalize_every < 0:
            raise ParameterError("renormalize_every must be >= 0")


@dataclass(frozen=True)
class EvolutionRecord:
    grid: np.ndarray
    states: np.ndarray  # (n, d)
    norm_drift: float
    spec: IntegratorSpec
    substeps: int

    @property
    def step(self) -> float:
        return uniform_step(self.grid) / self.substeps


@numba.njit(cache=True)
def _matvec(H, psi, out):
    d = psi.shape[0]
    for r in range(d):
        acc = 0j
        for c in range(d):
            acc += H[r, c] * psi[c]
        out[r] = acc


@numba.njit(cache=True)
def _rk4_chunk(Hhalf, psi, h, substeps, renorm_every, counter, out):
    """Advance through ``out.shape[0]`` record intervals.

    ``Hhalf[j]`` is H at t_start + j h/2. Returns (step counter, max drift
    seen before any renormalization).
    """
    d = psi.shape[0]
    k1 = np.empty(d, np.complex128)
    k2 = np.empty(d, np.complex128)
    k3 = np.empty(d, np.complex128)
    k4 = np.empty(d, np.complex128)
    tmp = np.empty(d, np.complex128)
    drift = 0.0
    s = 0
    for rec in range(out.shape[0]):
        for _ in range(substeps):
            _matvec(Hhalf[2 * s], psi, k1)
            for r in range(d):
                k1[r] *= -1j
                tmp[r] = psi[r] + 0.5 * h * k1[r]
            _matvec(Hhalf[2 * s + 1], tmp, k2)
            for r in range(d):
                k2[r] *= -1j
                tmp[r] = psi[r] + 0.5 * h * k2[r]
            _matvec(Hhalf[2 * s + 1], tmp, k3)
            for r in range(d):
                k3[r] *= -1j
                tmp[r] = psi[r] + h * k3[r]
            _matvec(Hhalf[2 * s + 2], tmp, k4)
            for r in range(d):
                k4[r] *= -1j
                psi[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r])
            s += 1
            counter += 1
            if renorm_every > 0 and counter % renorm_every == 0:
                nrm = 0.0
                for r in range(d):
                    nrm += psi[r].real ** 2 + psi[r].imag ** 2
                nrm = math.sqrt(nrm)
                drift = max(drift, abs(nrm - 1.0))
                for r in range(d):
                    psi[r] /= nrm
        nrm = 0.0
        for r in range(d):
            nrm += psi[r].real ** 2 + psi[r].imag ** 2
        drift = max(drift, abs(math.sqrt(nrm) - 1.0))
        for r in range(d):
            out[rec, r] = psi[r]
    return counter, drift


@numba.njit(cache=True)
def _unitary_chunk(Us, psi, substeps, out):
    d = psi.shape[0]
    tmp = np.empty(d, np.complex128)
    drift = 0.0
    s = 0
    for rec in range(out.shape[0]):
        for _ in range(substeps):
            _matvec(Us[s], psi, tmp)
            for r in range(d):
                psi[r] = tmp[r]
            s += 1
        nrm = 0.0
        for r in range(d):
            nrm += psi[r].real ** 2 + psi[r].imag ** 2
        drift = max(drift, abs(math.sqrt(nrm) - 1.0))
        for r in range(d):
            out[rec, r] = psi[r]
    return drift


def propagators(H: np.ndarray, h: float) -> np.ndarray:
    """exp(-i H h) for a stack of Hermitian matrices, shape (..., d, d)."""
    H = np.asarray(H, dtype=complex)
    if H.shape[-1] == 2:
        # H = m I + n.sigma  =>  exp(-iHh) = e^{-imh} (cos|n|h - i sin|n|h n.sigma/|n|)
        m = 0.5 * (H[..., 0, 0] + H[..., 1, 1]).real
        nz = 0.5 * (H[..., 0, 0] - H[..., 1, 1]).real
        nxy = H[..., 0, 1]  # nx - i ny
        nn = np.sqrt(nz * nz + np.abs(nxy) ** 2)
        c = np.cos(nn * h)
        sinc = h * np.sinc(nn * h / np.pi)  # sin(|n| h) / |n|
        U = np.empty(H.shape, dtype=complex)
        U[..., 0, 0] = c - 1j * sinc * nz
        U[..., 1, 1] = c + 1j * sinc * nz
        U[..., 0, 1] = -1j * sinc * nxy
        U[..., 1, 0] = -1j * sinc * np.conj(nxy)
        return U * np.exp(-1j * m * h)[..., None, None]
    E, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * E * h)[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


def frequency_scale(trajectory: HamiltonianTrajectory, grid) -> float:
    """Largest eigenvalue spread of H over the grid points."""
    E = np.linalg.eigvalsh(trajectory.value(np.asarray(grid, dtype=float)))
    return float(np.max(E[..., -1] - E[..., 0]))


def _substeps(spacing: float, step: float) -> int:
    # smallest substep count whose step does not exceed the requested one
    m = spacing / step
    return max(1, math.ceil(m - 1e-9 * m))


def evolve(trajectory: HamiltonianTrajectory, psi0, grid, spec: IntegratorSpec) -> EvolutionRecord:
    """Integrate from ``psi0`` at ``grid[0]`` and record the state on ``grid``.

    Each grid interval is split into an integer number of substeps, so the
    step actually taken (``record.step``) may be slightly below ``spec.step``.
    """
    grid = np.asarray(grid, dtype=float)
    spacing = uniform_step(grid)
    psi = as_state(psi0, normalized=True).copy()
    if psi.size != trajectory.dim:
        raise ParameterError("psi0 dimension does not match the trajectory")
    substeps = _substeps(spacing, spec.step)
    h = spacing / substeps

    freq = frequency_scale(trajectory, grid)
    if h * freq > STABILITY_LIMIT:
        raise StabilityError(
            f"step*frequency = {h * freq:.3g} exceeds {STABILITY_LIMIT}; use step <= {STABILITY_LIMIT / freq:.3g}"
        )
    if h * freq > RECOMMENDED_LIMIT:
        warnings.warn(f"step*frequency = {h * freq:.3g} is above the recommended {RECOMMENDED_LIMIT}", stacklevel=2)

    n = grid.size
    states = np.empty((n, psi.size), dtype=complex)
    states[0] = psi
    drift = 0.0
    counter = 0
    records_per_chunk = max(1, _CHUNK_STEPS // substeps)
    t_start = grid[0]
    rec = 1
    while rec < n:
        nrec = min(records_per_chunk, n - rec)
        first_step = (rec - 1) * substeps
        nsteps = nrec * substeps
        out = np.empty((nrec, psi.size), dtype=complex)
        if spec.method == "rk4":
            t = t_start + 0.5 * h * (2 * first_step + np.arange(2 * nsteps + 1))
            Hs = np.ascontiguousarray(trajectory.value(t), dtype=complex)
            counter, dchunk = _rk4_chunk(Hs, psi, h, substeps, spec.renormalize_every, counter, out)
        else:
            t = t_start + h * (first_step + 0.5 + np.arange(nsteps))
            Us = np.ascontiguousarray(propagators(trajectory.value(t), h))
            dchunk = _unitary_chunk(Us, psi, substeps, out)
        drift = max(drift, dchunk)
        states[rec:rec + nrec] = out
        rec += nrec

    if drift > NORM_TOL:
        raise AccuracyError(
            f"norm drift {drift:.3g} exceeds {NORM_TOL}; reduce the step or enable renormalization"
        )
    return EvolutionRecord(grid=grid, states=states, norm_drift=drift, spec=spec, substeps=substeps)


@dataclass(frozen=True)
class EigenbasisCoefficients:
    """Coefficients of a trajectory in an instantaneous eigenbasis.

    raw:          psi = sum_n c_n |E_n>
    dyn-peeled:   psi = sum_n c_n e^{-i int E_n} |E_n>
    full-peeled:  psi = sum_n c_n e^{-i int E_n} e^{-int <E_n|dE_n>} |E_n>
    """

    convention: str
    times: np.ndarray
    values: np.ndarray  # (n, d)
    energy_integrals: np.ndarray  # int E_n, real (n, d)
    # int <E_n|dE_n/dt>, imaginary (n, d); None when frames are too coarse
    connection_integrals: Optional[np.ndarray]

    def _factor(self, convention: str) -> np.ndarray:
        """Multiplier taking raw coefficients to ``convention``."""
        if convention == "raw":
            return np.ones_like(self.values)
        f = np.exp(1j * self.energy_integrals)
        if convention == "full-peeled":
            if self.connection_integrals is None:
                raise UnreliableDerivativeError("no connection integral available for these frames")
            f = f * np.exp(self.connection_integrals)
        return f

    def to(self, convention: str) -> "EigenbasisCoefficients":
        if convention not in CONVENTIONS:
            raise ParameterError(f"unknown convention {convention!r}")
        if convention == self.convention:
            return self
        raw = self.values / self._factor(self.convention)
        return EigenbasisCoefficients(
            convention, self.times, raw * self._factor(convention), self.energy_integrals, self.connection_integrals
        )


def _same_grid(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and np.allclose(a, b, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(a))))


def decompose(
    record: EvolutionRecord | np.ndarray,
    frames: SpectralFrameSequence,
    convention: str = "raw",
    connection=None,
) -> EigenbasisCoefficients:
    """Project states onto the frames and apply the requested phase peel.

    ``record`` may also be a bare (n, d) array of states on ``frames.times``.
    Peel integrals use cumulative Simpson for energies; for the connection,
    link overlaps unless ``connection`` samples are supplied.
    """
    if isinstance(record, EvolutionRecord):
        if not _same_grid(record.grid, frames.times):
            raise AlignmentError("record and frames are on different grids")
        states = record.states
    else:
        states = np.asarray(record, dtype=complex)
        if states.shape[0] != len(frames):
            raise AlignmentError("state count does not match the number of frames")
    if convention not in CONVENTIONS:
        raise ParameterError(f"unknown convention {convention!r}")
    raw = np.einsum("ijk,ij->ik", frames.vectors.conj(), states)
    E_int = energy_integral(frames)
    if connection is not None or convention == "full-peeled" or frames.continuity <= CONTINUITY_LIMIT:
        A_int = connection_integral(frames, connection)
    else:
        A_int = None
    coeffs = EigenbasisCoefficients("raw", frames.times, raw, E_int, A_int)
    return coeffs.to(convention)


def reconstruct(coeffs: EigenbasisCoefficients, frames: SpectralFrameSequence) -> np.ndarray:
    """Inverse of ``decompose``: states of shape (n, d)."""
    if not _same_grid(coeffs.times, frames.times):
        raise AlignmentError("coefficients and frames are on different grids")
    raw = coeffs.to("raw").values
    return np.einsum("ijk,ik->ij", frames.vectors, raw)
