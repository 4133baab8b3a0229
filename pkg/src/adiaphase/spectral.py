"""Instantaneous eigenframes along a trajectory and their couplings.

Gauges:

``analytic``
    closed-form eigenvectors supplied by the model.
``transport``
    parallel transport: overlaps of a level's vector between neighbouring
    frames are made real positive.
``raw``
    whatever ``numerics.eigh`` returns (largest component real positive).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneracyError,
    ParameterError,
    TrackingAmbiguityError,
    UnreliableDerivativeError,
)
from .hamiltonian import HamiltonianTrajectory
from .numerics import accurate_cumsum, cumquad_uniform, eigh, uniform_step

GAUGES = ("analytic", "transport", "raw")
AMBIGUITY_MARGIN = 0.05
CONTINUITY_LIMIT = 0.01


@dataclass(frozen=True)
class SpectralFrame:
    t: float
    energies: np.ndarray
    vectors: np.ndarray  # columns
    gauge: str


@dataclass(frozen=True)
class SpectralFrameSequence:
    """Eigenframes on a uniform grid, stored as stacked arrays.

    ``energies`` has shape (n, d), ``vectors`` (n, d, d) with eigenvectors as
    columns, in a level order that is consistent along the trajectory.
    """

    times: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    gauge: str

    def __len__(self) -> int:
        return self.times.shape[0]

    def __getitem__(self, i) -> SpectralFrame:
        return SpectralFrame(float(self.times[i]), self.energies[i], self.vectors[i], self.gauge)

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    @property
    def step(self) -> float:
        return uniform_step(self.times)

    def links(self) -> np.ndarray:
        """<v_k(t_i)|v_k(t_{i+1})> for every level, shape (n-1, d)."""
        return np.einsum("ijk,ijk->ik", self.vectors[:-1].conj(), self.vectors[1:])

    @property
    def continuity(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(np.max(1.0 - np.abs(self.links())))

    def redressed(self, phases) -> "SpectralFrameSequence":
        """Same frames with vector k at time i multiplied by exp(i phases[i, k])."""
        phases = np.broadcast_to(np.asarray(phases, dtype=float), self.energies.shape)
        vectors = self.vectors * np.exp(1j * phases)[:, None, :]
        return SpectralFrameSequence(self.times, self.energies, vectors, "raw")


def _check_gaps(energies: np.ndarray, H: np.ndarray, t: float) -> None:
    if energies.size < 2:
        return
    gaps = np.diff(np.sort(energies))
    scale = max(np.linalg.norm(H, 2), 1e-300)
    if np.min(gaps) < 1e-12 * scale:
        raise DegeneracyError(f"degenerate spectrum at t={t}")


def _match_levels(prev: np.ndarray, cur: np.ndarray, t: float) -> np.ndarray:
    """Permutation ``p`` such that cur[:, p[k]] continues prev[:, k]."""
    overlap = np.abs(prev.conj().T @ cur)
    d = overlap.shape[0]
    perm = np.empty(d, dtype=int)
    for k in range(d):
        row = overlap[k]
        order = np.argsort(row)[::-1]
        if d > 1 and row[order[0]] - row[order[1]] < AMBIGUITY_MARGIN:
            raise TrackingAmbiguityError(
                f"level {k} has competing overlaps {row[order[0]]:.3f} and "
                f"{row[order[1]]:.3f} at t={t}; use a denser grid"
            )
        perm[k] = order[0]
    if len(set(perm.tolist())) != d:
        raise TrackingAmbiguityError(f"level assignment is not a permutation at t={t}")
    return perm


def track_frames(
    trajectory: HamiltonianTrajectory, grid, gauge: str = "auto"
) -> SpectralFrameSequence:
    """Build gauge-fixed eigenframes along ``grid``.

    ``gauge="auto"`` picks ``analytic`` when the trajectory carries closed-form
    eigenvectors and ``transport`` otherwise. Level order is fixed at the first
    frame (the model's own order when it has one, else ascending energy) and
    then carried by maximal overlap.
    """
    grid = np.asarray(grid, dtype=float)
    uniform_step(grid)
    if gauge == "auto":
        gauge = "analytic" if trajectory.eigensystem is not None else "transport"
    if gauge not in GAUGES:
        raise ParameterError(f"unknown gauge {gauge!r}; expected one of {GAUGES}")

    Hs = trajectory.value(grid)

    if gauge == "analytic":
        if trajectory.eigensystem is None:
            raise ParameterError("analytic gauge needs a trajectory with a closed-form eigensystem")
        energies, vectors = trajectory.eigensystem(grid)
        energies = np.asarray(energies, dtype=float)
        vectors = np.asarray(vectors, dtype=complex)
        for i in (0, len(grid) // 2, len(grid) - 1):
            _check_gaps(energies[i], Hs[i], grid[i])
        return SpectralFrameSequence(grid, energies, vectors, gauge)

    n, d = len(grid), trajectory.dim
    energies = np.empty((n, d))
    vectors = np.empty((n, d, d), dtype=complex)
    for i, t in enumerate(grid):
        E, V = eigh(Hs[i])
        _check_gaps(E, Hs[i], t)
        if i == 0:
            if trajectory.eigensystem is not None:
                _, ref = trajectory.eigensystem(t)
                perm = _match_levels(np.asarray(ref), V, t)
                if gauge == "transport":
                    # start transport from the model's reference vectors
                    E = E[perm]
                    V = np.asarray(ref, dtype=complex)
                    perm = np.arange(d)
            else:
                perm = np.arange(d)
        else:
            perm = _match_levels(vectors[i - 1], V, t)
        E, V = E[perm], V[:, perm]
        if gauge == "transport" and i > 0:
            ov = np.einsum("jk,jk->k", vectors[i - 1].conj(), V)
            V = V * (np.abs(ov) / ov)[None, :]
        energies[i] = E
        vectors[i] = V
    return SpectralFrameSequence(grid, energies, vectors, gauge)


def coupling_offdiag(frame: SpectralFrame, Hdot) -> np.ndarray:
    """Off-diagonal <E_n|dE_m/dt> = <E_n|dH/dt|E_m> / (E_m - E_n).

    The diagonal of the returned matrix is zero; it carries no information
    in this identity (see ``coupling_diag``).
    """
    V = frame.vectors
    E = frame.energies
    M = V.conj().T @ np.asarray(Hdot, dtype=complex) @ V
    diff = E[None, :] - E[:, None]
    scale = max(np.max(np.abs(E)), 1e-300)
    off = ~np.eye(len(E), dtype=bool)
    if np.any(np.abs(diff[off]) < 1e-12 * scale):
        raise DegeneracyError(f"degenerate levels at t={frame.t}")
    out = np.zeros_like(M)
    out[off] = M[off] / diff[off]
    return out


def coupling_offdiag_sequence(frames: SpectralFrameSequence, trajectory: HamiltonianTrajectory) -> np.ndarray:
    """``coupling_offdiag`` on every frame, shape (n, d, d)."""
    Hdots = trajectory.derivative(frames.times)
    return np.stack([coupling_offdiag(frames[i], Hdots[i]) for i in range(len(frames))])


def coupling_diag(frames: SpectralFrameSequence, k: int) -> np.ndarray:
    """<E_k|dE_k/dt> by central differences (one-sided at the ends)."""
    if len(frames) < 3:
        raise ParameterError("coupling_diag needs at least 3 frames")
    if frames.continuity > CONTINUITY_LIMIT:
        raise UnreliableDerivativeError(
            f"frame continuity {frames.continuity:.3g} exceeds {CONTINUITY_LIMIT}; refine the grid"
        )
    h = frames.step
    v = frames.vectors[:, :, k]
    dv = np.empty_like(v)
    dv[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    dv[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    dv[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return np.einsum("ij,ij->i", v.conj(), dv)


def connection_integral(frames: SpectralFrameSequence, connection=None) -> np.ndarray:
    """Running integral of <E_n|dE_n/dt> from the first frame, shape (n, d).

    With ``connection`` samples (shape (n, d)) this is a cumulative Simpson
    integral. Without, each step contributes i * arg <v(t_i)|v(t_{i+1})>; a
    redressing v -> e^{i phi} v shifts that by exactly i (phi_{i+1} - phi_i),
    so the link form is gauge covariant frame by frame.
    """
    if connection is not None:
        connection = np.asarray(connection, dtype=complex)
        if connection.shape != frames.energies.shape:
            raise ParameterError("connection samples must have shape (n_frames, dim)")
        return cumquad_uniform(connection, frames.step)
    if frames.continuity > CONTINUITY_LIMIT:
        raise UnreliableDerivativeError(
            f"frame continuity {frames.continuity:.3g} exceeds {CONTINUITY_LIMIT}; refine the grid"
        )
    out = np.zeros(frames.energies.shape, dtype=complex)
    out[1:] = 1j * accurate_cumsum(np.angle(frames.links()))
    return out


def energy_integral(frames: SpectralFrameSequence) -> np.ndarray:
    """Running integral of E_n from the first frame, shape (n, d)."""
    return cumquad_uniform(frames.energies, frames.step)
