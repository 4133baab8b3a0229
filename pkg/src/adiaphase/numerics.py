"""Small dense complex linear algebra and uniform-grid quadrature.

States are 1-D complex arrays, operators are square complex arrays. Nothing
here knows about time or physics.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionError,
    HermiticityError,
    InsufficientSamplesError,
    ParameterError,
    UnsupportedSizeError,
)

MAX_EIGH_DIM = 16
HERMITIAN_TOL = 1e-12


def as_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``H`` as a complex square array, checking Hermiticity."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise HermiticityError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise HermiticityError("operator has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > tol * scale:
        raise HermiticityError("operator is not Hermitian")
    return H


def as_state(psi, normalized: bool = False, tol: float = 1e-9) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 2:
        raise DimensionError(f"state must be a vector of dim >= 2, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise DimensionError("state has non-finite amplitudes")
    if normalized and abs(np.linalg.norm(psi) - 1.0) > tol:
        raise DimensionError(f"state norm {np.linalg.norm(psi)!r} is not 1")
    return psi


def inner(x, y) -> complex:
    """<x|y>, conjugate-linear in ``x``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return complex(np.vdot(x, y))


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties within 1e-12 go to the lowest index so the choice is deterministic.
    """
    vectors = np.array(vectors, dtype=complex)
    mags = np.abs(vectors)
    for j in range(vectors.shape[1]):
        col = mags[:, j]
        idx = int(np.flatnonzero(col >= col.max() - 1e-12)[0])
        pivot = vectors[idx, j]
        vectors[:, j] *= abs(pivot) / pivot
        vectors[idx, j] = abs(pivot)
    return vectors


def _eigh2(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = H[0, 0].real
    d = H[1, 1].real
    c = H[0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = np.hypot(half, abs(c))
    lo = mean - r
    if abs(c) == 0.0:
        if a <= d:
            return np.array([a, d]), np.eye(2, dtype=complex)
        return np.array([d, a]), np.array([[0, 1], [1, 0]], dtype=complex)
    # two algebraically equivalent eigenvectors of the lower level; take the
    # one without cancellation
    u1 = np.array([c, lo - a])
    u2 = np.array([lo - d, np.conj(c)])
    u = u1 if np.linalg.norm(u1) >= np.linalg.norm(u2) else u2
    u = u / np.linalg.norm(u)
    # exact orthogonal complement in C^2
    w = np.array([-np.conj(u[1]), np.conj(u[0])])
    return np.array([lo, mean + r]), np.column_stack([u, w])


def _jacobi(H: np.ndarray, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    A = H.copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A[mask])
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0:
                    continue
                sub = np.array([[A[p, p], A[p, q]], [A[q, p], A[q, q]]])
                _, G = _eigh2(sub)
                A[:, [p, q]] = A[:, [p, q]] @ G
                A[[p, q], :] = G.conj().T @ A[[p, q], :]
                A[p, q] = A[q, p] = 0.0
                V[:, [p, q]] = V[:, [p, q]] @ G
    energies = np.diag(A).real
    order = np.argsort(energies, kind="stable")
    return energies[order], V[:, order]


def eigh(H) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a small dense Hermitian matrix.

    Returns ascending energies and eigenvectors as columns, each column
    rotated so its largest component is real positive. Dim 2 uses the closed
    form, larger dims cyclic Jacobi rotations.
    """
    H = as_hermitian(H)
    n = H.shape[0]
    if n > MAX_EIGH_DIM:
        raise UnsupportedSizeError(f"eigh supports dim <= {MAX_EIGH_DIM}, got {n}")
    if n == 1:
        return H.diagonal().real.copy(), np.ones((1, 1), dtype=complex)
    energies, vectors = _eigh2(H) if n == 2 else _jacobi(H)
    return energies, fix_phase(vectors)


def quad_uniform(samples, step: float) -> complex | float:
    """Integrate samples on a uniform grid.

    Composite Simpson; an odd panel count closes with Simpson's 3/8 rule on
    the last three panels so the rule stays exact for cubics.
    """
    f = np.asarray(samples)
    n = f.shape[0]
    if n < 3:
        raise InsufficientSamplesError(f"need at least 3 samples, got {n}")
    panels = n - 1
    total = 0.0
    end = n
    if panels % 2:
        tail = f[n - 4:]
        total = 3.0 * step / 8.0 * (tail[0] + 3 * tail[1] + 3 * tail[2] + tail[3])
        end = n - 3
    if end >= 3:
        g = f[:end]
        total = total + step / 3.0 * (g[0] + g[-1] + 4 * g[1:-1:2].sum(axis=0) + 2 * g[2:-1:2].sum(axis=0))
    return total


def accurate_cumsum(x, axis: int = 0) -> np.ndarray:
    """Running sum accumulated in extended precision.

    Long phase integrals reach 1e7 rad; a plain float64 running sum drifts by
    many ulps over 1e5+ terms.
    """
    x = np.asarray(x)
    wide = np.clongdouble if np.iscomplexobj(x) else np.longdouble
    return np.cumsum(x.astype(wide), axis=axis).astype(x.dtype)


def cumquad_uniform(samples, step: float) -> np.ndarray:
    """Running integral from the first sample, fourth-order at even nodes.

    Even nodes accumulate Simpson panels; odd nodes add the three-point
    half-panel rule h/12 (5 f0 + 8 f1 - f2). Works along axis 0.
    """
    f = np.asarray(samples)
    n = f.shape[0]
    if n < 3:
        raise InsufficientSamplesError(f"need at least 3 samples, got {n}")
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    m = (n - 1) // 2
    f0, f1, f2 = f[0:2 * m:2], f[1:2 * m:2], f[2:2 * m + 1:2]
    pair = step / 3.0 * (f0 + 4 * f1 + f2)
    out[2:2 * m + 1:2] = accurate_cumsum(pair)
    out[1:2 * m:2] = out[0:2 * m:2] + step / 12.0 * (5 * f0 + 8 * f1 - f2)
    if n % 2 == 0:
        out[n - 1] = out[n - 2] + step / 12.0 * (-f[n - 3] + 8 * f[n - 2] + 5 * f[n - 1])
    return out


def uniform_step(grid, rtol: float = 1e-9) -> float:
    """Spacing of a uniform grid; raises if the grid is not uniform."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ParameterError("grid needs at least two points")
    diffs = np.diff(grid)
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    tol = rtol * h + 1e-12 * np.max(np.abs(grid))
    if h <= 0 or np.max(np.abs(diffs - h)) > tol:
        raise ParameterError("grid must be uniform and increasing")
    return float(h)
