"""Fixed-step RK4 transport: characteristics, variational flow, stiffness propagation.

Everything here integrates on a deterministic uniform grid (classical RK4,
default step 1e-3, final partial step shortened rather than overshooting).
The variational and stiffness integrators re-advance the base trajectory
jointly on the same clock, because RK4 stages need the base state at
half-steps that a sampled Path does not store; by determinism the re-advanced
trajectory is bitwise identical to the Path it was built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .drift import DriftSystem, eval_drift, eval_jacobian
from .errors import BlowUpError, InputError
from .geometry import DEFAULT_GRADIENT_TOL, projector

DEFAULT_STEP = 1e-3

# Leftover below this fraction of h is treated as an exactly dividing grid.
_GRID_REL_TOL = 1e-9

# Initial degeneracy |H2 g| must be below this (scaled) for projected transport.
_DEGENERACY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Path:
    """Sampled characteristic: states[k] = y(times[k])."""

    times: np.ndarray
    states: np.ndarray

    @property
    def dim(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True, eq=False)
class FundamentalMatrix:
    """Sampled fundamental solution: matrices[k] = Phi(times[k]), Phi(t0) = I."""

    times: np.ndarray
    matrices: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


def time_grid(t0: float, t_end: float, h: float) -> np.ndarray:
    """Uniform grid from t0 to t_end with step h; last step shortened if needed."""
    if h <= 0:
        raise InputError(f"step must be positive, got {h}")
    if t_end < t0:
        raise InputError(f"t_end={t_end} must be >= t0={t0}")
    span = t_end - t0
    if span == 0:
        return np.array([t0])
    n = int(math.floor(span / h + _GRID_REL_TOL))
    times = t0 + h * np.arange(n + 1)
    leftover = t_end - times[-1]
    if leftover > _GRID_REL_TOL * h:
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float,
             state: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 update of the flat state vector.

    Deterministic (bitwise) for identical inputs; raises BlowUpError carrying
    the step time if any stage evaluates non-finite.
    """
    if h <= 0:
        raise InputError(f"step must be positive, got {h}")
    # non-finite stages are detected and escalated, so numpy need not warn
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f(t, state)
        k2 = f(t + 0.5 * h, state + (0.5 * h) * k1)
        k3 = f(t + 0.5 * h, state + (0.5 * h) * k2)
        k4 = f(t + h, state + h * k3)
        if not (np.all(np.isfinite(k1)) and np.all(np.isfinite(k2))
                and np.all(np.isfinite(k3)) and np.all(np.isfinite(k4))):
            raise BlowUpError(t)
        return state + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def integrate_fixed(f: Callable[[float, np.ndarray], np.ndarray], times: np.ndarray,
                    state0: np.ndarray,
                    post_step: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """RK4 over an explicit grid; returns the (len(times), n) solution array."""
    out = np.empty((len(times), len(state0)))
    s = np.asarray(state0, dtype=float).copy()
    out[0] = s
    for k in range(len(times) - 1):
        s = rk4_step(f, times[k], s, times[k + 1] - times[k])
        if post_step is not None:
            s = post_step(s)
        if not np.all(np.isfinite(s)):
            raise BlowUpError(times[k + 1])
        out[k + 1] = s
    return out


def integrate_characteristic(system: DriftSystem, y0, t0: float, t_end: float,
                             h: float = DEFAULT_STEP) -> Path:
    """Solve y' = B(t, y) from y(t0) = y0 on the fixed grid."""
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (system.dim,):
        raise InputError(f"y0 must have length {system.dim}, got shape {y0.shape}")
    times = time_grid(t0, t_end, h)
    states = integrate_fixed(lambda t, s: eval_drift(system, t, s), times, y0)
    return Path(times, states)


def _check_square(mat, dim: int, name: str) -> np.ndarray:
    a = np.asarray(mat, dtype=float)
    if a.shape != (dim, dim):
        raise InputError(f"{name} must be {dim}x{dim}, got shape {a.shape}")
    return a


def integrate_variational(system: DriftSystem, path: Path, projected: bool = False,
                          grad_h0: Callable[[float, np.ndarray], np.ndarray] | None = None,
                          ) -> FundamentalMatrix:
    """Fundamental matrix of Phi' = M Phi (or the projected P M P) along the path."""
    if projected and grad_h0 is None:
        raise InputError("projected variational integration requires grad_h0")
    m = system.dim
    if path.dim != m:
        raise InputError(f"path dimension {path.dim} does not match system dim {m}")

    def rhs(t, s):
        y = s[:m]
        phi_mat = s[m:].reshape(m, m)
        mat = eval_jacobian(system, t, y)
        if projected:
            proj = projector(np.asarray(grad_h0(t, y), dtype=float))
            mat = proj @ mat @ proj
        return np.concatenate([eval_drift(system, t, y), (mat @ phi_mat).ravel()])

    s0 = np.concatenate([path.states[0], np.eye(m).ravel()])
    sol = integrate_fixed(rhs, path.times, s0)
    return FundamentalMatrix(path.times, sol[:, m:].reshape(-1, m, m))


def h2_closed_form(fundamental: FundamentalMatrix, h2_0) -> np.ndarray:
    """Phi(t) H2(0) Phi(t)^T per grid point (the dissipative exact solution)."""
    m = fundamental.dim
    h2_0 = _check_square(h2_0, m, "h2_0")
    return np.einsum("kij,jl,kml->kim", fundamental.matrices, h2_0, fundamental.matrices)


def _symmetrize_block(m: int):
    # Re-symmetrizing each step kills the slow antisymmetric drift of the matrix ODE.
    def post(s):
        h2 = s[m:].reshape(m, m)
        s[m:] = ((h2 + h2.T) / 2.0).ravel()
        return s
    return post


def h2_direct(system: DriftSystem, path: Path, h2_0) -> np.ndarray:
    """RK4 solution of H2' = M H2 + H2 M^T along the path (dissipative transport)."""
    m = system.dim
    if path.dim != m:
        raise InputError(f"path dimension {path.dim} does not match system dim {m}")
    h2_0 = _check_square(h2_0, m, "h2_0")

    def rhs(t, s):
        y = s[:m]
        h2 = s[m:].reshape(m, m)
        mat = eval_jacobian(system, t, y)
        return np.concatenate([eval_drift(system, t, y), (mat @ h2 + h2 @ mat.T).ravel()])

    s0 = np.concatenate([path.states[0], h2_0.ravel()])
    sol = integrate_fixed(rhs, path.times, s0, post_step=_symmetrize_block(m))
    return sol[:, m:].reshape(-1, m, m)


def h2_projected(system: DriftSystem, path: Path, h2_0,
                 grad_h0: Callable[[float, np.ndarray], np.ndarray],
                 gradient_tol: float = DEFAULT_GRADIENT_TOL) -> np.ndarray:
    """Degeneracy-preserving transport H2' = Mt H2 + H2 Mt^T + Delta[H2].

    Mt = P M P with P the projector transverse to grad_h0, and Delta the
    rotational correction; requires the initial degeneracy H2(0) grad_h0 = 0.
    Reduces to h2_direct when grad_h0 vanishes identically.
    """
    m = system.dim
    if path.dim != m:
        raise InputError(f"path dimension {path.dim} does not match system dim {m}")
    h2_0 = _check_square(h2_0, m, "h2_0")
    g0 = np.asarray(grad_h0(path.times[0], path.states[0]), dtype=float)
    violation = np.linalg.norm(h2_0 @ g0)
    bound = _DEGENERACY_TOL * (1.0 + np.linalg.norm(h2_0) * np.linalg.norm(g0))
    if violation > bound:
        raise InputError(
            f"initial degeneracy violated: |H2(0) grad| = {violation:.3e} > {bound:.3e}")
    eye = np.eye(m)

    def rhs(t, s):
        y = s[:m]
        h2 = s[m:].reshape(m, m)
        mat = eval_jacobian(system, t, y)
        proj = projector(np.asarray(grad_h0(t, y), dtype=float), tol=gradient_tol)
        mat_t = proj @ mat @ proj
        comp = h2 @ mat.T @ (eye - proj) + (eye - proj) @ mat @ h2
        dh2 = mat_t @ h2 + h2 @ mat_t.T + comp
        return np.concatenate([eval_drift(system, t, y), dh2.ravel()])

    s0 = np.concatenate([path.states[0], h2_0.ravel()])
    sol = integrate_fixed(rhs, path.times, s0, post_step=_symmetrize_block(m))
    return sol[:, m:].reshape(-1, m, m)


def liouville_residual(system: DriftSystem, path: Path,
                       fundamental: FundamentalMatrix) -> float:
    """Max relative deviation of det Phi(t) from exp(int tr M dtau).

    The quadrature is composite trapezoid on the integration grid, which is
    exact for the built-in systems (their traces are constant along paths).
    """
    traces = np.array([np.trace(eval_jacobian(system, t, y))
                       for t, y in zip(path.times, path.states)])
    dt = np.diff(path.times)
    integral = np.concatenate([[0.0], np.cumsum(dt * (traces[:-1] + traces[1:]) / 2.0)])
    predicted = np.exp(integral)
    dets = np.linalg.det(fundamental.matrices)
    return float(np.max(np.abs(dets - predicted) / np.abs(predicted)))
