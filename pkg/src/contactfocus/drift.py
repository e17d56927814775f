"""Built-in drift fields with analytic Jacobians and a finite-difference cross-check.

Four system families are provided:

``duffing``
    Damped driven Duffing oscillator ``x'' + delta x' + alpha x + beta x^3
    = gamma cos(omega t)`` in state variables ``y = (x, x')``.
``linear``
    ``y' = A y`` for a constant matrix ``A`` (1 <= m <= 4).
``harmonic``
    Unit harmonic oscillator ``y' = (y2, -y1)``, the conservative test bed.
``scalar_decay``
    One-dimensional ``y' = -lam * y``, closed form throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, UnsupportedDimensionError

MAX_DIM = 4

KIND_DUFFING = "duffing"
KIND_LINEAR = "linear"
KIND_HARMONIC = "harmonic"
KIND_SCALAR_DECAY = "scalar_decay"

SYSTEM_KINDS = (KIND_DUFFING, KIND_LINEAR, KIND_HARMONIC, KIND_SCALAR_DECAY)


@dataclass(frozen=True)
class DuffingParams:
    """Parameters of the damped driven Duffing oscillator.

    delta : damping coefficient (>= 0)
    alpha : linear stiffness
    beta  : cubic stiffness
    gamma : forcing amplitude
    omega : forcing angular frequency
    """

    delta: float = 0.3
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.5
    omega: float = 1.2

    def __post_init__(self):
        vals = (self.delta, self.alpha, self.beta, self.gamma, self.omega)
        if not all(math.isfinite(v) for v in vals):
            raise InputError("Duffing parameters must be finite")
        if self.delta < 0:
            raise InputError(f"damping must be >= 0, got delta={self.delta}")


@dataclass(frozen=True, eq=False)
class DriftSystem:
    """A named vector field B(t, y) with analytic Jacobian M(t, y)."""

    kind: str
    dim: int
    params: object | None = None

    def __repr__(self):
        return f"DriftSystem(kind={self.kind!r}, dim={self.dim}, params={self.params!r})"


def duffing(delta: float = 0.3, alpha: float = 1.0, beta: float = 1.0,
            gamma: float = 0.5, omega: float = 1.2) -> DriftSystem:
    """Damped driven Duffing oscillator, m = 2."""
    return DriftSystem(KIND_DUFFING, 2, DuffingParams(delta, alpha, beta, gamma, omega))


def linear(matrix) -> DriftSystem:
    """Constant-coefficient linear field y' = A y, m = A.shape[0] (at most 4)."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"linear system needs a square matrix, got shape {a.shape}")
    m = a.shape[0]
    if not 1 <= m <= MAX_DIM:
        raise UnsupportedDimensionError(f"dimension must be in [1, {MAX_DIM}], got {m}")
    if not np.all(np.isfinite(a)):
        raise InputError("linear system matrix must be finite")
    return DriftSystem(KIND_LINEAR, m, a.copy())


def harmonic() -> DriftSystem:
    """Unit harmonic oscillator y' = (y2, -y1), m = 2."""
    return DriftSystem(KIND_HARMONIC, 2)


def scalar_decay(lam: float) -> DriftSystem:
    """Scalar field y' = -lam * y, m = 1."""
    if not math.isfinite(lam):
        raise InputError("decay rate must be finite")
    return DriftSystem(KIND_SCALAR_DECAY, 1, float(lam))


def _check_state(system: DriftSystem, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (system.dim,):
        raise InputError(
            f"state of length {system.dim} expected for {system.kind}, got shape {y.shape}")
    return y


def eval_drift(system: DriftSystem, t: float, y) -> np.ndarray:
    """Evaluate B(t, y)."""
    y = _check_state(system, y)
    if system.kind == KIND_DUFFING:
        p = system.params
        return np.array([
            y[1],
            -p.delta * y[1] - p.alpha * y[0] - p.beta * y[0] ** 3
            + p.gamma * math.cos(p.omega * t),
        ])
    if system.kind == KIND_LINEAR:
        return system.params @ y
    if system.kind == KIND_HARMONIC:
        return np.array([y[1], -y[0]])
    if system.kind == KIND_SCALAR_DECAY:
        return np.array([-system.params * y[0]])
    raise InputError(f"unknown system kind {system.kind!r}")


def eval_jacobian(system: DriftSystem, t: float, y) -> np.ndarray:
    """Evaluate the analytic Jacobian M(t, y) = dB/dy."""
    y = _check_state(system, y)
    if system.kind == KIND_DUFFING:
        p = system.params
        return np.array([
            [0.0, 1.0],
            [-p.alpha - 3.0 * p.beta * y[0] ** 2, -p.delta],
        ])
    if system.kind == KIND_LINEAR:
        return system.params.copy()
    if system.kind == KIND_HARMONIC:
        return np.array([[0.0, 1.0], [-1.0, 0.0]])
    if system.kind == KIND_SCALAR_DECAY:
        return np.array([[-system.params]])
    raise InputError(f"unknown system kind {system.kind!r}")


def fd_jacobian(system: DriftSystem, t: float, y, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian, the independent oracle for eval_jacobian."""
    if h <= 0:
        raise InputError(f"finite-difference step must be positive, got {h}")
    y = _check_state(system, y)
    m = system.dim
    jac = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        jac[:, j] = (eval_drift(system, t, y + e) - eval_drift(system, t, y - e)) / (2.0 * h)
    return jac
