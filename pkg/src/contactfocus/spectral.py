"""Eigenvalue analysis of drift Jacobians: amplification rate, timescale, damping regime.

Eigenvalues are extracted from the explicit characteristic polynomial
(Faddeev-LeVerrier coefficients, Durand-Kerner root iteration), which covers
the supported dimensions 1 <= m <= 4 without a general eigensolver.

The amplification rate is the slowest decay rate of the spectrum,
``sigma = -max_k Re(lambda_k)``: the rate of the eigenvalue closest to the
imaginary axis, which governs the asymptotic decay of the transported
coupling. ``tau_f = 1/sigma`` is the corresponding e-folding timescale.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, UnsupportedDimensionError

REGIME_UNDERDAMPED = "underdamped"
REGIME_CRITICAL = "critical"
REGIME_OVERDAMPED = "overdamped"
REGIME_NON_DISSIPATIVE = "non_dissipative"

# All real parts must be below -DISSIPATIVE_TOL for sigma/tau_f to be defined.
DISSIPATIVE_TOL = 1e-12

_DK_MAX_ITER = 200
_DK_TOL = 1e-12
_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues plus the derived rate/timescale and damping classification.

    sigma and tau_f are None exactly when regime == "non_dissipative".
    """

    eigenvalues: tuple[complex, ...]
    sigma: float | None
    tau_f: float | None
    regime: str

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [{"re": ev.real, "im": ev.imag} for ev in self.eigenvalues],
            "sigma": self.sigma,
            "tau_f": self.tau_f,
            "regime": self.regime,
        }


def char_poly(matrix) -> np.ndarray:
    """Monic characteristic polynomial coefficients of det(lambda I - M).

    Returns [1, a_{m-1}, ..., a_0] via the Faddeev-LeVerrier recurrence.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"square matrix expected, got shape {a.shape}")
    m = a.shape[0]
    if m > 4:
        raise UnsupportedDimensionError(f"eigenvalue extraction supports m <= 4, got {m}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix entries must be finite")
    coeffs = [1.0]
    n_k = np.eye(m)
    for k in range(1, m + 1):
        m_k = a @ n_k
        c_k = np.trace(m_k) / k
        coeffs.append(-c_k)
        n_k = m_k - c_k * np.eye(m)
    return np.array(coeffs)


def _durand_kerner(coeffs: np.ndarray) -> np.ndarray:
    m = len(coeffs) - 1
    if m == 1:
        return np.array([-coeffs[1]], dtype=complex)
    radius = 1.0 + float(np.max(np.abs(coeffs[1:])))
    z = radius * (0.4 + 0.9j) ** np.arange(1, m + 1)
    for _ in range(_DK_MAX_ITER):
        step = np.empty(m, dtype=complex)
        for i in range(m):
            denom = np.prod(z[i] - np.delete(z, i))
            step[i] = np.polyval(coeffs, z[i]) / denom
        z = z - step
        if np.max(np.abs(step)) <= _DK_TOL * max(1.0, radius):
            break
    return z


def eigenvalues(matrix) -> list[complex]:
    """All roots of the characteristic polynomial of M (1 <= m <= 4).

    Each root satisfies |charpoly(root)| <= 1e-9 * (1 + ||M||_F^m); the
    iteration raises if that residual bound cannot be met.
    """
    a = np.asarray(matrix, dtype=float)
    coeffs = char_poly(a)
    roots = _durand_kerner(coeffs)
    m = a.shape[0]
    bound = _RESIDUAL_TOL * (1.0 + np.linalg.norm(a) ** m)
    residuals = np.abs(np.polyval(coeffs, roots))
    if np.any(residuals > bound):
        raise ArithmeticError(
            f"eigenvalue iteration residual {residuals.max():.3e} exceeds bound {bound:.3e}")
    return sorted(roots.tolist(), key=lambda ev: (ev.real, ev.imag))


def amplification_rate(matrix) -> SpectralReport:
    """SpectralReport for M; sigma/tau_f filled iff all Re(lambda) < -1e-12."""
    evs = eigenvalues(matrix)
    reals = [ev.real for ev in evs]
    if not all(re < -DISSIPATIVE_TOL for re in reals):
        return SpectralReport(tuple(evs), None, None, REGIME_NON_DISSIPATIVE)
    sigma = -max(reals)
    scale = 1.0 + max(abs(ev) for ev in evs)
    dominant = [ev for ev in evs if abs(ev.real - max(reals)) <= 1e-9 * scale]
    if any(abs(ev.imag) > 1e-9 * scale for ev in dominant):
        regime = REGIME_UNDERDAMPED
    elif len(dominant) >= 2:
        regime = REGIME_CRITICAL
    else:
        regime = REGIME_OVERDAMPED
    return SpectralReport(tuple(evs), sigma, 1.0 / sigma, regime)


def duffing_regime(delta: float, alpha: float) -> SpectralReport:
    """Closed-form rate/timescale for the Duffing origin Jacobian ((0,1),(-alpha,-delta)).

    Underdamped/critical (delta^2 <= 4 alpha): sigma = delta/2, tau_f = 2/delta.
    Overdamped: sigma = (delta - sqrt(delta^2 - 4 alpha)) / 2.
    """
    if not (math.isfinite(delta) and math.isfinite(alpha)):
        raise InputError("delta and alpha must be finite")
    if alpha <= 0 or delta <= 0:
        raise InputError(f"requires alpha > 0 and delta > 0, got alpha={alpha}, delta={delta}")
    disc = delta * delta - 4.0 * alpha
    # Exact equality delta^2 = 4 alpha is measure-zero in floating point.
    if abs(disc) <= 1e-10 * max(1.0, delta * delta):
        lam = -delta / 2.0
        return SpectralReport((complex(lam), complex(lam)), delta / 2.0, 2.0 / delta,
                              REGIME_CRITICAL)
    if disc < 0:
        omega_d = math.sqrt(-disc) / 2.0
        evs = (complex(-delta / 2.0, -omega_d), complex(-delta / 2.0, omega_d))
        return SpectralReport(evs, delta / 2.0, 2.0 / delta, REGIME_UNDERDAMPED)
    root = math.sqrt(disc)
    evs = (complex((-delta - root) / 2.0), complex((-delta + root) / 2.0))
    sigma = (delta - root) / 2.0
    return SpectralReport(evs, sigma, 1.0 / sigma, REGIME_OVERDAMPED)
