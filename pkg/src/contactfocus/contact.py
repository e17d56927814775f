"""Coupled contact flow, locking-rate fits, and constraint-drift diagnostics.

The flow advances five blocks on one RK4 clock:

    reference     y_ref' = B(t, y_ref)
    fiber         phi'   = -M(t, y_*)^T phi
    stiffness     H2'    = M(t, y_*) H2 + H2 M(t, y_*)^T
    macroscopic   y'     = B(t, y) + H2 phi
    fundamental   Phi'   = M(t, y_*) Phi

with y_* = y_ref in "locked" mode (transport along the reference
characteristic) and y_* = y in "coupled" mode (fully self-consistent flow).
The fiber equation is the linearized one, which makes the constraint
eps = -c + phi^T H2 phi / 2 exactly conserved in continuous time; the
integrator is expected to hold its drift below 1e-6 * (1 + |eps(0)|).

A cross-check block z' = M(t, y_*) z, z(0) = H2(0) phi(0) is carried along:
by the chain rule the coupling vector H2 phi satisfies the same equation, so
the two columns must agree to integrator accuracy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .drift import DriftSystem, eval_drift, eval_jacobian
from .errors import BlowUpError, FitError, InputError
from .spectral import REGIME_NON_DISSIPATIVE, amplification_rate
from .transport import DEFAULT_STEP, rk4_step, time_grid

MODE_LOCKED = "locked"
MODE_COUPLED = "coupled"

METHOD_PLAIN = "plain"
METHOD_ENVELOPE = "envelope"

MIN_FIT_POINTS = 5

_SPECTRAL_RANGE_SAMPLES = 201


@dataclass(frozen=True, eq=False)
class ContactConfig:
    """One focusing run: system, mode, initial data, grid, and fit settings."""

    system: DriftSystem
    mode: str
    y0: np.ndarray
    phi0: np.ndarray
    h2_0: np.ndarray
    t_end: float
    fit_window: tuple[float, float]
    c: float = 0.0
    h: float = DEFAULT_STEP
    stride: int = 10
    envelope_fit: bool = True

    def __post_init__(self):
        m = self.system.dim
        object.__setattr__(self, "y0", _as_vector(self.y0, m, "y0"))
        object.__setattr__(self, "phi0", _as_vector(self.phi0, m, "phi0"))
        h2 = np.asarray(self.h2_0, dtype=float)
        if h2.shape != (m, m):
            raise InputError(f"h2_0 must be {m}x{m}, got shape {h2.shape}")
        if not np.all(np.isfinite(h2)):
            raise InputError("h2_0 must be finite")
        scale = max(1.0, float(np.abs(h2).max()))
        if np.abs(h2 - h2.T).max() > 1e-12 * scale:
            raise InputError("h2_0 must be symmetric")
        object.__setattr__(self, "h2_0", h2)
        if self.mode not in (MODE_LOCKED, MODE_COUPLED):
            raise InputError(f"mode must be 'locked' or 'coupled', got {self.mode!r}")
        if self.t_end <= 0:
            raise InputError(f"t_end must be positive, got {self.t_end}")
        if self.h <= 0:
            raise InputError(f"h must be positive, got {self.h}")
        if self.stride < 1:
            raise InputError(f"stride must be >= 1, got {self.stride}")
        lo, hi = self.fit_window
        if not lo < hi <= self.t_end:
            raise InputError(
                f"fit window must satisfy t_lo < t_hi <= t_end, got ({lo}, {hi})")
        if not math.isfinite(self.c):
            raise InputError("c must be finite")


@dataclass(frozen=True, eq=False)
class ContactState:
    """Snapshot of the coupled flow."""

    t: float
    y: np.ndarray
    phi: np.ndarray
    h2: np.ndarray
    fundamental: np.ndarray


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Sampled diagnostics of one focusing run.

    coupling is the vector H2 phi; coupling_ode is the independently
    integrated copy of it (z' = M z); epsilon is -c + phi^T H2 phi / 2.
    """

    config: ContactConfig
    times: np.ndarray
    y: np.ndarray
    y_ref: np.ndarray
    phi: np.ndarray
    h2_fro: np.ndarray
    coupling: np.ndarray
    coupling_norm: np.ndarray
    epsilon: np.ndarray
    deviation: np.ndarray
    coupling_ode: np.ndarray
    final_state: ContactState = field(repr=False)

    @property
    def phi_norm(self) -> np.ndarray:
        return np.linalg.norm(self.phi, axis=1)


@dataclass(frozen=True)
class FitReport:
    """Least-squares log-linear decay fit over a time window."""

    fitted_rate: float
    r_squared: float
    n_points: int
    method: str
    intercept: float
    predicted_sigma: float | None = None
    relative_error: float | None = None

    def as_dict(self) -> dict:
        return {
            "fitted_rate": self.fitted_rate,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "method": self.method,
            "predicted_sigma": self.predicted_sigma,
            "relative_error": self.relative_error,
        }


@dataclass(frozen=True)
class LockingDiagnostics:
    """Fitted growth/decay exponents of |phi|, ||H2||, ||H2 phi|| vs the predicted triple."""

    sigma: float
    window: tuple[float, float]
    method: str
    exponents: tuple[float, float, float]
    expected: tuple[float, float, float]
    ratios: tuple[float, float, float]
    spectral_range: tuple[float, float] | None

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "window": list(self.window),
            "method": self.method,
            "exponents": {"phi": self.exponents[0], "h2": self.exponents[1],
                          "coupling": self.exponents[2]},
            "expected": {"phi": self.expected[0], "h2": self.expected[1],
                         "coupling": self.expected[2]},
            "ratios": {"phi": self.ratios[0], "h2": self.ratios[1],
                       "coupling": self.ratios[2]},
            "instantaneous_sigma_range": list(self.spectral_range)
            if self.spectral_range else None,
        }


def _as_vector(v, m: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (m,):
        raise InputError(f"{name} must have length {m}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return arr


def run_focusing(config: ContactConfig) -> TrajectoryRecord:
    """Integrate the coupled contact flow from t = 0 and sample diagnostics.

    Only dissipative systems are supported: the Jacobian at (0, y0) must have
    all eigenvalue real parts strictly negative.
    """
    system = config.system
    m = system.dim
    gate = amplification_rate(eval_jacobian(system, 0.0, config.y0))
    if gate.regime == REGIME_NON_DISSIPATIVE:
        raise InputError(
            f"focusing run requires a dissipative system; {system.kind} at y0 is not "
            f"(eigenvalues {gate.eigenvalues})")

    locked = config.mode == MODE_LOCKED
    mm = m * m
    # Flat layout: y_ref | y | phi | H2 | Phi | z
    i_y = m
    i_phi = 2 * m
    i_h2 = 3 * m
    i_fm = 3 * m + mm
    i_z = 3 * m + 2 * mm

    def rhs(t, s):
        y_ref = s[:m]
        y = s[i_y:i_phi]
        phi = s[i_phi:i_h2]
        h2 = s[i_h2:i_fm].reshape(m, m)
        fm = s[i_fm:i_z].reshape(m, m)
        z = s[i_z:]
        mat = eval_jacobian(system, t, y_ref if locked else y)
        return np.concatenate([
            eval_drift(system, t, y_ref),
            eval_drift(system, t, y) + h2 @ phi,
            -(mat.T @ phi),
            (mat @ h2 + h2 @ mat.T).ravel(),
            (mat @ fm).ravel(),
            mat @ z,
        ])

    times = time_grid(0.0, config.t_end, config.h)
    n_steps = len(times) - 1
    eye = np.eye(m)
    state = np.concatenate([config.y0, config.y0, config.phi0, config.h2_0.ravel(),
                            eye.ravel(), config.h2_0 @ config.phi0])

    sample_idx = list(range(0, n_steps, config.stride))
    if not sample_idx or sample_idx[-1] != n_steps:
        sample_idx.append(n_steps)
    sample_set = set(sample_idx)

    samples = np.empty((len(sample_idx), len(state)))
    sample_times = times[sample_idx]
    pos = 0
    for k in range(n_steps + 1):
        if k in sample_set:
            samples[pos] = state
            pos += 1
        if k == n_steps:
            break
        state = rk4_step(rhs, times[k], state, times[k + 1] - times[k])
        h2 = state[i_h2:i_fm].reshape(m, m)
        state[i_h2:i_fm] = ((h2 + h2.T) / 2.0).ravel()
        if not np.all(np.isfinite(state)):
            raise BlowUpError(times[k + 1])

    y_ref = samples[:, :m]
    y = samples[:, i_y:i_phi]
    phi = samples[:, i_phi:i_h2]
    h2_series = samples[:, i_h2:i_fm].reshape(-1, m, m)
    fm_series = samples[:, i_fm:i_z].reshape(-1, m, m)
    z = samples[:, i_z:]

    coupling = np.einsum("kij,kj->ki", h2_series, phi)
    epsilon = -config.c + 0.5 * np.einsum("ki,kij,kj->k", phi, h2_series, phi)
    record = TrajectoryRecord(
        config=config,
        times=sample_times,
        y=y,
        y_ref=y_ref,
        phi=phi,
        h2_fro=np.linalg.norm(h2_series.reshape(len(samples), -1), axis=1),
        coupling=coupling,
        coupling_norm=np.linalg.norm(coupling, axis=1),
        epsilon=epsilon,
        deviation=np.linalg.norm(y - y_ref, axis=1),
        coupling_ode=z,
        final_state=ContactState(float(sample_times[-1]), y[-1], phi[-1],
                                 h2_series[-1], fm_series[-1]),
    )
    return record


def _log_linear_fit(times: np.ndarray, values: np.ndarray, envelope: bool,
                    what: str) -> tuple[float, float, float, int]:
    """Slope/intercept/r^2/n of ln(values) vs times, optionally on strict local maxima."""
    if envelope:
        interior = np.arange(1, len(values) - 1)
        keep = interior[(values[interior] > values[interior - 1])
                        & (values[interior] > values[interior + 1])
                        & (values[interior] > 0)]
    else:
        keep = np.flatnonzero(values > 0)
        dropped = len(values) - len(keep)
        if dropped:
            warnings.warn(f"skipping {dropped} nonpositive {what} samples in fit window",
                          stacklevel=3)
    if len(keep) < MIN_FIT_POINTS:
        raise FitError(
            f"need at least {MIN_FIT_POINTS} usable {what} samples, got {len(keep)}")
    x = times[keep]
    logy = np.log(values[keep])
    slope, intercept = np.polyfit(x, logy, 1)
    resid = logy - (slope * x + intercept)
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0), len(keep)


def _window_slice(record: TrajectoryRecord, window: tuple[float, float]):
    lo, hi = window
    if not lo < hi:
        raise InputError(f"window must satisfy t_lo < t_hi, got ({lo}, {hi})")
    mask = (record.times >= lo) & (record.times <= hi)
    if not np.any(mask):
        raise FitError(f"no samples in window ({lo}, {hi})")
    return record.times[mask], mask


def fit_decay_rate(record: TrajectoryRecord, window: tuple[float, float] | None = None,
                   envelope: bool | None = None,
                   predicted_sigma: float | None = None) -> FitReport:
    """Fit ln||H2 phi|| vs t over the window; fitted_rate is the decay rate (-slope).

    Plain mode uses every positive sample; envelope mode restricts the
    regression to strict local maxima of the coupling norm.
    """
    window = window if window is not None else record.config.fit_window
    envelope = envelope if envelope is not None else record.config.envelope_fit
    t_w, mask = _window_slice(record, window)
    slope, intercept, r2, n = _log_linear_fit(
        t_w, record.coupling_norm[mask], envelope, "coupling")
    rel = None
    if predicted_sigma is not None and predicted_sigma != 0:
        rel = abs(-slope - predicted_sigma) / abs(predicted_sigma)
    return FitReport(fitted_rate=-slope, r_squared=r2, n_points=n,
                     method=METHOD_ENVELOPE if envelope else METHOD_PLAIN,
                     intercept=intercept, predicted_sigma=predicted_sigma,
                     relative_error=rel)


def locking_diagnostics(record: TrajectoryRecord, sigma: float,
                        window: tuple[float, float] | None = None,
                        envelope: bool | None = None) -> LockingDiagnostics:
    """Fit the exponents of |phi|, ||H2||, ||H2 phi|| and compare to (sigma, -2 sigma, -sigma).

    Also reports the range of the instantaneous slowest-decay rate of
    M(t, y_*) along the realized trajectory, so the frozen-coefficient
    prediction can be judged against the actually traversed spectrum.
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise InputError(f"sigma must be a positive rate, got {sigma}")
    window = window if window is not None else record.config.fit_window
    envelope = envelope if envelope is not None else record.config.envelope_fit
    t_w, mask = _window_slice(record, window)

    exponents = []
    for series, what in ((record.phi_norm, "fiber-norm"),
                         (record.h2_fro, "stiffness-norm"),
                         (record.coupling_norm, "coupling")):
        slope, _, _, _ = _log_linear_fit(t_w, series[mask], envelope, what)
        exponents.append(slope)

    expected = (sigma, -2.0 * sigma, -sigma)
    ratios = tuple(e / x for e, x in zip(exponents, expected))
    return LockingDiagnostics(
        sigma=sigma, window=tuple(window),
        method=METHOD_ENVELOPE if envelope else METHOD_PLAIN,
        exponents=tuple(exponents), expected=expected, ratios=ratios,
        spectral_range=_instantaneous_sigma_range(record))


def _instantaneous_sigma_range(record: TrajectoryRecord) -> tuple[float, float] | None:
    base = record.y_ref if record.config.mode == MODE_LOCKED else record.y
    n = len(record.times)
    idx = np.unique(np.linspace(0, n - 1, min(n, _SPECTRAL_RANGE_SAMPLES)).astype(int))
    sigmas = []
    for k in idx:
        rep = amplification_rate(eval_jacobian(record.config.system,
                                               float(record.times[k]), base[k]))
        if rep.sigma is not None:
            sigmas.append(rep.sigma)
    if not sigmas:
        return None
    return (min(sigmas), max(sigmas))


def constraint_drift(record: TrajectoryRecord) -> float:
    """Maximum |eps(t) - eps(0)| over the sampled run."""
    return float(np.max(np.abs(record.epsilon - record.epsilon[0])))
