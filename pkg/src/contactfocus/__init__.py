"""Truncated contact dynamics for dissipative systems.

Simulates the coupled macroscopic/fiber/stiffness flow, fits the exponential
locking rates against the drift-Jacobian spectrum, and symbolically verifies
the order-by-order closure residuals of polynomial contact potentials.
"""

__version__ = "0.1.0"

from .closure import (ContactPotential, ResidualReport, harmonic_case,
                      linear_const_k_case, load_case, order_residual, verify_closure)
from .contact import (ContactConfig, ContactState, FitReport, LockingDiagnostics,
                      TrajectoryRecord, constraint_drift, fit_decay_rate,
                      locking_diagnostics, run_focusing)
from .drift import (DriftSystem, DuffingParams, duffing, eval_drift, eval_jacobian,
                    fd_jacobian, harmonic, linear, scalar_decay)
from .errors import BlowUpError, FitError, InputError, UnsupportedDimensionError
from .geometry import compensator, projected_jacobian, projector
from .poly import Poly, discriminant, euler, phi_parts, poisson
from .spectral import SpectralReport, amplification_rate, duffing_regime, eigenvalues
from .transport import (FundamentalMatrix, Path, h2_closed_form, h2_direct,
                        h2_projected, integrate_characteristic, integrate_variational,
                        liouville_residual, rk4_step, time_grid)

__all__ = [
    "__version__",
    "BlowUpError", "FitError", "InputError", "UnsupportedDimensionError",
    "DriftSystem", "DuffingParams", "duffing", "linear", "harmonic", "scalar_decay",
    "eval_drift", "eval_jacobian", "fd_jacobian",
    "SpectralReport", "eigenvalues", "amplification_rate", "duffing_regime",
    "projector", "projected_jacobian", "compensator",
    "Path", "FundamentalMatrix", "time_grid", "rk4_step",
    "integrate_characteristic", "integrate_variational",
    "h2_closed_form", "h2_direct", "h2_projected", "liouville_residual",
    "ContactConfig", "ContactState", "TrajectoryRecord", "FitReport",
    "LockingDiagnostics", "run_focusing", "fit_decay_rate", "locking_diagnostics",
    "constraint_drift",
    "Poly", "poisson", "euler", "phi_parts", "discriminant",
    "ContactPotential", "ResidualReport", "order_residual", "verify_closure",
    "harmonic_case", "linear_const_k_case", "load_case",
]
