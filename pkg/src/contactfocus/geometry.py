"""Degeneracy projector and the operators of projected stiffness transport.

Used on the conservative side of the theory, where the stiffness tensor must
stay singular transverse to the level sets of the conserved quantity.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError

# Below this gradient norm the projector degenerates to the identity.
DEFAULT_GRADIENT_TOL = 1e-12


def projector(gradient, tol: float = DEFAULT_GRADIENT_TOL) -> np.ndarray:
    """Orthogonal projector onto the complement of ``gradient``.

    Returns the identity when |gradient| <= tol (the dissipative branch),
    otherwise I - g g^T / |g|^2.
    """
    if tol <= 0:
        raise InputError(f"tolerance must be positive, got {tol}")
    g = np.asarray(gradient, dtype=float)
    if g.ndim != 1:
        raise InputError(f"gradient must be a vector, got shape {g.shape}")
    norm2 = float(g @ g)
    if math.sqrt(norm2) <= tol:
        return np.eye(len(g))
    return np.eye(len(g)) - np.outer(g, g) / norm2


def projected_jacobian(jacobian, proj) -> np.ndarray:
    """P M P, the Jacobian restricted to the degeneracy-compliant subspace."""
    m_mat = np.asarray(jacobian, dtype=float)
    p_mat = np.asarray(proj, dtype=float)
    if m_mat.shape != p_mat.shape or m_mat.ndim != 2:
        raise InputError(f"shape mismatch: jacobian {m_mat.shape}, projector {p_mat.shape}")
    return p_mat @ m_mat @ p_mat


def compensator(h2, jacobian, proj) -> np.ndarray:
    """Rotational correction H2 M^T (I-P) + (I-P) M H2 tracking the constraint direction.

    Symmetric, rank at most 2; identically zero when P = I.
    """
    h2_mat = np.asarray(h2, dtype=float)
    m_mat = np.asarray(jacobian, dtype=float)
    p_mat = np.asarray(proj, dtype=float)
    if not (h2_mat.shape == m_mat.shape == p_mat.shape) or h2_mat.ndim != 2:
        raise InputError(
            f"shape mismatch: h2 {h2_mat.shape}, jacobian {m_mat.shape}, projector {p_mat.shape}")
    q_mat = np.eye(h2_mat.shape[0]) - p_mat
    delta = h2_mat @ m_mat.T @ q_mat + q_mat @ m_mat @ h2_mat
    return (delta + delta.T) / 2.0
