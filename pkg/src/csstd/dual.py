"""The smoothed-ReLU / binary-entropy conjugate pair and the regularized sigmoid.

``lse`` is the entropic smoothing of max(o, 0); ``binary_entropy`` is its
convex conjugate restricted to [0, 1]; ``regularized_sigmoid`` is the
closed-form minimizer of the entropic data term plus a linear coupling.
All functions broadcast over arrays and are overflow-safe for small
epsilon (exponents of magnitude in the hundreds occur at epsilon = 0.05).
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

_CLAMP = 1e-12


def lse(o, epsilon: float):
    """epsilon * ln(exp(o/epsilon) + 1), evaluated without overflow."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    o = np.asarray(o, dtype=float)
    out = epsilon * np.logaddexp(o / epsilon, 0.0)
    return out if out.ndim else float(out)


def binary_entropy(u, epsilon: float):
    """epsilon * (u ln u + (1-u) ln(1-u)) with 0 ln 0 = 0.

    Exactly 0 at u in {0, 1}; +inf outside [0, 1] (the extended value of
    the conjugate). Interior evaluation clamps u to [1e-12, 1 - 1e-12]
    before taking logs to stay finite in floating point.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    u = np.asarray(u, dtype=float)
    uc = np.clip(u, _CLAMP, 1.0 - _CLAMP)
    h = epsilon * (uc * np.log(uc) + (1.0 - uc) * np.log(1.0 - uc))
    h = np.where((u == 0.0) | (u == 1.0), 0.0, h)
    h = np.where((u < 0.0) | (u > 1.0), np.inf, h)
    return h if h.ndim else float(h)


def regularized_sigmoid(o, p, lam: float, epsilon: float) -> np.ndarray:
    """Pointwise 1 / (1 + exp(-(o - lam*p)/epsilon)).

    This is the exact unconstrained minimizer of
    ``data_energy(u) + lam * <p, u>``; with lam = 0 and epsilon = 1 it
    reduces to the classic sigmoid of ``o``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    o = np.asarray(o, dtype=float)
    p = np.asarray(p, dtype=float)
    if o.shape != p.shape:
        raise ValueError(f"shape mismatch: o {o.shape} vs p {p.shape}")
    return expit((o - lam * p) / epsilon)


def data_energy(u, o, epsilon: float) -> float:
    """sum_x [-o(x) u(x) + binary_entropy(u(x), epsilon)] over the grid."""
    u = np.asarray(u, dtype=float)
    o = np.asarray(o, dtype=float)
    if u.shape != o.shape:
        raise ValueError(f"shape mismatch: u {u.shape} vs o {o.shape}")
    return float(np.sum(-o * u) + np.sum(binary_entropy(u, epsilon)))
