"""Shared test oracles: central finite differences and relative error."""

import numpy as np


def finite_difference(f, x0: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Central-difference gradient of a scalar function of one array.

    ``f`` must rebuild its computation from scratch on every call (fresh
    tape); the quotient is accumulated in float64.
    """
    x = np.array(x0, dtype=np.float32)
    grad = np.zeros(x.shape, dtype=np.float64)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = float(f(x))
        flat[i] = orig - h
        fm = float(f(x))
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def max_rel_error(numeric: np.ndarray, analytic: np.ndarray) -> float:
    """Largest absolute deviation relative to the largest gradient entry."""
    numeric = np.asarray(numeric, dtype=np.float64)
    analytic = np.asarray(analytic, dtype=np.float64)
    scale = max(np.max(np.abs(numeric)), np.max(np.abs(analytic)), 1e-8)
    return float(np.max(np.abs(numeric - analytic)) / scale)
