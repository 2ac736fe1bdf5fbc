"""Pure numpy implementation of the edge/vertex kernels.

Mirrors the compiled backend in ``_ckern.pyx``.  Scalar reductions go
through ``np.sum`` so accumulation is pairwise, matching the compiled
backend's pairwise reduction.
"""

import numpy as np

__all__ = [
    "laplacian",
    "gradient_form",
    "stiffness_apply",
    "edge_pairing",
    "edge_pairing_masked",
    "mass_dot",
    "mass_pow",
    "mass_cubic_dot",
]


def laplacian(src, dst, w, mu, u):
    """Per-vertex (1/mu) sum of w * (u[neighbor] - u[vertex])."""
    t = w * (u[dst] - u[src])
    n = mu.shape[0]
    out = np.bincount(src, weights=t, minlength=n)
    out -= np.bincount(dst, weights=t, minlength=n)
    out /= mu
    return out


def gradient_form(src, dst, w, mu, u, v):
    """Per-vertex (1/2mu) sum of w * (u diff) * (v diff)."""
    t = w * (u[dst] - u[src]) * (v[dst] - v[src])
    n = mu.shape[0]
    out = np.bincount(src, weights=t, minlength=n)
    out += np.bincount(dst, weights=t, minlength=n)
    out *= 0.5
    out /= mu
    return out


def stiffness_apply(src, dst, w, u):
    """Per-vertex sum of w * (u[vertex] - u[neighbor]); equals -mu * laplacian."""
    t = w * (u[src] - u[dst])
    n = u.shape[0]
    out = np.bincount(src, weights=t, minlength=n)
    out -= np.bincount(dst, weights=t, minlength=n)
    return out


def edge_pairing(src, dst, w, u, v):
    """Sum over undirected edges of w * (u diff) * (v diff)."""
    return float(np.sum(w * (u[dst] - u[src]) * (v[dst] - v[src])))


def edge_pairing_masked(src, dst, w, u, v, factor):
    """Edge pairing where each edge counts (factor[s] + factor[d]) / 2."""
    t = w * (u[dst] - u[src]) * (v[dst] - v[src])
    t *= 0.5 * (factor[src] + factor[dst])
    return float(np.sum(t))


def mass_dot(w, x, y):
    """Sum of w * x * y."""
    return float(np.sum(w * x * y))


def mass_pow(w, x, p):
    """Sum of w * x**p for small integer p."""
    return float(np.sum(w * x ** p))


def mass_cubic_dot(w, x, y):
    """Sum of w * x**3 * y."""
    return float(np.sum(w * x ** 3 * y))
