"""Kirchhoff energy functionals and their Euler-Lagrange residuals.

Two problem kinds share one evaluator:

* Dirichlet: the state lives on a domain's interior (zero boundary values),
  the quadratic form is the Dirichlet energy over the closure, and the mass
  integrals run over the interior.
* whole-graph: the state lives on all vertices of a graph with potential h,
  the quadratic form is the h-Sobolev form, and mass integrals run over V.

With q(u) the squared kind norm, m2 = int u^2 dmu and m4 = int u^4 dmu:

    lambda_part(u) = a q(u)   - lambda m2(u)
    eta_part(u)    = b q(u)^2 - eta    m4(u)
    energy(u)      = lambda_part(u) / 2 + eta_part(u) / 4
    d_energy(u, v) = (a + b q(u)) B(u, v) - lambda <u, v> - eta <u^3, v>

where B is the bilinear form of the kind norm and <.,.> the mu-weighted mass
pairing.  The pointwise residual is the Riesz representation of d_energy
against that pairing, so "small gradient" and "small pointwise residual"
are the same statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidGraphError, ParameterRangeError
from .graphs import Domain, GraphFunction, WeightedGraph, domain_from_flags

__all__ = ["EnergyParams", "EnergyFunctional", "KIND_DIRICHLET", "KIND_WHOLE",
           "operator_matrix"]

KIND_DIRICHLET = "dirichlet"
KIND_WHOLE = "whole-graph"


@dataclass(frozen=True)
class EnergyParams:
    """Scalar coefficients and problem kind of the Kirchhoff equation."""

    a: float
    b: float
    lam: float
    eta: float
    kind: str = KIND_DIRICHLET

    def __post_init__(self):
        for name in ("a", "b", "lam", "eta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(float(value)):
                raise ParameterRangeError(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.a > 0.0:
            raise ParameterRangeError(f"a must be positive, got {self.a}")
        if self.b < 0.0:
            raise ParameterRangeError(f"b must be nonnegative, got {self.b}")
        if self.kind not in (KIND_DIRICHLET, KIND_WHOLE):
            raise ParameterRangeError(f"unknown problem kind {self.kind!r}")


def operator_matrix(graph: WeightedGraph, kind: str, domain: Domain | None = None):
    """Dense matrix of the kind's bilinear form on the admissible coordinates.

    Returns ``(A, mass, free)`` where ``free`` are the admissible vertex
    indices, ``A[i, j] = B(e_free[i], e_free[j])`` and ``mass`` is the
    mu vector restricted to ``free``.
    """
    n = graph.n
    full = np.zeros((n, n))
    s, d, w = graph.edge_src, graph.edge_dst, graph.edge_w
    np.add.at(full, (s, s), w)
    np.add.at(full, (d, d), w)
    np.add.at(full, (s, d), -w)
    np.add.at(full, (d, s), -w)
    if kind == KIND_WHOLE:
        if graph.h is None:
            raise InvalidGraphError("whole-graph kind requires a potential h")
        full[np.diag_indices(n)] += graph.mu * graph.h
        free = np.arange(n, dtype=np.int64)
    else:
        if domain is None:
            domain = domain_from_flags(graph)
        free = domain.interior
    A = full[np.ix_(free, free)]
    return A, graph.mu[free].copy(), free


class EnergyFunctional:
    """Evaluator for one (graph, params) problem instance."""

    def __init__(self, graph: WeightedGraph, params: EnergyParams,
                 domain: Domain | None = None):
        self.graph = graph
        self.params = params
        if params.kind == KIND_DIRICHLET:
            if domain is None:
                domain = domain_from_flags(graph)
            elif domain.graph is not graph:
                raise InvalidGraphError("domain belongs to a different graph")
            self.domain = domain
            self._mass_w = np.where(domain.interior_mask, graph.mu, 0.0)
            self._muh = None
            self.free = domain.interior
        else:
            if graph.h is None:
                raise InvalidGraphError("whole-graph kind requires a potential h")
            self.domain = None
            self._mass_w = graph.mu.copy()
            self._muh = graph.mu * graph.h
            self.free = np.arange(graph.n, dtype=np.int64)
        self._mass_w.setflags(write=False)
        self._matrix = None

    # -- plumbing ----------------------------------------------------------

    @property
    def kind(self):
        return self.params.kind

    def _vals(self, u, check=True):
        if isinstance(u, GraphFunction):
            if u.graph is not self.graph:
                raise InvalidGraphError("function belongs to a different graph")
            vals = u.values
        else:
            vals = np.ascontiguousarray(u, dtype=np.float64)
            if vals.shape != (self.graph.n,):
                raise InvalidGraphError(
                    f"expected {self.graph.n} values, got shape {vals.shape}")
        if check:
            self.check_admissible(vals)
        return vals

    def check_admissible(self, vals):
        """Dirichlet states must vanish exactly off the interior."""
        if self.domain is not None:
            off = ~self.domain.interior_mask
            if np.any(vals[off] != 0.0):
                raise ValueError("Dirichlet function has nonzero values off the interior")

    def embed(self, coords):
        """Full-length vector from admissible coordinates."""
        out = np.zeros(self.graph.n)
        out[self.free] = coords
        return out

    def restrict(self, vals):
        return np.asarray(vals, dtype=np.float64)[self.free]

    def operator_matrix(self):
        """Dense bilinear-form matrix on admissible coordinates (cached)."""
        if self._matrix is None:
            A, mass, _ = operator_matrix(self.graph, self.kind, self.domain)
            self._matrix = (A, mass)
        return self._matrix

    # -- quadratic machinery -------------------------------------------------

    def bilinear(self, uvals, vvals):
        """B(u, v): Dirichlet energy pairing, plus the h mass term for whole-graph."""
        g = self.graph
        out = _kernels.edge_pairing(g.edge_src, g.edge_dst, g.edge_w, uvals, vvals)
        if self._muh is not None:
            out += _kernels.mass_dot(self._muh, uvals, vvals)
        return out

    def quad(self, uvals):
        """Squared kind norm q(u) = B(u, u)."""
        return self.bilinear(uvals, uvals)

    def norm(self, u):
        return math.sqrt(max(self.quad(self._vals(u)), 0.0))

    def mass2(self, uvals):
        return _kernels.mass_pow(self._mass_w, uvals, 2)

    def mass4(self, uvals):
        return _kernels.mass_pow(self._mass_w, uvals, 4)

    # -- the functional ------------------------------------------------------

    def lambda_part(self, u) -> float:
        """a q(u) - lambda int u^2 dmu (the degree-2 split)."""
        vals = self._vals(u)
        return self.params.a * self.quad(vals) - self.params.lam * self.mass2(vals)

    def eta_part(self, u) -> float:
        """b q(u)^2 - eta int u^4 dmu (the degree-4 split)."""
        vals = self._vals(u)
        q = self.quad(vals)
        return self.params.b * q * q - self.params.eta * self.mass4(vals)

    def splits(self, u):
        """(lambda_part, eta_part) sharing one quadratic-form evaluation."""
        vals = self._vals(u)
        q = self.quad(vals)
        lam_part = self.params.a * q - self.params.lam * self.mass2(vals)
        eta_part = self.params.b * q * q - self.params.eta * self.mass4(vals)
        return lam_part, eta_part

    def energy(self, u) -> float:
        """Value of the energy functional, computed as half/quarter of the splits."""
        lam_part, eta_part = self.splits(u)
        return 0.5 * lam_part + 0.25 * eta_part

    def d_energy(self, u, v) -> float:
        """Directional derivative of the energy at u against v."""
        uvals = self._vals(u)
        vvals = self._vals(v)
        p = self.params
        q = self.quad(uvals)
        out = (p.a + p.b * q) * self.bilinear(uvals, vvals)
        out -= p.lam * _kernels.mass_dot(self._mass_w, uvals, vvals)
        out -= p.eta * _kernels.mass_cubic_dot(self._mass_w, uvals, vvals)
        return out

    def _gradient_values(self, uvals):
        g = self.graph
        p = self.params
        q = self.quad(uvals)
        stiff = _kernels.stiffness_apply(g.edge_src, g.edge_dst, g.edge_w, uvals)
        coeff = p.a + p.b * q
        if self.kind == KIND_WHOLE:
            out = coeff * (stiff / g.mu + g.h * uvals)
            out -= p.lam * uvals
            out -= p.eta * uvals ** 3
            return out
        out = np.zeros(g.n)
        ii = self.free
        out[ii] = coeff * (stiff[ii] / g.mu[ii]) - p.lam * uvals[ii] - p.eta * uvals[ii] ** 3
        return out

    def gradient(self, u):
        """Riesz representation of d_energy against the mu-weighted pairing.

        Satisfies ``d_energy(u, v) == sum mu * gradient(u) * v`` for every
        admissible v; supported on the interior for the Dirichlet kind.
        """
        uvals = self._vals(u)
        out = self._gradient_values(uvals)
        if isinstance(u, GraphFunction):
            return GraphFunction(self.graph, out)
        return out

    def residual(self, u):
        """Pointwise Euler-Lagrange residual of the equation at u.

        Dirichlet: -(a + b q) Lap u - lambda u - eta u^3 on the interior and 0
        elsewhere.  Whole-graph: (a + b q)(-Lap u + h u) - lambda u - eta u^3.
        Identical to :meth:`gradient` by construction.
        """
        return self.gradient(u)

    def max_residual(self, u) -> float:
        vals = self._vals(u)
        return float(np.max(np.abs(self._gradient_values(vals)))) if self.graph.n else 0.0
