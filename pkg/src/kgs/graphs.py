"""Finite weighted graphs and their discrete differential calculus.

A :class:`WeightedGraph` is a connected-or-not finite graph with strictly
positive symmetric edge weights ``w``, a strictly positive vertex measure
``mu``, an optional strictly positive potential ``h`` and optional boundary
flags.  Functions on the graph are real vectors indexed by vertex.  The
calculus follows the usual graph conventions:

* Laplacian        ``(Lu)(x)  = (1/mu(x)) * sum_{y~x} w_xy (u(y) - u(x))``
* gradient form    ``G(u,v)(x) = (1/2mu(x)) * sum_{y~x} w_xy (u(y)-u(x))(v(y)-v(x))``
* integral         ``int_S u dmu = sum_{x in S} mu(x) u(x)``

Edges are stored once (canonical ``src < dst``) and iterated symmetrically,
so discrete Green identities hold to rounding.  Scalar reductions accumulate
pairwise (through ``np.sum`` or the compiled equivalent).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    GraphFormatError,
    GraphMismatchError,
    InvalidGraphError,
)

__all__ = [
    "WeightedGraph",
    "GraphData",
    "GraphFunction",
    "Domain",
    "Violation",
    "ValidationReport",
    "parse_graph_payload",
    "graph_from_payload",
    "load_graph",
    "validate",
    "boundary_of",
    "domain_from_flags",
    "laplacian",
    "gradient_form",
    "gradient_length",
    "integrate",
    "norm_dirichlet",
    "norm_lp",
    "norm_sup",
    "norm_h_sobolev",
]


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

@dataclass
class GraphData:
    """Parsed but not yet canonicalized graph payload.

    ``edges`` keeps the pairs exactly as given (by vertex index), so
    validation can still see duplicates and asymmetric entries.
    """

    ids: list
    mu: np.ndarray
    h: np.ndarray | None
    boundary: np.ndarray | None
    edges: list  # (i, j, w) triples in file order


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of structural validation; never raised, always returned."""

    violations: tuple
    mu0: float | None
    h0: float | None
    connected: bool | None

    @property
    def ok(self):
        return not self.violations

    def codes(self):
        return [v.code for v in self.violations]


def _as_finite_float(value, what):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise GraphFormatError(f"{what} is not a number: {value!r}")
    if not math.isfinite(x):
        raise GraphFormatError(f"{what} is not finite: {value!r}")
    return x


def parse_graph_payload(obj) -> GraphData:
    """Parse the JSON graph payload into :class:`GraphData`.

    Raises :class:`GraphFormatError` for structural problems (missing keys,
    unknown vertex references, non-finite numbers, ``h`` on only some
    vertices).  Semantic problems such as nonpositive weights are left for
    :func:`validate`.
    """
    if not isinstance(obj, dict):
        raise GraphFormatError("graph payload must be a JSON object")
    if "vertices" not in obj or "edges" not in obj:
        raise GraphFormatError("graph payload needs 'vertices' and 'edges'")
    vspecs = obj["vertices"]
    especs = obj["edges"]
    if not isinstance(vspecs, list) or not isinstance(especs, list):
        raise GraphFormatError("'vertices' and 'edges' must be arrays")
    if not vspecs:
        raise GraphFormatError("graph has no vertices")

    ids = []
    index = {}
    mu = []
    h = []
    h_count = 0
    boundary = []
    boundary_given = False
    for k, spec in enumerate(vspecs):
        if not isinstance(spec, dict) or "id" not in spec:
            raise GraphFormatError(f"vertex #{k} needs an 'id'")
        vid = spec["id"]
        if not isinstance(vid, (str, int)) or isinstance(vid, bool):
            raise GraphFormatError(f"vertex id must be string or int: {vid!r}")
        if vid in index:
            raise GraphFormatError(f"duplicate vertex id {vid!r}")
        index[vid] = len(ids)
        ids.append(vid)
        mu.append(_as_finite_float(spec.get("mu", 1.0), f"mu of vertex {vid!r}"))
        if "h" in spec:
            h.append(_as_finite_float(spec["h"], f"h of vertex {vid!r}"))
            h_count += 1
        else:
            h.append(0.0)
        flag = spec.get("boundary", None)
        if flag is not None:
            if not isinstance(flag, bool):
                raise GraphFormatError(f"boundary flag of vertex {vid!r} must be a bool")
            boundary_given = True
        boundary.append(bool(flag))

    if h_count not in (0, len(ids)):
        raise GraphFormatError("'h' must be present on all vertices or none")

    edges = []
    for k, spec in enumerate(especs):
        if not isinstance(spec, dict) or not {"a", "b", "w"} <= set(spec):
            raise GraphFormatError(f"edge #{k} needs 'a', 'b' and 'w'")
        for end in ("a", "b"):
            if spec[end] not in index:
                raise GraphFormatError(f"edge #{k} references unknown vertex {spec[end]!r}")
        w = _as_finite_float(spec["w"], f"weight of edge #{k}")
        edges.append((index[spec["a"]], index[spec["b"]], w))

    return GraphData(
        ids=ids,
        mu=np.asarray(mu, dtype=np.float64),
        h=np.asarray(h, dtype=np.float64) if h_count else None,
        boundary=np.asarray(boundary, dtype=bool) if boundary_given else None,
        edges=edges,
    )


def _adjacency_from_pairs(n, pairs):
    """CSR adjacency (indptr, indices) from (i, j) pairs, both directions."""
    if not pairs:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
    a = np.asarray([p[0] for p in pairs], dtype=np.int64)
    b = np.asarray([p[1] for p in pairs], dtype=np.int64)
    heads = np.concatenate([a, b])
    tails = np.concatenate([b, a])
    order = np.argsort(heads, kind="stable")
    indices = tails[order]
    counts = np.bincount(heads, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def _is_connected(n, indptr, indices):
    if n == 0:
        return True
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        x = stack.pop()
        for y in indices[indptr[x]:indptr[x + 1]]:
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(int(y))
    return count == n


_HARD_CODES = (
    "weight symmetry",
    "weight positivity",
    "measure positivity",
    "potential positivity",
    "duplicate edge",
    "self loop",
    "boundary consistency",
)


def _validate_data(data: GraphData) -> ValidationReport:
    violations = []
    n = len(data.ids)

    seen = {}
    for (i, j, w) in data.edges:
        if i == j:
            violations.append(Violation("self loop", f"edge {data.ids[i]!r}-{data.ids[j]!r} is a self loop"))
            continue
        key = (min(i, j), max(i, j))
        if key in seen:
            if seen[key] != w:
                violations.append(Violation(
                    "weight symmetry",
                    f"edge {data.ids[key[0]]!r}-{data.ids[key[1]]!r} stored twice with weights {seen[key]} and {w}"))
            else:
                violations.append(Violation(
                    "duplicate edge",
                    f"edge {data.ids[key[0]]!r}-{data.ids[key[1]]!r} appears more than once"))
        else:
            seen[key] = w
        if not (w > 0.0):
            violations.append(Violation(
                "weight positivity",
                f"edge {data.ids[i]!r}-{data.ids[j]!r} has nonpositive weight {w}"))

    mu0 = float(np.min(data.mu)) if n else None
    if mu0 is not None and not (mu0 > 0.0):
        bad = data.ids[int(np.argmin(data.mu))]
        violations.append(Violation("measure positivity", f"mu({bad!r}) = {mu0} is not positive"))

    h0 = None
    if data.h is not None:
        h0 = float(np.min(data.h))
        if not (h0 > 0.0):
            bad = data.ids[int(np.argmin(data.h))]
            violations.append(Violation("potential positivity", f"h({bad!r}) = {h0} is not positive"))

    indptr, indices = _adjacency_from_pairs(n, [(i, j) for (i, j, _) in data.edges if i != j])
    connected = _is_connected(n, indptr, indices)
    if not connected:
        violations.append(Violation("connectivity", "graph is not connected"))

    if data.boundary is not None:
        interior = ~data.boundary
        if not interior.any():
            violations.append(Violation("boundary consistency", "no interior vertex (all flagged boundary)"))
        for x in np.flatnonzero(data.boundary):
            nbrs = indices[indptr[x]:indptr[x + 1]]
            if not interior[nbrs].any():
                violations.append(Violation(
                    "boundary consistency",
                    f"boundary vertex {data.ids[int(x)]!r} has no interior neighbor"))

    return ValidationReport(tuple(violations), mu0, h0, connected)


# ---------------------------------------------------------------------------
# The graph itself
# ---------------------------------------------------------------------------

class WeightedGraph:
    """Immutable finite weighted graph with canonical undirected edges."""

    __slots__ = (
        "ids", "index", "n", "mu", "h", "boundary", "edge_src", "edge_dst",
        "edge_w", "connected", "mu0", "h0", "_indptr", "_indices",
    )

    def __init__(self, data: GraphData):
        report = _validate_data(data)
        hard = [v for v in report.violations if v.code in _HARD_CODES]
        if hard:
            raise InvalidGraphError(
                "graph violates structural invariants: " + "; ".join(map(str, hard)),
                violations=hard)

        self.ids = tuple(data.ids)
        self.index = {vid: i for i, vid in enumerate(data.ids)}
        self.n = len(data.ids)
        self.mu = np.array(data.mu, dtype=np.float64)
        self.h = None if data.h is None else np.array(data.h, dtype=np.float64)
        self.boundary = None if data.boundary is None else np.array(data.boundary, dtype=bool)

        pairs = sorted((min(i, j), max(i, j), w) for (i, j, w) in data.edges)
        self.edge_src = np.asarray([p[0] for p in pairs], dtype=np.int64)
        self.edge_dst = np.asarray([p[1] for p in pairs], dtype=np.int64)
        self.edge_w = np.asarray([p[2] for p in pairs], dtype=np.float64)

        self._indptr, self._indices = _adjacency_from_pairs(
            self.n, list(zip(self.edge_src, self.edge_dst)))
        self.connected = report.connected
        self.mu0 = report.mu0
        self.h0 = report.h0

        for arr in (self.mu, self.h, self.boundary, self.edge_src,
                    self.edge_dst, self.edge_w, self._indptr, self._indices):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def m(self):
        return self.edge_src.shape[0]

    def neighbors(self, x):
        return self._indices[self._indptr[x]:self._indptr[x + 1]]

    def has_potential(self):
        return self.h is not None

    def has_boundary_flags(self):
        return self.boundary is not None

    def to_payload(self):
        """Inverse of :func:`parse_graph_payload` (canonical edge order)."""
        vertices = []
        for i, vid in enumerate(self.ids):
            spec = {"id": vid, "mu": float(self.mu[i])}
            if self.h is not None:
                spec["h"] = float(self.h[i])
            if self.boundary is not None:
                spec["boundary"] = bool(self.boundary[i])
            vertices.append(spec)
        edges = [
            {"a": self.ids[int(s)], "b": self.ids[int(d)], "w": float(w)}
            for s, d, w in zip(self.edge_src, self.edge_dst, self.edge_w)
        ]
        return {"vertices": vertices, "edges": edges}

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m}, connected={self.connected})"


def graph_from_payload(obj) -> WeightedGraph:
    return WeightedGraph(parse_graph_payload(obj))


def load_graph(path) -> WeightedGraph:
    """Load a graph from a JSON file (see the file format in the README)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"not valid JSON: {exc}") from exc
    return graph_from_payload(obj)


def validate(graph_or_data) -> ValidationReport:
    """Check every structural invariant; reports violations, never raises."""
    if isinstance(graph_or_data, WeightedGraph):
        g = graph_or_data
        data = GraphData(
            ids=list(g.ids), mu=g.mu, h=g.h, boundary=g.boundary,
            edges=list(zip(g.edge_src.tolist(), g.edge_dst.tolist(), g.edge_w.tolist())),
        )
        return _validate_data(data)
    if isinstance(graph_or_data, GraphData):
        return _validate_data(graph_or_data)
    return _validate_data(parse_graph_payload(graph_or_data))


# ---------------------------------------------------------------------------
# Domains and functions
# ---------------------------------------------------------------------------

class Domain:
    """An interior vertex set together with its boundary inside a graph."""

    __slots__ = ("graph", "interior", "boundary", "closure",
                 "interior_mask", "boundary_mask", "closure_mask")

    def __init__(self, graph: WeightedGraph, interior, boundary):
        interior = np.unique(np.asarray(interior, dtype=np.int64))
        boundary = np.unique(np.asarray(boundary, dtype=np.int64))
        if interior.size == 0:
            raise InvalidGraphError("domain interior is empty")
        for arr, what in ((interior, "interior"), (boundary, "boundary")):
            if arr.size and (arr.min() < 0 or arr.max() >= graph.n):
                raise GraphMismatchError(f"{what} contains unknown vertex index")
        if np.intersect1d(interior, boundary).size:
            raise InvalidGraphError("interior and boundary intersect")
        self.graph = graph
        self.interior = interior
        self.boundary = boundary
        self.closure = np.union1d(interior, boundary)
        self.interior_mask = np.zeros(graph.n, dtype=bool)
        self.interior_mask[interior] = True
        self.boundary_mask = np.zeros(graph.n, dtype=bool)
        self.boundary_mask[boundary] = True
        self.closure_mask = self.interior_mask | self.boundary_mask
        for arr in (self.interior, self.boundary, self.closure,
                    self.interior_mask, self.boundary_mask, self.closure_mask):
            arr.setflags(write=False)

    def __repr__(self):
        return f"Domain(|interior|={self.interior.size}, |boundary|={self.boundary.size})"


def boundary_of(graph: WeightedGraph, interior) -> Domain:
    """Domain whose boundary is every outside vertex adjacent to the interior."""
    interior = np.unique(np.asarray(interior, dtype=np.int64))
    if interior.size == 0:
        raise InvalidGraphError("interior must be nonempty")
    if interior.min() < 0 or interior.max() >= graph.n:
        raise GraphMismatchError("interior contains unknown vertex index")
    inmask = np.zeros(graph.n, dtype=bool)
    inmask[interior] = True
    touched = np.zeros(graph.n, dtype=bool)
    for x in interior:
        touched[graph.neighbors(int(x))] = True
    boundary = np.flatnonzero(touched & ~inmask)
    return Domain(graph, interior, boundary)


def domain_from_flags(graph: WeightedGraph) -> Domain:
    """Domain read off the graph's boundary flags (interior = unflagged)."""
    if graph.boundary is None:
        raise InvalidGraphError("graph carries no boundary flags")
    return Domain(graph, np.flatnonzero(~graph.boundary), np.flatnonzero(graph.boundary))


class GraphFunction:
    """A real value per vertex of a fixed graph."""

    __slots__ = ("graph", "values")

    def __init__(self, graph: WeightedGraph, values):
        values = np.array(values, dtype=np.float64)
        if values.shape != (graph.n,):
            raise GraphMismatchError(
                f"function has {values.shape} values for a graph with {graph.n} vertices")
        if not np.all(np.isfinite(values)):
            raise ValueError("function values must be finite")
        values.setflags(write=False)
        self.graph = graph
        self.values = values

    @classmethod
    def zeros(cls, graph):
        return cls(graph, np.zeros(graph.n))

    @classmethod
    def from_mapping(cls, graph, mapping, default=0.0):
        vals = np.full(graph.n, float(default))
        for vid, val in mapping.items():
            if vid not in graph.index:
                raise GraphMismatchError(f"unknown vertex id {vid!r}")
            vals[graph.index[vid]] = float(val)
        return cls(graph, vals)

    def __add__(self, other):
        self._check_same(other)
        return GraphFunction(self.graph, self.values + other.values)

    def __sub__(self, other):
        self._check_same(other)
        return GraphFunction(self.graph, self.values - other.values)

    def __mul__(self, scalar):
        return GraphFunction(self.graph, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return GraphFunction(self.graph, -self.values)

    def _check_same(self, other):
        if not isinstance(other, GraphFunction) or other.graph is not self.graph:
            raise GraphMismatchError("functions live on different graphs")

    def __repr__(self):
        return f"GraphFunction({self.values!r})"


def _values_on(graph, u):
    if isinstance(u, GraphFunction):
        if u.graph is not graph:
            raise GraphMismatchError("function belongs to a different graph")
        return u.values
    vals = np.ascontiguousarray(u, dtype=np.float64)
    if vals.shape != (graph.n,):
        raise GraphMismatchError(
            f"expected {graph.n} values, got array of shape {vals.shape}")
    return vals


def _wrap_like(graph, template, values):
    if isinstance(template, GraphFunction):
        return GraphFunction(graph, values)
    return values


def _subset_indices(graph, subset):
    if isinstance(subset, Domain):
        raise TypeError("pass Domain.interior / .boundary / .closure, not the Domain")
    idx = np.unique(np.asarray(list(subset) if not isinstance(subset, np.ndarray) else subset,
                               dtype=np.int64))
    if idx.size and (idx.min() < 0 or idx.max() >= graph.n):
        raise GraphMismatchError("subset contains unknown vertex index")
    return idx


# ---------------------------------------------------------------------------
# Calculus
# ---------------------------------------------------------------------------

def laplacian(graph: WeightedGraph, u):
    """Weighted graph Laplacian of ``u`` (isolated vertices get 0)."""
    vals = _values_on(graph, u)
    out = _kernels.laplacian(graph.edge_src, graph.edge_dst, graph.edge_w, graph.mu, vals)
    return _wrap_like(graph, u, out)


def gradient_form(graph: WeightedGraph, u, v):
    """Pointwise gradient form of ``u`` and ``v`` (carre du champ)."""
    uvals = _values_on(graph, u)
    vvals = _values_on(graph, v)
    out = _kernels.gradient_form(graph.edge_src, graph.edge_dst, graph.edge_w,
                                 graph.mu, uvals, vvals)
    return _wrap_like(graph, u, out)


def gradient_length(graph: WeightedGraph, u):
    """Pointwise gradient length ``sqrt(gradient_form(u, u))``."""
    vals = _values_on(graph, u)
    g = _kernels.gradient_form(graph.edge_src, graph.edge_dst, graph.edge_w,
                               graph.mu, vals, vals)
    np.maximum(g, 0.0, out=g)  # clip -0.0 / rounding dust before the sqrt
    out = np.sqrt(g)
    return _wrap_like(graph, u, out)


def integrate(graph: WeightedGraph, subset, u) -> float:
    """mu-weighted sum of ``u`` over the vertex subset."""
    idx = _subset_indices(graph, subset)
    vals = _values_on(graph, u)
    return float(np.sum(graph.mu[idx] * vals[idx]))


def _require_admissible(domain: Domain, vals):
    off = ~domain.interior_mask
    if np.any(vals[off] != 0.0):
        bad = int(np.flatnonzero((vals != 0.0) & off)[0])
        raise ValueError(
            f"function must vanish outside the interior; nonzero at vertex index {bad}")


def norm_dirichlet(graph: WeightedGraph, domain: Domain, u) -> float:
    """Dirichlet energy norm: L2(mu) norm of the gradient length over the closure.

    Requires ``u`` to vanish on the boundary and outside the closure.
    """
    if domain.graph is not graph:
        raise GraphMismatchError("domain belongs to a different graph")
    vals = _values_on(graph, u)
    _require_admissible(domain, vals)
    q = _kernels.edge_pairing_masked(
        graph.edge_src, graph.edge_dst, graph.edge_w, vals, vals,
        domain.closure_mask.astype(np.float64))
    return math.sqrt(max(q, 0.0))


def norm_lp(graph: WeightedGraph, subset, u, p: float) -> float:
    """(int_S |u|^p dmu)^(1/p) for finite p >= 1."""
    if not (p >= 1.0) or math.isinf(p):
        raise ValueError(f"p must satisfy 1 <= p < inf, got {p}")
    idx = _subset_indices(graph, subset)
    vals = _values_on(graph, u)
    total = float(np.sum(graph.mu[idx] * np.abs(vals[idx]) ** p))
    return total ** (1.0 / p)


def norm_sup(graph: WeightedGraph, subset, u) -> float:
    """max over the subset of |u|."""
    idx = _subset_indices(graph, subset)
    if idx.size == 0:
        return 0.0
    vals = _values_on(graph, u)
    return float(np.max(np.abs(vals[idx])))


def norm_h_sobolev(graph: WeightedGraph, u) -> float:
    """Potential-weighted Sobolev norm: (int_V |grad u|^2 + h u^2 dmu)^(1/2)."""
    if graph.h is None:
        raise InvalidGraphError("graph carries no potential h")
    vals = _values_on(graph, u)
    q = _kernels.edge_pairing(graph.edge_src, graph.edge_dst, graph.edge_w, vals, vals)
    q += _kernels.mass_dot(graph.mu * graph.h, vals, vals)
    return math.sqrt(max(q, 0.0))
