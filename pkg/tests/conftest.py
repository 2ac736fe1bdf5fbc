"""Shared helpers: seeded random graph/function generators."""

import numpy as np
import pytest

from kgs import domain_from_flags, graph_from_payload


def random_graph_payload(rng, n, with_h=False, with_boundary=False):
    """Connected random graph payload: tree plus extra edges, random mu/w."""
    vertices = []
    for i in range(n):
        spec = {"id": int(i), "mu": float(rng.uniform(0.5, 2.0))}
        if with_h:
            spec["h"] = float(rng.uniform(0.5, 3.0))
        vertices.append(spec)

    pairs = set()
    edges = []

    def add_edge(i, j):
        key = (min(i, j), max(i, j))
        if i == j or key in pairs:
            return False
        pairs.add(key)
        edges.append({"a": key[0], "b": key[1], "w": float(rng.uniform(0.05, 2.0))})
        return True

    for i in range(1, n):
        add_edge(int(rng.integers(0, i)), i)
    for _ in range(n):
        add_edge(int(rng.integers(0, n)), int(rng.integers(0, n)))

    if with_boundary:
        k = int(rng.integers(1, n))  # interior size, at least 1, at most n-1
        perm = rng.permutation(n)
        interior = set(int(x) for x in perm[:k])
        for spec in vertices:
            spec["boundary"] = spec["id"] not in interior
        adjacency = {i: set() for i in range(n)}
        for (i, j) in pairs:
            adjacency[i].add(j)
            adjacency[j].add(i)
        for b in range(n):
            if b in interior:
                continue
            if not (adjacency[b] & interior):
                target = int(rng.choice(sorted(interior)))
                add_edge(b, target)
    return {"vertices": vertices, "edges": edges}


def random_graph(rng, n, with_h=False, with_boundary=False):
    return graph_from_payload(random_graph_payload(rng, n, with_h, with_boundary))


def random_function(rng, graph, domain=None):
    """Values in [-1, 1]; zeroed off the interior when a domain is given."""
    vals = rng.uniform(-1.0, 1.0, graph.n)
    if domain is not None:
        vals = np.where(domain.interior_mask, vals, 0.0)
    return vals


def random_dirichlet_instance(rng, n):
    graph = random_graph(rng, n, with_boundary=True)
    return graph, domain_from_flags(graph)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
