"""Small canonical graphs used in examples, tests and benchmarks."""

from __future__ import annotations

from .graphs import WeightedGraph, graph_from_payload

__all__ = ["star_dirichlet", "triangle_whole", "grid_dirichlet", "lattice_whole"]


def star_dirichlet(arms: int = 2, weight: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    """One interior center with ``arms`` boundary neighbors (unit star)."""
    if arms < 1:
        raise ValueError("need at least one arm")
    vertices = [{"id": "c", "mu": mu, "boundary": False}]
    edges = []
    for k in range(arms):
        vertices.append({"id": f"b{k}", "mu": mu, "boundary": True})
        edges.append({"a": "c", "b": f"b{k}", "w": weight})
    return graph_from_payload({"vertices": vertices, "edges": edges})


def triangle_whole(h: float = 1.0, weight: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    """Complete graph on three vertices with a constant potential."""
    vertices = [{"id": i, "mu": mu, "h": h} for i in range(3)]
    edges = [{"a": 0, "b": 1, "w": weight},
             {"a": 1, "b": 2, "w": weight},
             {"a": 0, "b": 2, "w": weight}]
    return graph_from_payload({"vertices": vertices, "edges": edges})


def grid_dirichlet(rows: int, cols: int, weight: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    """rows x cols interior block of the square lattice plus its boundary ring.

    The boundary consists of the lattice neighbors of the block (edge-adjacent
    cells only, so no corner cells).  All lattice edges among the retained
    cells are kept.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid must be at least 1x1")
    interior = {(r, c) for r in range(rows) for c in range(cols)}
    ring = set()
    for (r, c) in interior:
        for (dr, dc) in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            cell = (r + dr, c + dc)
            if cell not in interior:
                ring.add(cell)
    cells = sorted(interior) + sorted(ring)
    vertices = [
        {"id": f"{r},{c}", "mu": mu, "boundary": (r, c) not in interior}
        for (r, c) in cells
    ]
    kept = set(cells)
    edges = []
    for (r, c) in cells:
        for (dr, dc) in ((1, 0), (0, 1)):
            nb = (r + dr, c + dc)
            if nb in kept:
                edges.append({"a": f"{r},{c}", "b": f"{nb[0]},{nb[1]}", "w": weight})
    return graph_from_payload({"vertices": vertices, "edges": edges})


def lattice_whole(rows: int, cols: int, h: float = 1.0, weight: float = 1.0,
                  mu: float = 1.0) -> WeightedGraph:
    """rows x cols square lattice with a constant potential on every vertex."""
    vertices = [
        {"id": f"{r},{c}", "mu": mu, "h": h}
        for r in range(rows) for c in range(cols)
    ]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if r + 1 < rows:
                edges.append({"a": f"{r},{c}", "b": f"{r + 1},{c}", "w": weight})
            if c + 1 < cols:
                edges.append({"a": f"{r},{c}", "b": f"{r},{c + 1}", "w": weight})
    return graph_from_payload({"vertices": vertices, "edges": edges})
