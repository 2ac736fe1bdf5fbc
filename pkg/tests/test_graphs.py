import math

import numpy as np
import pytest

import kgs
from kgs import (
    GraphFormatError,
    GraphFunction,
    GraphMismatchError,
    InvalidGraphError,
    boundary_of,
    domain_from_flags,
    gradient_form,
    gradient_length,
    graph_from_payload,
    integrate,
    laplacian,
    norm_dirichlet,
    norm_h_sobolev,
    norm_lp,
    norm_sup,
    validate,
)
from kgs.graphs import parse_graph_payload

from conftest import random_function, random_graph, random_graph_payload


def star():
    return kgs.star_dirichlet(2)  # ids: c, b0, b1


def path(ids):
    vertices = [{"id": v, "mu": 1.0} for v in ids]
    edges = [{"a": ids[i], "b": ids[i + 1], "w": 1.0} for i in range(len(ids) - 1)]
    return graph_from_payload({"vertices": vertices, "edges": edges})


# ---------------------------------------------------------------------------
# laplacian / gradient form / gradient length
# ---------------------------------------------------------------------------

def test_laplacian_of_constant_vanishes(rng):
    g = random_graph(rng, 12)
    out = laplacian(g, np.full(g.n, 5.0))
    assert np.allclose(out, 0.0, atol=1e-14)


def test_laplacian_star_spike():
    g = star()
    u = GraphFunction.from_mapping(g, {"c": 1.0})
    out = laplacian(g, u)
    assert out.values == pytest.approx([-2.0, 1.0, 1.0])


def test_laplacian_linear_on_path_is_zero_inside():
    g = path(["y", "x", "z"])
    u = GraphFunction.from_mapping(g, {"y": 0.0, "x": 1.0, "z": 2.0})
    assert laplacian(g, u).values[g.index["x"]] == pytest.approx(0.0, abs=1e-15)


def test_gradient_form_nonnegative_on_diagonal(rng):
    g = random_graph(rng, 15)
    u = random_function(rng, g)
    assert np.all(gradient_form(g, u, u) >= 0.0)


def test_gradient_form_star_values():
    g = star()
    u = GraphFunction.from_mapping(g, {"c": 1.0})
    out = gradient_form(g, u, u)
    assert out.values == pytest.approx([1.0, 0.5, 0.5])


def test_gradient_form_against_constant_vanishes(rng):
    g = random_graph(rng, 10)
    u = random_function(rng, g)
    out = gradient_form(g, u, np.full(g.n, 3.7))
    assert np.allclose(out, 0.0, atol=1e-15)


def test_gradient_form_symmetric_bilinear(rng):
    g = random_graph(rng, 14)
    u, v, w = (random_function(rng, g) for _ in range(3))
    guv = gradient_form(g, u, v)
    gvu = gradient_form(g, v, u)
    assert np.allclose(guv, gvu, rtol=1e-14, atol=1e-15)
    lhs = gradient_form(g, u + 2.0 * w, v)
    rhs = gradient_form(g, u, v) + 2.0 * gradient_form(g, w, v)
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-14)


def test_gradient_length():
    g = star()
    u = GraphFunction.from_mapping(g, {"c": 1.0})
    out = gradient_length(g, u)
    assert out.values == pytest.approx([1.0, math.sqrt(2) / 2, math.sqrt(2) / 2])
    assert np.all(gradient_length(g, GraphFunction.zeros(g)).values == 0.0)


def test_gradient_length_homogeneous(rng):
    g = random_graph(rng, 10)
    u = random_function(rng, g)
    assert np.allclose(gradient_length(g, -3.0 * u), 3.0 * gradient_length(g, u),
                       rtol=1e-14)


def test_gamma_equals_squared_gradient_length(rng):
    g = random_graph(rng, 10)
    u = random_function(rng, g)
    assert np.allclose(gradient_length(g, u) ** 2, gradient_form(g, u, u), rtol=1e-13)


def test_function_graph_mismatch_raises(rng):
    g1 = random_graph(rng, 5)
    g2 = random_graph(rng, 5)
    u = GraphFunction.zeros(g2)
    with pytest.raises(GraphMismatchError):
        laplacian(g1, u)


# ---------------------------------------------------------------------------
# integrate and norms
# ---------------------------------------------------------------------------

def test_integrate_counting_measure():
    g = path(list(range(8)))
    assert integrate(g, range(7), np.ones(8)) == pytest.approx(7.0)


def test_integrate_star_singleton():
    g = star()
    u = GraphFunction.from_mapping(g, {"c": 1.0})
    assert integrate(g, [g.index["c"]], u) == pytest.approx(1.0)


def test_integrate_weighted():
    payload = {"vertices": [{"id": i, "mu": m} for i, m in enumerate((2.0, 3.0, 5.0))],
               "edges": [{"a": 0, "b": 1, "w": 1.0}, {"a": 1, "b": 2, "w": 1.0}]}
    g = graph_from_payload(payload)
    assert integrate(g, range(3), np.ones(3)) == pytest.approx(10.0)


def test_integrate_unknown_vertex():
    g = star()
    with pytest.raises(GraphMismatchError):
        integrate(g, [99], np.zeros(3))


@pytest.mark.parametrize("t", [1.0, -2.5, 0.3])
def test_norm_dirichlet_star(t):
    g = star()
    dom = domain_from_flags(g)
    u = GraphFunction.from_mapping(g, {"c": t})
    assert norm_dirichlet(g, dom, u) == pytest.approx(math.sqrt(2.0) * abs(t))


def test_norm_dirichlet_zero_and_triangle_inequality(rng):
    g = random_graph(rng, 20, with_boundary=True)
    dom = domain_from_flags(g)
    assert norm_dirichlet(g, dom, np.zeros(g.n)) == 0.0
    u = random_function(rng, g, dom)
    v = random_function(rng, g, dom)
    assert (norm_dirichlet(g, dom, u + v)
            <= norm_dirichlet(g, dom, u) + norm_dirichlet(g, dom, v) + 1e-12)


def test_norm_dirichlet_rejects_boundary_values():
    g = star()
    dom = domain_from_flags(g)
    with pytest.raises(ValueError):
        norm_dirichlet(g, dom, np.array([1.0, 0.5, 0.0]))


def test_norm_lp_spike_and_constant():
    g = star()
    u = GraphFunction.from_mapping(g, {"c": 1.0})
    assert norm_lp(g, [g.index["c"]], u, 4.0) == pytest.approx(1.0)
    c = 2.5
    assert norm_lp(g, range(3), np.full(3, c), 3.0) == pytest.approx(c * 3 ** (1 / 3))


def test_norm_lp_holder_monotonicity(rng):
    g = random_graph(rng, 12)
    u = random_function(rng, g)
    total = integrate(g, range(g.n), np.ones(g.n))
    assert norm_lp(g, range(g.n), u, 2.0) <= norm_lp(g, range(g.n), u, 4.0) * total ** 0.25 + 1e-12


def test_norm_lp_rejects_small_p():
    g = star()
    with pytest.raises(ValueError):
        norm_lp(g, range(3), np.ones(3), 0.5)


def test_norm_sup():
    g = star()
    assert norm_sup(g, range(3), np.array([1.0, -3.0, 2.0])) == 3.0


@pytest.mark.parametrize("t", [1.0, -0.7])
def test_norm_h_sobolev_constant_on_triangle(t):
    g = kgs.triangle_whole()
    assert norm_h_sobolev(g, np.full(3, t)) == pytest.approx(math.sqrt(3.0) * abs(t))


def test_norm_h_sobolev_spike_and_zero():
    g = kgs.triangle_whole()
    assert norm_h_sobolev(g, np.array([1.0, 0.0, 0.0])) == pytest.approx(math.sqrt(3.0))
    assert norm_h_sobolev(g, np.zeros(3)) == 0.0


def test_norm_h_sobolev_requires_potential():
    g = star()
    with pytest.raises(InvalidGraphError):
        norm_h_sobolev(g, np.zeros(3))


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

def test_boundary_of_star():
    g = star()
    dom = boundary_of(g, [g.index["c"]])
    assert sorted(g.ids[i] for i in dom.boundary) == ["b0", "b1"]


def test_boundary_of_everything_is_empty():
    g = star()
    dom = boundary_of(g, range(3))
    assert dom.boundary.size == 0


def test_boundary_of_path_interior():
    g = path(["a", "b", "c", "d"])
    dom = boundary_of(g, [g.index["b"]])
    assert sorted(g.ids[i] for i in dom.boundary) == ["a", "c"]


def test_boundary_of_empty_interior_raises():
    g = star()
    with pytest.raises(InvalidGraphError):
        boundary_of(g, [])


def test_domain_from_flags_matches_boundary_of():
    g = kgs.grid_dirichlet(2, 3)
    dom = domain_from_flags(g)
    redo = boundary_of(g, dom.interior)
    assert np.array_equal(dom.boundary, redo.boundary)


# ---------------------------------------------------------------------------
# validation and the file format
# ---------------------------------------------------------------------------

def _triangle_payload():
    return {"vertices": [{"id": i} for i in range(3)],
            "edges": [{"a": 0, "b": 1, "w": 1.0},
                      {"a": 1, "b": 2, "w": 1.0},
                      {"a": 0, "b": 2, "w": 1.0}]}


def test_validate_clean_triangle():
    report = validate(_triangle_payload())
    assert report.ok and report.mu0 == 1.0 and report.connected


def test_validate_asymmetric_weight():
    payload = _triangle_payload()
    payload["edges"].append({"a": 1, "b": 0, "w": 2.0})
    assert "weight symmetry" in validate(payload).codes()


def test_validate_duplicate_edge():
    payload = _triangle_payload()
    payload["edges"].append({"a": 1, "b": 0, "w": 1.0})
    assert "duplicate edge" in validate(payload).codes()


def test_validate_nonpositive_measure():
    payload = _triangle_payload()
    payload["vertices"][1]["mu"] = 0.0
    assert "measure positivity" in validate(payload).codes()


def test_validate_negative_weight():
    payload = _triangle_payload()
    payload["edges"][0]["w"] = -1.0
    assert "weight positivity" in validate(payload).codes()


def test_validate_disconnected_and_self_loop():
    payload = {"vertices": [{"id": 0}, {"id": 1}, {"id": 2}],
               "edges": [{"a": 0, "b": 1, "w": 1.0}, {"a": 2, "b": 2, "w": 1.0}]}
    codes = validate(payload).codes()
    assert "connectivity" in codes and "self loop" in codes


def test_validate_nonpositive_potential():
    payload = _triangle_payload()
    for spec in payload["vertices"]:
        spec["h"] = 1.0
    payload["vertices"][0]["h"] = -0.5
    assert "potential positivity" in validate(payload).codes()


def test_validate_boundary_without_interior_neighbor():
    payload = {"vertices": [{"id": 0, "boundary": False}, {"id": 1, "boundary": True},
                            {"id": 2, "boundary": True}],
               "edges": [{"a": 0, "b": 1, "w": 1.0}, {"a": 1, "b": 2, "w": 1.0}]}
    assert "boundary consistency" in validate(payload).codes()


def test_construction_rejects_hard_violations():
    payload = _triangle_payload()
    payload["edges"][0]["w"] = -1.0
    with pytest.raises(InvalidGraphError):
        graph_from_payload(payload)


def test_disconnected_graph_constructs_for_calculus():
    payload = {"vertices": [{"id": 0}, {"id": 1}, {"id": 2}],
               "edges": [{"a": 0, "b": 1, "w": 1.0}]}
    g = graph_from_payload(payload)
    assert not g.connected
    assert np.allclose(laplacian(g, np.ones(3)), 0.0)  # isolated vertex -> 0


def test_parse_missing_mu_defaults_to_one():
    g = graph_from_payload(_triangle_payload())
    assert np.all(g.mu == 1.0)


def test_parse_partial_h_rejected():
    payload = _triangle_payload()
    payload["vertices"][0]["h"] = 1.0
    with pytest.raises(GraphFormatError):
        parse_graph_payload(payload)


def test_parse_unknown_edge_endpoint():
    payload = _triangle_payload()
    payload["edges"][0]["a"] = "nope"
    with pytest.raises(GraphFormatError):
        parse_graph_payload(payload)


def test_parse_duplicate_id():
    payload = _triangle_payload()
    payload["vertices"][1]["id"] = 0
    with pytest.raises(GraphFormatError):
        parse_graph_payload(payload)


def test_payload_round_trip(rng):
    g = random_graph(rng, 9, with_h=True)
    g2 = graph_from_payload(g.to_payload())
    assert g2.ids == g.ids
    assert np.array_equal(g2.mu, g.mu)
    assert np.array_equal(g2.edge_w, g.edge_w)
    assert np.array_equal(g2.h, g.h)


# ---------------------------------------------------------------------------
# structural identities
# ---------------------------------------------------------------------------

def _green_gap(lhs, rhs):
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def test_green_identity_dirichlet(rng):
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(5, 30)), with_boundary=True)
        dom = domain_from_flags(g)
        for _ in range(4):
            psi = random_function(rng, g)
            phi = random_function(rng, g, dom)
            lhs = integrate(g, dom.interior, phi * laplacian(g, psi))
            rhs = -integrate(g, dom.closure, gradient_form(g, psi, phi))
            assert _green_gap(lhs, rhs) <= 1e-12


def test_green_identity_whole_graph(rng):
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(5, 30)))
        phi = random_function(rng, g)
        psi = random_function(rng, g)
        lhs = integrate(g, range(g.n), phi * laplacian(g, psi))
        rhs = -integrate(g, range(g.n), gradient_form(g, psi, phi))
        assert _green_gap(lhs, rhs) <= 1e-12


def test_mass_conservation(rng):
    for _ in range(10):
        g = random_graph(rng, 25)
        u = random_function(rng, g)
        total = integrate(g, range(g.n), laplacian(g, u))
        assert abs(total) <= 1e-12 * max(1.0, float(np.sum(np.abs(u))))


def test_norm_dirichlet_matches_gamma_integral(rng):
    g = random_graph(rng, 20, with_boundary=True)
    dom = domain_from_flags(g)
    u = random_function(rng, g, dom)
    via_gamma = math.sqrt(integrate(g, dom.closure, gradient_form(g, u, u)))
    assert norm_dirichlet(g, dom, u) == pytest.approx(via_gamma, rel=1e-12)


def test_norms_absolutely_homogeneous(rng):
    g = random_graph(rng, 15, with_boundary=True)
    dom = domain_from_flags(g)
    u = random_function(rng, g, dom)
    for t in (-2.0, 0.5):
        assert norm_dirichlet(g, dom, t * u) == pytest.approx(
            abs(t) * norm_dirichlet(g, dom, u), rel=1e-13)
        assert norm_lp(g, range(g.n), t * u, 4.0) == pytest.approx(
            abs(t) * norm_lp(g, range(g.n), u, 4.0), rel=1e-13)
