import math

import numpy as np
import pytest

import kgs
from kgs import EnergyFunctional, EnergyParams, GraphFunction, InvalidGraphError
from kgs.functional import KIND_WHOLE

from conftest import random_function, random_graph, random_dirichlet_instance


def star_functional(a=1.0, b=1.0, lam=0.0, eta=8.0):
    g = kgs.star_dirichlet(2)
    return g, EnergyFunctional(g, EnergyParams(a=a, b=b, lam=lam, eta=eta))


def spike(g, t):
    return GraphFunction.from_mapping(g, {"c": t}).values


def random_params(rng, kind="dirichlet"):
    return EnergyParams(a=float(rng.uniform(0.5, 2.0)),
                        b=float(rng.uniform(0.0, 1.5)),
                        lam=float(rng.uniform(-0.5, 0.5)),
                        eta=float(rng.uniform(0.5, 5.0)),
                        kind=kind)


# ---------------------------------------------------------------------------
# the splits and the energy
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("t", [1.0, 0.3, -2.0])
def test_lambda_part_star(t):
    g, fn = star_functional(a=1.0, lam=0.0)
    assert fn.lambda_part(spike(g, t)) == pytest.approx(2.0 * t * t, rel=1e-14)


@pytest.mark.parametrize("t", [1.0, 0.5])
def test_eta_part_star(t):
    g, fn = star_functional(b=1.0, eta=8.0)
    assert fn.eta_part(spike(g, t)) == pytest.approx(-4.0 * t ** 4, rel=1e-13)


def test_splits_vanish_at_zero():
    g, fn = star_functional()
    z = np.zeros(g.n)
    assert fn.lambda_part(z) == 0.0 and fn.eta_part(z) == 0.0 and fn.energy(z) == 0.0


def test_energy_star_at_closed_form_scale():
    g, fn = star_functional()
    t = math.sqrt(0.5)
    assert fn.energy(spike(g, t)) == pytest.approx(0.25, rel=1e-14)


def test_energy_whole_graph_constant():
    g = kgs.triangle_whole()
    fn = EnergyFunctional(g, EnergyParams(a=1, b=0, lam=0, eta=1, kind=KIND_WHOLE))
    assert fn.energy(np.ones(3)) == pytest.approx(0.75, rel=1e-14)


def test_split_identity_exact(rng):
    graph, dom = random_dirichlet_instance(rng, 15)
    fn = EnergyFunctional(graph, random_params(rng), dom)
    for _ in range(10):
        u = random_function(rng, graph, dom)
        assert fn.energy(u) == 0.5 * fn.lambda_part(u) + 0.25 * fn.eta_part(u)


# ---------------------------------------------------------------------------
# the derivative
# ---------------------------------------------------------------------------

def test_pairing_identity(rng):
    graph, dom = random_dirichlet_instance(rng, 12)
    fn = EnergyFunctional(graph, random_params(rng), dom)
    for _ in range(20):
        u = random_function(rng, graph, dom)
        lhs = fn.d_energy(u, u)
        rhs = fn.lambda_part(u) + fn.eta_part(u)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-13)


def test_derivative_vanishes_at_zero(rng):
    g, fn = star_functional()
    z = np.zeros(g.n)
    for _ in range(5):
        v = np.where(kgs.domain_from_flags(g).interior_mask, rng.uniform(-1, 1, g.n), 0.0)
        assert fn.d_energy(z, v) == 0.0


def test_derivative_along_spike_polynomial():
    g, fn = star_functional()
    for t in (0.3, 1.0, math.sqrt(0.5)):
        u = spike(g, t)
        expected = 2.0 * t * t - 4.0 * t ** 4
        assert fn.d_energy(u, u) == pytest.approx(expected, rel=1e-13, abs=1e-15)
    root = fn.d_energy(spike(g, math.sqrt(0.5)), spike(g, math.sqrt(0.5)))
    assert abs(root) <= 1e-15


def test_quarter_identity(rng):
    g = random_graph(rng, 10, with_h=True)
    fn = EnergyFunctional(g, random_params(rng, kind=KIND_WHOLE))
    for _ in range(10):
        u = random_function(rng, g)
        lhs = fn.energy(u) - 0.25 * fn.d_energy(u, u)
        assert lhs == pytest.approx(0.25 * fn.lambda_part(u), rel=1e-11, abs=1e-13)


def test_fiber_polynomial(rng):
    graph, dom = random_dirichlet_instance(rng, 10)
    fn = EnergyFunctional(graph, random_params(rng), dom)
    u = random_function(rng, graph, dom)
    lam_part, eta_part = fn.splits(u)
    for s in (0.25, 1.0, 3.0):
        su = s * u
        assert fn.d_energy(su, su) == pytest.approx(
            s * s * lam_part + s ** 4 * eta_part, rel=1e-12, abs=1e-13)
        assert fn.energy(su) == pytest.approx(
            0.5 * s * s * lam_part + 0.25 * s ** 4 * eta_part, rel=1e-12, abs=1e-13)


def test_finite_difference_consistency(rng):
    eps = 1e-5
    for _ in range(12):
        kind = "dirichlet" if rng.uniform() < 0.5 else KIND_WHOLE
        if kind == "dirichlet":
            graph, dom = random_dirichlet_instance(rng, int(rng.integers(5, 20)))
        else:
            graph, dom = random_graph(rng, int(rng.integers(5, 20)), with_h=True), None
        fn = EnergyFunctional(graph, random_params(rng, kind), dom)
        u = random_function(rng, graph, dom)
        v = random_function(rng, graph, dom)
        for w in (u, v):
            nrm = np.linalg.norm(w)
            if nrm > 0:
                w /= nrm
        de = fn.d_energy(u, v)
        fd = (fn.energy(u + eps * v) - fn.energy(u - eps * v)) / (2.0 * eps)
        assert abs(fd - de) <= 1e-6 * (1.0 + abs(de))


# ---------------------------------------------------------------------------
# gradient and residual
# ---------------------------------------------------------------------------

def test_gradient_pairing_consistency(rng):
    graph, dom = random_dirichlet_instance(rng, 12)
    fn = EnergyFunctional(graph, random_params(rng), dom)
    for _ in range(20):
        u = random_function(rng, graph, dom)
        v = random_function(rng, graph, dom)
        g = fn.gradient(u)
        paired = float(np.sum(graph.mu * g * v))
        de = fn.d_energy(u, v)
        assert abs(paired - de) <= 1e-12 * (1.0 + abs(de))


def test_gradient_zero_at_zero():
    g, fn = star_functional()
    assert np.all(fn.gradient(np.zeros(g.n)) == 0.0)


def test_gradient_supported_on_interior(rng):
    graph, dom = random_dirichlet_instance(rng, 15)
    fn = EnergyFunctional(graph, random_params(rng), dom)
    u = random_function(rng, graph, dom)
    g = fn.gradient(u)
    assert np.all(g[~dom.interior_mask] == 0.0)


def test_residual_vanishes_at_singleton_solution():
    g, fn = star_functional(a=1.0, b=1.0, lam=0.0, eta=8.0)
    t = math.sqrt((2.0 * 1.0 - 0.0) / (8.0 - 4.0 * 1.0))
    res = fn.residual(spike(g, t))
    assert np.max(np.abs(res)) <= 1e-14


def test_residual_zero_function():
    g, fn = star_functional()
    assert np.all(fn.residual(np.zeros(g.n)) == 0.0)


def test_residual_whole_graph_constant():
    g = kgs.triangle_whole()
    fn = EnergyFunctional(g, EnergyParams(a=1, b=0, lam=0, eta=1, kind=KIND_WHOLE))
    assert np.max(np.abs(fn.residual(np.ones(3)))) <= 1e-15


def test_weak_pointwise_equivalence(rng):
    graph, dom = random_dirichlet_instance(rng, 14)
    fn = EnergyFunctional(graph, random_params(rng), dom)
    u = random_function(rng, graph, dom)
    res = fn.residual(u)
    for _ in range(10):
        v = random_function(rng, graph, dom)
        lhs = fn.d_energy(u, v)
        rhs = float(np.sum(graph.mu[dom.interior] * res[dom.interior] * v[dom.interior]))
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))


def test_gradient_residual_same_values(rng):
    g = random_graph(rng, 10, with_h=True)
    fn = EnergyFunctional(g, random_params(rng, KIND_WHOLE))
    u = random_function(rng, g)
    assert np.array_equal(fn.gradient(u), fn.residual(u))


# ---------------------------------------------------------------------------
# params and admissibility
# ---------------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(kgs.ParameterRangeError):
        EnergyParams(a=0.0, b=0.0, lam=0.0, eta=1.0)
    with pytest.raises(kgs.ParameterRangeError):
        EnergyParams(a=1.0, b=-1.0, lam=0.0, eta=1.0)
    with pytest.raises(kgs.ParameterRangeError):
        EnergyParams(a=1.0, b=0.0, lam=float("nan"), eta=1.0)
    with pytest.raises(kgs.ParameterRangeError):
        EnergyParams(a=1.0, b=0.0, lam=0.0, eta=1.0, kind="weird")


def test_whole_graph_requires_potential():
    g = kgs.star_dirichlet(2)
    with pytest.raises(InvalidGraphError):
        EnergyFunctional(g, EnergyParams(a=1, b=0, lam=0, eta=1, kind=KIND_WHOLE))


def test_dirichlet_requires_flags_or_domain():
    g = kgs.triangle_whole()
    with pytest.raises(InvalidGraphError):
        EnergyFunctional(g, EnergyParams(a=1, b=0, lam=0, eta=1))


def test_dirichlet_rejects_inadmissible_values():
    g, fn = star_functional()
    with pytest.raises(ValueError):
        fn.energy(np.array([1.0, 0.1, 0.0]))
