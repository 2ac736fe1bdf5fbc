"""Ground-state computation by reduced-energy descent over cone directions.

The constraint set is eliminated analytically: every cone direction is
scaled onto it in closed form, so the search minimizes the scale-invariant
reduced energy over directions.  At a projected point w = s_u * u the
derivative of the reduced energy along a direction perturbation v equals
d_energy(w, s_u * v) (the scale term drops because d_energy(w, w) = 0), so
the pointwise gradient at w doubles as the descent direction and as the
convergence certificate.

Pipeline per instance: precheck the parameter thresholds, run a multistart
Armijo descent, optionally polish the best candidate with a damped Newton
iteration on the full nonlinear residual, then verify the norm and energy
lower bounds and report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import InvalidGraphError, KgsError, NotInConeError
from .functional import KIND_DIRICHLET, EnergyFunctional, EnergyParams
from .graphs import Domain, WeightedGraph
from .nehari import NehariContext, cone_sample, fiber_scale, reduced_energy
from .spectral import SpectralConstants, compute_constants, kappa, kappa_whole_explicit

__all__ = [
    "SolveStatus",
    "Precheck",
    "SolveOptions",
    "BoundReport",
    "StartRecord",
    "SolveDiagnostics",
    "SolveResult",
    "VerificationReport",
    "SweepRow",
    "precheck",
    "solve",
    "verify",
    "sweep",
]

# Relative slack for the threshold comparisons: the thresholds are computed
# in floating point, and the theory statements are closed conditions, so a
# parameter within one part in 1e9 of a threshold is treated as at it.
_THRESHOLD_SLACK = 1e-9


class SolveStatus:
    SOLVED = "Solved"
    NO_NONTRIVIAL = "NoNontrivialSolution"
    NOT_CONVERGED = "NotConverged"
    OUT_OF_THEORY = "OutOfTheory"


class Precheck:
    PROCEED = "Proceed"
    NO_NONTRIVIAL = SolveStatus.NO_NONTRIVIAL
    OUT_OF_THEORY = SolveStatus.OUT_OF_THEORY


@dataclass(frozen=True)
class SolveOptions:
    starts: int = 32
    max_iters: int = 5000
    grad_tol: float = 1e-10
    residual_tol: float = 1e-8
    seed: int = 0
    polish: bool = True
    membership_tol: float = 1e-10
    force: bool = False

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("grad_tol", "residual_tol", "membership_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class BoundReport:
    """Checks of the norm and energy lower bounds for a candidate solution."""

    applicable: bool
    lambda_in_range: bool
    eta_above_threshold: bool
    kappa: float | None = None
    norm_exceeds_kappa: bool | None = None
    energy_lower_bound: float | None = None
    energy_exceeds_bound: bool | None = None

    @property
    def ok(self) -> bool:
        if not self.applicable:
            return True
        return bool(self.norm_exceeds_kappa and self.energy_exceeds_bound)


@dataclass
class StartRecord:
    index: int
    label: str
    iterations: int
    converged: bool
    grad_norm: float
    energy: float


@dataclass
class SolveDiagnostics:
    backend: str
    seed: int
    starts: list = field(default_factory=list)
    selected_start: int | None = None
    distinct_levels: list = field(default_factory=list)
    polish: dict | None = None
    cone_empty: bool = False
    note: str | None = None


@dataclass
class SolveResult:
    status: str
    u: np.ndarray | None
    energy: float | None
    norm: float | None
    nehari_residual: float | None
    max_pointwise_residual: float | None
    bounds: BoundReport | None
    diagnostics: SolveDiagnostics
    params: EnergyParams
    consts: SpectralConstants


def _classify(params: EnergyParams, consts: SpectralConstants) -> str:
    threshold = consts.eta0_at(params.b)
    if params.eta <= threshold * (1.0 + _THRESHOLD_SLACK):
        return Precheck.NO_NONTRIVIAL
    if abs(params.lam) >= params.a * consts.lambda1 * (1.0 - _THRESHOLD_SLACK):
        return Precheck.OUT_OF_THEORY
    return Precheck.PROCEED


def precheck(graph: WeightedGraph, params: EnergyParams, *,
             domain: Domain | None = None,
             consts: SpectralConstants | None = None):
    """Classify the parameters against the computed thresholds.

    Returns ``(outcome, consts)``; outcome is one of the :class:`Precheck`
    strings.  'NoNontrivialSolution' when eta is at or below the quartic
    threshold, 'OutOfTheory' when |lambda| reaches a * lambda1 (existence is
    not guaranteed there and the radius degenerates).
    """
    if not graph.connected:
        raise InvalidGraphError("graph is not connected; refusing to solve")
    if consts is None:
        consts = compute_constants(graph, kind=params.kind, domain=domain, b=params.b)
    return _classify(params, consts), consts


# ---------------------------------------------------------------------------
# Descent
# ---------------------------------------------------------------------------

def _spike_order(fn: EnergyFunctional):
    g = fn.graph
    wdeg = np.bincount(g.edge_src, weights=g.edge_w, minlength=g.n)
    wdeg += np.bincount(g.edge_dst, weights=g.edge_w, minlength=g.n)
    if fn.kind != KIND_DIRICHLET:
        wdeg += g.mu * g.h
    diag = wdeg[fn.free]
    score = g.mu[fn.free] / (diag * diag)
    return fn.free[np.lexsort((np.arange(fn.free.size), -score))]


def _start_directions(ctx: NehariContext, opts: SolveOptions, rng):
    """Labelled cone directions: quartic maximizer, eigenvector, spikes, random."""
    fn = ctx.functional
    accepted = []

    def admit(label, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if not np.any(vec):
            return False
        lam_part, eta_part = fn.splits(vec)
        if eta_part < 0.0 and lam_part > 0.0:
            accepted.append((label, vec))
            return True
        return False

    deterministic = [("maximizer", ctx.consts.d4_maximizer),
                     ("eigvec", ctx.consts.lambda1_minimizer)]
    for i in _spike_order(fn):
        vec = np.zeros(fn.graph.n)
        vec[i] = 1.0
        deterministic.append((f"spike:{fn.graph.ids[int(i)]}", vec))
    for label, vec in deterministic:
        if len(accepted) >= opts.starts:
            return accepted
        if vec is not None:
            admit(label, vec)

    base = ctx.consts.d4_maximizer
    if base is not None and np.any(base):
        base = base / math.sqrt(fn.quad(base))
    slot = 0
    while len(accepted) < opts.starts and slot < opts.starts:
        slot += 1
        # up to 16 resamples per slot; later tries blend the draw with the
        # quartic maximizer, which lies in the cone whenever anything does
        for attempt in range(16):
            vec = fn.embed(rng.standard_normal(fn.free.size))
            if attempt >= 8 and base is not None:
                vec = base + 0.5 * vec / math.sqrt(fn.quad(vec))
            if admit(f"random:{slot}", vec):
                break
    return accepted


def _descend(ctx: NehariContext, direction, opts: SolveOptions):
    """Armijo descent on the reduced energy from one cone direction."""
    fn = ctx.functional
    mu = fn.graph.mu
    u = direction / math.sqrt(fn.quad(direction))
    value = reduced_energy(ctx, u)
    iterations = 0
    while iterations < opts.max_iters:
        s = fiber_scale(ctx, u)
        w = u * s
        grad = fn._gradient_values(w)
        gnorm = math.sqrt(max(_kernels.mass_dot(mu, grad, grad), 0.0))
        if gnorm <= opts.grad_tol:
            break
        iterations += 1
        slope = -s * gnorm * gnorm
        step = 1.0
        accepted = False
        while step > 1e-20:
            cand = u - step * grad
            try:
                new_value = reduced_energy(ctx, cand)
            except NotInConeError:
                step *= 0.5
                continue
            # strict decrease required so a rounding-scale stall terminates
            if new_value < value and new_value <= value + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # line search stalled at rounding scale
        u = cand / math.sqrt(fn.quad(cand))
        value = reduced_energy(ctx, u)

    w = u * fiber_scale(ctx, u)
    grad = fn._gradient_values(w)
    gnorm = math.sqrt(max(_kernels.mass_dot(mu, grad, grad), 0.0))
    return w, iterations, gnorm <= opts.grad_tol, gnorm


def _newton_polish(fn: EnergyFunctional, w0, max_iter=30):
    """Damped Newton on the full nonlinear residual, in admissible coordinates.

    The nonlocal coupling contributes the rank-one term 2b (A x)(A x)^T to
    the Jacobian.  Returns (polished vector, iterations) or (None, iterations)
    when the Newton system cannot make progress (singular or no decrease).
    """
    A, mass = fn.operator_matrix()
    p = fn.params
    x = fn.restrict(w0)

    def residual_parts(xv):
        Ax = A @ xv
        q = float(xv @ Ax)
        F = (p.a + p.b * q) * Ax - p.lam * (mass * xv) - p.eta * (mass * xv ** 3)
        return F, Ax, q

    F, Ax, q = residual_parts(x)
    fnorm = float(np.linalg.norm(F))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        scale = float((p.a + p.b * q) * np.linalg.norm(Ax)
                      + abs(p.lam) * np.linalg.norm(mass * x)
                      + abs(p.eta) * np.linalg.norm(mass * x ** 3))
        if fnorm <= 1e-15 * max(scale, 1e-300):
            break
        J = (p.a + p.b * q) * A
        if p.b != 0.0:
            J = J + 2.0 * p.b * np.outer(Ax, Ax)
        J[np.diag_indices_from(J)] -= p.lam * mass + 3.0 * p.eta * mass * x ** 2
        try:
            delta = scipy.linalg.solve(J, -F, assume_a="sym")
        except (scipy.linalg.LinAlgError, ValueError):
            return None, iterations
        alpha = 1.0
        improved = False
        while alpha > 1e-8:
            x_new = x + alpha * delta
            F_new, Ax_new, q_new = residual_parts(x_new)
            fnorm_new = float(np.linalg.norm(F_new))
            if fnorm_new < (1.0 - 1e-4 * alpha) * fnorm:
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
        x, F, Ax, q, fnorm = x_new, F_new, Ax_new, q_new, fnorm_new
    return fn.embed(x), iterations


def _sign_normalize(vals):
    """Positive value at the first vertex attaining max |u| (u and -u both solve)."""
    if vals is None or not np.any(vals):
        return vals
    k = int(np.argmax(np.abs(vals)))
    return -vals if vals[k] < 0.0 else vals


def _distinct_levels(energies, rel=1e-8):
    levels = []
    for e in sorted(energies):
        if not levels or abs(e - levels[-1]) > rel * (1.0 + abs(levels[-1])):
            levels.append(e)
    return levels


def _bound_report(params: EnergyParams, consts: SpectralConstants,
                  norm_value, energy) -> BoundReport:
    lam_ok = abs(params.lam) < params.a * consts.lambda1
    eta_ok = params.eta > consts.eta0_at(params.b)
    report = BoundReport(applicable=bool(lam_ok and eta_ok),
                         lambda_in_range=bool(lam_ok),
                         eta_above_threshold=bool(eta_ok))
    if not report.applicable or norm_value is None:
        return report
    if params.kind == KIND_DIRICHLET:
        radius = kappa(consts, params)
    else:
        radius = kappa_whole_explicit(consts, params)
    bound = 0.25 * (params.a - abs(params.lam) / consts.lambda1) * radius * radius
    report.kappa = radius
    report.norm_exceeds_kappa = bool(norm_value > radius)
    report.energy_lower_bound = bound
    report.energy_exceeds_bound = bool(energy > bound)
    return report


def solve(graph: WeightedGraph, params: EnergyParams,
          opts: SolveOptions | None = None, *,
          domain: Domain | None = None,
          consts: SpectralConstants | None = None) -> SolveResult:
    """Compute a least-energy candidate and verify it against the bounds.

    Deterministic for fixed inputs and seed: starts are a fixed sequence,
    the per-start descents are independent, and the reduction is the
    minimum by (energy, start index).
    """
    opts = opts or SolveOptions()
    fn = EnergyFunctional(graph, params, domain)
    outcome, consts = precheck(graph, params, domain=fn.domain, consts=consts)
    diag = SolveDiagnostics(backend=_kernels.BACKEND, seed=opts.seed)

    def empty_result(status, note=None):
        diag.note = note
        return SolveResult(status=status, u=None, energy=None, norm=None,
                           nehari_residual=None, max_pointwise_residual=None,
                           bounds=BoundReport(
                               applicable=False,
                               lambda_in_range=abs(params.lam) < params.a * consts.lambda1,
                               eta_above_threshold=params.eta > consts.eta0_at(params.b)),
                           diagnostics=diag, params=params, consts=consts)

    if outcome != Precheck.PROCEED and not opts.force:
        return empty_result(outcome)

    ctx = NehariContext(fn, consts, membership_tol=opts.membership_tol)
    rng = np.random.default_rng(opts.seed)
    starts = _start_directions(ctx, opts, rng)
    if not starts:
        probe = cone_sample(ctx, 1024)
        if probe is None:
            diag.cone_empty = True
            return empty_result(SolveStatus.NO_NONTRIVIAL,
                                note="all cone probes failed; constraint set is empty")
        lam_part, _ = fn.splits(probe)
        if not lam_part > 0.0:
            return empty_result(SolveStatus.NOT_CONVERGED,
                                note="no direction with positive quadratic split; "
                                     "the fiber reduction does not apply")
        starts = [("probe", probe)]

    candidates = []
    for idx, (label, direction) in enumerate(starts):
        w, iters, converged, gnorm = _descend(ctx, direction, opts)
        energy = fn.energy(w)
        diag.starts.append(StartRecord(index=idx, label=label, iterations=iters,
                                       converged=converged, grad_norm=gnorm,
                                       energy=energy))
        candidates.append((idx, w, converged, gnorm, energy))

    converged_ones = [c for c in candidates if c[2]]
    diag.distinct_levels = _distinct_levels([c[4] for c in converged_ones])
    if converged_ones:
        best = min(converged_ones, key=lambda c: (c[4], c[0]))
    else:
        # every candidate is a projected constraint-set point, so energies
        # are comparable even without gradient convergence
        best = min(candidates, key=lambda c: (c[4], c[3], c[0]))
    diag.selected_start = best[0]
    w = best[1]

    if opts.polish:
        before = fn.max_residual(w)
        polished, piters = _newton_polish(fn, w)
        if polished is not None and fn.max_residual(polished) < before:
            w = polished
            diag.polish = {"applied": True, "iterations": piters,
                           "max_residual_before": before,
                           "max_residual_after": fn.max_residual(w)}
        else:
            diag.polish = {"applied": False, "iterations": piters,
                           "max_residual_before": before,
                           "max_residual_after": before}

    w = _sign_normalize(w)
    energy = fn.energy(w)
    q = fn.quad(w)
    norm_value = math.sqrt(max(q, 0.0))
    lam_part, eta_part = fn.splits(w)
    membership = lam_part + eta_part
    max_res = fn.max_residual(w)

    solved = (abs(membership) <= opts.membership_tol * (1.0 + q * q)
              and max_res <= opts.residual_tol
              and energy > 0.0)
    status = SolveStatus.SOLVED if solved else SolveStatus.NOT_CONVERGED

    bounds = _bound_report(params, consts, norm_value, energy)
    return SolveResult(status=status, u=w, energy=energy, norm=norm_value,
                       nehari_residual=membership,
                       max_pointwise_residual=max_res,
                       bounds=bounds, diagnostics=diag,
                       params=params, consts=consts)


# ---------------------------------------------------------------------------
# Verification and sweeps
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    passed: bool
    energy_recomputed: float
    energy_matches: bool
    norm_recomputed: float
    nehari_residual: float
    nehari_ok: bool
    max_pointwise_residual: float
    residual_ok: bool
    bounds: BoundReport


def verify(graph: WeightedGraph, params: EnergyParams, values, *,
           expected_energy: float,
           domain: Domain | None = None,
           consts: SpectralConstants | None = None,
           membership_tol: float = 1e-10,
           residual_tol: float = 1e-8) -> VerificationReport:
    """Recompute everything from the raw values and re-run all bound checks.

    The energy comparison allows 1e-12 relative: recomputation is exact for
    the producing backend, and that margin keeps verification meaningful
    across kernel backends without adding slack to the solver tolerances.
    """
    fn = EnergyFunctional(graph, params, domain)
    if consts is None:
        consts = compute_constants(graph, kind=params.kind, domain=fn.domain, b=params.b)
    vals = np.ascontiguousarray(values, dtype=np.float64)
    energy = fn.energy(vals)
    q = fn.quad(vals)
    norm_value = math.sqrt(max(q, 0.0))
    lam_part, eta_part = fn.splits(vals)
    membership = lam_part + eta_part
    max_res = fn.max_residual(vals)

    energy_matches = abs(energy - expected_energy) <= 1e-12 * (1.0 + abs(energy))
    nehari_ok = abs(membership) <= membership_tol * (1.0 + q * q)
    residual_ok = max_res <= residual_tol
    bounds = _bound_report(params, consts, norm_value, energy)
    passed = bool(energy_matches and nehari_ok and residual_ok and bounds.ok)
    return VerificationReport(passed=passed,
                              energy_recomputed=energy,
                              energy_matches=bool(energy_matches),
                              norm_recomputed=norm_value,
                              nehari_residual=membership,
                              nehari_ok=bool(nehari_ok),
                              max_pointwise_residual=max_res,
                              residual_ok=bool(residual_ok),
                              bounds=bounds)


@dataclass
class SweepRow:
    lam: float
    eta: float
    b: float
    status: str
    energy: float | None = None
    norm: float | None = None
    nehari_residual: float | None = None
    max_residual: float | None = None
    kappa: float | None = None
    bounds_ok: bool | None = None


def sweep(graph: WeightedGraph, base_params: EnergyParams,
          lambdas, etas, bs, opts: SolveOptions | None = None, *,
          domain: Domain | None = None):
    """Solve on the (lambda, eta, b) grid, grid-major order, one row each.

    The b-independent spectral work (eigensolve, sphere maximization) is
    done once and reused; per-row failures are recorded in the row status.
    """
    opts = opts or SolveOptions()
    fn = EnergyFunctional(graph, base_params, domain)
    base_consts = compute_constants(graph, kind=base_params.kind, domain=fn.domain, b=1.0)
    rows = []
    for lam in lambdas:
        for eta in etas:
            for b in bs:
                try:
                    params = replace(base_params, lam=float(lam), eta=float(eta), b=float(b))
                    consts = replace(base_consts, b=params.b,
                                     eta0=base_consts.eta0_at(params.b), kappa=None)
                    result = solve(graph, params, opts, domain=fn.domain, consts=consts)
                    rows.append(SweepRow(
                        lam=params.lam, eta=params.eta, b=params.b,
                        status=result.status,
                        energy=result.energy, norm=result.norm,
                        nehari_residual=result.nehari_residual,
                        max_residual=result.max_pointwise_residual,
                        kappa=result.bounds.kappa if result.bounds else None,
                        bounds_ok=result.bounds.ok if (result.bounds and result.bounds.applicable) else None,
                    ))
                except KgsError as exc:
                    rows.append(SweepRow(lam=float(lam), eta=float(eta), b=float(b),
                                         status=f"Error: {exc}"))
    return rows
