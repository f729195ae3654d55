"""Bounded extremal approximation on the annulus.

Best approximation of complex data on an arc of the inner circle by boundary
traces of the solution space, subject to an L^p budget on how far Re g may
stray from reference data on the rest of the boundary.  The budget always
binds when the data are not freely approximable, so the optimizer sits on
the constraint sphere and is found by a one-parameter search.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.optimize

from . import _parallel
from .areaops import AreaField, evaluate_circle, evaluate_points
from .dirichlet import ExteriorSolution, MasterNu, _trace_transform
from .domain import CircularDomain, build_polar_grid
from .errors import (
    BadData,
    BadResolution,
    BudgetUnreachable,
    GridMismatch,
    IllConditioned,
)
from .hardy_nu import GFunction, NuField, alpha_from_nu, bn_inverse, solve_G

__all__ = [
    "BasisElement",
    "TraceBasis",
    "BEPProblem",
    "BEPSolution",
    "arc_indices",
    "build_trace_basis",
    "solve_bep",
    "bep_sweep",
]


def _basis_probe(payload, idx: int):
    alpha, rtol, n, slots = payload
    chat = np.zeros(n, dtype=complex)
    chat[slots[idx // 2]] = 1.0 if idx % 2 == 0 else 1.0j
    w = solve_G(alpha, chat, rtol=rtol)
    return w.field.values


@dataclass(frozen=True)
class BasisElement:
    """One real-linear basis function with its boundary trace.

    ``k`` is the seed frequency (negative values come from the exterior
    chart and decay at infinity), ``phase`` distinguishes the seed 1 from
    the seed i.  Exactly one of ``inner``/``outer`` is set and can be
    evaluated anywhere on the closed annulus.
    """

    k: int
    phase: int
    inner: object
    outer: ExteriorSolution | None
    trace: np.ndarray  # (2, ntheta) on the outer and inner circles

    def residual(self) -> float:
        return self.inner.residual() if self.inner is not None else self.outer.residual()

    def evaluate(self, points) -> np.ndarray:
        if self.inner is not None:
            return evaluate_points(self.inner.field, points)
        return self.outer.evaluate(points)


@dataclass(frozen=True)
class TraceBasis:
    """Unit-normalized traces spanning a finite slice of the solution space.

    Element order: seeds z^0, iz^0, z^1, iz^1, ..., z^N, iz^N from the disk
    chart, then the exterior seeds for k = -1..-N in the same phase pairs.
    """

    domain: CircularDomain
    master: MasterNu
    elements: tuple
    gram: np.ndarray
    smallest_singular: float
    thetas: np.ndarray
    weights: np.ndarray  # (2, ntheta) arc-length quadrature weights

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def ntheta(self) -> int:
        return self.thetas.size

    def trace_matrix(self) -> np.ndarray:
        return np.stack([el.trace for el in self.elements])

    def evaluate(self, coeffs: np.ndarray, points) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.size,):
            raise GridMismatch(f"expected {self.size} coefficients, got {coeffs.shape}")
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.zeros(pts.shape, dtype=complex)
        for c, el in zip(coeffs, self.elements):
            if c != 0.0:
                out += c * el.evaluate(pts)
        return out

    def residuals(self) -> np.ndarray:
        return np.array([el.residual() for el in self.elements])


def build_trace_basis(domain: CircularDomain, nu, n_basis: int,
                      nr: int = 48, ntheta: int = 128,
                      workers: int | None = None, inner_rtol: float = 1e-12,
                      cond_floor: float = 1e-10) -> TraceBasis:
    """Boundary traces of the solutions seeded by z^k, k = -n_basis..n_basis.

    Nonnegative k comes from the disk chart, negative k from the exterior
    chart reflected through the hole, so every element extends past its
    circle and the two families jointly span trace space in the limit.
    Each element is scaled to unit L^2 norm on the full boundary.  nu must
    be usable on the whole plane (callable, builtin spec, or a MasterNu).
    """
    if domain.kind != "annulus":
        raise GridMismatch("trace bases are built on the annulus")
    if n_basis < 0 or 2 * (n_basis + 1) > ntheta:
        raise BadResolution(f"n_basis={n_basis} does not fit {ntheta} angular samples")
    rho = domain.rho
    master = nu if isinstance(nu, MasterNu) else MasterNu(domain, nu, fade=False)

    d_grid = build_polar_grid(nr, ntheta)
    nu_i = NuField.sample(d_grid, master)
    alpha_i = alpha_from_nu(nu_i)

    def nu_d(zeta):
        return master(rho / np.conj(zeta))

    e_grid = build_polar_grid(nr, ntheta)
    nu_e = NuField.sample(e_grid, nu_d)
    alpha_e = alpha_from_nu(nu_e)

    slots_i = list(range(n_basis + 1))
    slots_e = list(range(1, n_basis + 1))
    fields_i = _parallel.parallel_map(
        _basis_probe, (alpha_i, inner_rtol, ntheta, slots_i), 2 * len(slots_i), workers)
    fields_e = _parallel.parallel_map(
        _basis_probe, (alpha_e, inner_rtol, ntheta, slots_e), 2 * len(slots_e), workers)

    th = d_grid.thetas
    circle_T = np.exp(1j * th)
    nub_T = np.real(master(circle_T))
    nub_rho = np.real(master(rho * circle_T))
    weights = np.stack([
        np.full(ntheta, 2.0 * np.pi / ntheta),
        np.full(ntheta, 2.0 * np.pi * rho / ntheta),
    ])

    elements = []
    for idx, wv in enumerate(fields_i):
        af = AreaField(d_grid, wv)
        tr = np.stack([
            _trace_transform(evaluate_circle(af, 1.0), nub_T),
            _trace_transform(evaluate_circle(af, rho), nub_rho),
        ])
        nrm = float(np.sqrt(np.sum(weights * np.abs(tr) ** 2)))
        f_obj = bn_inverse(GFunction(AreaField(d_grid, wv / nrm), alpha_i), nu_i)
        elements.append(BasisElement(slots_i[idx // 2], idx % 2, f_obj, None, tr / nrm))
    for idx, wv in enumerate(fields_e):
        af = AreaField(e_grid, wv)
        w_T = evaluate_points(af, rho * circle_T)  # image of the unit circle
        w_rho = evaluate_circle(af, 1.0)           # image of the hole circle
        tr = np.stack([
            np.conj(_trace_transform(w_T, nub_T)),
            np.conj(_trace_transform(w_rho, nub_rho)),
        ])
        nrm = float(np.sqrt(np.sum(weights * np.abs(tr) ** 2)))
        f_d = bn_inverse(GFunction(AreaField(e_grid, wv / nrm), alpha_e), nu_e)
        ext = ExteriorSolution(0.0, rho, f_d)
        elements.append(BasisElement(-slots_e[idx // 2], idx % 2, None, ext, tr / nrm))

    traces = np.stack([el.trace for el in elements])
    weighted = traces * np.sqrt(weights)[None]
    gram = np.real(np.einsum("acn,bcn->ab", weighted, np.conj(weighted)))
    svals = np.linalg.eigvalsh(gram)
    smin = float(svals[0])
    if smin < cond_floor:
        raise IllConditioned(
            "trace basis spans nearly dependent directions; reduce n_basis", smin)
    return TraceBasis(domain, master, tuple(elements), gram, smin, th, weights)


def arc_indices(arcs, ntheta: int) -> np.ndarray:
    """Sample indices on a circle of ntheta uniform angles covered by arcs.

    Arcs are (start, end) in radians; start > end wraps through zero.
    Endpoints are inclusive up to a half-sample guard against ties.
    """
    th = 2.0 * np.pi * np.arange(ntheta) / ntheta
    mask = np.zeros(ntheta, dtype=bool)
    pad = 1e-12
    for a, b in arcs:
        a = float(a) % (2.0 * np.pi)
        b = float(b) % (2.0 * np.pi)
        if a <= b:
            mask |= (th >= a - pad) & (th <= b + pad)
        else:
            mask |= (th >= a - pad) | (th <= b + pad)
    return np.nonzero(mask)[0]


@dataclass(frozen=True)
class BEPProblem:
    """Approximation data for one budgeted fit.

    ``arcs`` select the inner-circle samples carrying the complex data
    ``f_data``; ``phi`` gives the real reference on the rest of the
    boundary ordered as (all outer samples, remaining inner samples).
    """

    domain: CircularDomain
    nu: object
    arcs: tuple
    f_data: np.ndarray
    phi: np.ndarray
    budget: float
    p: float = 2.0
    n_basis: int = 12
    ntheta: int = 128

    def __post_init__(self):
        if self.domain.kind != "annulus":
            raise GridMismatch("budgeted approximation runs on the annulus")
        if not self.budget > 0.0:
            raise BadData(f"budget must be positive, got {self.budget}")
        if not 1.0 < self.p < np.inf:
            raise BadData(f"p must lie in (1, inf), got {self.p}")
        idx_i = arc_indices(self.arcs, self.ntheta)
        if idx_i.size == 0:
            raise BadData("arcs select no inner-circle samples")
        object.__setattr__(self, "f_data", np.asarray(self.f_data, dtype=complex))
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        n_j = self.ntheta + (self.ntheta - idx_i.size)
        if self.f_data.shape != (idx_i.size,):
            raise BadData(f"f_data must have {idx_i.size} samples, got {self.f_data.shape}")
        if self.phi.shape != (n_j,):
            raise BadData(f"phi must have {n_j} samples, got {self.phi.shape}")
        if not (np.all(np.isfinite(self.f_data)) and np.all(np.isfinite(self.phi))):
            raise BadData("boundary data contains non-finite entries")

    def inner_indices(self) -> np.ndarray:
        return arc_indices(self.arcs, self.ntheta)


@dataclass(frozen=True)
class BEPSolution:
    coefficients: np.ndarray
    g_trace: np.ndarray  # (2, ntheta) on the outer and inner circles
    objective: float
    constraint: float
    lam: float
    saturated: bool
    basis: TraceBasis
    diagnostics: dict = dataclass_field(default_factory=dict)

    def evaluate(self, points) -> np.ndarray:
        return self.basis.evaluate(self.coefficients, points)


def _design(basis: TraceBasis, prob: BEPProblem):
    """Weighted real design matrices for the data and budget terms."""
    idx_i = prob.inner_indices()
    mask_j = np.ones(prob.ntheta, dtype=bool)
    mask_j[idx_i] = False
    traces = basis.trace_matrix()
    w = basis.weights

    tr_i = traces[:, 1, idx_i]
    sw_i = np.sqrt(w[1, idx_i])
    design = np.concatenate([tr_i.real * sw_i, tr_i.imag * sw_i], axis=1).T
    target = np.concatenate([prob.f_data.real * sw_i, prob.f_data.imag * sw_i])

    tr_j = np.concatenate([traces[:, 0, :], traces[:, 1, mask_j]], axis=1)
    sw_j = np.sqrt(np.concatenate([w[0], w[1, mask_j]]))
    budget_rows = (tr_j.real * sw_j).T
    budget_target = prob.phi * sw_j

    inner_w = w[1, idx_i]
    outer_w = np.concatenate([w[0], w[1, mask_j]])
    return design, target, budget_rows, budget_target, inner_w, outer_w, idx_i, mask_j


def _solve_lambda(design, target, budget_rows, budget_target, lam: float) -> np.ndarray:
    if lam == 0.0:
        return np.linalg.lstsq(design, target, rcond=None)[0]
    s = np.sqrt(lam)
    mat = np.vstack([design, s * budget_rows])
    rhs = np.concatenate([target, s * budget_target])
    return np.linalg.lstsq(mat, rhs, rcond=None)[0]


def _norm_p(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    return float(np.sum(weights * np.abs(values) ** p) ** (1.0 / p))


def solve_bep(prob: BEPProblem, basis: TraceBasis | None = None,
              nr: int = 48, workers: int | None = None,
              saturation_rtol: float = 1e-9, irls_maxiter: int = 80) -> BEPSolution:
    """Minimize the data misfit on the arcs under the boundary budget.

    For p = 2 the feasible case is a plain least-squares projection and the
    binding case is solved exactly by a root find in the multiplier; for
    other p the quadratic solve is wrapped in iteratively reweighted passes
    and the achieved stationarity residual is reported in diagnostics.
    """
    if basis is None:
        basis = build_trace_basis(prob.domain, prob.nu, prob.n_basis,
                                  nr=nr, ntheta=prob.ntheta, workers=workers)
    if basis.ntheta != prob.ntheta:
        raise GridMismatch("basis and problem use different angular resolutions")
    design, target, budget_rows, budget_target, w_i, w_j, idx_i, mask_j = \
        _design(basis, prob)
    M = prob.budget

    floor = np.linalg.lstsq(budget_rows, budget_target, rcond=None)[0]
    c_floor = float(np.linalg.norm(budget_rows @ floor - budget_target))
    if c_floor > M:
        raise BudgetUnreachable(
            f"no basis combination meets the budget ({c_floor:.6e} > {M:.6e}); "
            "enlarge the basis or the budget")

    if prob.p == 2.0:
        x, lam, iters = _solve_p2(design, target, budget_rows, budget_target,
                                  M, saturation_rtol)
        diag = {"solver_iterations": iters, "constraint_floor": c_floor,
                "gram_smallest_singular": basis.smallest_singular}
    else:
        x, lam, diag = _solve_irls(design, target, budget_rows, budget_target,
                                   w_i, w_j, prob, M, saturation_rtol, irls_maxiter)
        diag["constraint_floor"] = c_floor
        diag["gram_smallest_singular"] = basis.smallest_singular

    traces = basis.trace_matrix()
    g_trace = np.tensordot(x, traces, axes=1)
    g_i = g_trace[1, idx_i]
    g_j = np.concatenate([g_trace[0].real, g_trace[1, mask_j].real])
    objective = _norm_p(prob.f_data - g_i, w_i, prob.p)
    constraint = _norm_p(g_j - prob.phi, w_j, prob.p)
    saturated = lam > 0.0
    return BEPSolution(x, g_trace, objective, constraint, lam, saturated, basis, diag)


def _solve_p2(design, target, budget_rows, budget_target, M, rtol):
    x0 = _solve_lambda(design, target, budget_rows, budget_target, 0.0)
    c0 = float(np.linalg.norm(budget_rows @ x0 - budget_target))
    if c0 <= M * (1.0 + 1e-9):
        return x0, 0.0, 0

    def gap(lam: float) -> float:
        x = _solve_lambda(design, target, budget_rows, budget_target, lam)
        return float(np.linalg.norm(budget_rows @ x - budget_target)) - M

    lo, hi = 1e-14, 1e-10
    while gap(lo) < 0.0:
        lo *= 1e-2  # multiplier smaller than floating point resolution
        if lo < 1e-90:
            return x0, 0.0, 0
    evals = 1
    while gap(hi) > 0.0:
        lo, hi = hi, hi * 16.0
        evals += 1
        if hi > 1e30:
            raise BudgetUnreachable(
                "constraint does not fall to the budget along the multiplier path")
    lam = scipy.optimize.brentq(gap, lo, hi, rtol=1e-14, maxiter=300)
    x = _solve_lambda(design, target, budget_rows, budget_target, lam)
    c = float(np.linalg.norm(budget_rows @ x - budget_target))
    if abs(c - M) > max(rtol, 1e-6) * M:
        raise BudgetUnreachable(
            f"multiplier search stalled at constraint {c:.6e} for budget {M:.6e}")
    return x, float(lam), evals


def _solve_irls(design, target, budget_rows, budget_target, w_i, w_j,
                prob, M, rtol, maxiter):
    """Reweighted quadratic passes for p != 2 with a true-norm budget line."""
    p = prob.p
    n_i = w_i.size
    eps = 1e-12

    def complex_residual(x):
        fit = design @ x
        r = (target[:n_i] - fit[:n_i]) + 1j * (target[n_i:] - fit[n_i:])
        return r / np.sqrt(w_i)  # back to unweighted samples

    def budget_residual(x):
        return (budget_rows @ x - budget_target) / np.sqrt(w_j)

    x = _solve_lambda(design, target, budget_rows, budget_target, 0.0)
    lam = 0.0
    for it in range(maxiter):
        r_abs2 = np.abs(complex_residual(x)) ** 2
        s_abs2 = np.abs(budget_residual(x)) ** 2
        if p < 2.0:
            # tighten the smoothing as the small residuals reveal themselves
            live = np.concatenate([r_abs2, s_abs2])
            eps = max(1e-14, min(eps, 1e-2 * np.quantile(live, 0.25)))
        u = (r_abs2 + eps) ** ((p - 2.0) / 4.0)
        v = (s_abs2 + eps) ** ((p - 2.0) / 4.0)
        d_w = design * np.concatenate([u, u])[:, None]
        t_w = target * np.concatenate([u, u])
        b_w = budget_rows * v[:, None]
        bt_w = budget_target * v

        x_free = _solve_lambda(d_w, t_w, b_w, bt_w, 0.0)
        if _norm_p(budget_residual(x_free), w_j, p) <= M * (1.0 + 1e-9):
            x_new, lam = x_free, 0.0
        else:
            def gap(lam_try: float) -> float:
                xt = _solve_lambda(d_w, t_w, b_w, bt_w, lam_try)
                return _norm_p(budget_residual(xt), w_j, p) - M

            lo, hi = 1e-14, 1.0
            while gap(hi) > 0.0 and hi < 1e30:
                hi *= 16.0
            if hi >= 1e30:
                raise BudgetUnreachable(
                    "reweighted budget line does not reach the target")
            lam = scipy.optimize.brentq(gap, lo, hi, rtol=1e-13, maxiter=200)
            x_new = _solve_lambda(d_w, t_w, b_w, bt_w, lam)
        step = np.linalg.norm(x_new - x) / max(np.linalg.norm(x_new), 1e-300)
        # reweighting overshoots for p > 2, where averaging keeps it
        # contractive; below 2 the plain update already descends
        x = 0.5 * (x + x_new) if p > 2.0 else x_new
        if step < 1e-11:
            break
    x = x_new  # last iterate that sits exactly on the budget line

    r = complex_residual(x)
    coef = np.sqrt(w_i) * np.abs(r) ** (p - 2.0)
    gO = -p * (design[:n_i].T @ (coef * r.real) + design[n_i:].T @ (coef * r.imag))
    br = budget_residual(x)
    gC = p * (budget_rows.T @ (np.sqrt(w_j) * np.abs(br) ** (p - 2.0) * br))
    denom = float(gC @ gC)
    mu = max(0.0, -float(gO @ gC) / denom) if denom > 0 else 0.0
    kkt = float(np.linalg.norm(gO + mu * gC) /
                max(np.linalg.norm(gO), mu * np.linalg.norm(gC), 1e-300))
    return x, float(lam), {"irls_iterations": it + 1, "kkt_residual": kkt}


def bep_sweep(prob: BEPProblem, budgets, basis: TraceBasis | None = None,
              nr: int = 48, workers: int | None = None) -> np.ndarray:
    """Re-solve the problem over a budget schedule; rows are
    (budget, objective, constraint, multiplier)."""
    if basis is None:
        basis = build_trace_basis(prob.domain, prob.nu, prob.n_basis,
                                  nr=nr, ntheta=prob.ntheta, workers=workers)
    rows = []
    for M in budgets:
        sub = BEPProblem(prob.domain, prob.nu, prob.arcs, prob.f_data, prob.phi,
                         float(M), prob.p, prob.n_basis, prob.ntheta)
        sol = solve_bep(sub, basis=basis)
        rows.append([float(M), sol.objective, sol.constraint, sol.lam])
    return np.array(rows)
