"""Dilatation fields, the algebraic transform between the two first-order
systems, multiplicative factorization, Hardy norms, and the integral-equation
solver.

A real dilatation nu with |nu| <= kappa < 1 couples two pictures of the same
problem: solutions f = u + iv of

    dbar(f) = nu * conj(dz(f))                                   (first kind)

and solutions w of

    dbar(w) = alpha * conj(w),   alpha = -dbar(nu)/(1 - nu^2),   (second kind)

linked pointwise by w = (f - nu*conj(f))/sqrt(1 - nu^2), which also reads
w = sigma^(1/2) u + i sigma^(-1/2) v with sigma = (1-nu)/(1+nu).  Real parts
u then solve div(sigma grad u) = 0.

Solutions of the second kind are parameterized by holomorphic functions g
through (I - T_alpha) w = g with T_alpha h = cauchy_area(alpha * conj(h)),
solved here by restarted GMRES on the real-linearized system.  Every w
factors as w = e^s F with F holomorphic and Im s constant on each boundary
circle; the constants sum to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse.linalg

from .areaops import (
    AreaField,
    apply_T_alpha,
    cauchy_area,
    dbar,
    dz,
    evaluate_circle,
)
from .circfft import analytic_completion_coeffs, annulus_harmonic_parts, circle_norm, freqs
from .domain import CircularDomain, CollarFamily, PolarGrid, collar_circles
from .errors import GridMismatch, KappaViolated, NoConvergence, ZeroField

__all__ = [
    "NuField",
    "SigmaField",
    "BeltramiFunction",
    "GFunction",
    "Factorization",
    "builtin_nu",
    "alpha_from_nu",
    "sigma_from_nu",
    "bn_forward",
    "bn_inverse",
    "field_from_boundary_coeffs",
    "solve_G",
    "factorize",
    "hardy_norm",
]


@dataclass(frozen=True)
class NuField:
    """Real dilatation samples on a polar grid with ellipticity bound kappa.

    ``sobolev_r`` is metadata: the declared Sobolev exponent of nu, used only
    to warn when a requested Lebesgue exponent p falls at or below its
    conjugate r/(r-1), the regime outside the theory.
    """

    grid: PolarGrid
    values: np.ndarray
    kappa: float
    sobolev_r: float = np.inf

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nr, self.grid.ntheta):
            raise GridMismatch("nu samples do not match the grid shape")
        object.__setattr__(self, "values", vals)
        top = float(np.abs(vals).max()) if vals.size else 0.0
        if not (0.0 <= self.kappa < 1.0):
            raise KappaViolated(f"kappa must lie in [0, 1), got {self.kappa}")
        if top > self.kappa + 1e-12:
            raise KappaViolated(
                f"max |nu| = {top:.6g} exceeds the declared kappa = {self.kappa}"
            )

    @classmethod
    def sample(cls, grid: PolarGrid, fn, kappa: float | None = None, sobolev_r: float = np.inf):
        vals = np.real(np.asarray(fn(grid.nodes()), dtype=complex))
        top = float(np.abs(vals).max())
        if top >= 1.0:
            raise KappaViolated(f"sampled |nu| reaches {top:.6g} >= 1")
        if kappa is None:
            kappa = top
        return cls(grid, vals, kappa, sobolev_r)

    def check_exponent(self, p: float) -> None:
        if np.isfinite(self.sobolev_r):
            floor = self.sobolev_r / (self.sobolev_r - 1.0)
            if p <= floor:
                warnings.warn(
                    f"p = {p} is at or below r/(r-1) = {floor:.4g} for the declared "
                    f"Sobolev exponent r = {self.sobolev_r}; results are outside the "
                    "proven regime",
                    stacklevel=2,
                )


@dataclass(frozen=True)
class SigmaField:
    """Positive conductivity samples with recorded ellipticity bounds."""

    grid: PolarGrid
    values: np.ndarray
    bounds: tuple[float, float]

    @classmethod
    def from_nu(cls, nu: NuField) -> "SigmaField":
        vals = (1.0 - nu.values) / (1.0 + nu.values)
        return cls(nu.grid, vals, (float(vals.min()), float(vals.max())))


def sigma_from_nu(nu_values: np.ndarray) -> np.ndarray:
    return (1.0 - nu_values) / (1.0 + nu_values)


@dataclass(frozen=True)
class BeltramiFunction:
    """Samples of f = u + iv with its dilatation; tag records trace norms.

    tag: "none", "zero-mean-im" (imaginary part of the trace has zero mean),
    or "zero-mean" (the full trace does).
    """

    field: AreaField
    nu: NuField
    tag: str = "none"

    def residual(self) -> float:
        """Relative size of dbar(f) - nu*conj(dz(f)) against ||dz(f)||.

        The norm of f itself joins the denominator floor so that constants,
        whose two derivatives are the same rounding dust, report ~0."""
        lhs = dbar(self.field).values - self.nu.values * np.conj(dz(self.field).values)
        denom = AreaField(self.field.grid, dz(self.field).values).norm()
        return AreaField(self.field.grid, lhs).norm() / max(denom, self.field.norm(), 1e-300)

    def trace(self, r: float, ntheta_out: int | None = None) -> np.ndarray:
        return evaluate_circle(self.field, r, ntheta_out)


@dataclass(frozen=True)
class GFunction:
    """Samples of w with its coefficient field alpha and solver diagnostics."""

    field: AreaField
    alpha: AreaField
    iterations: int = 0
    solve_residual: float = 0.0

    def residual(self) -> float:
        """Relative size of dbar(w) - alpha*conj(w) against ||w||."""
        lhs = dbar(self.field).values - self.alpha.values * np.conj(self.field.values)
        return AreaField(self.field.grid, lhs).norm() / max(self.field.norm(), 1e-300)

    def trace(self, r: float, ntheta_out: int | None = None) -> np.ndarray:
        return evaluate_circle(self.field, r, ntheta_out)


# ---------------------------------------------------------------- builders


def builtin_nu(spec: str):
    """Named dilatation fields usable from configs and tests.

    Formats (z complex, r = |z|, x = Re z):
      "const:c"                nu = c
      "radial:c0,c1,..."       nu = c0 + c1 r^2 + c2 r^4 + ...
      "bump:a,center,width"    nu = a * exp(-|z - center|^2 / width^2)
      "xlinear:a"              nu = a * x
    Returns a callable of complex points.
    """
    kind, _, rest = spec.partition(":")
    parts = [p.strip() for p in rest.split(",")] if rest else []
    if kind == "const":
        c = float(parts[0])
        return lambda z: np.full(np.shape(z), c, dtype=float)
    if kind == "radial":
        coeffs = [float(p) for p in parts]
        def fn(z, c=tuple(coeffs)):
            r2 = np.abs(z) ** 2
            out = np.zeros_like(r2)
            for k, ck in enumerate(c):
                out = out + ck * r2**k
            return out
        return fn
    if kind == "bump":
        a = float(parts[0])
        center = complex(parts[1])
        width = float(parts[2])
        return lambda z: a * np.exp(-np.abs(z - center) ** 2 / width**2)
    if kind == "xlinear":
        a = float(parts[0])
        return lambda z: a * np.real(z)
    raise ValueError(f"unknown nu field spec {spec!r}")


def alpha_from_nu(nu: NuField) -> AreaField:
    """alpha = -dbar(nu) / (1 - nu^2), by spectral differentiation."""
    if np.abs(nu.values).max() >= 1.0:
        raise KappaViolated("|nu| reaches 1 on the grid")
    dn = dbar(AreaField(nu.grid, nu.values.astype(complex)))
    return AreaField(nu.grid, -dn.values / (1.0 - nu.values**2))


def bn_forward(f: BeltramiFunction) -> GFunction:
    """w = (f - nu*conj(f)) / sqrt(1 - nu^2) = sigma^(1/2) u + i sigma^(-1/2) v."""
    nu = f.nu.values
    w = (f.field.values - nu * np.conj(f.field.values)) / np.sqrt(1.0 - nu**2)
    return GFunction(AreaField(f.field.grid, w), alpha_from_nu(f.nu))


def bn_inverse(w: GFunction, nu: NuField) -> BeltramiFunction:
    """f = (w + nu*conj(w)) / sqrt(1 - nu^2); inverse of bn_forward."""
    if not w.field.grid.same_layout(nu.grid):
        raise GridMismatch("w and nu live on different grids")
    nv = nu.values
    f = (w.field.values + nv * np.conj(w.field.values)) / np.sqrt(1.0 - nv**2)
    return BeltramiFunction(AreaField(nu.grid, f), nu)


def field_from_boundary_coeffs(grid: PolarGrid, coeffs: np.ndarray) -> AreaField:
    """Holomorphic field from FFT-slot boundary coefficients on the unit circle.

    Positive slots extend as r^k z-powers; negative slots (Laurent part) are
    admitted only on annulus grids.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (grid.ntheta,):
        raise GridMismatch("coefficient count must equal the grid's ntheta")
    m = freqs(grid.ntheta)
    if grid.r_inner == 0.0 and np.any((m < 0) & (np.abs(c) > 0)):
        raise GridMismatch("negative-power coefficients on a disk grid")
    # unused slots would still overflow r**m for large negative m; mask them out
    m_eff = np.where(c == 0, 0, m)
    profiles = grid.radii[:, None] ** m_eff[None, :] * c[None, :]
    return AreaField(grid, np.fft.ifft(profiles * grid.ntheta, axis=1))


# ------------------------------------------------------------------ solver


def solve_G(
    alpha: AreaField,
    g,
    rtol: float = 1e-10,
    restart: int = 50,
    maxiter: int = 2000,
) -> GFunction:
    """Solve (I - T_alpha) w = g by GMRES on the real-linearized system.

    ``g`` is a holomorphic AreaField, a FourierBoundary, or a 1-D array of
    FFT-slot boundary coefficients (expanded by field_from_boundary_coeffs).
    T_alpha is antilinear, so the unknown is split into real and imaginary
    parts, on which the operator acts linearly.
    """
    grid = alpha.grid
    if hasattr(g, "coeffs"):
        g = field_from_boundary_coeffs(grid, np.asarray(g.coeffs, dtype=complex))
    elif isinstance(g, np.ndarray) and g.ndim == 1:
        g = field_from_boundary_coeffs(grid, g)
    if not g.grid.same_layout(grid):
        raise GridMismatch("alpha and g live on different grids")

    nr, nt = grid.nr, grid.ntheta
    size = nr * nt

    def matvec(x):
        w = (x[:size] + 1j * x[size:]).reshape(nr, nt)
        t = apply_T_alpha(alpha, AreaField(grid, w)).values
        y = w - t
        return np.concatenate([y.real.ravel(), y.imag.ravel()])

    op = scipy.sparse.linalg.LinearOperator((2 * size, 2 * size), matvec=matvec)
    b = np.concatenate([g.values.real.ravel(), g.values.imag.ravel()])
    counter = {"n": 0}

    def cb(_):
        counter["n"] += 1

    x, info = scipy.sparse.linalg.gmres(
        op, b, rtol=rtol, atol=0.0, restart=restart, maxiter=maxiter, callback=cb,
        callback_type="pr_norm",
    )
    res = float(np.linalg.norm(matvec(x) - b) / max(np.linalg.norm(b), 1e-300))
    if info > 0 or res > 10.0 * rtol:
        raise NoConvergence("GMRES stalled on (I - T_alpha)", counter["n"], res)
    w = (x[:size] + 1j * x[size:]).reshape(nr, nt)
    return GFunction(AreaField(grid, w), alpha, counter["n"], res)


# ----------------------------------------------------------- factorization


@dataclass(frozen=True)
class Factorization:
    """w = e^s * F with F holomorphic; Im s constant per boundary circle.

    ``constants`` lists those boundary constants (outer circle first); they
    sum to zero.
    """

    w: AreaField
    s: AreaField
    F: AreaField
    constants: tuple[float, ...]

    def identity_error(self) -> float:
        resid = np.exp(self.s.values) * self.F.values - self.w.values
        return float(np.abs(resid).max() / np.abs(self.w.values).max())

    def holomorphy_residual(self) -> float:
        return AreaField(self.F.grid, dbar(self.F).values).norm() / max(
            self.F.norm(), 1e-300
        )

    def boundary_im_spread(self) -> float:
        """Largest per-circle standard deviation of Im s on the boundary."""
        g = self.s.grid
        radii = [g.r_outer] + ([g.r_inner] if g.r_inner > 0.0 else [])
        worst = 0.0
        for r in radii:
            tr = evaluate_circle(self.s, r)
            worst = max(worst, float(np.std(tr.imag)))
        return worst


def factorize(w: GFunction) -> Factorization:
    """Multiplicative factorization w = e^s F.

    s is the area Cauchy transform of (conj(w)/w) * alpha (zero where |w|
    vanishes to rounding), shifted by a holomorphic correction so that Im s
    is constant on each boundary circle with constants summing to zero.
    dbar(s) = (conj(w)/w) alpha makes F = e^(-s) w satisfy dbar(F) = 0.
    """
    grid = w.field.grid
    vals = w.field.values
    top = float(np.abs(vals).max())
    if top == 0.0:
        raise ZeroField("cannot factorize the zero function")
    mask = np.abs(vals) >= 1e-14 * top
    ratio = np.zeros_like(vals)
    np.divide(np.conj(vals), vals, out=ratio, where=mask)
    lam = cauchy_area(AreaField(grid, ratio * w.alpha.values))

    # area_weights carry the angular factor; the region area is their sum * ntheta
    area = float(np.sum(grid.area_weights)) * grid.ntheta
    mean = complex(np.sum(grid.area_weights[:, None] * lam.values)) / area
    s0 = lam.values - mean

    if grid.r_inner == 0.0:
        ims = evaluate_circle(AreaField(grid, s0), grid.r_outer).imag
        coeffs = analytic_completion_coeffs(ims)
        G = field_from_boundary_coeffs(grid, coeffs)
        s_vals = s0 - 1j * G.values
        constants = (0.0,)
    else:
        ims_out = evaluate_circle(AreaField(grid, s0), grid.r_outer).imag
        ims_in = evaluate_circle(AreaField(grid, s0), grid.r_inner).imag
        b, F_h = annulus_harmonic_parts(ims_out, ims_in, grid)
        delta = 0.5 * b * np.log(grid.r_inner / grid.r_outer)
        s_vals = s0 - 1j * (F_h + delta)
        constants = (-delta, float(b * np.log(grid.r_inner / grid.r_outer) - delta))

    s = AreaField(grid, s_vals)
    F = AreaField(grid, np.exp(-s_vals) * vals)
    return Factorization(w.field, s, F, constants)


# ------------------------------------------------------------- Hardy norms


def hardy_norm(
    field,
    domain: CircularDomain,
    p: float = 2.0,
    collars: CollarFamily | None = None,
) -> float:
    """Hardy-style norm: max over collar circles of the L^p circle norm.

    ``field`` may be an AreaField or any wrapper exposing one as ``.field``.
    Collar circles default to epsilon in (0.3, 0.1, 0.03, 0.01).
    """
    f = field.field if hasattr(field, "field") else field
    if collars is None:
        collars = collar_circles(domain, (0.3, 0.1, 0.03, 0.01))
    best = 0.0
    for _comp, center, radius in collars.circles():
        if center != 0:
            raise GridMismatch("collar evaluation needs origin-centered circles")
        vals = evaluate_circle(f, radius)
        best = max(best, circle_norm(vals, p))
    return best
