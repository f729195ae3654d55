"""Dirichlet solvers for the conductivity equation on circular domains.

Boundary data are real traces on each boundary circle.  Solutions are
represented through the associated first-order system: a single-valued
complex part carried on a polar grid plus, for each hole, an explicit
logarithmic template whose coefficient carries the flux period exactly.

The disk is solved by completing the trace unknowns holomorphically, so at
nu = 0 the forward map is the identity and the iterative path converges at
once.  The annulus is solved natively on its own grid with a Laurent
parameterization preconditioned by the harmonic completion.  General
multiply connected domains superpose per-component disk solvers (holes are
handled through reflection onto a unit disk) coupled by their boundary
traces; the coupling blocks are smoothing, so a dense least-squares solve
over all component traces is robust and its min-norm solution fixes the
piecewise-constant kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import _parallel
from .areaops import AreaField, cauchy_area, dbar, dz, evaluate_circle, evaluate_points
from .circfft import BoundaryTrace, analytic_completion_coeffs, freqs
from .domain import CircularDomain, PolarGrid, build_domain, build_polar_grid, omega_grid
from .errors import (
    BadData,
    CompatibilityViolated,
    GridMismatch,
    NoConvergence,
    SingularSystem,
)
from .hardy_nu import (
    BeltramiFunction,
    GFunction,
    NuField,
    alpha_from_nu,
    bn_inverse,
    builtin_nu,
    field_from_boundary_coeffs,
    solve_G,
)

# --------------------------------------------------------- trace coordinates
#
# All dense solvers work in Nyquist-free real Fourier coordinates of circle
# samples: the unresolved +-ntheta/2 mode has no conjugate partner on the
# grid, so it is dropped from both unknowns and equations.


def _real_dofs(values: np.ndarray) -> np.ndarray:
    """[a_0, Re a_1, Im a_1, ...] for real samples; Nyquist dropped."""
    n = values.shape[0]
    hat = np.fft.fft(values) / n
    out = np.empty(n - 1)
    out[0] = hat[0].real
    out[1::2] = hat[1 : n // 2].real
    out[2::2] = hat[1 : n // 2].imag
    return out


def _dof_samples(dofs: np.ndarray, n: int) -> np.ndarray:
    hat = np.zeros(n, dtype=complex)
    hat[0] = dofs[0]
    hat[1 : n // 2] = dofs[1::2] + 1j * dofs[2::2]
    hat[n // 2 + 1 :] = np.conj(hat[1 : n // 2][::-1])
    return np.fft.ifft(hat * n).real


def _check_finite(arr, what: str) -> np.ndarray:
    arr = np.asarray(arr)
    if not np.all(np.isfinite(arr)):
        raise BadData(f"{what} contains NaN or infinite entries")
    return arr


# ------------------------------------------------------------- nu extension


def _flat_step(t: np.ndarray) -> np.ndarray:
    """Smooth 0-to-1 ramp on [0, 1], flat to all orders at both ends."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


class MasterNu:
    """Dilatation on the whole plane that agrees with nu on the domain.

    A formula (callable or builtin spec string) acts as its own extension
    inside the holes; beyond the unit circle it is faded to its mean on the
    circle, with a ramp that is flat to all orders at |z| = 1, so reflected
    solvers see a field smooth up to infinity and nothing changes on the
    domain itself.

    Sampled data (a NuField on the disk or annulus grid) are extended per
    component by circle reflection, faded to the component boundary mean
    over the inner half of a collar of width min(r_j, gap)/2, and the fill
    is clipped to +/-(kappa - (1-kappa)/10).

    ``fade=False`` turns the far-field ramp off for formulas the caller
    knows to be admissible on the whole plane; reflected charts then see
    the raw formula, which they resolve much better than the ramp.
    """

    far_width = 0.5

    def __init__(self, domain: CircularDomain, source, kappa: float | None = None,
                 fade: bool = True):
        self.domain = domain
        self._fn = None
        self._field = None
        self.fade = fade
        if isinstance(source, str):
            self._fn = builtin_nu(source)
            self.spec = source
        elif callable(source):
            self._fn = source
            self.spec = None
        elif isinstance(source, NuField):
            if domain.kind not in ("disk", "annulus"):
                raise GridMismatch("sampled dilatations extend only from disk or annulus grids")
            self._field = AreaField(source.grid, source.values.astype(complex))
            self._kappa_in = source.kappa
            self.spec = None
        else:
            raise BadData(f"cannot interpret dilatation source of type {type(source)!r}")

        th = 2.0 * np.pi * np.arange(512) / 512
        circle = np.exp(1j * th)
        if self._fn is not None:
            self.far_value = float(np.mean(np.real(self._fn(circle))))
            # cap the fade at the on-domain sup so the extension never grows
            # less admissible than the formula itself; on-domain values are
            # below the cap and pass through untouched
            probe = (np.linspace(0.0, 1.0, 33)[:, None] * circle[None, :]).ravel()
            dom_max = float(np.abs(np.real(self._fn(probe))).max())
            self.cap = min(max(dom_max, abs(self.far_value)), 1.0 - 1e-9)
        else:
            outer = np.real(evaluate_points(self._field, circle * self._field.grid.r_outer))
            self.far_value = float(np.mean(outer))
            kap = self._kappa_in
            self.cap = kap - (1.0 - kap) / 10.0 if kap > 0 else 0.0

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self._fn is not None:
            if not self.fade:
                # caller vouches for admissibility on the whole plane;
                # inadmissible samples still fail loudly downstream
                return np.real(np.asarray(self._fn(z), dtype=complex))
            chi = _flat_step((np.abs(z) - 1.0) / self.far_width)
            out = np.full(z.shape, self.far_value)
            near = chi < 1.0  # the formula is never evaluated past the fade
            if np.any(near):
                vals = np.real(np.asarray(self._fn(z[near]), dtype=complex))
                out[near] = (1.0 - chi[near]) * vals + chi[near] * self.far_value
            return np.clip(out, -self.cap, self.cap)
        return self._sampled(z)

    def _grid_values(self, pts: np.ndarray) -> np.ndarray:
        # radial clamp keeps reflected points that overshoot Omega evaluable
        g = self._field.grid
        r = np.clip(np.abs(pts), g.r_inner, g.r_outer)
        safe = r * np.exp(1j * np.angle(pts))
        safe[pts == 0] = g.r_inner
        return np.real(evaluate_points(self._field, safe))

    def _sampled(self, z: np.ndarray) -> np.ndarray:
        out = self._grid_values(z)
        filled = np.zeros(z.shape, dtype=bool)
        for center, radius in self.domain.holes:
            s = np.abs(z - center)
            inside = s < radius
            if not np.any(inside):
                continue
            w = 0.5 * min(radius, self.domain.min_gap)
            zi = z[inside]
            si = s[inside]
            mirrored = center + radius**2 / np.conj(zi - center)
            mirrored[si == 0] = center + 2.0 * radius  # reflection of the center
            refl = self._grid_values(mirrored)
            mean = float(np.mean(self._grid_values(center + radius * np.exp(1j * np.linspace(0, 2 * np.pi, 256, endpoint=False)))))
            # pure reflection on the outer half collar, fade inside it
            t = (si - (radius - w)) / w
            blend = _flat_step(2.0 * t - 1.0)
            out[inside] = blend * refl + (1.0 - blend) * mean
            filled |= inside
        far = np.abs(z) > 1.0
        if np.any(far):
            zf = z[far]
            refl = self._grid_values(1.0 / np.conj(zf))
            blend = 1.0 - _flat_step((np.abs(zf) - 1.0) / self.far_width)
            out[far] = blend * refl + (1.0 - blend) * self.far_value
            filled |= far
        out[filled] = np.clip(out[filled], -self.cap, self.cap)
        return out


@dataclass(frozen=True)
class NuExtension:
    """A component solver's dilatation: the filled field plus its source."""

    domain: CircularDomain
    component: int
    grid: PolarGrid
    field: NuField
    master: MasterNu


def _as_master(nu, domain: CircularDomain) -> MasterNu:
    if isinstance(nu, MasterNu):
        return nu
    return MasterNu(domain, nu)


def extend_nu(
    nu,
    domain: CircularDomain,
    component: int = 0,
    nr: int = 48,
    ntheta: int = 128,
    sobolev_r: float = np.inf,
) -> NuExtension:
    """Extend nu past the boundaries seen by one component's disk solver.

    Component 0 gets the unit disk with the holes filled; component j >= 1
    gets the unit disk in reflected coordinates zeta, where the hole's
    exterior point is a_j + r_j/conj(zeta).
    """
    master = _as_master(nu, domain)
    grid = build_polar_grid(nr, ntheta)
    if component == 0:
        fn = master
    else:
        center, radius = domain.holes[component - 1]

        def fn(zeta):
            return master(center + radius / np.conj(zeta))

    fld = NuField.sample(grid, fn, sobolev_r=sobolev_r)
    return NuExtension(domain, component, grid, fld, master)


# ---------------------------------------------------------------- disk core


def _trace_transform(tw: np.ndarray, nub: np.ndarray) -> np.ndarray:
    # boundary version of the field transform w -> f
    return (tw + nub * np.conj(tw)) / np.sqrt(1.0 - nub**2)


def _disk_probe(payload, idx: int):
    alpha, rtol, n = payload
    x = np.zeros(n, dtype=float)
    x[idx] = 1.0
    coeffs = analytic_completion_coeffs(_dof_samples(x[:-1], n), x[-1])
    w = solve_G(alpha, coeffs, rtol=rtol)
    return w.field.values


class DiskSolver:
    """Dirichlet solver on the unit disk.

    Unknowns are the Nyquist-free Fourier coordinates of Re tr f plus the
    mean of Im tr f; the forward map completes them holomorphically and
    solves the area system.  At nu = 0 the map is the identity, and for
    general nu it differs from it by a compact coupling, so both the
    matrix-free and the dense path stay well conditioned.
    """

    def __init__(self, nu: NuField, nu_boundary: np.ndarray, inner_rtol: float = 1e-12):
        self.grid = nu.grid
        if self.grid.r_inner != 0.0:
            raise GridMismatch("DiskSolver needs a disk grid")
        self.nu = nu
        self.alpha = alpha_from_nu(nu)
        self.nub = np.asarray(nu_boundary, dtype=float)
        if self.nub.shape != (self.grid.ntheta,):
            raise GridMismatch("boundary nu samples do not match ntheta")
        self.inner_rtol = inner_rtol
        self.size = self.grid.ntheta  # (ntheta - 1) trace dofs + the Im mean
        self._lu = None
        self._wstack = None

    # -- forward pieces

    def _trace_f(self, w_values: np.ndarray) -> np.ndarray:
        tw = evaluate_circle(AreaField(self.grid, w_values), 1.0)
        return _trace_transform(tw, self.nub)

    def _solve_w(self, x: np.ndarray) -> np.ndarray:
        n = self.grid.ntheta
        coeffs = analytic_completion_coeffs(_dof_samples(x[:-1], n), x[-1])
        return solve_G(self.alpha, coeffs, rtol=self.inner_rtol).field.values

    def _rows(self, w_values: np.ndarray) -> np.ndarray:
        tf = self._trace_f(w_values)
        return np.concatenate([_real_dofs(tf.real), [float(np.mean(tf.imag))]])

    def assemble(self, workers: int | None = None) -> None:
        if self._lu is not None:
            return
        payload = (self.alpha, self.inner_rtol, self.size)
        fields = _parallel.parallel_map(_disk_probe, payload, self.size, workers)
        self._wstack = np.stack(fields)
        mat = np.empty((self.size, self.size))
        for m, wv in enumerate(fields):
            mat[:, m] = self._rows(wv)
        self._lu = scipy.linalg.lu_factor(mat)

    @property
    def assembled(self) -> bool:
        return self._lu is not None

    def coefficients(self, data: np.ndarray, c: float = 0.0) -> np.ndarray:
        """Unknown vector for the given real boundary samples."""
        data = _check_finite(data, "boundary data")
        b = np.concatenate([_real_dofs(np.asarray(data, dtype=float)), [c]])
        if not np.any(b):
            return np.zeros(self.size)
        if self._lu is not None:
            return scipy.linalg.lu_solve(self._lu, b)
        op = scipy.sparse.linalg.LinearOperator(
            (self.size, self.size), matvec=lambda x: self._rows(self._solve_w(x))
        )
        x, info = scipy.sparse.linalg.gmres(
            op, b, x0=b.copy(), rtol=1e-10, atol=0.0,
            restart=min(self.size, 80), maxiter=6,
        )
        if info > 0:
            raise NoConvergence("outer trace system stalled on the disk", info, -1.0)
        return x

    def w_for(self, x: np.ndarray) -> np.ndarray:
        if self._wstack is not None:
            return np.tensordot(x, self._wstack, axes=1)
        return self._solve_w(x)

    def solve(self, data: np.ndarray, c: float = 0.0) -> BeltramiFunction:
        x = self.coefficients(data, c)
        wv = self.w_for(x)
        w = GFunction(AreaField(self.grid, wv), self.alpha)
        return bn_inverse(w, self.nu)


# ------------------------------------------------------------ annulus core


def _annulus_scale(slots: np.ndarray, rho: float) -> np.ndarray:
    # unit-peak Laurent profiles: negative modes are largest at the inner circle
    return np.where(slots < 0, rho ** (-slots.astype(float)), 1.0)


def _annulus_apply(payload, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Shared by probes and the matrix-free matvec: unknowns -> (w, beta)."""
    alpha, cq, slots, scale, rtol = payload
    n = alpha.grid.ntheta
    chat = np.zeros(n, dtype=complex)
    chat[slots != n // 2] = (x[0:-1:2] + 1j * x[1:-1:2]) * scale
    beta = float(x[-1])
    g = field_from_boundary_coeffs(alpha.grid, chat)
    rhs = AreaField(alpha.grid, g.values + beta * cq)
    w = solve_G(alpha, rhs, rtol=rtol)
    return w.field.values, beta


def _annulus_probe(payload, idx: int):
    size = 2 * (payload[0].grid.ntheta - 1) + 1
    x = np.zeros(size)
    x[idx] = 1.0
    wv, beta = _annulus_apply(payload, x)
    return wv


class AnnulusSolver:
    """Dirichlet solver on the annulus rho < |z| < 1, native grid.

    The single-valued part is parameterized by Laurent boundary coefficients
    and one real log-template coefficient beta carries the multivalued part;
    the flux period around the hole is 2*pi*beta by construction.  The
    iterative path right-preconditions with the harmonic completion, which
    inverts the nu = 0 operator exactly.
    """

    def __init__(self, domain: CircularDomain, nu, nr: int = 64, ntheta: int = 128,
                 inner_rtol: float = 1e-12):
        if domain.kind != "annulus":
            raise GridMismatch("AnnulusSolver needs an annulus domain")
        self.domain = domain
        self.rho = domain.rho
        self.master = _as_master(nu, domain)
        self.grid = omega_grid(domain, nr, ntheta)
        self.nu = NuField.sample(self.grid, self.master)
        self.alpha = alpha_from_nu(self.nu)
        th = self.grid.thetas
        self.nub_out = np.real(self.master(np.exp(1j * th)))
        self.nub_in = np.real(self.master(self.rho * np.exp(1j * th)))
        self.inner_rtol = inner_rtol
        n = ntheta
        self.slots = freqs(n)
        self.active = np.flatnonzero(self.slots != n // 2)
        self.scale = _annulus_scale(self.slots[self.active], self.rho)
        zz = self.grid.nodes()
        dd = np.sqrt(1.0 - self.nu.values**2)
        self.cq = cauchy_area(AreaField(self.grid, self.nu.values / (dd * np.conj(zz)))).values
        self.size = 2 * (n - 1) + 1
        self._lu = None
        self._wstack = None

    def _payload(self):
        return (self.alpha, self.cq, self.slots, self.scale, self.inner_rtol)

    def _rows(self, w_values: np.ndarray, beta: float) -> np.ndarray:
        tf_out = _trace_transform(evaluate_circle(AreaField(self.grid, w_values), 1.0), self.nub_out)
        tf_in = _trace_transform(evaluate_circle(AreaField(self.grid, w_values), self.rho), self.nub_in)
        u_in = tf_in.real + beta * np.log(self.rho)
        return np.concatenate([
            _real_dofs(tf_out.real), _real_dofs(u_in), [float(np.mean(tf_out.imag))],
        ])

    def _completion(self, y: np.ndarray) -> np.ndarray:
        """Exact inverse of the nu = 0 forward map; the right preconditioner."""
        n = self.grid.ntheta
        half = n // 2
        d_out, d_in, d_norm = y[: n - 1], y[n - 1 : 2 * (n - 1)], y[-1]
        ut = np.concatenate([[d_out[0] + 0j], d_out[1::2] + 1j * d_out[2::2]])
        ui = np.concatenate([[d_in[0] + 0j], d_in[1::2] + 1j * d_in[2::2]])
        chat = np.zeros(n, dtype=complex)
        chat[0] = ut[0].real + 1j * d_norm
        beta = (ui[0].real - ut[0].real) / np.log(self.rho)
        k = np.arange(1, half)
        rk = self.rho**k
        ck = 2.0 * (ut[1:] - ui[1:] * rk) / (1.0 - rk**2)
        cmk = np.conj(2.0 * ut[1:] - ck)
        chat[1:half] = ck
        chat[n - k] = cmk
        x = np.empty(self.size)
        packed = chat[self.active] / self.scale
        x[0:-1:2] = packed.real
        x[1:-1:2] = packed.imag
        x[-1] = beta
        return x

    def assemble(self, workers: int | None = None) -> None:
        if self._lu is not None:
            return
        payload = self._payload()
        fields = _parallel.parallel_map(_annulus_probe, payload, self.size, workers)
        self._wstack = np.stack(fields)
        mat = np.empty((self.size, self.size))
        for m, wv in enumerate(fields):
            beta = 1.0 if m == self.size - 1 else 0.0
            mat[:, m] = self._rows(wv, beta)
        self._lu = scipy.linalg.lu_factor(mat)

    @property
    def assembled(self) -> bool:
        return self._lu is not None

    def coefficients(self, u_out: np.ndarray, u_in: np.ndarray) -> np.ndarray:
        u_out = _check_finite(np.asarray(u_out, dtype=float), "outer boundary data")
        u_in = _check_finite(np.asarray(u_in, dtype=float), "inner boundary data")
        b = np.concatenate([_real_dofs(u_out), _real_dofs(u_in), [0.0]])
        if not np.any(b):
            return np.zeros(self.size)
        if self._lu is not None:
            return scipy.linalg.lu_solve(self._lu, b)
        payload = self._payload()

        def matvec(y):
            wv, beta = _annulus_apply(payload, self._completion(y))
            return self._rows(wv, beta)

        op = scipy.sparse.linalg.LinearOperator((self.size, self.size), matvec=matvec)
        y, info = scipy.sparse.linalg.gmres(
            op, b, x0=b.copy(), rtol=1e-10, atol=0.0,
            restart=min(self.size, 80), maxiter=6,
        )
        if info > 0:
            raise NoConvergence("outer trace system stalled on the annulus", info, -1.0)
        return self._completion(y)

    def solve_parts(self, u_out: np.ndarray, u_in: np.ndarray):
        x = self.coefficients(u_out, u_in)
        if self._wstack is not None:
            wv = np.tensordot(x, self._wstack, axes=1)
            beta = float(x[-1])
        else:
            wv, beta = _annulus_apply(self._payload(), x)
        w = GFunction(AreaField(self.grid, wv), self.alpha)
        return bn_inverse(w, self.nu), beta


# ------------------------------------------------------------ solution type


@dataclass(frozen=True)
class _FieldPart:
    """Single-valued complex part sampled in domain coordinates."""

    f: BeltramiFunction


@dataclass(frozen=True)
class _ReflectedPart:
    """Part solved on a reflected unit disk: f(z) = conj(f_d(r/conj(z - a)))."""

    f: BeltramiFunction  # f_d on the zeta-grid
    center: complex
    radius: float


def _part_u(part, z: np.ndarray) -> np.ndarray:
    if isinstance(part, _FieldPart):
        return evaluate_points(part.f.field, z).real
    zeta = part.radius / np.conj(z - part.center)
    return evaluate_points(part.f.field, zeta).real  # Re is preserved by conj


def _part_v(part, z: np.ndarray) -> np.ndarray:
    if isinstance(part, _FieldPart):
        return evaluate_points(part.f.field, z).imag
    zeta = part.radius / np.conj(z - part.center)
    return -evaluate_points(part.f.field, zeta).imag


def _part_component_du(part, derivs, z: np.ndarray, c: complex) -> np.ndarray:
    """Wirtinger d/dz of Re(c * f_part) at z; derivs = (dz f, dbar f) fields."""
    dzf, dbf = derivs
    if isinstance(part, _FieldPart):
        a = evaluate_points(dzf, z)
        b = evaluate_points(dbf, z)
        return 0.5 * (c * a + np.conj(c * b))
    zeta = part.radius / np.conj(z - part.center)
    a = evaluate_points(dzf, zeta)
    b = evaluate_points(dbf, zeta)
    # d/dz of g(r/conj(z-a)) picks up the antiholomorphic chain factor
    factor = -part.radius / (z - part.center) ** 2
    cc = np.conj(c)
    return 0.5 * (cc * b + np.conj(cc * a)) * factor


class ConductivitySolution:
    """Solution U of the conductivity equation with its flux templates.

    ``parts`` carry the single-valued complex pieces; ``betas`` scale the
    log|z - a_k| templates, one per hole, so the flux period around hole k
    is exactly 2*pi*betas[k].
    """

    def __init__(self, domain, parts, betas, data, nu=None, grid=None,
                 master=None, diagnostics=None):
        self.domain = domain
        self.parts = tuple(parts)
        self.betas = np.asarray(betas, dtype=float)
        self.centers = np.array([c for c, _ in domain.holes], dtype=complex)
        self.data = data
        self.nu = nu
        self.grid = grid
        self.master = master
        self.diagnostics = dict(diagnostics or {})
        self._derivs = {}

    def _part_derivs(self, part):
        key = id(part)
        if key not in self._derivs:
            self._derivs[key] = (dz(part.f.field), dbar(part.f.field))
        return self._derivs[key]

    def evaluate_u(self, points) -> np.ndarray:
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.zeros(z.shape, dtype=float)
        for part in self.parts:
            out += _part_u(part, z)
        for beta, a in zip(self.betas, self.centers):
            out += beta * np.log(np.abs(z - a))
        return out

    def evaluate_du(self, points) -> np.ndarray:
        """Wirtinger derivative of U; grad U = (2 Re, -2 Im) of this."""
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for part in self.parts:
            out += _part_component_du(part, self._part_derivs(part), z, 1.0 + 0j)
        for beta, a in zip(self.betas, self.centers):
            out += 0.5 * beta / (z - a)
        return out

    def evaluate_dv(self, points) -> np.ndarray:
        """Wirtinger derivative of the (locally defined) conjugate function."""
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for part in self.parts:
            out += _part_component_du(part, self._part_derivs(part), z, -1.0j)
        for beta, a in zip(self.betas, self.centers):
            out += -0.5j * beta / (z - a)
        return out

    @property
    def u_field(self) -> AreaField | None:
        """U on the domain grid, when the solution lives on a single grid."""
        if self.grid is None or len(self.parts) != 1 or not isinstance(self.parts[0], _FieldPart):
            return None
        vals = self.parts[0].f.field.values.real.copy()
        zz = self.grid.nodes()
        for beta, a in zip(self.betas, self.centers):
            vals += beta * np.log(np.abs(zz - a))
        return AreaField(self.grid, vals.astype(complex))

    def trace_u(self, component: int, ntheta: int | None = None) -> np.ndarray:
        center, radius = self.domain.components()[component]
        n = ntheta or (self.grid.ntheta if self.grid is not None else 256)
        th = 2.0 * np.pi * np.arange(n) / n
        pts = center + radius * np.exp(1j * th)
        own = None
        if self.grid is not None and len(self.parts) == 1:
            g = self.grid
            r_local = abs(radius) if center == 0 else None
            if r_local is not None and (abs(r_local - g.r_outer) < 1e-15 or abs(r_local - g.r_inner) < 1e-15):
                vals = evaluate_circle(self.parts[0].f.field, r_local, n).real
                for beta, a in zip(self.betas, self.centers):
                    vals += beta * np.log(np.abs(pts - a))
                own = vals
        return own if own is not None else self.evaluate_u(pts)

    def sigma_at(self, points) -> np.ndarray:
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        if self.master is not None:
            nu = self.master(z)
        else:
            nu = np.real(evaluate_points(AreaField(self.nu.grid, self.nu.values.astype(complex)), z))
        return (1.0 - nu) / (1.0 + nu)


# ------------------------------------------------------------- public entry


def _trace_matrix(data, domain: CircularDomain, ntheta: int) -> np.ndarray:
    if isinstance(data, BoundaryTrace):
        vals = data.values
        if np.abs(vals.imag).max() > 1e-13 * (1.0 + np.abs(vals.real).max()):
            raise BadData("Dirichlet data must be real")
        vals = vals.real
    else:
        vals = np.atleast_2d(np.asarray(data, dtype=float))
    if vals.shape != (domain.n_components, ntheta):
        raise GridMismatch(
            f"expected boundary data of shape {(domain.n_components, ntheta)}, got {vals.shape}"
        )
    return _check_finite(vals, "boundary data")


def solve_dirichlet_disk(nu, data, c: float = 0.0, nr: int = 64, ntheta: int = 128,
                         workers: int | None = None, dense: bool = False,
                         solver: DiskSolver | None = None) -> ConductivitySolution:
    """Solve the disk problem for real boundary samples; c is the Im mean."""
    domain = build_domain()
    if solver is None:
        grid = build_polar_grid(nr, ntheta)
        master = _as_master(nu, domain)
        nufield = NuField.sample(grid, master)
        nub = np.real(master(np.exp(1j * grid.thetas)))
        solver = DiskSolver(nufield, nub)
    else:
        master = getattr(solver, "_master", None)
    u = _trace_matrix(data, domain, solver.grid.ntheta)[0]
    if dense:
        solver.assemble(workers)
    f = solver.solve(u, c)
    tr_err = float(np.linalg.norm(f.trace(1.0).real - u) / max(np.linalg.norm(u), 1e-300))
    return ConductivitySolution(
        domain, [_FieldPart(f)], np.zeros(0), u[None, :], nu=solver.nu,
        grid=solver.grid, master=master if isinstance(master, MasterNu) else _as_master(nu, domain),
        diagnostics={"trace_error": tr_err},
    )


@dataclass(frozen=True)
class ExteriorSolution:
    """Solution on the exterior of a circle via reflection onto the unit disk."""

    center: complex
    radius: float
    f_d: BeltramiFunction
    diagnostics: dict = field(default_factory=dict)

    def evaluate(self, points) -> np.ndarray:
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        zeta = self.radius / np.conj(z - self.center)
        return np.conj(evaluate_points(self.f_d.field, zeta))

    def trace(self, ntheta: int | None = None) -> np.ndarray:
        return np.conj(evaluate_circle(self.f_d.field, 1.0, ntheta))

    def at_infinity(self) -> complex:
        return complex(np.conj(evaluate_points(self.f_d.field, np.array([0.0j]))[0]))

    def residual(self) -> float:
        # the reflected function satisfies the reflected equation exactly
        return self.f_d.residual()


def solve_dirichlet_exterior(nu, data, center: complex = 0.0, radius: float = 1.0,
                             c: float = 0.0, nr: int = 48, ntheta: int = 128,
                             normalize: str = "mean-im") -> ExteriorSolution:
    """Dirichlet problem outside a circle, data given against the angle of z - center.

    nu must be admissible on the exterior including infinity (it is sampled
    at the reflected points center + radius/conj(zeta)).  ``normalize`` is
    "mean-im" (keep the solver's Im mean c) or "im-at-infinity" (shift by an
    imaginary constant so Im f vanishes at infinity).
    """
    fn = builtin_nu(nu) if isinstance(nu, str) else nu
    grid = build_polar_grid(nr, ntheta)

    def nu_d(zeta):
        return fn(center + radius / np.conj(zeta))

    nufield = NuField.sample(grid, nu_d)
    nub = np.real(np.asarray(nu_d(np.exp(1j * grid.thetas)), dtype=complex))
    solver = DiskSolver(nufield, nub)
    u = np.asarray(data, dtype=float)
    f_d = solver.solve(u, c)  # Re trace passes through reflection unchanged
    if normalize == "im-at-infinity":
        shift = 1j * evaluate_points(f_d.field, np.array([0.0j]))[0].imag
        f_d = BeltramiFunction(AreaField(grid, f_d.field.values - shift), nufield, f_d.tag)
    elif normalize != "mean-im":
        raise BadData(f"unknown normalization {normalize!r}")
    tr_err = float(np.linalg.norm(f_d.trace(1.0).real - u) / max(np.linalg.norm(u), 1e-300))
    return ExteriorSolution(center, radius, f_d, {"trace_error": tr_err})


_CACHE: dict = {}


def _cached_solver(key, builder):
    if key is None:
        return builder()
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


def solve_dirichlet_multi(domain: CircularDomain, nu, data, nr: int = 64,
                          ntheta: int = 128, workers: int | None = None,
                          dense: bool | None = None) -> ConductivitySolution:
    """Dirichlet solver on disk, annulus, or a multiply connected domain.

    ``data``: real samples, one row per boundary component (row 0 the unit
    circle).  Builtin nu specs are cached per (domain, spec, resolution), so
    repeated solves reuse the assembled operators.
    """
    spec = nu if isinstance(nu, str) else getattr(nu, "spec", None)
    if domain.kind == "disk":
        key = ("disk", spec, nr, ntheta) if spec else None
        master = _as_master(nu, domain)

        def build():
            grid = build_polar_grid(nr, ntheta)
            nufield = NuField.sample(grid, master)
            nub = np.real(master(np.exp(1j * grid.thetas)))
            return DiskSolver(nufield, nub)

        solver = _cached_solver(key, build)
        u = _trace_matrix(data, domain, ntheta)
        if dense:
            solver.assemble(workers)
        sol = solve_dirichlet_disk(nu, u, solver=solver)
        sol.master = master
        return sol
    if domain.kind == "annulus":
        key = ("annulus", domain.rho, spec, nr, ntheta) if spec else None
        solver = _cached_solver(key, lambda: AnnulusSolver(domain, nu, nr, ntheta))
        if dense:
            solver.assemble(workers)
        u = _trace_matrix(data, domain, ntheta)
        f_sv, beta = solver.solve_parts(u[0], u[1])
        tr_out = f_sv.trace(1.0).real
        tr_in = f_sv.trace(domain.rho).real + beta * np.log(domain.rho)
        err = np.hypot(np.linalg.norm(tr_out - u[0]), np.linalg.norm(tr_in - u[1]))
        tr_err = float(err / max(np.linalg.norm(u.ravel()), 1e-300))
        return ConductivitySolution(
            domain, [_FieldPart(f_sv)], [beta], u, nu=solver.nu, grid=solver.grid,
            master=solver.master, diagnostics={"trace_error": tr_err},
        )
    key = ("multi", domain, spec, nr, ntheta) if spec else None
    family = _cached_solver(key, lambda: ComponentFamily(domain, nu, nr, ntheta))
    family.assemble(workers)
    u = _trace_matrix(data, domain, ntheta)
    return family.solve(u)


# ------------------------------------------------- multiply connected family


def _cap_profile(dist2: np.ndarray, radius: float) -> np.ndarray:
    # smooth floor active only well inside the hole; the relative deviation
    # outside it is (t0/t)^8 / 8 <= 1e-8 at the hole boundary for t0 = (0.36 r)^2
    t0 = (0.36 * radius) ** 2
    return (dist2**8 + t0**8) ** 0.125


class ComponentFamily:
    """Per-component disk solvers coupled through their boundary traces.

    Component 0 solves on the unit disk with the holes filled; each hole
    solves on a reflected unit disk.  Cross traces are assembled densely
    from the probe fields; the total system is solved by least squares,
    whose min-norm solution pins the piecewise-constant kernel.
    """

    def __init__(self, domain: CircularDomain, nu, nr: int = 48, ntheta: int = 128,
                 inner_rtol: float = 1e-12):
        self.domain = domain
        self.master = _as_master(nu, domain)
        self.nr, self.ntheta = nr, ntheta
        self.extensions = [
            extend_nu(self.master, domain, j, nr, ntheta)
            for j in range(domain.n_components)
        ]
        self.solvers = []
        for j, ext in enumerate(self.extensions):
            if j == 0:
                nub = np.real(self.master(np.exp(1j * ext.grid.thetas)))
            else:
                center, radius = domain.holes[j - 1]
                nub = np.real(self.master(center + radius * np.exp(1j * ext.grid.thetas)))
            self.solvers.append(DiskSolver(ext.field, nub, inner_rtol))
        self.inner_rtol = inner_rtol
        self._system = None
        self._period_parts = None

    # -- assembly

    def _circle_points(self, i: int) -> np.ndarray:
        center, radius = self.domain.components()[i]
        th = 2.0 * np.pi * np.arange(self.ntheta) / self.ntheta
        return center + radius * np.exp(1j * th)

    def _local_points(self, j: int, pts: np.ndarray) -> np.ndarray:
        if j == 0:
            return pts
        center, radius = self.domain.holes[j - 1]
        return radius / np.conj(pts - center)

    def _f_at(self, j: int, w_values: np.ndarray, loc: np.ndarray, nu_loc: np.ndarray) -> np.ndarray:
        wv = evaluate_points(AreaField(self.solvers[j].grid, w_values), loc)
        f = (wv + nu_loc * np.conj(wv)) / np.sqrt(1.0 - nu_loc**2)
        return f if j == 0 else np.conj(f)

    def _period_sources(self):
        """Template columns: one capped singular source per hole on component 0."""
        sol0 = self.solvers[0]
        zz = sol0.grid.nodes()
        dd = np.sqrt(1.0 - sol0.nu.values**2)
        parts = []
        for center, radius in self.domain.holes:
            d = zz - center
            q = sol0.nu.values * d / (dd * _cap_profile(np.abs(d) ** 2, radius))
            w = solve_G(sol0.alpha, cauchy_area(AreaField(sol0.grid, q)), rtol=self.inner_rtol)
            parts.append(bn_inverse(GFunction(w.field, sol0.alpha), sol0.nu))
        return parts

    def assemble(self, workers: int | None = None) -> None:
        if self._system is not None:
            return
        n_comp = self.domain.n_components
        nd = self.ntheta - 1  # trace dofs per circle
        for s in self.solvers:
            s.assemble(workers)
        self._period_parts = self._period_sources()
        # inverse columns for zero Im-mean data; the blocks are small and dense
        self._ainv = []
        for s in self.solvers:
            a = scipy.linalg.lu_solve(s._lu, np.eye(s.size))
            self._ainv.append(a[:, :nd])
        mat = np.zeros((n_comp * nd, n_comp * nd + self.domain.n_holes))
        for i in range(n_comp):
            pts = self._circle_points(i)
            rows = slice(i * nd, (i + 1) * nd)
            for j in range(n_comp):
                cols = slice(j * nd, (j + 1) * nd)
                if i == j:
                    mat[rows, cols] = np.eye(nd)  # own trace equals the data by construction
                    continue
                loc = self._local_points(j, pts)
                # nu in local coordinates equals nu at the physical points
                nu_loc = self.master(pts)
                k_block = np.empty((nd, self.solvers[j].size))
                for m in range(self.solvers[j].size):
                    fm = self._f_at(j, self.solvers[j]._wstack[m], loc, nu_loc)
                    k_block[:, m] = _real_dofs(fm.real)
                mat[rows, cols] = k_block @ self._ainv[j]
            for k, part in enumerate(self._period_parts):
                center, _ = self.domain.holes[k]
                fvals = evaluate_points(part.field, pts).real + np.log(np.abs(pts - center))
                mat[rows, n_comp * nd + k] = _real_dofs(fvals)
        self._system = mat

    def solve(self, traces: np.ndarray) -> ConductivitySolution:
        self.assemble()
        n_comp = self.domain.n_components
        nd = self.ntheta - 1
        b = np.concatenate([_real_dofs(traces[i]) for i in range(n_comp)])
        x, residuals, rank, svals = np.linalg.lstsq(self._system, b, rcond=None)
        if rank < self._system.shape[1] - self.domain.n_holes:
            raise SingularSystem("trace system rank collapsed", svals[-4:])
        betas = x[n_comp * nd :]
        parts = []
        fit = self._system @ x
        for j in range(n_comp):
            y = self._ainv[j] @ x[j * nd : (j + 1) * nd]
            wv = np.tensordot(y, self.solvers[j]._wstack, axes=1)
            fj = bn_inverse(GFunction(AreaField(self.solvers[j].grid, wv),
                                      self.solvers[j].alpha), self.solvers[j].nu)
            if j == 0:
                vals = fj.field.values + sum(
                    beta * part.field.values for beta, part in zip(betas, self._period_parts)
                )
                fj = BeltramiFunction(AreaField(fj.field.grid, vals), self.solvers[0].nu)
                parts.append(_FieldPart(fj))
            else:
                center, radius = self.domain.holes[j - 1]
                parts.append(_ReflectedPart(fj, center, radius))
        resid = float(np.linalg.norm(fit - b) / max(np.linalg.norm(b), 1e-300))
        return ConductivitySolution(
            self.domain, parts, betas, traces, nu=self.solvers[0].nu, grid=None,
            master=self.master,
            diagnostics={"trace_error": resid, "rank": int(rank),
                         "smallest_singular": float(svals[-1])},
        )


# ------------------------------------------------------------------ periods


@dataclass(frozen=True)
class PeriodVector:
    """Flux periods around each hole, probed on several concentric circles."""

    values: np.ndarray   # (n_holes,) mean over the probe radii
    spread: np.ndarray   # (n_holes,) max - min over the probe radii
    radii: np.ndarray    # (n_holes, n_radii)
    samples: np.ndarray  # (n_holes, n_radii)


def _hole_clearance(domain: CircularDomain, k: int) -> float:
    a, r = domain.holes[k]
    lim = 1.0 - abs(a) - r
    for j, (b, s) in enumerate(domain.holes):
        if j != k:
            lim = min(lim, abs(a - b) - s - r)
    return lim


def compute_periods(sol: ConductivitySolution, n_radii: int = 5,
                    ntheta: int = 256) -> PeriodVector:
    """Quadrature periods: the flux of sigma grad U through circles around
    each hole, which is homotopy invariant for exact solutions."""
    domain = sol.domain
    nh = domain.n_holes
    values = np.empty(nh)
    spread = np.empty(nh)
    radii = np.empty((nh, n_radii))
    samples = np.empty((nh, n_radii))
    th = 2.0 * np.pi * np.arange(ntheta) / ntheta
    ring = np.exp(1j * th)
    for k in range(nh):
        a, r = domain.holes[k]
        clearance = _hole_clearance(domain, k)
        rr = r + clearance * np.linspace(0.25, 0.75, n_radii)
        for i, radius in enumerate(rr):
            pts = a + radius * ring
            du = sol.evaluate_du(pts)
            sig = sol.sigma_at(pts)
            integrand = sig * 2.0 * np.real(du * ring) * radius
            samples[k, i] = float(np.mean(integrand) * 2.0 * np.pi)
        radii[k] = rr
        values[k] = samples[k].mean()
        spread[k] = samples[k].max() - samples[k].min()
    return PeriodVector(values, spread, radii, samples)


# ---------------------------------------------------- piecewise-constant span


@dataclass(frozen=True)
class SOmegaElement:
    """Solution with piecewise-constant boundary values C_j, sum C_j = 0."""

    constants: np.ndarray
    solution: ConductivitySolution
    periods: np.ndarray


def solve_S_omega(domain: CircularDomain, nu, target_periods, nr: int = 64,
                  ntheta: int = 128, workers: int | None = None) -> SOmegaElement:
    """Element of the piecewise-constant span whose flux periods match the target.

    Solves one Dirichlet problem per hole (indicator data) to build the
    period matrix, then one more with the matched combination.
    """
    target = np.asarray(target_periods, dtype=float)
    nh = domain.n_holes
    if target.shape != (nh,):
        raise GridMismatch(f"expected {nh} target periods, got shape {target.shape}")
    basis = []
    pmat = np.empty((nh, nh))
    for j in range(nh):
        data = np.zeros((domain.n_components, ntheta))
        data[j + 1] = 1.0
        solj = solve_dirichlet_multi(domain, nu, data, nr, ntheta, workers)
        basis.append(solj)
        pmat[:, j] = 2.0 * np.pi * solj.betas
    try:
        coeff = np.linalg.solve(pmat, target)
    except np.linalg.LinAlgError:
        raise SingularSystem("period matrix of the indicator basis is singular",
                             np.linalg.svd(pmat, compute_uv=False)[-2:])
    cond = np.linalg.cond(pmat)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularSystem("period matrix of the indicator basis is singular",
                             np.linalg.svd(pmat, compute_uv=False)[-2:])
    data = np.zeros((domain.n_components, ntheta))
    for j, c in enumerate(coeff):
        data[j + 1] = c
    sol = solve_dirichlet_multi(domain, nu, data, nr, ntheta, workers)
    # report the constants in the sum-zero normalization; U only shifts
    constants = np.concatenate([[0.0], coeff])
    constants -= constants.mean()
    return SOmegaElement(constants, sol, 2.0 * np.pi * sol.betas)


# -------------------------------------------------------------- conjugation


@dataclass(frozen=True)
class ConjugatePair:
    """U with its conjugate V, available when all flux periods vanish."""

    solution: ConductivitySolution
    v: AreaField
    f: BeltramiFunction
    v_trace: BoundaryTrace
    periods: np.ndarray


def conjugate_solution(sol: ConductivitySolution, tol: float = 1e-8) -> ConjugatePair:
    """Conjugate function of a solution; raises when the periods obstruct it.

    The multivalued remainder is bounded by the compatibility gate and is
    dropped from the returned single-valued representative.
    """
    unorm = float(np.sqrt(np.mean(np.asarray(sol.data, dtype=float) ** 2))) if sol.data is not None else 0.0
    lam = 2.0 * np.pi * sol.betas
    gate = tol * (1.0 + unorm)
    if sol.betas.size and np.abs(lam).max() > gate:
        quad = compute_periods(sol)
        raise CompatibilityViolated("nonzero flux periods obstruct the conjugate", quad.values)
    if sol.grid is None or len(sol.parts) != 1 or not isinstance(sol.parts[0], _FieldPart):
        raise GridMismatch("conjugation needs a single-grid solution (disk or annulus)")
    f_sv = sol.parts[0].f
    vvals = f_sv.field.values.imag.copy()
    vvals -= float(np.mean(evaluate_circle(f_sv.field, sol.grid.r_outer).imag))
    v = AreaField(sol.grid, vvals.astype(complex))
    f = BeltramiFunction(
        AreaField(sol.grid, f_sv.field.values.real + 1j * vvals), sol.nu, tag="zero-mean-im"
    )
    rows = []
    for center, radius in sol.domain.components():
        if center != 0:
            raise GridMismatch("conjugation needs concentric boundary circles")
        rows.append(evaluate_circle(f.field, radius).imag)
    v_trace = BoundaryTrace(sol.domain, np.asarray(rows, dtype=complex))
    return ConjugatePair(sol, v, f, v_trace, lam)


def sigma_hilbert(domain: CircularDomain, nu, data, nr: int = 64, ntheta: int = 128,
                  workers: int | None = None, tol: float = 1e-8) -> np.ndarray:
    """Trace-to-trace conjugation map: real data u to the trace of V.

    Defined on compatible data (vanishing periods).  Composing the map for
    sigma with the map for 1/sigma gives -u for zero-mean data.
    """
    sol = solve_dirichlet_multi(domain, nu, data, nr, ntheta, workers)
    pair = conjugate_solution(sol, tol)
    return pair.v_trace.values.real


# -------------------------------------------------------------- normal flux


@dataclass(frozen=True)
class BoundaryFlux:
    """sigma dU/dn on each boundary circle, n pointing out of the domain.

    ``totals`` integrate the density over each circle; they sum to zero.
    The flux period around hole k in the concentric (outward from the hole
    center) orientation is -totals[k+1].
    """

    domain: CircularDomain
    thetas: np.ndarray
    densities: np.ndarray  # (n_components, ntheta)
    totals: np.ndarray     # (n_components,)

    @property
    def periods(self) -> np.ndarray:
        return -self.totals[1:]

    def oscillatory(self, component: int) -> np.ndarray:
        return self.densities[component] - self.densities[component].mean()


def normal_flux(sol: ConductivitySolution, ntheta: int | None = None) -> BoundaryFlux:
    n = ntheta or (sol.grid.ntheta if sol.grid is not None else 256)
    th = 2.0 * np.pi * np.arange(n) / n
    ring = np.exp(1j * th)
    comps = sol.domain.components()
    densities = np.empty((len(comps), n))
    totals = np.empty(len(comps))
    for i, (center, radius) in enumerate(comps):
        pts = center + radius * ring
        du = sol.evaluate_du(pts)
        sig = sol.sigma_at(pts)
        normal = ring if i == 0 else -ring
        densities[i] = sig * 2.0 * np.real(du * normal)
        totals[i] = densities[i].mean() * 2.0 * np.pi * radius
    return BoundaryFlux(sol.domain, th, densities, totals)


# ----------------------------------------------------------- annulus split


@dataclass(frozen=True)
class AnnulusSplit:
    """f on the annulus written as a disk part plus an exterior part."""

    inner: BeltramiFunction
    outer: ExteriorSolution
    reconstruction_error: float
    diagnostics: dict


def _split_probe_inner(payload, idx: int):
    alpha, rtol, n = payload
    chat = np.zeros(n, dtype=complex)
    slot = idx // 2
    chat[slot] = 1.0 if idx % 2 == 0 else 1.0j
    w = solve_G(alpha, chat, rtol=rtol)
    return w.field.values


def split_annulus(f: BeltramiFunction, nu, domain: CircularDomain,
                  nr: int | None = None, workers: int | None = None,
                  inner_rtol: float = 1e-12) -> AnnulusSplit:
    """Split a single-valued solution on the annulus across its two boundary
    pieces: a disk part and an exterior part vanishing at infinity.

    nu must be a formula usable on the whole plane (callable or builtin
    spec), since both parts solve with extensions of it.
    """
    if domain.kind != "annulus":
        raise GridMismatch("split_annulus needs an annulus domain")
    rho = domain.rho
    n = f.field.grid.ntheta
    nr = nr or f.field.grid.nr
    master = nu if isinstance(nu, MasterNu) else MasterNu(domain, nu, fade=False)
    d_grid = build_polar_grid(nr, n)
    nu_i = NuField.sample(d_grid, master)
    alpha_i = alpha_from_nu(nu_i)

    def nu_d(zeta):
        return master(rho / np.conj(zeta))

    e_grid = build_polar_grid(nr, n)
    nu_e = NuField.sample(e_grid, nu_d)
    alpha_e = alpha_from_nu(nu_e)

    half = n // 2  # analytic seeds: slots 0..n/2-1, each with a real and an i copy
    n_in = 2 * half
    fields_i = _parallel.parallel_map(_split_probe_inner, (alpha_i, inner_rtol, n), n_in, workers)
    fields_e = _parallel.parallel_map(_split_probe_inner, (alpha_e, inner_rtol, n), n_in, workers)

    target = evaluate_circle(f.field, 1.0)
    nub_T = np.real(master(np.exp(1j * f.field.grid.thetas)))
    zeta_T = rho * np.exp(1j * d_grid.thetas)  # image of the unit circle
    nu_at = np.real(np.asarray(nu_d(zeta_T), dtype=complex))

    cols = []
    h00 = []
    origin = np.array([0.0j])
    for wv in fields_i:
        tw = evaluate_circle(AreaField(d_grid, wv), 1.0)
        cols.append(_trace_transform(tw, nub_T))
        h00.append(0.0j)
    nu0 = float(np.real(nu_d(np.array([1e-14 + 0j]))[0]))
    for wv in fields_e:
        wv_at = evaluate_points(AreaField(e_grid, wv), zeta_T)
        fe = np.conj((wv_at + nu_at * np.conj(wv_at)) / np.sqrt(1.0 - nu_at**2))
        cols.append(fe)
        w0 = evaluate_points(AreaField(e_grid, wv), origin)[0]
        h00.append((w0 + nu0 * np.conj(w0)) / np.sqrt(1.0 - nu0**2))

    n_cols = len(cols)
    rows = 2 * (n - 1) + 2
    mat = np.empty((rows, n_cols))
    for m, (tr, f0) in enumerate(zip(cols, h00)):
        mat[: n - 1, m] = _real_dofs(tr.real)
        mat[n - 1 : 2 * (n - 1), m] = _real_dofs(tr.imag)
        mat[-2, m] = f0.real
        mat[-1, m] = f0.imag
    b = np.concatenate([
        _real_dofs(target.real), _real_dofs(target.imag), [0.0, 0.0],
    ])
    # exterior modes decay like rho^k on T; fitting past the noise floor puts
    # junk coefficients on columns that regrow toward the hole, so cut there
    x, _, rank, svals = np.linalg.lstsq(mat, b, rcond=1e-8)

    w_in = np.tensordot(x[:n_in], np.stack(fields_i), axes=1)
    w_ex = np.tensordot(x[n_in:], np.stack(fields_e), axes=1)
    f_in = bn_inverse(GFunction(AreaField(d_grid, w_in), alpha_i), nu_i)
    f_ex = bn_inverse(GFunction(AreaField(e_grid, w_ex), alpha_e), nu_e)
    outer = ExteriorSolution(0.0, rho, f_ex)
    recon = f_in.trace(1.0) + outer.evaluate(np.exp(1j * d_grid.thetas))
    err = float(np.linalg.norm(recon - target) / max(np.linalg.norm(target), 1e-300))
    inf_val = outer.at_infinity()
    return AnnulusSplit(
        f_in, outer, err,
        {"rank": int(rank), "smallest_singular": float(svals[-1]),
         "value_at_infinity": abs(inf_val)},
    )
