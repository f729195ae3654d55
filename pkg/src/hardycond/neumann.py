"""Neumann problems solved through the conjugate function.

The flux density sigma dU/dn on a boundary circle is the tangential
derivative of the conjugate function V, and V itself solves the problem
with conductivity 1/sigma.  So a Neumann problem reduces to: match the
prescribed total fluxes with a combination of piecewise-constant Dirichlet
solutions, integrate the remaining zero-total density along each circle,
and solve one Dirichlet problem for the reciprocal conductivity whose
imaginary part is the sought potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .areaops import AreaField
from .circfft import freqs
from .dirichlet import (
    BeltramiFunction,
    ConductivitySolution,
    MasterNu,
    _FieldPart,
    _ReflectedPart,
    normal_flux,
    solve_dirichlet_multi,
)
from .domain import CircularDomain
from .errors import BadData, CompatibilityUnreachable, GridMismatch, MeanNotZero
from .hardy_nu import NuField, builtin_nu


@dataclass(frozen=True)
class NeumannData:
    """Flux density samples sigma dU/dn, outward from the domain, per circle."""

    domain: CircularDomain
    values: np.ndarray  # (n_components, ntheta), real
    totals: np.ndarray  # (n_components,), integrals against arclength

    @classmethod
    def from_samples(cls, domain: CircularDomain, values, tol: float = 1e-8):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] != domain.n_components:
            raise GridMismatch(
                f"expected {domain.n_components} boundary rows, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise BadData("flux data contains NaN or infinite entries")
        radii = np.array([r for _, r in domain.components()])
        totals = values.mean(axis=1) * 2.0 * np.pi * radii
        scale = 1.0 + np.abs(values).max()
        if abs(totals.sum()) > tol * scale:
            raise MeanNotZero(
                f"flux totals sum to {totals.sum():.3e}; conservation requires zero"
            )
        return cls(domain, values, totals)

    def oscillatory(self) -> np.ndarray:
        return self.values - self.values.mean(axis=1, keepdims=True)


@dataclass(frozen=True)
class NeumannSolution:
    """Potential for prescribed flux, normalized to zero mean on the unit circle."""

    solution: ConductivitySolution
    data: NeumannData
    flux_error: float
    hole_coefficients: np.ndarray


def _negate_spec(spec: str) -> str:
    """Builtin spec string for -nu; keeps solver caching effective."""
    kind, _, rest = spec.partition(":")
    parts = [p.strip() for p in rest.split(",")] if rest else []
    if kind in ("const", "xlinear"):
        return f"{kind}:{-float(parts[0])}"
    if kind == "radial":
        return "radial:" + ",".join(str(-float(p)) for p in parts)
    if kind == "bump":
        return f"bump:{-float(parts[0])},{parts[1]},{parts[2]}"
    raise BadData(f"cannot negate nu field spec {spec!r}")


def negate_nu(nu):
    """-nu in whatever form nu was given (spec string or callable)."""
    if isinstance(nu, str):
        return _negate_spec(nu)
    if isinstance(nu, MasterNu):
        if nu.spec is not None:
            return _negate_spec(nu.spec)
        nu = nu._fn
        if nu is None:
            raise BadData("cannot negate a sampled dilatation; pass a formula")
    fn = nu

    def neg(z):
        return -np.asarray(fn(z))

    return neg


def _antiderivative_rows(psi: np.ndarray, domain: CircularDomain) -> np.ndarray:
    """Tangential antiderivative of the flux density on each circle.

    dV/dtheta = s_j * r_j * psi_j with s = +1 on the unit circle and -1 on
    holes (the domain-outward normal flips there).  Each row of psi must
    have zero mean; the per-circle constants stay free.
    """
    n = psi.shape[1]
    k = freqs(n)
    out = np.empty_like(psi)
    for j, (_, radius) in enumerate(domain.components()):
        sgn = 1.0 if j == 0 else -1.0
        hat = np.fft.fft(psi[j]) / n
        vhat = np.zeros(n, dtype=complex)
        nz = k != 0
        vhat[nz] = sgn * radius * hat[nz] / (1j * k[nz])
        vhat[n // 2] = 0.0  # Nyquist has no tangential-derivative partner
        out[j] = np.fft.ifft(vhat * n).real
    return out


def _negate_nufield(nu: NuField) -> NuField:
    return NuField(nu.grid, -nu.values, nu.kappa, nu.sobolev_r)


def _imaginary_counterpart(sol: ConductivitySolution) -> list:
    """Parts evaluating Im of the solution's complex function.

    Field parts carry Re(f); scaling the field by -i turns that into Im(f).
    Scaling by an imaginary unit flips the sign of the dilatation the
    function satisfies, so the stored pairs carry the negated nu and remain
    solutions in their own right.  Reflected parts evaluate Re(f_d(zeta)),
    which equals Re of the physical part, so +i*f_d makes them evaluate the
    physical imaginary part.
    """
    parts = []
    for part in sol.parts:
        fld = part.f.field
        back = _negate_nufield(part.f.nu)
        if isinstance(part, _FieldPart):
            scaled = AreaField(fld.grid, -1j * fld.values)
            parts.append(_FieldPart(BeltramiFunction(scaled, back)))
        else:
            scaled = AreaField(fld.grid, 1j * fld.values)
            parts.append(_ReflectedPart(BeltramiFunction(scaled, back),
                                        part.center, part.radius))
    return parts


def solve_neumann(domain: CircularDomain, nu, data, nr: int = 64, ntheta: int = 128,
                  workers: int | None = None, tol: float = 1e-8) -> NeumannSolution:
    """Solve div(sigma grad U) = 0 with prescribed flux density on each circle.

    ``data``: a NeumannData or real samples (n_components, ntheta).  The
    result is normalized to zero mean trace on the unit circle.  Totals must
    sum to zero; on the disk the single total itself must vanish.
    """
    if not isinstance(data, NeumannData):
        data = NeumannData.from_samples(domain, data, tol)
    if data.values.shape[1] != ntheta:
        raise GridMismatch(f"flux rows have {data.values.shape[1]} samples, expected {ntheta}")
    scale = 1.0 + np.abs(data.values).max()
    nu_rec = negate_nu(nu)
    n_comp = domain.n_components

    coeffs = np.zeros(domain.n_holes)
    if domain.n_holes:
        # indicator solutions span all reachable total-flux vectors
        basis = []
        tmat = np.empty((domain.n_holes, domain.n_holes))
        for kh in range(domain.n_holes):
            ind = np.zeros((n_comp, ntheta))
            ind[kh + 1] = 1.0
            solk = solve_dirichlet_multi(domain, nu, ind, nr, ntheta, workers)
            basis.append(solk)
            tmat[:, kh] = -2.0 * np.pi * solk.betas  # hole totals of the basis
        coeffs = np.linalg.solve(tmat, data.totals[1:])
        carrier_data = np.zeros((n_comp, ntheta))
        for kh, c in enumerate(coeffs):
            carrier_data[kh + 1] = c
        carrier = solve_dirichlet_multi(domain, nu, carrier_data, nr, ntheta, workers)
        psi = data.values - normal_flux(carrier, ntheta).densities
    else:
        if abs(data.totals[0]) > tol * scale:
            raise MeanNotZero(
                f"disk flux must integrate to zero, got {data.totals[0]:.3e}"
            )
        carrier = None
        psi = data.values.copy()
    psi -= psi.mean(axis=1, keepdims=True)  # quadrature dust; totals already matched

    v_rows = _antiderivative_rows(psi, domain)

    rec = None
    if np.abs(v_rows).max() > 1e-12 * scale:
        # the reciprocal problem must itself be compatible; per-circle constants
        # in V are the only freedom and the indicator periods span what they fix
        if domain.n_holes:
            probe = solve_dirichlet_multi(domain, nu_rec, -v_rows, nr, ntheta, workers)
            lam_v = 2.0 * np.pi * probe.betas
            pmat = np.empty((domain.n_holes, domain.n_holes))
            for kh in range(domain.n_holes):
                ind = np.zeros((n_comp, ntheta))
                ind[kh + 1] = 1.0
                solk = solve_dirichlet_multi(domain, nu_rec, ind, nr, ntheta, workers)
                pmat[:, kh] = 2.0 * np.pi * solk.betas
            adjust = np.linalg.solve(pmat, -lam_v)
            rec_data = -v_rows.copy()
            for kh, d in enumerate(adjust):
                rec_data[kh + 1] += d
            rec = solve_dirichlet_multi(domain, nu_rec, rec_data, nr, ntheta, workers)
            lam_rec = 2.0 * np.pi * rec.betas
            if np.abs(lam_rec).max() > 1e4 * tol * scale:
                raise CompatibilityUnreachable(
                    f"residual reciprocal periods {lam_rec} resist the constant adjustment"
                )
        else:
            rec = solve_dirichlet_multi(domain, nu_rec, -v_rows, nr, ntheta, workers)

    parts = [] if rec is None else _imaginary_counterpart(rec)
    if carrier is not None:
        parts += list(carrier.parts)
        betas = carrier.betas
        master, nufield, grid = carrier.master, carrier.nu, carrier.grid
    else:
        betas = np.zeros(0)
        # sigma of the original problem, not the reciprocal one
        master = nu if isinstance(nu, MasterNu) else MasterNu(domain, nu)
        if rec is None:
            nufield, grid = None, None
        else:
            nufield, grid = _negate_nufield(rec.nu), rec.grid
    rec_diag = None if rec is None else rec.diagnostics.get("trace_error")
    combined = ConductivitySolution(
        domain, parts, betas, None, nu=nufield, grid=grid, master=master,
        diagnostics={"reciprocal_trace_error": rec_diag},
    )

    if combined.parts:
        mean0 = float(np.mean(combined.trace_u(0, ntheta)))
        base = combined.parts[0].f
        shifted = AreaField(base.field.grid, base.field.values - mean0)
        combined.parts = (
            _FieldPart(BeltramiFunction(shifted, base.nu)),
        ) + tuple(combined.parts[1:])

    achieved = normal_flux(combined, ntheta)
    flux_err = float(np.abs(achieved.densities - data.values).max() / scale)
    return NeumannSolution(combined, data, flux_err, coeffs)
