"""Independent reference solvers used to cross-check the spectral machinery.

Everything here is deliberately low-tech and shares no differentiation or
quadrature code with the main solver path: direct singular quadrature for the
area Cauchy transform, a conservative second-order finite-difference solve of
div(sigma grad u) = 0 on polar grids, and a per-mode radial two-point BVP for
radially symmetric sigma.  Test-time only; performance is a non-goal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .domain import CircularDomain
from .errors import SolverFailure

__all__ = [
    "FDSolution",
    "fd_dirichlet",
    "singular_quadrature_cauchy",
    "radial_mode_bvp",
]


# ----------------------------------------------------- singular quadrature


def singular_quadrature_cauchy(
    h,
    z,
    domain: CircularDomain | None = None,
    n_psi: int = 720,
    n_ray: int = 64,
    n_hole_r: int = 48,
    n_hole_t: int = 256,
) -> complex | np.ndarray:
    """Evaluate (1/pi) * integral over the domain of h(xi)/(z - xi) dm(xi).

    ``h`` is a callable taking complex points and returning complex values;
    it must be defined on the full closed unit disk (hole regions included),
    because hole contributions are subtracted as separate smooth integrals.
    The singularity at xi = z is removed analytically by polar coordinates
    centered at z:

        A(z) = -(1/pi) * int_0^{2pi} e^{-i psi} int_0^{L(psi)} h(z + s e^{i psi}) ds dpsi

    with L(psi) the distance from z to the unit circle along the ray.  The
    psi integral uses the trapezoid rule (spectrally accurate, the integrand
    is smooth and periodic), each ray uses Gauss-Legendre with n_ray points.

    ``z`` must lie strictly inside the domain; proximity to boundaries is the
    caller's responsibility.  Scalar z gives a scalar result.
    """
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    psi = 2.0 * np.pi * np.arange(n_psi) / n_psi
    e = np.exp(1j * psi)
    xq, wq = np.polynomial.legendre.leggauss(n_ray)

    out = np.zeros(zs.shape, dtype=complex)
    for i, z0 in enumerate(zs):
        beta = np.real(np.conj(z0) * e)
        L = -beta + np.sqrt(beta * beta + 1.0 - abs(z0) ** 2)
        # ray nodes: s in [0, L(psi)] per ray, shape (n_psi, n_ray)
        s = 0.5 * L[:, None] * (xq[None, :] + 1.0)
        vals = h(z0 + s * e[:, None])
        ray = 0.5 * L * (vals @ wq)
        out[i] = -(2.0 / n_psi) * np.sum(e.conj() * ray)

    if domain is not None and domain.holes:
        # subtract each hole as a smooth integral in its own polar frame
        xr, wr = np.polynomial.legendre.leggauss(n_hole_r)
        t = 2.0 * np.pi * np.arange(n_hole_t) / n_hole_t
        et = np.exp(1j * t)
        for center, radius in domain.holes:
            srad = 0.5 * radius * (xr + 1.0)  # (n_hole_r,)
            pts = center + srad[:, None] * et[None, :]
            hv = h(pts)
            for i, z0 in enumerate(zs):
                integrand = hv / (z0 - pts) * srad[:, None]
                ang = integrand.mean(axis=1) * 2.0 * np.pi
                out[i] -= (1.0 / np.pi) * 0.5 * radius * np.dot(wr, ang)

    return out[0] if np.isscalar(z) or np.asarray(z).ndim == 0 else out


# ------------------------------------------------------------ FD Dirichlet


@dataclass(frozen=True)
class FDSolution:
    """Solution of the conservative polar finite-difference solve.

    For the annulus, ``radii`` includes both boundary circles and ``values``
    contains the boundary rows.  For the disk, radii are cell centers (the
    boundary condition enters through a one-sided second-order flux).
    """

    radii: np.ndarray
    thetas: np.ndarray
    values: np.ndarray  # (len(radii), len(thetas)), real
    r_inner: float

    def interior_l2_weights(self) -> np.ndarray:
        """Trapezoid-in-r weights r*dr*dtheta matching the value layout."""
        r = self.radii
        dr = np.gradient(r)
        dtheta = 2.0 * np.pi / len(self.thetas)
        return (r * dr * dtheta)[:, None] * np.ones((1, len(self.thetas)))


def _face_sigma(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


def fd_dirichlet(domain: CircularDomain, sigma, boundary, n_fd: int, ntheta: int | None = None) -> FDSolution:
    """Conservative 5-point finite-difference solve of div(sigma grad u) = 0.

    Flux form in polar coordinates: d/dr(r sigma du/dr) + (1/r) d/dtheta
    (sigma du/dtheta) = 0, with sigma harmonically averaged at faces when
    given as node samples, or evaluated at face centers when callable.

    ``domain`` must be a disk or a concentric annulus.  ``boundary`` is a
    callable of theta (disk) or a pair (outer, inner) of callables or sample
    arrays (annulus).  ``n_fd`` is the number of radial intervals; the
    angular resolution defaults to 2*n_fd.
    """
    if domain.kind not in ("disk", "annulus"):
        raise SolverFailure("fd_dirichlet supports disk and annulus domains only")
    nt = int(ntheta) if ntheta is not None else 2 * n_fd
    thetas = 2.0 * np.pi * np.arange(nt) / nt
    dtheta = 2.0 * np.pi / nt

    if domain.kind == "annulus":
        rho = domain.rho
        hr = (1.0 - rho) / n_fd
        r_nodes = rho + hr * np.arange(n_fd + 1)
        g_outer, g_inner = boundary
        g_out = np.asarray(g_outer(thetas) if callable(g_outer) else g_outer, dtype=float)
        g_in = np.asarray(g_inner(thetas) if callable(g_inner) else g_inner, dtype=float)
        interior = r_nodes[1:-1]
        ni = len(interior)

        if callable(sigma):
            r_face = rho + hr * (np.arange(n_fd) + 0.5)
            th_face = thetas + dtheta / 2.0
            sig_rface = sigma(r_face[:, None] * np.exp(1j * thetas)[None, :])
            sig_tface = sigma(interior[:, None] * np.exp(1j * th_face)[None, :])
        else:
            sig = np.asarray(sigma, dtype=float)
            if sig.shape != (n_fd + 1, nt):
                raise SolverFailure(
                    f"sigma samples must have shape {(n_fd + 1, nt)}, got {sig.shape}"
                )
            sig_rface = _face_sigma(sig[:-1], sig[1:])
            sig_tface = _face_sigma(sig[1:-1], np.roll(sig[1:-1], -1, axis=1))

        r_face = rho + hr * (np.arange(n_fd) + 0.5)
        aW = sig_rface[:-1] * r_face[:-1, None] / hr**2  # coupling to node below
        aE = sig_rface[1:] * r_face[1:, None] / hr**2  # coupling to node above
        aS = sig_tface / (interior[:, None] * dtheta**2)  # coupling to theta+ (face at j+1/2)
        aN = np.roll(sig_tface, 1, axis=1) / (interior[:, None] * dtheta**2)  # theta-

        idx = np.arange(ni * nt).reshape(ni, nt)
        rows, cols, vals = [], [], []
        rhs = np.zeros(ni * nt)

        diag = -(aW + aE + aS + aN)
        rows.append(idx.ravel())
        cols.append(idx.ravel())
        vals.append(diag.ravel())
        # radial neighbors
        rows.append(idx[1:].ravel())
        cols.append(idx[:-1].ravel())
        vals.append(aW[1:].ravel())
        rows.append(idx[:-1].ravel())
        cols.append(idx[1:].ravel())
        vals.append(aE[:-1].ravel())
        # angular neighbors (periodic)
        rows.append(idx.ravel())
        cols.append(np.roll(idx, -1, axis=1).ravel())
        vals.append(aS.ravel())
        rows.append(idx.ravel())
        cols.append(np.roll(idx, 1, axis=1).ravel())
        vals.append(aN.ravel())
        # boundary data to the right-hand side
        rhs[idx[0]] -= aW[0] * g_in
        rhs[idx[-1]] -= aE[-1] * g_out

        A = scipy.sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(ni * nt, ni * nt),
        )
        u = scipy.sparse.linalg.spsolve(A, rhs)
        if not np.all(np.isfinite(u)):
            raise SolverFailure("sparse solve produced non-finite values")
        values = np.vstack([g_in, u.reshape(ni, nt), g_out])
        return FDSolution(r_nodes, thetas, values, rho)

    # disk: cell-centered in r, one-sided second-order flux at r = 1
    hr = 1.0 / n_fd
    r_cells = hr * (np.arange(n_fd) + 0.5)
    r_face = hr * np.arange(n_fd + 1)  # face 0 at r=0 carries zero flux
    g = np.asarray(boundary(thetas) if callable(boundary) else boundary, dtype=float)

    if callable(sigma):
        th_face = thetas + dtheta / 2.0
        sig_rface = sigma(r_face[1:, None] * np.exp(1j * thetas)[None, :])  # faces 1..n_fd
        sig_tface = sigma(r_cells[:, None] * np.exp(1j * th_face)[None, :])
    else:
        sig = np.asarray(sigma, dtype=float)
        if sig.shape != (n_fd, nt):
            raise SolverFailure(f"sigma samples must have shape {(n_fd, nt)}, got {sig.shape}")
        inner = _face_sigma(sig[:-1], sig[1:])
        outer = sig[-1] + 0.5 * (sig[-1] - sig[-2])  # linear extrapolation to r=1
        sig_rface = np.vstack([inner, outer])
        sig_tface = _face_sigma(sig, np.roll(sig, -1, axis=1))

    ni = n_fd
    idx = np.arange(ni * nt).reshape(ni, nt)
    rows, cols, vals = [], [], []
    rhs = np.zeros(ni * nt)

    # interior radial faces 1..n_fd-1 (face i sits between cells i-1 and i)
    aIF = sig_rface[:-1] * r_face[1:-1, None] / hr**2  # (n_fd-1, nt)
    aS = sig_tface / (r_cells[:, None] * dtheta**2)
    aN = np.roll(sig_tface, 1, axis=1) / (r_cells[:, None] * dtheta**2)

    diag = np.zeros((ni, nt))
    diag[:-1] -= aIF  # cell i loses through its outer face
    diag[1:] -= aIF  # cell i+1 loses through its inner face
    diag -= aS + aN
    rows.append(idx[:-1].ravel())
    cols.append(idx[1:].ravel())
    vals.append(aIF.ravel())
    rows.append(idx[1:].ravel())
    cols.append(idx[:-1].ravel())
    vals.append(aIF.ravel())
    rows.append(idx.ravel())
    cols.append(np.roll(idx, -1, axis=1).ravel())
    vals.append(aS.ravel())
    rows.append(idx.ravel())
    cols.append(np.roll(idx, 1, axis=1).ravel())
    vals.append(aN.ravel())

    # boundary face at r=1: outward flux sigma * (8g - 9u_N + u_{N-1}) / (3 hr)
    cb = sig_rface[-1] * 1.0 / (3.0 * hr**2)
    diag[-1] -= 9.0 * cb
    rows.append(idx[-1].ravel())
    cols.append(idx[-2].ravel())
    vals.append(cb)
    rhs[idx[-1]] -= 8.0 * cb * g

    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())

    A = scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ni * nt, ni * nt),
    )
    u = scipy.sparse.linalg.spsolve(A, rhs)
    if not np.all(np.isfinite(u)):
        raise SolverFailure("sparse solve produced non-finite values")
    return FDSolution(r_cells, thetas, u.reshape(ni, nt), 0.0)


# --------------------------------------------------------- radial mode BVP


def radial_mode_bvp(
    sigma,
    mode: int,
    bc_outer: float,
    r_inner: float = 0.0,
    bc_inner: float | None = None,
    nr: int = 4096,
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the per-mode radial problem (r sigma R')' = n^2 sigma R / r.

    ``sigma`` is a callable of the radius (radially symmetric conductivity).
    On the annulus (r_inner > 0) both boundary values are imposed at nodes;
    on the disk the inner face at r = 0 carries zero flux, which encodes the
    regularity of the mode (R ~ r^|n|), and the outer condition enters
    through a one-sided second-order flux.  Returns (radii, profile).
    """
    n2 = float(mode * mode)
    if r_inner > 0.0:
        if bc_inner is None:
            raise SolverFailure("annulus mode BVP needs bc_inner")
        h = (1.0 - r_inner) / nr
        r = r_inner + h * np.arange(nr + 1)
        rf = r_inner + h * (np.arange(nr) + 0.5)
        sf = np.asarray(sigma(rf), dtype=float) * rf
        sc = np.asarray(sigma(r[1:-1]), dtype=float)
        lower = sf[:-1] / h**2
        upper = sf[1:] / h**2
        diag = -(sf[:-1] + sf[1:]) / h**2 - n2 * sc / r[1:-1]
        rhs = np.zeros(nr - 1)
        rhs[0] -= lower[0] * bc_inner
        rhs[-1] -= upper[-1] * bc_outer
        ab = np.zeros((3, nr - 1))
        ab[0, 1:] = upper[:-1]
        ab[1] = diag
        ab[2, :-1] = lower[1:]
        R = scipy.linalg.solve_banded((1, 1), ab, rhs)
        if not np.all(np.isfinite(R)):
            raise SolverFailure("banded solve produced non-finite values")
        return r, np.concatenate([[bc_inner], R, [bc_outer]])

    # disk, cell-centered
    h = 1.0 / nr
    r = h * (np.arange(nr) + 0.5)
    rf = h * np.arange(nr + 1)
    sf = np.asarray(sigma(rf), dtype=float) * rf  # sf[0] = 0: zero flux at center
    sc = np.asarray(sigma(r), dtype=float)
    lower = sf[1:-1] / h**2  # coupling of cell i to cell i-1 through face i
    upper = sf[1:-1] / h**2
    diag = -(sf[:-1] + sf[1:]) / h**2 - n2 * sc / r
    rhs = np.zeros(nr)
    # replace the naive outer-face flux with the one-sided second-order one
    diag[-1] += sf[-1] / h**2  # remove the naive ghost-free contribution
    cb = sf[-1] / (3.0 * h**2)
    diag[-1] -= 9.0 * cb
    extra_lower = cb  # coupling to cell nr-2
    rhs[-1] -= 8.0 * cb * bc_outer
    ab = np.zeros((3, nr))
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    ab[2, -2] += extra_lower
    R = scipy.linalg.solve_banded((1, 1), ab, rhs)
    if not np.all(np.isfinite(R)):
        raise SolverFailure("banded solve produced non-finite values")
    return r, R
