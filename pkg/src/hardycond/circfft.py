"""Fourier operations on boundary circles.

Conventions: a circle carries ``ntheta`` samples at theta_j = 2*pi*j/ntheta.
Fourier coefficients use the mean convention ``c = fft(x)/ntheta`` so that
c[k] is the coefficient of exp(i*k*theta) in the usual FFT slot layout
(slot k for 0 <= k <= n/2, slot n+k for k < 0).  The Nyquist slot is zeroed
by every multiplier here; all routine inputs are band-limited well below it.
L^p norms on circles are taken with respect to normalized arclength
d(theta)/2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CircularDomain, PolarGrid
from .errors import GridMismatch, PointTooCloseToBoundary

__all__ = [
    "BoundaryTrace",
    "FourierBoundary",
    "circle_norm",
    "fourier_coeffs",
    "fourier_samples",
    "freqs",
    "riesz_project",
    "conjugate_trace",
    "poisson_extend",
    "analytic_completion_coeffs",
    "annulus_harmonic_parts",
    "cauchy_boundary",
]


def freqs(n: int) -> np.ndarray:
    """Integer mode numbers per FFT slot, Nyquist slot counted as +n/2."""
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    k[n // 2] = n // 2
    return k


def fourier_coeffs(values: np.ndarray) -> np.ndarray:
    return np.fft.fft(values, axis=-1) / values.shape[-1]


def fourier_samples(coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifft(coeffs * coeffs.shape[-1], axis=-1)


def circle_norm(values: np.ndarray, p: float = 2.0) -> float:
    """L^p norm on a circle with respect to d(theta)/2*pi."""
    v = np.abs(np.asarray(values))
    if np.isinf(p):
        return float(v.max())
    return float(np.mean(v**p) ** (1.0 / p))


@dataclass(frozen=True)
class BoundaryTrace:
    """Samples on every boundary component of a domain, one row per component.

    Row 0 is the unit circle, rows 1.. follow the hole order of the domain.
    All components share one angular resolution; the stacked-coefficient
    solvers assume a single ntheta.
    """

    domain: CircularDomain
    values: np.ndarray  # (n_components, ntheta), complex

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values))
        if vals.ndim != 2:
            raise GridMismatch("boundary trace values must be a (n_components, ntheta) array")
        if vals.shape[0] != self.domain.n_components:
            raise GridMismatch(
                f"expected {self.domain.n_components} component rows, got {vals.shape[0]}"
            )
        object.__setattr__(self, "values", np.ascontiguousarray(vals, dtype=complex))

    @property
    def ntheta(self) -> int:
        return self.values.shape[1]

    def norm(self, p: float = 2.0) -> float:
        return max(circle_norm(row, p) for row in self.values)


@dataclass(frozen=True)
class FourierBoundary:
    domain: CircularDomain
    coeffs: np.ndarray  # (n_components, ntheta) complex, FFT slot layout

    def samples(self) -> BoundaryTrace:
        return BoundaryTrace(self.domain, fourier_samples(self.coeffs))


# ------------------------------------------------------------- multipliers


def riesz_project(values: np.ndarray) -> np.ndarray:
    """Analytic (Riesz) projection on a circle: drop strictly negative modes.

    The mean (mode 0) is kept; this matches the trace of the Cauchy integral
    of the data.  Operates on samples, returns samples.
    """
    c = fourier_coeffs(np.asarray(values))
    n = c.shape[-1]
    k = freqs(n)
    keep = (k >= 0) & (k != n // 2)
    return fourier_samples(np.where(keep, c, 0.0))


def conjugate_trace(values: np.ndarray) -> np.ndarray:
    """Harmonic conjugate on the circle, normalized to zero mean.

    Multiplier -i*sign(k); the Nyquist slot is zeroed so real data stays real.
    """
    v = np.asarray(values)
    c = fourier_coeffs(v)
    n = c.shape[-1]
    k = freqs(n)
    mult = -1j * np.sign(k).astype(complex)
    mult[n // 2] = 0.0
    out = fourier_samples(c * mult)
    if np.isrealobj(v):
        out = out.real
    return out


def poisson_extend(values: np.ndarray, grid: PolarGrid) -> np.ndarray:
    """Harmonic extension of circle data into a concentric disk grid.

    The data lives on the circle of radius ``grid.r_outer``; mode k decays
    like (r/R)^|k|.  Returns an (nr, ntheta) array of samples.
    """
    if grid.r_inner != 0.0:
        raise GridMismatch("poisson_extend needs a disk grid (r_inner == 0)")
    v = np.asarray(values)
    c = fourier_coeffs(v)
    n = c.shape[-1]
    k = freqs(n)
    c[n // 2] = 0.0
    ratio = grid.radii / grid.r_outer
    profiles = ratio[:, None] ** np.abs(k)[None, :]
    out = fourier_samples(c[None, :] * profiles)
    if np.isrealobj(v):
        out = out.real
    return out


def analytic_completion_coeffs(values: np.ndarray, c_imag: float = 0.0) -> np.ndarray:
    """FFT-slot coefficients of the holomorphic completion of real circle data.

    Returns the boundary coefficients of g = u + i*(conjugate + c_imag):
    mode 0 is the mean plus i*c_imag, positive modes are doubled, negative
    modes and the Nyquist slot are dropped.
    """
    c = fourier_coeffs(np.asarray(values, dtype=float))
    n = c.shape[-1]
    k = freqs(n)
    out = np.where((k > 0) & (k != n // 2), 2.0 * c, 0.0j)
    out[0] = c[0] + 1j * c_imag
    return out


def annulus_harmonic_parts(
    outer_vals: np.ndarray, inner_vals: np.ndarray, grid: PolarGrid
) -> tuple[float, np.ndarray]:
    """Harmonic extension into an annulus grid, split as b*log(r) + Re F.

    Returns ``(b, F_samples)`` with F holomorphic and single-valued on the
    annulus, sampled on the grid.  Im F is normalized so its mode-0 part is
    zero.  The flux of the extension through any concentric circle is 2*pi*b.
    """
    if grid.r_inner <= 0.0:
        raise GridMismatch("annulus_harmonic_parts needs r_inner > 0")
    r1, r2 = grid.r_outer, grid.r_inner
    co = fourier_coeffs(np.asarray(outer_vals, dtype=float))
    ci = fourier_coeffs(np.asarray(inner_vals, dtype=float))
    n = co.shape[-1]
    if ci.shape[-1] != n:
        raise GridMismatch("outer and inner circle data must share ntheta")
    co = co.copy()
    ci = ci.copy()
    co[n // 2] = 0.0
    ci[n // 2] = 0.0

    # mode 0: u0(r) = b log r + a0
    b = float((co[0].real - ci[0].real) / np.log(r1 / r2))
    a0 = co[0].real - b * np.log(r1)

    # modes k >= 1: with F = sum_m c_m z^m the harmonic data satisfy
    # uhat_k(r) = (c_k r^k + conj(c_{-k}) r^{-k}) / 2.  Solve per k in the
    # radius-scaled basis, where the 2x2 matrix is [[1, q^k], [q^k, 1]]
    # with q = r2/r1 < 1.
    kk = np.arange(1, n // 2)
    qk = (r2 / r1) ** kk
    det = 1.0 - qk * qk
    rhs1 = 2.0 * co[kk]
    rhs2 = 2.0 * ci[kk]
    ap = (rhs1 - qk * rhs2) / det  # c_k * r1^k
    bp = (rhs2 - qk * rhs1) / det  # conj(c_{-k}) * r2^{-k}

    # F(r, theta) = a0 + sum_k [c_k r^k e^{ik theta}
    #                           + c_{-k} r^{-k} e^{-ik theta}]
    # with c_k r^k = ap (r/r1)^k and c_{-k} r^{-k} = conj(bp) (r2/r)^k.
    rr = grid.radii[:, None]
    phase = np.exp(1j * np.outer(grid.thetas, kk))  # (ntheta, k)
    F = np.full((grid.nr, n), a0, dtype=complex)
    F += np.einsum("rk,tk->rt", (rr / r1) ** kk[None, :] * ap[None, :], phase)
    F += np.einsum("rk,tk->rt", (r2 / rr) ** kk[None, :] * np.conj(bp)[None, :], np.conj(phase))
    return b, F


# ------------------------------------------------------------- boundary Cauchy


def cauchy_boundary(trace: BoundaryTrace, points: np.ndarray) -> np.ndarray:
    """Cauchy integral of boundary data over the oriented boundary.

    Computes (1/2*pi*i) * integral of w(xi)/(xi - z) d(xi) with the domain on
    the left: counterclockwise on the unit circle, clockwise on hole circles.
    Trapezoid rule on each circle; a point closer to some circle than 5
    angular spacings of that circle is rejected.
    """
    if trace.domain.exterior:
        raise GridMismatch("cauchy_boundary expects an interior-type domain")
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    n = trace.ntheta
    thetas = 2.0 * np.pi * np.arange(n) / n
    phase = np.exp(1j * thetas)
    out = np.zeros(z.shape, dtype=complex)
    for j, (center, radius) in enumerate(trace.domain.components()):
        guard = 5.0 * (2.0 * np.pi / n) * radius
        dist = np.abs(np.abs(z - center) - radius)
        if np.any(dist < guard):
            bad = z[dist < guard][0]
            raise PointTooCloseToBoundary(
                f"point {bad} within guard band of boundary component {j} "
                f"(need distance >= {guard:.3e})"
            )
        xi = center + radius * phase
        # xi = c + R e^{it} gives d(xi) = i (xi - c) dt, so the integrand
        # becomes w * (xi - c) / (xi - z) * dt / (2 pi)
        kernel = (xi[None, :] - center) / (xi[None, :] - z[:, None])
        sign = 1.0 if j == 0 else -1.0
        out += sign * (kernel @ trace.values[j]) / n
    return out
