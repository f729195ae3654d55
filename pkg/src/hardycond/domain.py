"""Circular domains and polar tensor grids.

A normalized circular domain is the open unit disk minus a finite union of
closed disjoint subdisks ("holes").  Boundary components are indexed so that
component 0 is the outer unit circle and components 1..n are the hole circles.
The degenerate cases (no hole, one centered hole) are the disk and the
annulus; an ``ExteriorDisk`` is the complement of one closed disk and shows up
as the working domain of the reflected hole solvers.

Grids are tensor products of a Gauss-Legendre radial rule on [r_inner,
r_outer] with a uniform angular grid of size ntheta (a power of two, so FFTs
stay cheap).  All angular data lives at theta_j = 2*pi*j/ntheta, j excluded at
2*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadAnnulusRadius,
    BadResolution,
    EpsilonTooLarge,
    HoleOutsideDisk,
    OverlappingHoles,
)

__all__ = [
    "CircularDomain",
    "PolarGrid",
    "CollarFamily",
    "build_domain",
    "build_polar_grid",
    "collar_circles",
    "gauss_legendre",
    "barycentric_weights",
    "barycentric_eval_matrix",
    "barycentric_diff_matrix",
]


# ----------------------------------------------------------------- radial rules


def gauss_legendre(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Barycentric weights for polynomial interpolation at ``nodes``.

    Computed with pairwise products rescaled by the interval capacity so the
    intermediate factors stay in floating range for a hundred-plus nodes.
    """
    x = np.asarray(nodes, dtype=float)
    n = x.size
    # capacity scaling keeps products O(1)
    cap = 4.0 / (x.max() - x.min())
    w = np.ones(n)
    for i in range(n):
        diff = (x[i] - x) * cap
        diff[i] = 1.0
        w[i] = 1.0 / np.prod(diff)
    return w / np.max(np.abs(w))


def barycentric_eval_matrix(nodes: np.ndarray, bw: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Matrix E with (E @ values)[k] = p(targets[k]) for the interpolant p."""
    t = np.atleast_1d(np.asarray(targets, dtype=float))
    diff = t[:, None] - nodes[None, :]
    exact = np.isclose(diff, 0.0, atol=0.0)  # exact node hits only
    diff[exact] = 1.0
    ratio = bw[None, :] / diff
    mat = ratio / ratio.sum(axis=1)[:, None]
    hit_rows = exact.any(axis=1)
    if np.any(hit_rows):
        mat[hit_rows] = 0.0
        mat[exact] = 1.0
    return mat


def barycentric_diff_matrix(nodes: np.ndarray, bw: np.ndarray) -> np.ndarray:
    """First-derivative collocation matrix at the interpolation nodes."""
    x = np.asarray(nodes, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    mat = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(mat, 0.0)
    np.fill_diagonal(mat, -mat.sum(axis=1))
    return mat


# ----------------------------------------------------------------- domains


@dataclass(frozen=True)
class CircularDomain:
    """Unit disk minus closed disjoint subdisks (or the complement of one disk).

    holes: sequence of (center, radius) pairs, component indices 1..n.
    exterior: if True the domain is C \\ closure(D(center, radius)) for the
        single entry in ``holes`` and there is no outer circle.
    """

    holes: tuple[tuple[complex, float], ...]
    exterior: bool = False

    @property
    def kind(self) -> str:
        if self.exterior:
            return "exterior_disk"
        if not self.holes:
            return "disk"
        if len(self.holes) == 1 and self.holes[0][0] == 0:
            return "annulus"
        return "multihole"

    @property
    def n_holes(self) -> int:
        return len(self.holes)

    @property
    def n_components(self) -> int:
        return 1 if self.exterior else 1 + len(self.holes)

    @property
    def rho(self) -> float:
        if self.kind != "annulus":
            raise BadAnnulusRadius(f"domain of kind {self.kind!r} has no annulus radius")
        return self.holes[0][1]

    def components(self) -> list[tuple[complex, float]]:
        """Boundary circles as (center, radius); index 0 is the unit circle."""
        if self.exterior:
            return [(self.holes[0][0], self.holes[0][1])]
        return [(0j, 1.0)] + [(c, r) for c, r in self.holes]

    @property
    def min_gap(self) -> float:
        """Minimal distance between distinct boundary components."""
        comps = self.components()
        if len(comps) == 1:
            return math.inf
        gaps = []
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                ci, ri = comps[i]
                cj, rj = comps[j]
                if i == 0:  # hole against the outer circle
                    gaps.append(1.0 - (abs(cj) + rj))
                else:
                    gaps.append(abs(ci - cj) - ri - rj)
        return min(gaps)

    @property
    def delta(self) -> float:
        """Collar length scale: 1/2 for the disk, else half the minimal gap."""
        if self.kind == "disk":
            return 0.5
        if self.exterior:
            return 0.5 * self.holes[0][1]
        return 0.5 * self.min_gap


def build_domain(holes: Sequence[tuple[complex, float]] = (), exterior: bool = False) -> CircularDomain:
    """Validate hole geometry and build a :class:`CircularDomain`."""
    normalized = tuple((complex(c), float(r)) for c, r in holes)
    for c, r in normalized:
        if not (r > 0.0) or not np.isfinite(r):
            raise BadAnnulusRadius(f"hole radius must be positive and finite, got {r}")
    if exterior:
        if len(normalized) != 1:
            raise HoleOutsideDisk("an exterior domain is the complement of exactly one disk")
        return CircularDomain(holes=normalized, exterior=True)
    for c, r in normalized:
        if abs(c) + r >= 1.0:
            raise HoleOutsideDisk(f"hole ({c}, {r}) is not compactly contained in the unit disk")
    for i in range(len(normalized)):
        for j in range(i + 1, len(normalized)):
            ci, ri = normalized[i]
            cj, rj = normalized[j]
            if abs(ci - cj) <= ri + rj:
                raise OverlappingHoles(f"holes {i + 1} and {j + 1} have intersecting closures")
    return CircularDomain(holes=normalized)


# ----------------------------------------------------------------- grids


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Tensor-product polar grid around ``center`` on radii [r_inner, r_outer]."""

    center: complex
    r_inner: float
    r_outer: float
    nr: int
    ntheta: int
    radii: np.ndarray = field(repr=False)
    rweights: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)

    # -- derived, cached lazily (object is logically immutable)

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})

    def _cached(self, key, builder):
        cache = self._cache
        if key not in cache:
            cache[key] = builder()
        return cache[key]

    @property
    def bary(self) -> np.ndarray:
        return self._cached("bary", lambda: barycentric_weights(self.radii))

    @property
    def diff(self) -> np.ndarray:
        """Radial differentiation matrix (acts on nodal values)."""
        return self._cached("diff", lambda: barycentric_diff_matrix(self.radii, self.bary))

    @property
    def area_weights(self) -> np.ndarray:
        """(nr,) quadrature weights for area integrals, angular factor included."""
        return self._cached(
            "areaw", lambda: self.rweights * self.radii * (2.0 * np.pi / self.ntheta)
        )

    def nodes(self) -> np.ndarray:
        """(nr, ntheta) complex node positions."""
        return self._cached(
            "nodes",
            lambda: self.center + self.radii[:, None] * np.exp(1j * self.thetas[None, :]),
        )

    def integrate(self, samples: np.ndarray) -> complex:
        """Area integral of a sampled field."""
        return np.einsum("r,rt->", self.area_weights, samples)

    def interp_rows(self, targets) -> np.ndarray:
        """Barycentric evaluation matrix from grid radii to ``targets``."""
        return barycentric_eval_matrix(self.radii, self.bary, np.asarray(targets, dtype=float))

    def same_layout(self, other: "PolarGrid") -> bool:
        return (
            self.center == other.center
            and self.nr == other.nr
            and self.ntheta == other.ntheta
            and abs(self.r_inner - other.r_inner) < 1e-15
            and abs(self.r_outer - other.r_outer) < 1e-15
        )


def build_polar_grid(
    nr: int,
    ntheta: int,
    center: complex = 0j,
    r_inner: float = 0.0,
    r_outer: float = 1.0,
) -> PolarGrid:
    if nr < 4:
        raise BadResolution(f"nr must be >= 4, got {nr}")
    if ntheta < 8 or not _is_power_of_two(ntheta):
        raise BadResolution(f"ntheta must be a power of two >= 8, got {ntheta}")
    if not 0.0 <= r_inner < r_outer:
        raise BadResolution(f"need 0 <= r_inner < r_outer, got [{r_inner}, {r_outer}]")
    radii, rweights = gauss_legendre(nr, r_inner, r_outer)
    thetas = 2.0 * np.pi * np.arange(ntheta) / ntheta
    return PolarGrid(
        center=complex(center),
        r_inner=float(r_inner),
        r_outer=float(r_outer),
        nr=int(nr),
        ntheta=int(ntheta),
        radii=radii,
        rweights=rweights,
        thetas=thetas,
    )


def omega_grid(domain: CircularDomain, nr: int, ntheta: int) -> PolarGrid:
    """Polar grid covering the domain itself (disk or annulus only)."""
    if domain.kind == "disk":
        return build_polar_grid(nr, ntheta)
    if domain.kind == "annulus":
        return build_polar_grid(nr, ntheta, r_inner=domain.rho)
    raise BadResolution(f"no single polar grid covers a {domain.kind} domain")


# ----------------------------------------------------------------- collars


@dataclass(frozen=True)
class CollarFamily:
    """Concentric probe circles offset into the domain from each component.

    ``radii[j][k]`` is the probe radius for boundary component j at epsilon
    level k; circles sit at distance eps*delta inside the domain.
    """

    domain: CircularDomain
    epsilons: tuple[float, ...]
    radii: tuple[tuple[float, ...], ...]

    def circles(self):
        comps = self.domain.components()
        for j, (center, _r) in enumerate(comps):
            for k, _eps in enumerate(self.epsilons):
                yield j, center, self.radii[j][k]


def collar_circles(domain: CircularDomain, epsilons: Sequence[float]) -> CollarFamily:
    eps = tuple(float(e) for e in epsilons)
    for e in eps:
        if not 0.0 < e <= 1.0:
            raise EpsilonTooLarge(f"collar epsilon must lie in (0, 1], got {e}")
    delta = domain.delta
    radii = []
    for j, (_center, r) in enumerate(domain.components()):
        if j == 0 and not domain.exterior:
            radii.append(tuple(1.0 - e * delta for e in eps))
        else:
            radii.append(tuple(r + e * delta for e in eps))
    return CollarFamily(domain=domain, epsilons=eps, radii=tuple(radii))
