from __future__ import annotations

import numpy as np
import pytest

from hardycond import (
    BadResolution,
    EpsilonTooLarge,
    HoleOutsideDisk,
    OverlappingHoles,
    build_domain,
    build_polar_grid,
    collar_circles,
    omega_grid,
)


def test_domain_kinds(disk, annulus, two_holes):
    assert disk.kind == "disk"
    assert disk.n_holes == 0
    assert disk.n_components == 1
    assert annulus.kind == "annulus"
    assert annulus.rho == 0.5
    assert two_holes.kind == "multihole"
    assert two_holes.n_components == 3


def test_offcenter_hole_is_not_an_annulus():
    dom = build_domain([(0.2 + 0j, 0.3)])
    assert dom.kind == "multihole"


def test_bad_geometry_rejected():
    with pytest.raises(HoleOutsideDisk):
        build_domain([(0.8 + 0j, 0.4)])
    with pytest.raises(OverlappingHoles):
        build_domain([(-0.3 + 0j, 0.25), (0.1 + 0j, 0.25)])


def test_ntheta_must_be_power_of_two():
    with pytest.raises(BadResolution):
        build_polar_grid(16, 48)
    with pytest.raises(BadResolution):
        build_polar_grid(16, 4)


def test_grid_quadrature_is_exact_on_polynomials(disk_grid, annulus_grid):
    # integral of |z|^2 over the disk is pi/2, over the annulus pi/2 (1 - rho^4)
    z = disk_grid.nodes()
    assert abs(disk_grid.integrate(np.abs(z) ** 2) - np.pi / 2) < 1e-13
    za = annulus_grid.nodes()
    exact = np.pi / 2 * (1.0 - 0.5**4)
    assert abs(annulus_grid.integrate(np.abs(za) ** 2) - exact) < 1e-13


def test_grid_node_layout(annulus_grid):
    z = annulus_grid.nodes()
    assert z.shape == (32, 64)
    r = np.abs(z)
    assert r.min() >= 0.5 - 1e-12
    assert r.max() <= 1.0 + 1e-12


def test_radial_interpolation_reproduces_polynomials(disk_grid):
    vals = disk_grid.radii**3 - 0.2 * disk_grid.radii
    targets = np.array([0.05, 0.4, 0.77])
    mat = disk_grid.interp_rows(targets)
    got = mat @ vals
    assert np.abs(got - (targets**3 - 0.2 * targets)).max() < 1e-12


def test_omega_grid_rejects_multi(two_holes):
    with pytest.raises(BadResolution):
        omega_grid(two_holes, 16, 32)


def test_collar_radii(disk, annulus):
    fam = collar_circles(disk, (0.1, 0.5))
    assert fam.radii[0] == (1.0 - 0.1 * disk.delta, 1.0 - 0.5 * disk.delta)
    fam_a = collar_circles(annulus, (0.1,))
    # outer collar moves inward, hole collar moves outward
    assert fam_a.radii[0][0] < 1.0
    assert fam_a.radii[1][0] > 0.5
    with pytest.raises(EpsilonTooLarge):
        collar_circles(disk, (1.5,))
