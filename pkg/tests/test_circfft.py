from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardycond import (
    BoundaryTrace,
    GridMismatch,
    PointTooCloseToBoundary,
    analytic_completion_coeffs,
    annulus_harmonic_parts,
    build_polar_grid,
    cauchy_boundary,
    circle_norm,
    conjugate_trace,
    fourier_coeffs,
    fourier_samples,
    freqs,
    poisson_extend,
    riesz_project,
)
from conftest import thetas


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_fourier_round_trip(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    back = fourier_samples(fourier_coeffs(v))
    assert np.abs(back - v).max() < 1e-13


def test_freqs_layout():
    k = freqs(8)
    assert list(k) == [0, 1, 2, 3, 4, -3, -2, -1]


def test_circle_norm_of_cosine():
    th = thetas(128)
    # normalized measure d(theta)/2pi: the mean square of cos is 1/2
    assert abs(circle_norm(np.cos(th)) - np.sqrt(0.5)) < 1e-13
    assert abs(circle_norm(np.cos(th), np.inf) - 1.0) < 1e-13


def test_riesz_project_is_idempotent_and_fixes_analytic_traces():
    th = thetas(64)
    z = np.exp(1j * th)
    trace = z**3 - 0.5 * z + 0.2
    assert np.abs(riesz_project(trace) - trace).max() < 1e-13
    rng = np.random.default_rng(7)
    v = rng.standard_normal(64)
    p = riesz_project(v)
    assert np.abs(riesz_project(p) - p).max() < 1e-13


def test_conjugate_trace_of_cosine_is_sine():
    th = thetas(64)
    for k in (1, 3, 7):
        got = conjugate_trace(np.cos(k * th))
        assert np.abs(got - np.sin(k * th)).max() < 1e-12
    # zero mean by construction
    assert abs(conjugate_trace(np.cos(2 * th) + 4.0).mean()) < 1e-13


def test_conjugate_trace_squares_to_minus_identity_on_zero_mean():
    rng = np.random.default_rng(11)
    v = rng.standard_normal(64)
    v -= v.mean()
    v = fourier_samples(np.where(freqs(64) == 32, 0.0, fourier_coeffs(v))).real
    twice = conjugate_trace(conjugate_trace(v))
    assert np.abs(twice + v).max() < 1e-12


def test_poisson_extend_reproduces_harmonic_polynomials(disk_grid):
    th = thetas(64)
    u = poisson_extend(np.cos(2 * th) - 0.3 * np.sin(th), disk_grid)
    z = disk_grid.nodes()
    exact = np.real(z**2) - 0.3 * z.imag
    assert np.abs(u - exact).max() < 1e-13


def test_analytic_completion_sets_imaginary_mean():
    th = thetas(64)
    c = analytic_completion_coeffs(np.cos(3 * th), c_imag=0.25)
    vals = fourier_samples(c)
    assert np.abs(vals.real - np.cos(3 * th)).max() < 1e-12
    assert abs(vals.imag.mean() - 0.25) < 1e-13
    # nonnegative modes only
    assert np.abs(c[freqs(64) < 0]).max() < 1e-15


def test_annulus_harmonic_parts_recovers_log_and_field(annulus_grid):
    th = thetas(64)
    z1 = np.exp(1j * th)
    z2 = 0.5 * z1
    # u = 2 log r + Re(z + 0.3/z)
    f = lambda z: z + 0.3 / z
    b, F = annulus_harmonic_parts(
        2 * np.log(np.abs(z1)) + np.real(f(z1)),
        2 * np.log(np.abs(z2)) + np.real(f(z2)),
        annulus_grid,
    )
    assert abs(b - 2.0) < 1e-12
    zg = annulus_grid.nodes()
    assert np.abs(np.real(F) - np.real(f(zg))).max() < 1e-12


def test_cauchy_boundary_reproduces_analytic_functions(disk):
    th = thetas(128)
    z = np.exp(1j * th)
    tr = BoundaryTrace(disk, (z**3 - 0.4j * z)[None, :])
    pts = np.array([0.3 + 0.2j, -0.5j, 0.1 - 0.6j])
    got = cauchy_boundary(tr, pts)
    assert np.abs(got - (pts**3 - 0.4j * pts)).max() < 1e-12


def test_cauchy_boundary_guard_band(disk):
    tr = BoundaryTrace(disk, np.ones((1, 64)))
    with pytest.raises(PointTooCloseToBoundary):
        cauchy_boundary(tr, np.array([0.99 + 0j]))


def test_cauchy_boundary_annulus_kills_the_slit_free_part(annulus):
    # data z on the outer circle and on the inner circle: the Cauchy integral
    # over both oriented circles returns z (analytic across the hole, so the
    # inner circle contributes nothing)
    th = thetas(128)
    rows = np.vstack([np.exp(1j * th), 0.5 * np.exp(1j * th)])
    got = cauchy_boundary(BoundaryTrace(annulus, rows), np.array([0.7 + 0.1j]))
    assert abs(got[0] - (0.7 + 0.1j)) < 1e-12


def test_boundary_trace_shape_is_checked(annulus):
    with pytest.raises(GridMismatch):
        BoundaryTrace(annulus, np.ones((1, 64)))
