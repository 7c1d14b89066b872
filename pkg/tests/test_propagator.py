import numpy as np
import pytest

from nlscatter import (
    Field,
    free_propagate,
    gaussian_exact,
    lebesgue_norm,
    make_grid,
    sample_free_flow,
    sample_gaussian,
)


def test_identity_at_t0(psi):
    out = free_propagate(psi, 0.0)
    assert np.max(np.abs(out.values - psi.values)) < 1e-13


def test_l2_unitarity(grid1d):
    rng = np.random.default_rng(3)
    f = Field(grid1d, rng.normal(size=grid1d.shape) + 1j * rng.normal(size=grid1d.shape))
    out = free_propagate(f, 3.7)
    assert abs(lebesgue_norm(out, 2) - lebesgue_norm(f, 2)) < 1e-12 * lebesgue_norm(f, 2)


def test_group_law(grid1d, psi):
    a = free_propagate(free_propagate(psi, 0.8), 1.7)
    b = free_propagate(psi, 2.5)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_gaussian_exact_values():
    assert gaussian_exact(1, 0.0, 1.3) == pytest.approx(np.exp(-1.3**2 / 4))
    v = gaussian_exact(1, 1.0, 0.0)
    assert abs(v) == pytest.approx(2.0 ** (-0.25), rel=1e-14)
    # |v|^2 = (1+t^2)^{-d/2} exp(-|x|^2/(2(1+t^2)))
    assert abs(gaussian_exact(1, 1.0, 0.0)) ** 2 == pytest.approx(2.0 ** (-0.5), rel=1e-14)


def test_gaussian_modulus_sup():
    ts = np.linspace(-3, 3, 61)
    xs = np.linspace(-5, 5, 101)
    m = max(abs(gaussian_exact(1, t, x)) ** 2 for t in ts for x in xs)
    assert m <= 1.0 + 1e-14
    assert abs(gaussian_exact(1, 0.0, 0.0)) ** 2 == pytest.approx(1.0)


def test_grid_flow_matches_closed_form(grid1d, psi):
    # interior times: spectrally exact; near the horizon the periodic image
    # of the spread Gaussian dominates (see test below)
    for t in (0.5, 1.0, 3.0, -2.0):
        num = free_propagate(psi, t)
        exact = sample_free_flow(grid1d, t)
        assert np.max(np.abs(num.values - exact.values)) < 1e-10


def test_grid_flow_error_is_boundary_image(grid1d, psi):
    # at t = 5 on [-40, 40) the wraparound image has modulus
    # (1+t^2)^{-1/4} exp(-L^2/(4(1+t^2))) ~ 9.2e-8, and the observed
    # max-norm error equals it: the propagator itself is exact.
    t = 5.0
    num = free_propagate(psi, t)
    exact = sample_free_flow(grid1d, t)
    err = np.max(np.abs(num.values - exact.values))
    image = abs(gaussian_exact(1, t, 40.0))
    assert err == pytest.approx(image, rel=1e-3)
    assert err < 1e-7


def test_gaussian_exact_branch_continuity():
    # principal branch: continuous through t = 0 with value psi
    vals = [gaussian_exact(1, t, 0.5) for t in np.linspace(-0.5, 0.5, 11)]
    diffs = np.abs(np.diff(vals))
    assert np.all(diffs < 0.1)


def test_2d_flow_unitarity():
    g = make_grid(2, 20.0, 64)
    rng = np.random.default_rng(5)
    f = Field(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    out = free_propagate(f, 1.3)
    assert abs(lebesgue_norm(out, 2) - lebesgue_norm(f, 2)) < 1e-12 * lebesgue_norm(f, 2)


def test_2d_gaussian_oracle():
    g = make_grid(2, 30.0, 256)
    psi2 = sample_gaussian(g)
    num = free_propagate(psi2, 1.5)
    exact = sample_free_flow(g, 1.5)
    assert np.max(np.abs(num.values - exact.values)) < 1e-10
