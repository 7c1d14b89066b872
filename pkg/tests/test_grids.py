import numpy as np
import pytest

from nlscatter import (
    Field,
    SpaceTimeExponents,
    Trajectory,
    lebesgue_norm,
    make_grid,
    sample_free_flow,
    sample_gaussian,
    spacetime_norm,
)

TWO_PI_QUARTER = (2.0 * np.pi) ** 0.25


def test_make_grid_spacing():
    g = make_grid(1, 40.0, 4096)
    assert g.spacing == pytest.approx(2 * 40.0 / 4096)
    assert abs(g.spacing - 0.01953) < 1e-4


def test_make_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        make_grid(1, 40.0, 4095)
    with pytest.raises(ValueError):
        make_grid(1, -1.0, 4096)
    with pytest.raises(ValueError):
        make_grid(1, 40.0, 8)


def test_make_grid_2d_node_count():
    g = make_grid(2, 20.0, 256)
    assert g.size == 65536
    assert g.shape == (256, 256)


def test_gaussian_values():
    g = make_grid(1, 32.0, 4096)  # dx = 1/64, so x = 0 and x = 2 are nodes
    psi = sample_gaussian(g)
    ax = g.axis()
    i0 = np.argmin(np.abs(ax))
    assert psi.values[i0] == pytest.approx(1.0)
    i2 = np.argmin(np.abs(ax - 2.0))
    assert ax[i2] == 2.0
    assert psi.values[i2].real == pytest.approx(np.exp(-1.0), rel=1e-12)


def test_gaussian_l2_norm(grid1d):
    # oracle: int e^{-x^2/2} dx = sqrt(2 pi), so ||psi||_2 = (2 pi)^{1/4}
    psi = sample_gaussian(grid1d)
    assert lebesgue_norm(psi, 2) == pytest.approx(TWO_PI_QUARTER, rel=1e-12)


def test_lebesgue_norm_basics(grid1d):
    zero = Field(grid1d, np.zeros(grid1d.shape))
    for r in (1.0, 2.0, np.inf):
        assert lebesgue_norm(zero, r) == 0.0
    const = Field(grid1d, np.full(grid1d.shape, 0.5 + 0.0j))
    assert lebesgue_norm(const, 1) == pytest.approx(2 * 40.0 * 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        lebesgue_norm(const, 0.5)


def test_l2_rescaling_invariance():
    # phi_sigma(x) = phi(x/sigma) on a commensurately scaled grid picks up sigma^{d/2}
    sigma = 0.5
    g = make_grid(1, 20.0, 2048)
    gs = make_grid(1, 20.0 * sigma, 2048)
    phi = sample_gaussian(g)
    phi_s = Field(gs, np.exp(-((gs.axis() / sigma) ** 2) / 4.0))
    assert lebesgue_norm(phi_s, 2) == pytest.approx(
        sigma**0.5 * lebesgue_norm(phi, 2), rel=1e-10
    )


def test_norm_stable_under_refinement():
    vals = []
    for n in (2048, 4096):
        g = make_grid(1, 40.0, n)
        vals.append(lebesgue_norm(sample_gaussian(g), 2))
    assert abs(vals[1] - vals[0]) / vals[0] < 1e-8


def test_single_frame_spacetime_norm(grid1d):
    psi = sample_gaussian(grid1d)
    traj = Trajectory(np.array([0.0]), [psi])
    exps = SpaceTimeExponents(4.0, 2.0)
    assert spacetime_norm(traj, exps) == pytest.approx(lebesgue_norm(psi, 2))


def test_spacetime_norm_zero(grid1d):
    zero = Field(grid1d, np.zeros(grid1d.shape))
    traj = Trajectory(np.array([0.0, 1.0]), [zero, zero])
    assert spacetime_norm(traj, SpaceTimeExponents(6, 6)) == 0.0


@pytest.mark.parametrize(
    "power,window_value",
    [
        # oracle: iint_{|t|<=12} |v|^{2z} dx dt with z = power/2, by the exact
        # Gaussian x-integral and elementary antiderivatives in t
        # (T = 12 keeps the spread flow inside the L = 40 cell to ~1e-7):
        #   z=5: sqrt(2 pi/5) [t/(1+t^2) + arctan t]   at t = 12
        #   z=3: sqrt(2 pi/3) * 2 arctan(12)
        (10.0, 1.760431016405407),
        (6.0, 4.305876372097239),
    ],
)
def test_gaussian_flow_spacetime_norm(power, window_value):
    g = make_grid(1, 40.0, 1024)
    ts = np.arange(-12.0, 12.0 + 1e-9, 0.1)
    traj = Trajectory(ts, [sample_free_flow(g, t) for t in ts])
    norm = spacetime_norm(traj, SpaceTimeExponents.symmetric(power))
    assert norm**power == pytest.approx(window_value, rel=1e-5)


def test_trajectory_validation(grid1d):
    psi = sample_gaussian(grid1d)
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), [psi, psi])
    with pytest.raises(ValueError):
        Trajectory(np.array([]), [])


def test_exponent_helpers():
    assert SpaceTimeExponents.scattering_diagonal(1).q == pytest.approx(6.0)
    assert SpaceTimeExponents.scattering_diagonal(2).q == pytest.approx(4.0)
    assert SpaceTimeExponents.interaction_diagonal(4.0, 1).q == pytest.approx(6.0)
    with pytest.raises(ValueError):
        SpaceTimeExponents(0.5, 2.0)
