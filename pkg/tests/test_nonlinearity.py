import numpy as np
import pytest

from nlscatter import (
    Coefficient,
    NonlinearitySpec,
    PotentialProfile,
    PowerTerm,
    check_admissible,
    eval_F,
    eval_G,
    eval_h,
    parabolic_rescale,
    single_power,
)


def test_admissible_single_quintic():
    # d=1: p0 = 4/d = 4, so p = 4 sits exactly at the mass-critical floor
    rep = check_admissible(single_power(1, 4.0))
    assert rep.ok and not rep.violations


def test_inadmissible_below_p0():
    rep = check_admissible(single_power(1, 2.0))
    assert not rep.ok
    assert any("below p0" in v for v in rep.violations)


def test_admissible_d2_pair():
    spec = NonlinearitySpec(
        2,
        (PowerTerm(2.0, Coefficient("constant", 1.0)),
         PowerTerm(6.0, Coefficient("constant", 1.0))),
        p1=8.0,
    )
    rep = check_admissible(spec)
    assert rep.ok


def test_admissible_d3_energy_bound():
    spec = NonlinearitySpec(
        3, (PowerTerm(2.0, Coefficient("constant", 1.0)),), p1=6.0
    )
    rep = check_admissible(spec)
    assert not rep.ok  # p1 > 4/(d-2) = 4


def test_eval_F_zero_and_power():
    spec = single_power(1, 4.0)
    assert eval_F(spec, 0.0, 0.0, 0.0) == 0
    assert eval_F(spec, 0.0, 0.0, 2.0) == pytest.approx(32.0)  # |2|^4 * 2


def test_eval_F_gauge():
    spec = single_power(1, 4.0)
    u = 1.0 + 1.0j
    th = 0.7
    lhs = eval_F(spec, 0.3, 0.2, np.exp(1j * th) * u)
    rhs = np.exp(1j * th) * eval_F(spec, 0.3, 0.2, u)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_eval_F_gauge_randomized():
    spec = NonlinearitySpec(
        1,
        (PowerTerm(4.0, Coefficient("constant", 0.7)),
         PowerTerm(5.5, Coefficient("bump", 0.4, t_c=0.1, tau=2.0, x_c=(0.3,), w=1.5))),
    )
    rng = np.random.default_rng(42)
    for _ in range(20):
        u = complex(rng.normal(), rng.normal())
        th = rng.uniform(0, 2 * np.pi)
        lhs = eval_F(spec, 0.2, 0.1, np.exp(1j * th) * u)
        rhs = np.exp(1j * th) * eval_F(spec, 0.2, 0.1, u)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_eval_G_matches_conj_u_F():
    spec = NonlinearitySpec(
        1,
        (PowerTerm(4.0, Coefficient("constant", 1.3)),
         PowerTerm(6.0, Coefficient("bump", -0.2, t_c=0.0, tau=1.0, x_c=(0.0,), w=2.0))),
    )
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = complex(rng.normal(), rng.normal())
        t, x = rng.normal(), rng.normal()
        gf = (np.conj(u) * eval_F(spec, t, x, u)).real
        gg = eval_G(spec, t, x, abs(u) ** 2)
        assert gf == pytest.approx(gg, rel=1e-12, abs=1e-14)
        assert abs((np.conj(u) * eval_F(spec, t, x, u)).imag) < 1e-12 * max(abs(gf), 1.0)


def test_eval_G_values():
    spec = single_power(1, 4.0)
    assert eval_G(spec, 0, 0, 0.0) == 0.0
    assert eval_G(spec, 0, 0, 2.0) == pytest.approx(8.0)  # lam^{p/2+1} = 2^3
    two = NonlinearitySpec(
        1,
        (PowerTerm(4.0, Coefficient("constant", 1.0)),
         PowerTerm(6.0, Coefficient("constant", 1.0))),
    )
    assert eval_G(two, 0, 0, 1.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        eval_G(spec, 0, 0, -0.5)


def test_eval_h_single_power():
    prof = PotentialProfile(0.0, (0.0,), single_power(1, 4.0))
    # g(lam) = lam^3  =>  h(k) = 3 e^{-3k}
    assert eval_h(prof, 0.0) == pytest.approx(3.0)
    assert eval_h(prof, 1.0) == pytest.approx(3 * np.exp(-3.0), rel=1e-13)
    assert eval_h(prof, 20.0) < 1e-20


def test_eval_h_mixture_at_zero():
    spec = NonlinearitySpec(
        1,
        (PowerTerm(4.0, Coefficient("constant", 1.0)),
         PowerTerm(6.0, Coefficient("constant", 1.0))),
    )
    prof = PotentialProfile(0.0, (0.0,), spec)
    assert eval_h(prof, 0.0) == pytest.approx(7.0)  # 3 + 4


def test_eval_h_matches_finite_difference():
    spec = NonlinearitySpec(
        1,
        (PowerTerm(4.0, Coefficient("constant", 0.8)),
         PowerTerm(7.0, Coefficient("bump", 0.5, t_c=0.2, tau=1.0, x_c=(0.1,), w=1.0))),
    )
    prof = PotentialProfile(0.1, (0.05,), spec)
    for k in np.linspace(-2.0, 6.0, 17):
        lam = np.exp(-k)
        d = 1e-6 * lam
        gprime = (prof.g(lam + d) - prof.g(lam - d)) / (2 * d)
        assert eval_h(prof, k) * np.exp(k) == pytest.approx(gprime, rel=1e-6)


def test_parabolic_rescale_closed_family():
    spec = NonlinearitySpec(
        1,
        (PowerTerm(4.0, Coefficient("bump", 2.0, t_c=1.0, tau=3.0, x_c=(0.5,), w=2.0)),),
    )
    inner = parabolic_rescale(spec, t0=1.0, x0=(0.5,), sigma=0.5)
    term = inner.terms[0]
    assert term.coeff.kind == "bump"
    assert term.coeff.c == pytest.approx(0.25 * 2.0)  # sigma^2 factor
    assert term.coeff.t_c == pytest.approx(0.0)
    assert term.coeff.tau == pytest.approx(3.0 / 0.25)
    assert term.coeff.w == pytest.approx(2.0 / 0.5)

    # pointwise consistency: F_in(s, y, u) = sigma^2 F(t0 + sigma^2 s, x0 + sigma y, u)
    from nlscatter import eval_F as F
    s, y, u = 0.7, -0.3, 0.4 + 0.2j
    lhs = F(inner, s, y, u)
    rhs = 0.25 * F(spec, 1.0 + 0.25 * s, 0.5 + 0.5 * y, u)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_constant_rescale():
    inner = parabolic_rescale(single_power(1, 4.0, c=2.0), 0.0, (0.0,), 0.3)
    assert inner.terms[0].coeff.c == pytest.approx(0.09 * 2.0)
