"""Independent oracles used to freeze expected values.

Everything here is computed directly from the closed-form Gaussian flow by
generic quadrature (scipy), with no reference to the package's Gamma-function
or mu machinery, so cross-checks against those paths are genuinely two-route.
"""

import numpy as np
from scipy.integrate import dblquad, quad


def abs_flow_sq(t, x, d=1):
    """|e^{it Lap} psi|^2 = (1+t^2)^{-d/2} exp(-|x|^2 / (2(1+t^2)))."""
    return (1.0 + t * t) ** (-0.5 * d) * np.exp(-x * x / (2.0 * (1.0 + t * t)))


def spacetime_power_integral(z, d=1):
    """iint |e^{it Lap} psi|^{2z} dx dt by direct 2D quadrature (d = 1 only)."""
    assert d == 1
    val, _ = dblquad(
        lambda x, t: abs_flow_sq(t, x) ** z,
        -np.inf, np.inf, -np.inf, np.inf,
        epsabs=1e-12, epsrel=1e-11,
    )
    return val


def born_value_single_power(p, d=1, amplitude=1.0):
    """iint G(|v|^2) dx dt for F = c|u|^p u with c = 1: equals the (p/2+1) power integral."""
    z = p / 2.0 + 1.0
    return amplitude**z * spacetime_power_integral(z, d)


def mu_brute_force(d, lam, n_t=4000, n_x=4000):
    """mu(lam) by direct 2D Riemann sum over the bounding box (d = 1 only)."""
    assert d == 1
    tstar = np.sqrt(lam ** (-2.0 / d) - 1.0)
    xmax = np.sqrt(2.0 * (1.0 + tstar**2) * np.log(1.0 / lam))
    t = np.linspace(-tstar, tstar, n_t)
    x = np.linspace(-xmax, xmax, n_x)
    tt, xx = np.meshgrid(t, x, indexing="ij")
    inside = abs_flow_sq(tt, xx) > lam
    cell = (t[1] - t[0]) * (x[1] - x[0])
    return float(np.count_nonzero(inside)) * cell


def laplace_of_mu_direct(d, z, mu_fn, k_max=60.0):
    """int_0^inf e^{-kz} mu(e^{-k}) dk with a caller-supplied mu evaluator."""
    re, _ = quad(lambda k: np.exp(-k * z.real) * np.cos(k * z.imag) * mu_fn(np.exp(-k)),
                 0, k_max, epsabs=1e-13, epsrel=1e-10, limit=500)
    im, _ = quad(lambda k: -np.exp(-k * z.real) * np.sin(k * z.imag) * mu_fn(np.exp(-k)),
                 0, k_max, epsabs=1e-13, epsrel=1e-10, limit=500)
    return complex(re, im)
