"""Distribution function mu(lambda) of |e^{it Lap} psi|^2 for the standard Gaussian.

mu(lam) = |{(t,x): (1+t^2)^{-d/2} exp(-|x|^2/(2(1+t^2))) > lam}|, which
vanishes for lam >= 1.  For lam < 1 the superlevel set is a ball of radius
R(t) for each |t| < t* = sqrt(lam^{-2/d} - 1), giving the one-dimensional
reduction

    mu(lam) = omega_d * int_{-t*}^{t*} [2 (1+t^2) ln((1+t^2)^{-d/2}/lam)]^{d/2} dt.

The integrand vanishes like a (d/2)-power at the endpoints; substituting
t = t* sin(theta) restores smoothness.  Everything is computed through the
bounded profile mu_tilde(k) = lam^{1+1/d} mu(lam) at lam = e^{-k}, which
stays O(1) for all k and avoids overflow deep in the tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "unit_ball_volume",
    "mu_tilde",
    "mu_quadrature",
    "mu_monte_carlo",
    "mu_tail_constant",
    "MuTable",
    "build_mu_table",
]

_MC_BLOCK = 1_000_000


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def mu_tilde(d: int, k: float) -> float:
    """lam^{1+1/d} mu(lam) at lam = e^{-k}; bounded, increasing to mu_tail_constant(d).

    Stable form: with e = exp(-2k/d) and q(theta) = e + (1-e) sin^2(theta),

        mu_tilde = 2 omega_d sqrt(1-e) int_0^{pi/2} [2 q (-(d/2) ln q)]^{d/2} cos(theta) dtheta.
    """
    if k <= 0:
        return 0.0
    e = math.exp(-2.0 * k / d)
    half_d = 0.5 * d

    def integrand(theta):
        s = math.sin(theta)
        q = e + (1.0 - e) * s * s
        return (2.0 * q * (-half_d * math.log(q))) ** half_d * math.cos(theta)

    val, _ = quad(integrand, 0.0, 0.5 * math.pi, epsabs=1e-14, epsrel=1e-12, limit=300)
    return 2.0 * unit_ball_volume(d) * math.sqrt(1.0 - e) * val


def mu_quadrature(d: int, lam: float) -> float:
    """mu(lam) by adaptive quadrature of the one-dimensional reduction."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if lam >= 1.0:
        return 0.0
    k = -math.log(lam)
    return math.exp(k * (1.0 + 1.0 / d)) * mu_tilde(d, k)


def mu_tail_constant(d: int) -> float:
    """C_d = lim_{lam->0} lam^{1+1/d} mu(lam), in closed form.

    C_d = omega_d 2^{d/2+1} d^{d/2} Gamma(d/2+1) / (d+1)^{d/2+1}.
    """
    return (
        unit_ball_volume(d)
        * 2.0 ** (d / 2.0 + 1.0)
        * d ** (d / 2.0)
        * math.gamma(d / 2.0 + 1.0)
        / (d + 1.0) ** (d / 2.0 + 1.0)
    )


def mu_monte_carlo(d: int, lam: float, n_samples: int, seed: int):
    """Hit-or-miss estimate of mu(lam) over the exact bounding box.

    Uniform sampling on [-t*, t*] x [-x_max, x_max]^d with
    x_max = sqrt(2 (1+t*^2) ln(1/lam)), which contains the superlevel set.
    Returns (estimate, standard_error).  The stream is generated by the
    counter-based Philox generator in fixed-size shards keyed by
    (seed, shard), so parallel shard workers reproduce the serial stream.
    """
    if not (0.0 < lam < 1.0):
        raise ValueError("lam must lie in (0, 1)")
    if n_samples < 10**4:
        raise ValueError("n_samples must be at least 10^4")
    log_inv = -math.log(lam)
    tstar = math.sqrt(math.expm1(2.0 * log_inv / d))
    xmax = math.sqrt(2.0 * (1.0 + tstar**2) * log_inv)
    volume = 2.0 * tstar * (2.0 * xmax) ** d

    hits = 0
    done = 0
    shard = 0
    while done < n_samples:
        m = min(_MC_BLOCK, n_samples - done)
        rng = np.random.Generator(np.random.Philox(key=[int(seed), shard]))
        t = rng.uniform(-tstar, tstar, m)
        thresh = 2.0 * (1.0 + t * t) * (log_inv - 0.5 * d * np.log1p(t * t))
        r2 = np.zeros(m)
        for _ in range(d):
            x = rng.uniform(-xmax, xmax, m)
            r2 += x * x
        hits += int(np.count_nonzero(r2 < thresh))
        done += m
        shard += 1
    p = hits / n_samples
    est = volume * p
    se = volume * math.sqrt(max(p * (1.0 - p), 0.0) / n_samples)
    return est, se


@dataclass
class MuTable:
    """Samples of mu on a decreasing lambda grid in (0, 1)."""

    dim: int
    lambdas: np.ndarray
    values: np.ndarray
    method: str = "quadrature"  # "quadrature" | "monte-carlo"
    stderr: np.ndarray | None = None

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.lambdas.shape != self.values.shape:
            raise ValueError("lambdas and values must have equal shape")
        if np.any(np.diff(self.lambdas) >= 0):
            raise ValueError("lambda grid must be strictly decreasing")
        if np.any(self.values < 0):
            raise ValueError("mu values must be nonnegative")


def build_mu_table(d: int, lambda_min: float = 1e-6, n_points: int = 200,
                   method: str = "quadrature", mc_samples: int = 10**6,
                   seed: int = 0) -> MuTable:
    """MuTable on a log-spaced lambda grid over [lambda_min, 1)."""
    lambdas = np.logspace(0.0, math.log10(lambda_min), n_points + 1)[1:]
    if method == "quadrature":
        vals = np.array([mu_quadrature(d, l) for l in lambdas])
        return MuTable(d, lambdas, vals, "quadrature")
    if method == "monte-carlo":
        pairs = [mu_monte_carlo(d, l, mc_samples, seed + i) for i, l in enumerate(lambdas)]
        vals = np.array([p[0] for p in pairs])
        errs = np.array([p[1] for p in pairs])
        return MuTable(d, lambdas, vals, "monte-carlo", errs)
    raise ValueError(f"unknown method {method!r}")
