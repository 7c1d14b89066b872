"""Gauge-invariant power nonlinearities F(t,x,u) = rho(t,x,|u|^2) u.

The family is a finite sum of power terms c_j(t,x) * lam^(p_j/2) with
constant or Gaussian-bump coefficients.  It is closed under the parabolic
rescaling used for concentrated data, which keeps every rescaled problem
inside the same family.

Associated potential: G(t,x,lam) = sum_j c_j(t,x) lam^(p_j/2 + 1), and the
deconvolution target h(k) = e^{-k} g'(e^{-k}) at a fixed base point.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Coefficient",
    "PowerTerm",
    "NonlinearitySpec",
    "PotentialProfile",
    "AdmissibilityReport",
    "check_admissible",
    "eval_F",
    "eval_G",
    "eval_h",
    "rho_on_grid",
    "parabolic_rescale",
]


@dataclass(frozen=True)
class Coefficient:
    """Coefficient c(t,x): a constant, or a Gaussian bump in t and x.

    Bump form: c * exp(-(t-t_c)^2/tau^2) * exp(-|x-x_c|^2/w^2).
    """

    kind: str  # "constant" | "bump"
    c: float
    t_c: float = 0.0
    tau: float = 1.0
    x_c: tuple = (0.0,)
    w: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "bump"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "bump" and (self.tau <= 0 or self.w <= 0):
            raise ValueError("bump widths tau, w must be positive")
        object.__setattr__(self, "x_c", tuple(float(v) for v in np.atleast_1d(self.x_c)))

    def __call__(self, t, x_mesh):
        """Evaluate at time t on spatial coordinates x_mesh (tuple of arrays)."""
        if self.kind == "constant":
            return self.c
        r2 = sum((xm - xc) ** 2 for xm, xc in zip(x_mesh, self.x_c))
        return self.c * np.exp(-((t - self.t_c) ** 2) / self.tau**2) * np.exp(-r2 / self.w**2)

    def is_time_dependent(self) -> bool:
        return self.kind == "bump"

    def rescaled(self, t0: float, x0, sigma: float, factor: float) -> "Coefficient":
        """Coefficient of the inner-frame problem: factor * c(t0 + s^2 s, x0 + s y)."""
        if self.kind == "constant":
            return Coefficient("constant", factor * self.c)
        x0 = np.atleast_1d(x0)
        return Coefficient(
            "bump",
            factor * self.c,
            t_c=(self.t_c - t0) / sigma**2,
            tau=self.tau / sigma**2,
            x_c=tuple((np.asarray(self.x_c) - x0) / sigma),
            w=self.w / sigma,
        )


@dataclass(frozen=True)
class PowerTerm:
    exponent: float
    coeff: Coefficient

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")


@dataclass(frozen=True)
class NonlinearitySpec:
    """Sum of power terms with an exponent budget [4/d, p1]."""

    dim: int
    terms: tuple
    p1: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def p0(self) -> float:
        return 4.0 / self.dim

    def is_autonomous(self) -> bool:
        return all(t.coeff.kind == "constant" for t in self.terms)


def single_power(dim: int, p: float, c: float = 1.0, p1: float = 16.0) -> NonlinearitySpec:
    return NonlinearitySpec(dim, (PowerTerm(p, Coefficient("constant", c)),), p1)


@dataclass
class AdmissibilityReport:
    ok: bool
    violations: list


def check_admissible(spec: NonlinearitySpec) -> AdmissibilityReport:
    """Structural admissibility: every exponent in [4/d, p1], bounded coefficients.

    The two allowed coefficient forms automatically have bounded first space
    derivatives, so only the exponent range can fail.
    """
    violations = []
    if not spec.terms:
        violations.append("spec has no terms")
    p0 = spec.p0
    p1 = spec.p1
    if spec.dim >= 3 and p1 > 4.0 / (spec.dim - 2) + 1e-12:
        violations.append(
            f"upper exponent bound p1={p1} exceeds 4/(d-2)={4.0/(spec.dim-2):.6g} for d={spec.dim}"
        )
    for i, term in enumerate(spec.terms):
        if term.exponent < p0 - 1e-12:
            violations.append(f"term {i}: exponent p={term.exponent} below p0=4/d={p0:.6g}")
        if term.exponent > p1 + 1e-12:
            violations.append(f"term {i}: exponent p={term.exponent} above p1={p1}")
    return AdmissibilityReport(ok=not violations, violations=violations)


def _coeff_values(spec: NonlinearitySpec, t: float, x):
    x_mesh = tuple(np.atleast_1d(np.asarray(xi, dtype=float)) for xi in _as_mesh(spec.dim, x))
    return [term.coeff(t, x_mesh) for term in spec.terms]


def _as_mesh(dim: int, x):
    """Normalize a point/coordinate spec to a tuple of per-dimension arrays."""
    if isinstance(x, tuple):
        return x
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if dim == 1:
        return (arr,)
    if arr.shape == (dim,):
        return tuple(arr[i : i + 1] for i in range(dim))
    raise ValueError(f"cannot interpret x={x!r} as a point in R^{dim}")


def eval_F(spec: NonlinearitySpec, t: float, x, u: complex):
    """F(t,x,u) = sum_j c_j(t,x) |u|^{p_j} u, powers taken through |u|^2."""
    u = np.asarray(u, dtype=complex)
    au2 = (u * np.conj(u)).real
    out = np.zeros_like(u)
    for term, cv in zip(spec.terms, _coeff_values(spec, t, x)):
        out = out + cv * au2 ** (term.exponent / 2.0) * u
    if out.shape == () or out.shape == (1,):
        return complex(np.ravel(out)[0])
    return out


def eval_G(spec: NonlinearitySpec, t: float, x, lam):
    """Potential G(t,x,lam) = conj(u) F = sum_j c_j(t,x) lam^{p_j/2 + 1}."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lam must be nonnegative")
    out = np.zeros(np.broadcast(lam, 0.0).shape)
    for term, cv in zip(spec.terms, _coeff_values(spec, t, x)):
        out = out + cv * lam ** (term.exponent / 2.0 + 1.0)
    if out.shape == () or out.shape == (1,):
        return float(np.ravel(out)[0])
    return out


def rho_on_grid(spec: NonlinearitySpec, t: float, x_mesh: tuple, abs_u_sq: np.ndarray):
    """rho(t,x,|u|^2) = sum_j c_j(t,x) |u|^{p_j} on grid meshes (solver hot path)."""
    out = np.zeros_like(abs_u_sq)
    for term in spec.terms:
        out += term.coeff(t, x_mesh) * abs_u_sq ** (term.exponent / 2.0)
    return out


@dataclass(frozen=True)
class PotentialProfile:
    """The radial potential profile g(lam) = G(t0, x0, lam) at a base point."""

    t0: float
    x0: tuple
    spec: NonlinearitySpec

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))

    def coefficients(self) -> list:
        """Pairs (p_j, c_j(t0,x0)) of the frozen profile."""
        x_mesh = tuple(np.array([v]) for v in self.x0)
        return [
            (term.exponent, float(np.ravel(np.asarray(term.coeff(self.t0, x_mesh)))[0]))
            for term in self.spec.terms
        ]

    def g(self, lam):
        return eval_G(self.spec, self.t0, self.x0, lam)


def eval_h(profile: PotentialProfile, k):
    """h(k) = e^{-k} g'(e^{-k}) = sum_j c_j (p_j/2+1) e^{-(p_j/2+1)k}."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(np.broadcast(k, 0.0).shape)
    for p, c in profile.coefficients():
        q = p / 2.0 + 1.0
        out = out + c * q * np.exp(-q * k)
    if out.shape == () or out.shape == (1,):
        return float(np.ravel(out)[0])
    return out


def parabolic_rescale(spec: NonlinearitySpec, t0: float, x0, sigma: float) -> NonlinearitySpec:
    """Inner-frame spec for data concentrated at (t0, x0) on scale sigma.

    Writing u(t,x) = w(s,y) with t = t0 + sigma^2 s, x = x0 + sigma y turns
    (i d_t + Lap) u = F(t,x,u) into (i d_s + Lap) w = F_in(s,y,w) where F_in
    has coefficients sigma^2 * c_j(t0 + sigma^2 s, x0 + sigma y).  The family
    is closed under this map.
    """
    factor = sigma**2
    terms = tuple(
        PowerTerm(term.exponent, term.coeff.rescaled(t0, x0, sigma, factor))
        for term in spec.terms
    )
    return replace(spec, terms=terms)
