"""Recovery of h(k) = e^{-k} g'(e^{-k}) from amplitude-scan data.

Forward model:  D(a) = int_{-a}^inf h(k) mu(e^{-(k+a)}) dk
              = int_0^inf h(j-a) mu(e^{-j}) dj,

a one-sided correlation against the growing weight mu(e^{-j}).  Both
inversions work in the outer-weighted variables

    h~(k) = e^{ck} h(k),   D~(a) = e^{-ca} D(a),   v~(j) = e^{-cj} mu(e^{-j}),

where v~ is bounded and decaying; the weighting is what makes the discrete
problem representable in double precision, and pointwise relative errors in
h are unchanged by it.  Two independent inversions are provided and
cross-validated: Tikhonov least squares with a first-difference penalty,
and Fourier division by the vertical-line values M(c + iy) with a spectral
cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import lstsq
from scipy.optimize import nnls

from .laplace import M_closed
from .mu import mu_tilde
from .nonlinearity import PotentialProfile, eval_h

__all__ = [
    "ConvolutionData",
    "Kernel",
    "RecoveredPotential",
    "GReconstruction",
    "synthesize_data",
    "assemble_kernel",
    "recover_h_tikhonov",
    "recover_h_fourier",
    "reconstruct_G",
    "fit_leading_exponent",
    "resynthesize",
]

_MU_CACHE: dict = {}


def _mu_at(d: int, j: float) -> float:
    """mu(e^{-j}) with memoization (exact zero for j <= 0)."""
    if j <= 0.0:
        return 0.0
    key = (d, round(float(j), 12))
    val = _MU_CACHE.get(key)
    if val is None:
        val = math.exp(j * (1.0 + 1.0 / d)) * mu_tilde(d, j)
        _MU_CACHE[key] = val
    return val


@dataclass
class ConvolutionData:
    """Samples of D(a) with provenance and a per-sample noise estimate."""

    dim: int
    a_grid: np.ndarray
    d_values: np.ndarray
    provenance: str = "exact-born"  # "exact-born" | "simulated-scattering"
    noise: np.ndarray | None = None

    def __post_init__(self):
        self.a_grid = np.asarray(self.a_grid, dtype=float)
        self.d_values = np.asarray(self.d_values, dtype=float)
        if self.a_grid.size == 0:
            raise ValueError("a_grid must be nonempty")
        if self.a_grid.shape != self.d_values.shape:
            raise ValueError("a_grid and d_values must have equal shape")
        if np.any(np.diff(self.a_grid) <= 0):
            raise ValueError("a_grid must be strictly increasing")
        if self.noise is not None:
            self.noise = np.broadcast_to(np.asarray(self.noise, dtype=float),
                                         self.a_grid.shape).copy()

    @property
    def spacing(self) -> float:
        steps = np.diff(self.a_grid)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("a_grid is not uniform")
        return float(steps[0])


def synthesize_data(profile: PotentialProfile, a_grid, rel_tol: float = 1e-10) -> ConvolutionData:
    """Exact forward data D(a) = int_0^inf h(j-a) mu(e^{-j}) dj by adaptive quadrature.

    The integrand decays like e^{-(q_min - 1 - 1/d) j} with q_min the
    smallest p/2+1 in the profile; the truncation point is chosen so the
    analytic tail sits far below rel_tol.
    """
    d = profile.spec.dim
    coeffs = profile.coefficients()
    q_min = min(p / 2.0 + 1.0 for p, _ in coeffs)
    margin = q_min - (1.0 + 1.0 / d)
    if margin <= 0.05:
        raise ValueError("profile decays too slowly against mu for convergent synthesis")
    j_max = max(60.0, 45.0 / margin)
    a_grid = np.asarray(a_grid, dtype=float)

    values = np.empty(a_grid.shape)
    for i, a in enumerate(a_grid):
        val, _ = quad(lambda j: eval_h(profile, j - a) * _mu_at(d, j),
                      0.0, j_max, epsabs=1e-300, epsrel=max(rel_tol, 1e-12), limit=500)
        values[i] = val
    noise = rel_tol * (1.0 + np.abs(values))
    return ConvolutionData(d, a_grid, values, "exact-born", noise)


@dataclass
class Kernel:
    """Discrete forward map K[i,j] = w_j mu(e^{-(k_j + a_i)}) (trapezoid weights).

    Entries vanish identically where k_j + a_i <= 0 since mu(lam) = 0 for
    lam >= 1.
    """

    dim: int
    a_grid: np.ndarray
    k_grid: np.ndarray
    matrix: np.ndarray
    weights: np.ndarray

    @property
    def k_spacing(self) -> float:
        return float(self.k_grid[1] - self.k_grid[0])


def assemble_kernel(a_grid, k_grid, dim: int = 1) -> Kernel:
    """Build the trapezoid-rule kernel on uniform grids.

    The k step should divide the a step so that the kink of each row
    integrand (at k = -a, where mu switches on) falls on a node; trapezoid
    weights then integrate the piecewise-smooth rows cleanly.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    k_grid = np.asarray(k_grid, dtype=float)
    dk = np.diff(k_grid)
    if k_grid.size < 3 or not np.allclose(dk, dk[0], rtol=1e-9, atol=1e-12):
        raise ValueError("k_grid must be uniform")
    h = float(dk[0])
    w = np.full(k_grid.size, h)
    w[0] = w[-1] = 0.5 * h

    # all k_j + a_i values lie on a refinement of the k grid; evaluate each once
    sums = np.add.outer(a_grid, k_grid)
    flat = sums.ravel()
    uniq, inv = np.unique(np.round(flat, 10), return_inverse=True)
    mu_vals = np.array([_mu_at(dim, j) for j in uniq])
    matrix = (mu_vals[inv].reshape(sums.shape)) * w[None, :]
    return Kernel(dim, a_grid, k_grid, matrix, w)


def _first_difference(n: int) -> np.ndarray:
    L = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    L[idx, idx] = -1.0
    L[idx, idx + 1] = 1.0
    return L


@dataclass
class GReconstruction:
    """Samples of g and of the radial values of F(t0, x0, .) on a lambda grid."""

    lambda_grid: np.ndarray
    g: np.ndarray
    f_radial: np.ndarray  # F(t0,x0,u) at u = sqrt(lambda), real gauge

    def eval_F(self, u):
        """F(t0,x0,u) = (g(|u|^2)/|u|^2) u, 0 at u = 0, by interpolation in g."""
        u = np.asarray(u, dtype=complex)
        lam = (u * np.conj(u)).real
        g = np.interp(lam, self.lambda_grid, self.g, left=0.0)
        out = np.where(lam > 0, g / np.where(lam > 0, lam, 1.0), 0.0) * u
        if out.shape == ():
            return complex(out)
        return out


@dataclass
class RecoveredPotential:
    """Recovered h samples with reconstruction and error metadata."""

    dim: int
    k_grid: np.ndarray
    h_hat: np.ndarray
    method: str
    regularization: float
    residual_norm: float       # weighted data misfit ||K~ h~ - D~||
    c_line: float
    window: tuple              # trusted k window (k_lo, k_hi)
    lambda_grid: np.ndarray = field(default=None)
    g_hat: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.lambda_grid is None:
            k_lo, k_hi = self.window
            lam_hi = math.exp(-max(k_lo, float(self.k_grid[0])))
            lam_lo = math.exp(-min(k_hi, float(self.k_grid[-1])))
            grid = np.logspace(math.log10(lam_lo), math.log10(lam_hi), 80)
            rec = reconstruct_G(self, grid)
            self.lambda_grid = rec.lambda_grid
            self.g_hat = rec.g


def _weighted_system(data: ConvolutionData, kernel: Kernel, c: float):
    Dt = np.exp(-c * data.a_grid) * data.d_values
    Kt = kernel.matrix * np.exp(-c * data.a_grid)[:, None] * np.exp(-c * kernel.k_grid)[None, :]
    if data.noise is not None:
        noise_t = np.exp(-c * data.a_grid) * data.noise
    else:
        noise_t = 1e-10 * (np.exp(-c * data.a_grid) + np.abs(Dt))
    return Kt, Dt, noise_t


def _default_c(dim: int) -> float:
    return 1.0 + 3.0 / (2.0 * dim)


def _trusted_window(data: ConvolutionData, kernel_k_hi: float) -> tuple:
    """h carries no information for k < -a_max; report the probed window."""
    return (-float(data.a_grid[-1]) + 0.5, min(float(kernel_k_hi), 8.0))


def recover_h_tikhonov(data: ConvolutionData, kernel: Kernel, reg="auto",
                       c_line: float | None = None) -> RecoveredPotential:
    """Tikhonov recovery: minimize ||K~ h~ - D~||^2 + reg ||L h~||^2.

    L is the discrete first-difference operator and the tilde marks the
    outer-weighted variables at abscissa c_line (default 1 + 3/(2d)); the
    raw normal equations are far beyond double-precision dynamic range, so
    the solve is posed in weighted form and unweighted afterwards.
    reg="auto" selects by the discrepancy principle against the data's
    noise estimate.  reg=0 is refused: the system is underdetermined and
    the normal equations are singular.
    """
    c = _default_c(kernel.dim) if c_line is None else float(c_line)
    Kt, Dt, noise_t = _weighted_system(data, kernel, c)
    n = kernel.k_grid.size
    L = _first_difference(n)

    def solve(lam_reg):
        A = np.vstack([Kt, math.sqrt(lam_reg) * L])
        b = np.concatenate([Dt, np.zeros(n - 1)])
        sol, *_ = lstsq(A, b, lapack_driver="gelsd")
        return sol, float(np.linalg.norm(Kt @ sol - Dt))

    if reg == "auto":
        target = float(np.linalg.norm(noise_t))
        lo, hi = -14.0, 2.0
        _, mis_lo = solve(10.0**lo)
        if mis_lo >= target:
            reg_val = 10.0**lo
        else:
            _, mis_hi = solve(10.0**hi)
            if mis_hi <= target:
                reg_val = 10.0**hi
            else:
                for _ in range(14):
                    mid = 0.5 * (lo + hi)
                    _, mis = solve(10.0**mid)
                    if mis < target:
                        lo = mid
                    else:
                        hi = mid
                reg_val = 10.0**lo
    else:
        reg_val = float(reg)
        if reg_val == 0.0:
            raise ValueError("reg=0: normal equations are singular, a positive reg is required")
    h_t, misfit = solve(reg_val)
    h_hat = np.exp(-c * kernel.k_grid) * h_t
    return RecoveredPotential(
        dim=kernel.dim, k_grid=kernel.k_grid.copy(), h_hat=h_hat,
        method="tikhonov", regularization=reg_val, residual_norm=misfit,
        c_line=c, window=_trusted_window(data, kernel.k_grid[-1]),
    )


def _rate_dictionary(dim: int, p_hi: float, dp: float = 0.25) -> np.ndarray:
    """Candidate D-growth rates p/2+1 for admissible powers p in [4/d, p_hi]."""
    p0 = 4.0 / dim
    return np.arange(p0, p_hi + 1e-9, dp) / 2.0 + 1.0


def _fit_exponential_model(a, Dv, rates):
    """Nonnegative least squares fit D(a) ~ sum_m c_m e^{rate_m a} (relative weights)."""
    A = np.exp(np.outer(a, rates))
    w = 1.0 / np.maximum(np.abs(Dv), 1e-300)
    coef, _ = nnls(A * w[:, None], Dv * w, maxiter=40 * len(rates))
    return coef


def recover_h_fourier(data: ConvolutionData, c="auto", cutoff="auto",
                      p_hi: float = 10.0, pad_left: float = 10.0,
                      growth_cap: float = 3.0, taper_len: float = 6.0,
                      k_lo: float = -3.0, k_hi: float = 25.0,
                      spectral_floor: float = 5e-3) -> RecoveredPotential:
    """Fourier-division recovery along the vertical line Re z = c.

    Weighted data e^{-ca} D(a) is extended beyond both window edges with a
    nonnegative exponential-sum fit over the admissible rate band (tapered
    to zero), transformed, divided by M(c + iy), low-passed where |M| falls
    below the spectral floor set by the noise estimate, inverted, and
    unweighted.  c="auto" places the line so the division filter's tail
    decay dominates the fastest rate active in the data, within the
    admissible window (1 + 1/d, 1 + 2/d).
    """
    d = data.dim
    da = data.spacing
    a = data.a_grid
    Dv = data.d_values

    rates = _rate_dictionary(d, p_hi)
    coef = _fit_exponential_model(a, Dv, rates)
    active = coef > 1e-10 * max(coef.max(), 1e-300)
    max_rate = float(rates[active].max()) if np.any(active) else (4.0 / d) / 2.0 + 1.0

    c_lo = 1.0 + 1.0 / d
    c_hi = 1.0 + 2.0 / d
    if c == "auto":
        c_val = min(max(0.5 * (max_rate + 1.5), 1.0 + 3.0 / (2.0 * d)), c_hi - 0.05)
    else:
        c_val = float(c)
        if not (c_lo < c_val < c_hi):
            raise ValueError(f"c must lie in ({c_lo:.4g}, {c_hi:.4g}), got {c_val}")

    model = lambda aa: np.exp(np.outer(np.atleast_1d(aa), rates)) @ coef
    Dt = np.exp(-c_val * a) * Dv

    # right extension: model continuation until it grows by e^{growth_cap}, then taper
    gmax = max(max_rate - c_val, 0.05)
    grow_len = growth_cap / gmax
    n_right = int(round((grow_len + taper_len) / da))
    a_right = a[-1] + da * np.arange(1, n_right + 1)
    ext_right = np.exp(-c_val * a_right) * model(a_right)
    ramp = np.clip((a_right - (a[-1] + grow_len)) / taper_len, 0.0, 1.0)
    ext_right *= 0.5 * (1.0 + np.cos(np.pi * ramp))

    # left extension: model decays toward -inf; ramp up from zero
    n_left = int(round(pad_left / da))
    a_left = a[0] - da * np.arange(n_left, 0, -1)
    ext_left = np.exp(-c_val * a_left) * model(a_left)
    ramp_l = np.clip((a_left - (a[0] - pad_left)) / taper_len, 0.0, 1.0)
    ext_left *= 0.5 * (1.0 - np.cos(np.pi * ramp_l))

    series = np.concatenate([ext_left, Dt, ext_right])
    a0 = a[0] - n_left * da

    span = len(series) + int((k_hi - k_lo) / da) + 8
    nfft = 1 << max(12, int(math.ceil(math.log2(span * 1.5))))
    buf = np.zeros(nfft)
    buf[: len(series)] = series
    y = 2.0 * np.pi * np.fft.fftfreq(nfft, d=da)
    F = da * np.exp(-1j * y * a0) * np.fft.fft(buf)
    Mv = np.array([M_closed(d, complex(c_val, yy)) for yy in y])
    G = F / Mv

    # spectral cutoff where |M| falls below the noise floor
    if cutoff == "auto":
        if data.noise is not None:
            rel_noise = float(np.median(data.noise / np.maximum(np.abs(Dv), 1e-300)))
        else:
            rel_noise = 1e-8
        floor = max(4.0 * rel_noise, spectral_floor)
    else:
        floor = float(cutoff)
    m0 = abs(M_closed(d, complex(c_val)))
    absM = np.abs(Mv)
    keep_level = floor * m0
    roll = np.clip((absM / keep_level - 1.0) / 0.5, 0.0, 1.0)
    G = G * (0.5 * (1.0 - np.cos(np.pi * roll)))

    kg = k_lo + da * np.arange(int(round((k_hi - k_lo) / da)))
    ht = (np.fft.fft(G * np.exp(-1j * y * k_lo)) / (nfft * da))[: kg.size].real
    h_hat = np.exp(-c_val * kg) * ht

    kern = assemble_kernel(a, kg, dim=d)
    Kt, Dt_chk, _ = _weighted_system(data, kern, c_val)
    misfit = float(np.linalg.norm(Kt @ (np.exp(c_val * kg) * h_hat) - Dt_chk))
    return RecoveredPotential(
        dim=d, k_grid=kg, h_hat=h_hat,
        method="fourier", regularization=floor, residual_norm=misfit,
        c_line=c_val, window=_trusted_window(data, kg[-1]),
    )


def resynthesize(recovered: RecoveredPotential, kernel: Kernel) -> np.ndarray:
    """Forward map applied to the recovery, interpolated onto the kernel's k grid."""
    h = np.interp(kernel.k_grid, recovered.k_grid, recovered.h_hat)
    return kernel.matrix @ h


def reconstruct_G(recovered: RecoveredPotential, lambda_grid) -> GReconstruction:
    """g and F(t0,x0,.) from recovered h:  g(lam) = int_{-ln lam}^inf h(k) dk.

    Cumulative trapezoid in k from the right end of the recovered grid (the
    change of variables lam = e^{-k} turns the lam integral of g' into a
    plain k integral of h), with g(0) = 0 built in.  The lambda grid must
    stay inside the probed range.
    """
    lam = np.asarray(lambda_grid, dtype=float)
    kg = recovered.k_grid
    k_query = -np.log(lam)
    if np.any(k_query < kg[0] - 1e-9) or np.any(k_query > kg[-1] + 1e-9):
        raise ValueError("lambda grid outside the probed range of the recovery")
    h = recovered.h_hat
    dk = np.diff(kg)
    seg = 0.5 * (h[1:] + h[:-1]) * dk
    tail_from = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    g = np.interp(k_query, kg, tail_from)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_rad = np.where(lam > 0, g / np.sqrt(lam), 0.0)
    return GReconstruction(lam, g, f_rad)


def fit_leading_exponent(recovered: RecoveredPotential, k_lo: float, k_hi: float):
    """Fit h_hat ~ C e^{-(p/2+1)k} on [k_lo, k_hi]; return the estimated p.

    Least squares on log h over the window (positive samples only).
    """
    sel = (recovered.k_grid >= k_lo) & (recovered.k_grid <= k_hi) & (recovered.h_hat > 0)
    if np.count_nonzero(sel) < 4:
        raise ValueError("too few positive samples in the fit window")
    kk = recovered.k_grid[sel]
    ll = np.log(recovered.h_hat[sel])
    slope, _ = np.polyfit(kk, ll, 1)
    q = -float(slope)
    return 2.0 * (q - 1.0)
