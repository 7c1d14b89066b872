"""nlscatter: small-data NLS scattering and recovery of the nonlinearity.

Forward side: a spectral split-step solver for (i d_t + Lap) u = F(t,x,u)
on periodic grids, the numerical scattering map, and the Born functional.
Inverse side: the Gaussian distribution function mu, its Laplace transform
M(z) in Gamma closed form with Hardy-space diagnostics, and two regularized
deconvolutions that reconstruct the nonlinearity pointwise in (t0, x0).
"""

from .grids import (
    Field,
    SpatialGrid,
    SpaceTimeExponents,
    Trajectory,
    lebesgue_norm,
    make_grid,
    sample_gaussian,
    spacetime_norm,
)
from .nonlinearity import (
    AdmissibilityReport,
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
from .propagator import free_propagate, gaussian_exact, sample_free_flow
from .solver import (
    BlowupError,
    ScatteringConfig,
    evolve,
    l2_inner,
    scattering_map,
    scattering_pairing,
    sobolev_surrogate,
)
from .born import (
    ConcentratedData,
    ScanRow,
    SigmaScanResult,
    born_functional,
    born_functional_concentrated,
    build_concentrated,
    fit_loglog_slope,
    localized_readout,
    sigma_scan,
)
from .mu import (
    MuTable,
    build_mu_table,
    mu_monte_carlo,
    mu_quadrature,
    mu_tail_constant,
    mu_tilde,
    unit_ball_volume,
)
from .laplace import (
    BoundsReport,
    M_closed,
    M_quadrature,
    OuterReport,
    check_bounds,
    complex_gamma,
    outer_criterion,
)
from .deconvolve import (
    ConvolutionData,
    GReconstruction,
    Kernel,
    RecoveredPotential,
    assemble_kernel,
    fit_leading_exponent,
    reconstruct_G,
    recover_h_fourier,
    recover_h_tikhonov,
    resynthesize,
    synthesize_data,
)

__version__ = "0.1.0"
