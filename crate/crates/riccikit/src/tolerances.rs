//! Numerical tolerances and step sizes, kept in one place so tests and the
//! acceptance suite pin exactly the same numbers the library uses.

/// Relative central-difference step for first derivatives: `h = 1e-4 (1 + |x|)`.
pub const FIRST_DERIVATIVE_STEP: f64 = 1e-4;
/// Relative central-difference step for second derivatives: `h = 1e-3 (1 + |x|)`.
pub const SECOND_DERIVATIVE_STEP: f64 = 1e-3;
/// Stencil step used for third derivatives of a Hessian potential.
pub const THIRD_DERIVATIVE_STEP: f64 = 5e-3;
/// Above this condition number of `D^2 Phi` a stencil for third derivatives is refused.
pub const THIRD_DERIVATIVE_MAX_CONDITION: f64 = 1e6;

/// Eigenvalues down to `-PSD_CLAMP (1 + ||g||_F)` count as roundoff and are clamped.
pub const PSD_CLAMP: f64 = 1e-10;

/// Base number of cells for 1D CDF tables.
pub const CDF_GRID_POINTS: usize = 4096;
/// Unbounded supports are truncated at this quantile on each infinite side.
pub const TAIL_QUANTILE: f64 = 1e-12;

/// Kahler-Einstein fixed point: damping, iteration cap, and sup-norm tolerance.
pub const KE_DAMPING: f64 = 0.5;
pub const KE_MAX_ITERATIONS: usize = 500;
pub const KE_TOLERANCE: f64 = 1e-8;
/// Barycenter magnitude tolerated when recentring is disabled.
pub const KE_BARYCENTER_TOLERANCE: f64 = 1e-10;

/// Default Monte Carlo budget and bootstrap size.
pub const DEFAULT_SAMPLES: usize = 200_000;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Samples are grouped into this many equal blocks for bootstrap and sharding.
pub const SAMPLE_BLOCKS: usize = 400;
/// Smallest sample accepted by the estimators.
pub const MIN_SAMPLES: usize = 100;

/// Slack rule: a row fails iff `slack < -(SIGMA_MULTIPLIER * sigma + REL_TOL * rhs)`.
pub const SIGMA_MULTIPLIER: f64 = 3.0;
pub const REL_TOL: f64 = 0.02;

/// Clip applied to `f^2` before taking logarithms in entropy estimates.
pub const ENTROPY_CLIP: f64 = 1e-300;
/// Gauge margin excluding corners, edges, and the singular origin.
pub const GAUGE_MARGIN: f64 = 1e-8;

/// Hypothesis checks accept a margin down to this (absolute) value.
pub const HYPOTHESIS_SLACK: f64 = 1e-8;
/// Points drawn for sample-based hypothesis checks.
pub const HYPOTHESIS_GRID: usize = 2000;

/// Default radial regularization is `RADIAL_EPS_FACTOR * circumradius^2`.
pub const RADIAL_EPS_FACTOR: f64 = 1e-6;
