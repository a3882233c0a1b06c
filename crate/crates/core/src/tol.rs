//! Numerical thresholds shared by validation, solvers, and tests.
//!
//! Every tolerance that shapes observable behaviour lives here so that the
//! library, the CLI, and the test suite agree on a single set of values.

/// Entrywise bound for the Hermiticity check at matrix construction.
pub const HERMITICITY: f64 = 1e-12;

/// Allowed deviation of a density-matrix trace from one.
pub const DENSITY_TRACE: f64 = 1e-10;

/// Most negative eigenvalue a density matrix may carry (roundoff slack).
pub const DENSITY_EIG_FLOOR: f64 = -1e-9;

/// Eigenvalues in `[-ENTROPY_CLAMP, 0)` are clamped to zero before `x ln x`.
pub const ENTROPY_CLAMP: f64 = 1e-10;

/// Allowed deviation of a probability spectrum's sum from one.
pub const ENTROPY_SUM: f64 = 1e-8;

/// Default eigenvalue-clustering width for maximal spectral projections.
pub const DEGENERACY: f64 = 1e-8;

/// Widened clustering width, tried once when face certification fails.
pub const DEGENERACY_WIDE: f64 = 1e-6;

/// Dual Newton gradient tolerance (sup norm) for interior solves.
pub const NEWTON_GRAD: f64 = 1e-10;

/// Dual-vector norm at which the Newton iteration declares a boundary escape.
pub const THETA_MAX: f64 = 1e4;

/// State eigenvalues at or above this threshold count as support.
pub const SUPPORT_RANK: f64 = 1e-8;

/// Interior convergence with a state eigenvalue below this is re-examined
/// for a face snap: the weight may be a phantom of a dual iteration that
/// stopped on gradient cancellation instead of a genuine fiber direction.
pub const SUSPICIOUS_EIG: f64 = 1e-6;

/// Constraint residual (sup norm) required of a successful inference.
pub const CONSTRAINT_RESIDUAL: f64 = 1e-8;

/// Hyperplane slack when certifying that a point lies on an exposed face.
pub const FACE_CONSISTENCY: f64 = 1e-6;

/// Trace-distance gap above which a continuity probe reports a jump.
pub const GAP: f64 = 1e-4;

/// Cauchy threshold for the tail of a continuity-probe sequence.
pub const CAUCHY: f64 = 1e-6;

/// Spectral width above which a compressed imaginary part spans a flat
/// boundary segment rather than a point.
pub const FLAT_WIDTH: f64 = 1e-7;

/// Singular values at or above this count toward image dimensions.
pub const RANK_SV: f64 = 1e-8;

/// Frobenius residual bound for block-diagonalization certificates.
pub const BLOCK_RESIDUAL: f64 = 1e-8;

/// Conic-fit residual below which a swept boundary is classified an ellipse.
pub const ELLIPSE_FIT: f64 = 1e-6;

/// Gauge value beyond which a boundedness scan reports "unbounded".
pub const GAUGE_UNBOUNDED: f64 = 1e6;
