//! Default numerical tolerances. All are relative unless stated otherwise.

/// Symmetry check for M, D, K.
pub const SYMMETRY: f64 = 1e-12;
/// Smallest admissible eigenvalue of M and K, relative to their norm.
pub const DEFINITENESS: f64 = 1e-12;
/// Lowest admissible eigenvalue of D, relative to its norm (PSD check).
pub const SEMIDEFINITE: f64 = 1e-12;
/// Numerical rank of B, relative to its largest singular value.
pub const RANK_B: f64 = 1e-10;

/// Regularization schedule for the fallback Riccati path.
pub const EPSILON_SCHEDULE: [f64; 4] = [1e-4, 1e-6, 1e-8, 1e-10];
/// Accepted relative increment between consecutive path points.
pub const PATH_TOL: f64 = 1e-7;
/// Eigenvalues of P below this times the largest one are dropped.
pub const RANK_TOL: f64 = 1e-12;
/// Real parts treated as zero, relative to ||A||.
pub const IMAG_AXIS: f64 = 1e-10;

/// Relative gap separating clusters of characteristic values.
pub const CLUSTER: f64 = 1e-8;
/// Absolute distance to 1 for boundary characteristic values.
pub const SIGMA_ONE: f64 = 1e-6;
/// Characteristic values below this are treated as zero.
pub const SIGMA_ZERO: f64 = 1e-12;
/// Unrefined `max |W^T V - I|` above which the projection is rejected.
pub const BIORTH_BREAKDOWN: f64 = 1e-6;

/// Degenerate |v^T S v| in sign typing, relative to ||v||^2.
pub const SIGN_DEGENERATE: f64 = 1e-10;
/// Off-pattern entries tolerated during second-order assembly, relative to ||A||.
pub const ASSEMBLY: f64 = 1e-8;
/// Maximal condition number of the sign-typed eigenvector basis.
pub const EIGVEC_COND: f64 = 1e8;
