//! Maximum-entropy inference over quantum state spaces.
//!
//! Given Hermitian observables `u_1 .. u_r` on `C^d`, the expected-value map
//! sends a density matrix `rho` to `(tr(u_1 rho), .., tr(u_r rho))`. This
//! crate solves the inverse problem: among all states with a prescribed
//! expected-value vector, find the one of maximal von Neumann entropy. The
//! solver works in the exponential-family dual and certifies exposed faces
//! when the target sits on the boundary of the convex support.
//!
//! Around that core the crate analyzes the geometry that governs when the
//! inference map is continuous:
//!
//! - [`numerical_range`]: boundary sweeps of `W(u_1 + i u_2)`, corner / flat /
//!   round classification, reducibility splitting, and discontinuity
//!   candidates (multiply generated round boundary points);
//! - [`faces`]: exposed-face dimensions, lower-semicontinuity probes, and
//!   gauge-function scans of planar convex supports;
//! - [`correlation`]: the three-qubit two-local correlation quantity built on
//!   top of the inference solver;
//! - [`cli`]: the batch command line driving all of the above with JSON, CSV,
//!   and SVG reports.

#![forbid(unsafe_code)]

pub mod cli;
pub mod correlation;
pub mod error;
pub mod expectation;
pub mod faces;
pub mod fixtures;
pub mod linalg;
pub mod maxent;
pub mod numerical_range;
pub mod report;
pub mod states;
pub mod tol;

pub use expectation::{ExpectedValue, FaceDescriptor, ObservableSet};
pub use maxent::{
    ContinuityReport, MaxEntSolution, ProbeVerdict, SolveStatus, SolverOptions, continuity_probe,
    maxent,
};
pub use states::{DensityMatrix, PureStateVector, SystemDims};
pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix, HermitianMatrix, Projection, SpectralDecomposition};
