//! Generalized RLL algebras over structured 4×4 R-matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`rmatrix`]: six-entry R-matrices, unitarity and Yang-Baxter checks.
//! * [`family`]: parameter-transforming rules and the orbits `R^(n)` they generate.
//! * [`gauss`]: Gauss decomposition of 2×2 block matrices into `(f, k, e)` factors.
//! * [`currents`]: the scalar structure functions `Ψ`, `Φ` and the delta normalization.
//! * [`rll_verify`]: component expansion of the graded RLL relations and a rewriting
//!   engine that reduces them with the current-relation catalog.
//! * [`reps`]: evaluation L-operators, coproduct data and commuting transfer operators.
//! * [`cli`]: JSON configuration and reports for the `rllforge` binary.

pub mod cli;
pub mod currents;
pub mod family;
pub mod gauss;
pub mod linalg;
pub mod report;
pub mod reps;
pub mod rll_verify;
pub mod rmatrix;
pub mod sampling;

pub use num_complex::Complex64 as C64;
pub use report::{CheckReport, Failure, Status};
pub use sampling::SamplingSpec;
