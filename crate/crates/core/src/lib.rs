//! Numerical spectral analysis of one-dimensional NLS ground states.
//!
//! The pipeline computes the ground state `Q` of `Q'' - μQ + F(Q²)Q = 0`,
//! assembles the linearized matrix operator `ℋ = ℋ₀ + V`, builds the solution
//! of `(ℋ - λ)w = 0` that decays at `+∞` for `λ` in the essential spectrum, and
//! turns its sign structure and its behaviour at `-∞` into a per-`λ`
//! certificate that no embedded eigenvalue is present.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certificate;
pub mod error;
pub mod grid;
pub mod ground_state;
pub mod inversion;
pub mod jost;
pub mod linalg;
pub mod nonlinearity;
pub mod ode;
pub mod operator;

pub use certificate::{
    certify_lambda, negative_control, reflect_record, scan_embedded, CertificateRecord, LambdaGrid,
    ScanReport, Thresholds, Verdict,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use ground_state::{solve_ground_state, GroundState, GroundStateParams};
pub use jost::{decaying_solution, expand_in_modes, JostSolution};
pub use nonlinearity::{Family, Nonlinearity, NonlinearitySpec};
pub use operator::{GridField2, LinearizedOperator, PotentialMatrix};
