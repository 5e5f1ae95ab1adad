//! Laboratory for partial sums `M_f(T) = Σ_{n≤T} f(n)/√n` of Steinhaus and
//! Rademacher random multiplicative functions.
//!
//! The crate computes exact and Monte Carlo moments, tail curves,
//! extreme-value and almost-sure growth experiments, and checks the
//! identities and inequalities these quantities satisfy at desk scale.

pub mod cli;
pub mod error;
pub mod extremes;
pub mod moments;
pub mod montecarlo;
pub mod numtheory;
pub mod parallel;
pub mod partial_sum;
pub mod quadrature;
pub mod rmf;
pub mod seeding;
pub mod stats;
pub mod summation;
pub mod tails;
pub mod zetamodel;

pub use error::{Error, Result};
pub use numtheory::FactorTable;
pub use partial_sum::{partial_sum, trajectory, Trajectory, WeightSpec};
pub use rmf::{RmfKind, RmfSample};
