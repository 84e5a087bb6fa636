//! Projection-free greedy convex optimization.
//!
//! Approximate Jones and Frank-Wolfe iterations over convex hulls of atoms,
//! their stochastic finite-sum variants, and tools that check convergence
//! rates against the scalar error recurrences they satisfy.

pub mod atoms;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod greedy;
pub mod objective;
pub mod point;
pub mod problems;
pub mod recurrence;
pub mod rng;
pub mod schedule;
pub mod stochastic;
pub mod trace;
pub mod verify;

pub use atoms::{AtomSet, Oracle, OracleMode};
pub use error::{Error, Result};
pub use objective::{bregman, duality_gap, FiniteSumObjective, LeastSquaresComponent, Objective};
pub use point::Point;
pub use problems::{ProblemId, ProblemInstance};
pub use schedule::{Schedules, StochasticSchedules};
pub use trace::{Record, Trace};
