//! Restarted subgradient methods for non-smooth convex minimization, with a
//! problem zoo and brute-force reference oracles.

pub mod data;
pub mod error;
pub mod linalg;
pub mod oracles;
pub mod problem;
pub mod problems;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use problem::{Constraint, ErrorBoundParams, Objective, ProblemInstance};
