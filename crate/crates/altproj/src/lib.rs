//! Alternating projections onto subspaces of R^n: the iteration
//! `x_n = P_{j_n} x_{n-1}` under arbitrary index schedules, convergence
//! diagnostics, the Kaczmarz solver, and a finite construction of three
//! subspaces whose iterates pass near an orthonormal sequence.

pub mod analysis;
pub mod cli;
pub mod divergence;
pub mod io;
pub mod iteration;
pub mod kaczmarz;
pub mod linalg;
pub mod random;
pub mod schedule;
pub mod word;

pub use linalg::{Matrix, Subspace, Vector};
