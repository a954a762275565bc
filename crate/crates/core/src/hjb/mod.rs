//! Explicit finite-difference solvers for the Bellman system in `theta`, where
//! the value function is `u = -exp(-gamma x) exp(-gamma theta(s, q, t))`.
//!
//! Time runs backward from the terminal slice with forward Euler steps and
//! central differences in `s`. Stability requires `sigma^2 dt / h^2 <= 1/2`,
//! which is checked before any stepping.

mod convergence;
mod field;
mod full;
mod grid;
mod linear;

pub use convergence::{convergence_study, Column, ConvergenceRow, ConvergenceTable};
pub use field::{extract_quotes, OrderField, SolveReport, ThetaField};
pub use full::{fill_rate_bound, frozen_theta, required_full_n_t, solve_full_hjb};
pub use grid::Grid;
pub use linear::{solve_theta_k, LowerOrders, ThetaOrder};

use crate::scalar::Scalar;

pub(crate) const BOUNDARY_NOTE: &str =
    "price boundary: zero second derivative (linear extrapolation from the interior)";

/// Sets both boundary nodes by linear extrapolation, i.e. `theta_ss = 0` there.
pub(crate) fn extrapolate_boundaries<T: Scalar>(row: &mut [T]) {
    let n = row.len();
    row[0] = row[1] + row[1] - row[2];
    row[n - 1] = row[n - 2] + row[n - 2] - row[n - 3];
}

#[cfg(test)]
mod tests;
