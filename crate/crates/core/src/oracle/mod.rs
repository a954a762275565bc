//! Independent numerical checks of the closed forms in [`crate::model`].
//!
//! Each check recomputes a quantity by a different route (direct evaluation
//! of a defining identity, brute-force search, Monte Carlo) and reports the
//! discrepancy against a fixed tolerance.

mod feynman_kac;
mod indifference;
mod offset;
mod stationary;
mod sweep;

pub use feynman_kac::{fk_check_theta, rounding_tolerance};
pub use indifference::{check_indifference, check_indifference_perturbed, check_stationary_indifference, INDIFFERENCE_TOL};
pub use offset::{brute_force_offset, concavity_check, ConcavityReport, Objective, OffsetOptimum, SearchSpec, FD_STEP};
pub use stationary::{default_truncation, mc_stationary_value, stationary_tail_bound, StationaryRoute};
pub use sweep::{run_sweep, write_report_csv, REPORT_CSV_HEADER, Perturbation, SweepBox, SweepConfig, VerificationRecord};

/// Outcome of one numeric identity check; `passed` iff `residual <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub context: String,
}

impl ResidualReport {
    pub fn new(residual: f64, tolerance: f64, context: impl Into<String>) -> Self {
        ResidualReport {
            residual,
            tolerance,
            // NaN residuals fail
            passed: residual <= tolerance,
            context: context.into(),
        }
    }
}

/// Monte Carlo (or deterministic) estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Analytic bound on any truncated remainder; zero when nothing is truncated.
    pub tail_bound: f64,
}

impl McEstimate {
    /// `|estimate - exact| <= z * std_error + tail_bound + slack`.
    pub fn agrees_with(&self, exact: f64, z: f64, slack: f64) -> ResidualReport {
        ResidualReport::new(
            (self.estimate - exact).abs(),
            z * self.std_error + self.tail_bound + slack,
            format!("estimate {} vs exact {exact}", self.estimate),
        )
    }
}
