//! Monte Carlo market-making simulator.
//!
//! The mid-price is Bachelier (`dS = sigma dW`), the agent posts a bid and an
//! ask every step, and each side is lifted with a probability driven by the
//! fill intensity `A exp(-kappa delta)`. Every path owns a ChaCha substream
//! derived from the master seed, so a batch is bit-identical however rayon
//! schedules it.

mod path;
mod stats;
mod strategy;

use std::io::Write;

use rayon::prelude::*;

pub(crate) use path::substream;
pub use path::{path_stream, simulate_path, FillModel, PathConfig, PathResult};
pub use stats::{mean_se, mean_std, pairwise_sum, quantile_sorted, SummaryStats, QUANTILE_LEVELS};
pub use strategy::Strategy;

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::model::ModelParams;

/// Runs `cfg.n_paths` independent paths; records come back in path order.
pub fn simulate_batch(
    params: &ModelParams<f64>,
    strategy: &Strategy,
    cfg: &PathConfig,
) -> Result<(SummaryStats, Vec<PathResult>)> {
    cfg.n_steps(params.horizon_t)?;
    let paths = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(params, strategy, cfg, i, &mut path_stream(cfg.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok((SummaryStats::from_paths(&paths), paths))
}

/// Mean terminal utility `-exp(-gamma (x_T + q_T s_T))` and its standard error.
pub fn estimate_utility(params: &ModelParams<f64>, strategy: &Strategy, cfg: &PathConfig) -> Result<(f64, f64)> {
    let (_, paths) = simulate_batch(params, strategy, cfg)?;
    utility_of(params, &paths)
}

pub(crate) fn utility_of(params: &ModelParams<f64>, paths: &[PathResult]) -> Result<(f64, f64)> {
    if let Some(bad) = paths.iter().find(|p| !(p.utility.is_finite() && p.utility < 0.0)) {
        return Err(Error::OverflowInUtility(params.gamma * (bad.x_t + bad.q_t as f64 * bad.s_t)));
    }
    let utilities: Vec<f64> = paths.iter().map(|p| p.utility).collect();
    Ok(mean_se(&utilities))
}

/// Mean and standard error of `f(a_i) - f(b_i)` over paths run on common random numbers.
pub fn paired_difference(a: &[PathResult], b: &[PathResult], f: impl Fn(&PathResult) -> f64) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired arms need equal path counts");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| f(x) - f(y)).collect();
    mean_se(&diffs)
}

pub const PATH_CSV_HEADER: [&str; 8] = ["path", "x_T", "q_T", "s_T", "pnl", "utility", "n_buys", "n_sells"];

pub fn write_paths_csv<W: Write>(paths: &[PathResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATH_CSV_HEADER)?;
    for p in paths {
        w.write_record([
            p.path.to_string(),
            sig9(p.x_t),
            p.q_t.to_string(),
            sig9(p.s_t),
            sig9(p.pnl),
            sig9(p.utility),
            p.n_buys.to_string(),
            p.n_sells.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_CSV_HEADER: [&str; 20] = [
    "arm", "n_paths", "pnl_mean", "pnl_std", "pnl_se", "pnl_min", "pnl_p05", "pnl_p25", "pnl_p50", "pnl_p75",
    "pnl_p95", "pnl_max", "q_mean", "q_std", "q_se", "utility_mean", "utility_se", "buys_mean", "sells_mean",
    "grid_escapes",
];

/// One row per strategy arm.
pub fn write_summary_csv<W: Write>(arms: &[(String, SummaryStats)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_CSV_HEADER)?;
    for (name, s) in arms {
        let mut row = vec![name.clone(), s.n_paths.to_string()];
        row.extend(
            [s.pnl_mean, s.pnl_std, s.pnl_se, s.pnl_min]
                .into_iter()
                .chain(s.pnl_quantiles)
                .chain([s.pnl_max, s.q_mean, s.q_std, s.q_se, s.utility_mean, s.utility_se, s.buys_mean, s.sells_mean])
                .map(sig9),
        );
        row.push(s.grid_escapes.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
