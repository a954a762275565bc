use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use quoter_core::fmt::sig9;
use quoter_core::hjb::{convergence_study, solve_full_hjb, solve_theta_k, Column, LowerOrders, ThetaOrder};
use quoter_core::model::{
    asymptotic_reservation, optimal_offsets, optimal_spread, reservation_prices, MarketState,
};
use quoter_core::oracle::{run_sweep, write_report_csv, Perturbation};
use quoter_core::sim::{simulate_batch, write_paths_csv, write_summary_csv, Strategy};

use crate::config::{Arm, RunConfig};
use crate::error::{CliError, CliResult};

pub const QUOTES_HEADER: [&str; 13] = [
    "q", "s", "t", "r_b", "r_a", "r_mid", "asym_r_b", "asym_r_a", "delta_b", "delta_a", "delta_b_clamped",
    "delta_a_clamped", "spread",
];

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn core<T>(r: quoter_core::Result<T>) -> CliResult<T> {
    r.map_err(CliError::from)
}

/// Prints reservation prices, offsets and spread for one state or an inventory range.
pub fn quotes(cfg: &RunConfig, sweep_q: Option<(i64, i64)>, out: Option<&PathBuf>) -> CliResult {
    let st = cfg.state;
    let (q_lo, q_hi) = sweep_q.unwrap_or((st.q, st.q));
    if q_lo > q_hi {
        return Err(CliError::Config(format!("empty inventory range {q_lo}..{q_hi}")));
    }
    let mut rows = Vec::new();
    for q in q_lo..=q_hi {
        let state = MarketState::new(st.s, st.t, q, st.x);
        let exact = core(reservation_prices(&cfg.params, &state))?;
        let series = core(asymptotic_reservation(&cfg.params, &state))?;
        let raw = core(optimal_offsets(&cfg.params, &state, false))?;
        let clamped = raw.clamped();
        let spread = core(optimal_spread(&cfg.params, st.t))?;
        let mut row = vec![q.to_string()];
        row.extend(
            [
                st.s,
                st.t,
                exact.r_b,
                exact.r_a,
                exact.r_mid,
                series.r_b,
                series.r_a,
                raw.delta_b,
                raw.delta_a,
                clamped.delta_b,
                clamped.delta_a,
                spread,
            ]
            .map(sig9),
        );
        rows.push(row);
    }
    let emit = |w: &mut dyn Write| -> CliResult {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(QUOTES_HEADER).map_err(other)?;
        for row in &rows {
            csv.write_record(row).map_err(other)?;
        }
        csv.flush()?;
        Ok(())
    };
    emit(&mut io::stdout().lock())?;
    if let Some(dir) = out {
        emit(&mut create(dir, "quotes.csv")?)?;
    }
    Ok(())
}

fn other(e: csv::Error) -> CliError {
    CliError::Other(e.to_string())
}

/// Solves the full Bellman system, or one coefficient equation with `order`.
pub fn solve(cfg: &RunConfig, order: Option<usize>, out: Option<&PathBuf>) -> CliResult {
    let mut stdout = io::stdout().lock();
    match order {
        Some(k) => {
            let order = ThetaOrder::from_index(k)
                .ok_or_else(|| CliError::Config(format!("--order must be 0, 1 or 2, got {k}")))?;
            let (field, report) = core(solve_theta_k(&cfg.params, &cfg.grid, order, LowerOrders::ClosedForm))?;
            writeln!(stdout, "mode: order {k}")?;
            print_report(&mut stdout, &cfg.grid, &report)?;
            if let Some(dir) = out {
                core(field.write_csv(create(dir, &format!("theta{k}.csv"))?))?;
            }
        }
        None => {
            let (field, report) = core(solve_full_hjb(&cfg.params, &cfg.grid, cfg.grid_clamp))?;
            writeln!(stdout, "mode: full")?;
            print_report(&mut stdout, &cfg.grid, &report)?;
            writeln!(stdout, "zero_inventory_gap: {}", sig9(field.zero_inventory_gap()))?;
            if let Some(dir) = out {
                core(field.write_csv(create(dir, "theta.csv")?))?;
            }
        }
    }
    Ok(())
}

fn print_report(
    w: &mut impl Write,
    grid: &quoter_core::hjb::Grid<f64>,
    report: &quoter_core::hjb::SolveReport<f64>,
) -> CliResult {
    writeln!(w, "n_s: {}", grid.n_s)?;
    writeln!(w, "n_t: {}", grid.n_t)?;
    writeln!(w, "steps: {}", report.steps)?;
    writeln!(w, "cfl_ratio: {}", sig9(report.cfl_ratio))?;
    match report.sup_error_vs_closed_form {
        Some(e) => writeln!(w, "sup_error: {}", sig9(e))?,
        None => writeln!(w, "sup_error: n/a")?,
    }
    writeln!(w, "clamp_events: {}", report.clamp_events)?;
    writeln!(w, "wall_time_s: {:.3}", report.wall_time)?;
    for note in &report.notes {
        writeln!(w, "note: {note}")?;
    }
    Ok(())
}

fn strategy_for(cfg: &RunConfig, arm: Arm) -> CliResult<Strategy> {
    Ok(match arm {
        Arm::Asymptotic => Strategy::AsymptoticInventory,
        Arm::Frozen => Strategy::FrozenReservation,
        Arm::Symmetric => match cfg.half_spread {
            Some(h) => Strategy::Symmetric { half_spread: h },
            None => core(Strategy::matched_symmetric(&cfg.params))?,
        },
        Arm::Grid => {
            let (field, _) = core(solve_full_hjb(&cfg.params, &cfg.grid, cfg.grid_clamp))?;
            Strategy::GridPolicy(Arc::new(field))
        }
    })
}

/// Runs every arm on the same seed (common random numbers) and prints the summary.
pub fn simulate(cfg: &RunConfig, arms: &[Arm], out: Option<&PathBuf>) -> CliResult {
    let mut summaries = Vec::new();
    for &arm in arms {
        let strategy = strategy_for(cfg, arm)?;
        let (stats, paths) = core(simulate_batch(&cfg.params, &strategy, &cfg.path))?;
        if let Some(dir) = out {
            core(write_paths_csv(&paths, create(dir, &format!("paths_{}.csv", strategy.name()))?))?;
        }
        summaries.push((strategy.name().to_string(), stats));
    }
    core(write_summary_csv(&summaries, io::stdout().lock()))?;
    if let Some(dir) = out {
        core(write_summary_csv(&summaries, create(dir, "summary.csv")?))?;
    }
    Ok(())
}

/// Runs the oracle sweep; any failed check is a verification failure.
pub fn verify(cfg: &RunConfig, perturbation: Option<Perturbation>, out: Option<&PathBuf>) -> CliResult {
    let sweep = quoter_core::oracle::SweepConfig { perturbation, ..cfg.sweep };
    let records = core(run_sweep(&sweep))?;
    if let Some(dir) = out {
        core(write_report_csv(&records, create(dir, "verify.csv")?))?;
    }
    let failed: Vec<_> = records.iter().filter(|r| !r.report.passed).collect();
    println!("draws: {}", sweep.draws);
    println!("checks: {}", records.len());
    println!("failed: {}", failed.len());
    if failed.is_empty() {
        return Ok(());
    }
    let mut stderr = io::stderr().lock();
    for r in &failed {
        writeln!(
            stderr,
            "FAIL {} [{}] residual {} > tolerance {}",
            r.check,
            r.params_hash,
            sig9(r.report.residual),
            sig9(r.report.tolerance)
        )?;
    }
    Err(CliError::Verification(format!("{} of {} checks failed", failed.len(), records.len())))
}

/// Refinement study of the coefficient solvers and the no-fill full system.
pub fn convergence(cfg: &RunConfig, out: Option<&PathBuf>) -> CliResult {
    let table = core(convergence_study(&cfg.params, &cfg.grid, cfg.levels))?;
    core(table.write_csv(io::stdout().lock()))?;
    for c in Column::ALL {
        let orders: Vec<String> = table
            .orders(c)
            .into_iter()
            .map(|o| o.map_or("exact".to_string(), sig9))
            .collect();
        println!("{}: monotone={} orders=[{}]", c.name(), table.is_monotone(c), orders.join(", "));
    }
    if let Some(dir) = out {
        core(table.write_csv(create(dir, "convergence.csv")?))?;
    }
    Ok(())
}
