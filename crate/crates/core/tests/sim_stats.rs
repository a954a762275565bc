use quoter_core::model::{frozen_value, MarketState, ModelParams};
use quoter_core::sim::{estimate_utility, paired_difference, simulate_batch, FillModel, PathConfig, Strategy};

fn cfg(n_paths: usize) -> PathConfig {
    PathConfig { n_paths, dt: 1e-3, seed: 11, ..PathConfig::default() }
}

#[test]
fn flat_intensity_fill_counts() {
    // sigma = 0 and a zero half-spread: every step fills with probability A dt
    let p = ModelParams::new(0.0, 0.1, 140.0, 1.5, 1.0).unwrap();
    let strategy = Strategy::Symmetric { half_spread: 0.0 };
    let (stats, _) = simulate_batch(&p, &strategy, &cfg(2_000)).unwrap();
    assert!((stats.buys_mean - 140.0).abs() <= 3.0 * stats.buys_se, "{stats:?}");
    assert!((stats.sells_mean - 140.0).abs() <= 3.0 * stats.sells_se, "{stats:?}");

    // at least one Poisson arrival per step undercounts the Poisson mean
    let first = PathConfig { fill_model: FillModel::FirstArrival, ..cfg(2_000) };
    let (under, _) = simulate_batch(&p, &strategy, &first).unwrap();
    let expected = 1000.0 * -(-0.14f64).exp_m1();
    assert!((under.buys_mean - expected).abs() <= 3.0 * under.buys_se);
    assert!(under.buys_mean < 135.0);
}

#[test]
fn symmetric_inventory_is_centred() {
    let p = ModelParams::new(2.0, 0.1, 140.0, 1.5, 1.0).unwrap();
    let strategy = Strategy::matched_symmetric(&p).unwrap();
    let (stats, _) = simulate_batch(&p, &strategy, &cfg(2_000)).unwrap();
    assert!(stats.q_mean.abs() <= 3.0 * stats.q_se, "{stats:?}");
}

#[test]
fn no_fill_utility_matches_frozen_value() {
    let p = ModelParams::new(2.0, 0.1, 0.0, 1.5, 1.0).unwrap();
    let c = PathConfig { q0: 1, ..cfg(4_000) };
    let (mean, se) = estimate_utility(&p, &Strategy::AsymptoticInventory, &c).unwrap();
    let exact = frozen_value(&p, &MarketState::new(c.s0, 0.0, 1, c.x0)).unwrap();
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn inventory_strategy_reduces_pnl_dispersion() {
    let p = ModelParams::new(2.0, 0.1, 140.0, 1.5, 1.0).unwrap();
    let c = cfg(1_000);
    let (inv, inv_paths) = simulate_batch(&p, &Strategy::AsymptoticInventory, &c).unwrap();
    let (sym, sym_paths) = simulate_batch(&p, &Strategy::matched_symmetric(&p).unwrap(), &c).unwrap();
    assert!(inv.pnl_std < sym.pnl_std);
    assert!(inv.q_std < sym.q_std);
    let (diff, se) = paired_difference(&inv_paths, &sym_paths, |r| (r.q_t as f64).abs());
    assert!(diff + 3.0 * se < 0.0);
}
