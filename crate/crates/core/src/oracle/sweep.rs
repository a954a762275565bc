use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{
    brute_force_offset, check_indifference_perturbed, check_stationary_indifference, concavity_check, fk_check_theta,
    mc_stationary_value, rounding_tolerance, Objective, ResidualReport, SearchSpec, StationaryRoute,
};
use crate::error::{Error, Result, Side};
use crate::fmt::sig9;
use crate::hjb::ThetaOrder;
use crate::model::{
    offsets_from_reservation, reservation_prices, stationary_value, theta_coeffs, MarketState, ModelParams,
    ReservationPair,
};
use crate::sim::substream;

/// Absolute agreement required between searched and closed-form offsets.
const FOC_TOL: f64 = 1e-8;
/// Redraws allowed per sweep point before giving up on the box.
const MAX_ATTEMPTS: usize = 10_000;
const SWEEP_DOMAIN: u64 = 0x6f72_6163_6c65_7377;

/// Parameter ranges of a randomized sweep; every range is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBox {
    pub gamma: (f64, f64),
    pub sigma: (f64, f64),
    pub kappa: (f64, f64),
    pub big_a: (f64, f64),
    /// Time to expiry `T - t`.
    pub tau: (f64, f64),
    /// Inventories are drawn from `-q_abs_max..=q_abs_max`.
    pub q_abs_max: i64,
    pub s: (f64, f64),
    pub x: (f64, f64),
}

impl Default for SweepBox {
    fn default() -> Self {
        SweepBox {
            gamma: (0.01, 2.0),
            sigma: (0.1, 4.0),
            kappa: (0.1, 5.0),
            big_a: (1.0, 300.0),
            tau: (0.01, 2.0),
            q_abs_max: 10,
            s: (1.0, 10.0),
            x: (-5.0, 5.0),
        }
    }
}

impl SweepBox {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("gamma", self.gamma, true),
            ("sigma", self.sigma, false),
            ("kappa", self.kappa, true),
            ("A", self.big_a, true),
            ("tau", self.tau, true),
            ("s", self.s, false),
            ("x", self.x, false),
        ];
        for (name, (lo, hi), positive) in ranges {
            let floor_ok = if positive { lo > 0.0 } else { lo.is_finite() };
            if !(floor_ok && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!("empty or invalid sweep range {name} = [{lo}, {hi}]")));
            }
        }
        if self.q_abs_max < 0 {
            return Err(Error::InvalidConfig(format!("q_abs_max must be >= 0, got {}", self.q_abs_max)));
        }
        Ok(())
    }
}

/// Deliberate corruption injected into the checks, for testing the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Shift both reservation prices by the given amount.
    Reservation(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub bounds: SweepBox,
    pub draws: usize,
    pub seed: u64,
    pub mc_samples: usize,
    pub fk_samples: usize,
    pub perturbation: Option<Perturbation>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            bounds: SweepBox::default(),
            draws: 100,
            seed: 42,
            mc_samples: 2_000,
            fk_samples: 10_000,
            perturbation: None,
        }
    }
}

/// One row of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub check: String,
    pub params_hash: String,
    pub report: ResidualReport,
}

#[derive(Debug, Clone, Copy)]
struct Draw {
    params: ModelParams<f64>,
    st: MarketState<f64>,
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

impl Draw {
    fn sample(bounds: &SweepBox, rng: &mut impl Rng) -> Result<Self> {
        let gamma = uniform(rng, bounds.gamma);
        let sigma = uniform(rng, bounds.sigma);
        let kappa = uniform(rng, bounds.kappa);
        let big_a = uniform(rng, bounds.big_a);
        let tau = uniform(rng, bounds.tau);
        let t = rng.random::<f64>();
        let q = rng.random_range(-bounds.q_abs_max..=bounds.q_abs_max);
        let s = uniform(rng, bounds.s);
        let x = uniform(rng, bounds.x);
        // stationary discount inside the convergence domain of q and both neighbours
        let q_far = (q.abs() + 1) as f64;
        let bound = 0.5 * gamma * gamma * sigma * sigma * q_far * q_far;
        let w = bound * (1.05 + 2.95 * rng.random::<f64>());
        let params = ModelParams::new(sigma, gamma, big_a, kappa, t + tau)?.with_discount(w)?;
        Ok(Draw {
            params,
            st: MarketState::new(s, t, q, x),
        })
    }

    fn hash(&self) -> String {
        let p = &self.params;
        let mut h = Sha256::new();
        for v in [p.sigma, p.gamma, p.big_a, p.kappa, p.horizon_t, p.discount_w.unwrap_or(f64::NAN), self.st.s, self.st.t, self.st.x] {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(self.st.q.to_le_bytes());
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn run_draw(cfg: &SweepConfig, index: u64) -> Result<Vec<VerificationRecord>> {
    let mut rng = substream(cfg.seed, SWEEP_DOMAIN, index);
    let bump = match cfg.perturbation {
        Some(Perturbation::Reservation(b)) => b,
        None => 0.0,
    };
    // Redraw until every value function is representable in f64.
    let mut attempt = 0;
    let (draw, frozen, stationary) = loop {
        attempt += 1;
        let draw = Draw::sample(&cfg.bounds, &mut rng)?;
        let frozen = check_indifference_perturbed(&draw.params, &draw.st, bump);
        let stationary = check_stationary_indifference(&draw.params, &draw.st, bump);
        match (frozen, stationary) {
            (Ok(f), Ok(s)) => break (draw, f, s),
            (Err(Error::Overflow { .. }), _) | (_, Err(Error::Overflow { .. })) if attempt < MAX_ATTEMPTS => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    };
    let (p, st) = (&draw.params, &draw.st);
    let mut out = vec![
        ("indifference_bid".to_string(), frozen.0),
        ("indifference_ask".to_string(), frozen.1),
        ("stationary_indifference_bid".to_string(), stationary.0),
        ("stationary_indifference_ask".to_string(), stationary.1),
    ];

    let pair = reservation_prices(p, st)?;
    let pair = ReservationPair::new(pair.r_a + bump, pair.r_b + bump);
    let closed = offsets_from_reservation(p, &pair, st.s);
    let spec = SearchSpec::for_params(p);
    for (side, r, target) in [(Side::Bid, pair.r_b, closed.delta_b), (Side::Ask, pair.r_a, closed.delta_a)] {
        let opt = brute_force_offset(p, st.s, r, side, &spec)?;
        let name = side.as_str();
        out.push((
            format!("foc_{name}"),
            ResidualReport::new((opt.delta - target).abs(), FOC_TOL, format!("searched vs closed-form {name} offset")),
        ));
        // no offset near the closed form beats the searched maximum
        let obj = Objective::new(p, st.s, r, side)?;
        let rival = [target - FOC_TOL, target, target + FOC_TOL]
            .map(|d| obj.log_value(d))
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        out.push((
            format!("true_max_{name}"),
            ResidualReport::new(
                (rival - opt.log_value).max(0.0),
                8.0 * obj.log_rounding(opt.delta),
                format!("log objective near closed-form {name} offset vs searched maximum"),
            ),
        ));
        out.push((format!("concavity_{name}"), concavity_check(p, st.s, r, side, opt.delta)?.report));
    }

    let coeffs = theta_coeffs(p, st.s, st.t)?;
    for (order, exact) in [
        (ThetaOrder::Zero, coeffs.theta0),
        (ThetaOrder::One, coeffs.theta1),
        (ThetaOrder::Two, coeffs.theta2),
    ] {
        let est = fk_check_theta(p, st.s, st.t, order, cfg.fk_samples, &mut rng)?;
        out.push((
            format!("feynman_kac_{}", order.index()),
            est.agrees_with(exact, 3.0, rounding_tolerance(exact)),
        ));
    }

    let exact = stationary_value(p, st)?;
    let est = mc_stationary_value(p, st, cfg.mc_samples, None, StationaryRoute::ExactInner, &mut rng)?;
    out.push(("stationary_value".to_string(), est.agrees_with(exact, 3.0, rounding_tolerance(exact))));

    let hash = draw.hash();
    Ok(out
        .into_iter()
        .map(|(check, report)| VerificationRecord {
            check,
            params_hash: hash.clone(),
            report,
        })
        .collect())
}

/// Runs every oracle on `cfg.draws` random points of the box; draws run in
/// parallel and records come back in draw order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<VerificationRecord>> {
    cfg.bounds.validate()?;
    if cfg.draws == 0 {
        return Err(Error::InvalidConfig("sweep needs at least one draw".into()));
    }
    let per_draw = (0..cfg.draws as u64)
        .into_par_iter()
        .map(|i| run_draw(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_draw.into_iter().flatten().collect())
}

pub const REPORT_CSV_HEADER: &str = "check,params_hash,residual,tolerance,passed";

pub fn write_report_csv(records: &[VerificationRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_CSV_HEADER.split(','))?;
    for r in records {
        w.write_record([
            r.check.as_str(),
            r.params_hash.as_str(),
            &sig9(r.report.residual),
            &sig9(r.report.tolerance),
            if r.report.passed { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}
