use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::strategy::Strategy;
use crate::error::{Error, Result};
use crate::model::{intensity_unchecked, MarketState, ModelParams};

/// How a fill intensity `lambda` over one step of length `dt` becomes a fill probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillModel {
    /// `min(lambda dt, 1)`: the expected fill count per step equals the Poisson mean.
    #[default]
    MeanMatched,
    /// `1 - exp(-lambda dt)`: probability of at least one Poisson arrival.
    FirstArrival,
}

impl FillModel {
    pub fn probability(self, rate: f64, dt: f64) -> f64 {
        match self {
            FillModel::MeanMatched => (rate * dt).min(1.0),
            FillModel::FirstArrival => -(-rate * dt).exp_m1(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FillModel::MeanMatched => "mean-matched",
            FillModel::FirstArrival => "first-arrival",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub s0: f64,
    pub x0: f64,
    pub q0: i64,
    /// Symmetric inventory bound; `None` is unbounded unless the strategy imposes one.
    pub q_cap: Option<i64>,
    pub clamp: bool,
    pub fill_model: FillModel,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            n_paths: 10_000,
            dt: 1e-3,
            seed: 42,
            s0: 100.0,
            x0: 0.0,
            q0: 0,
            q_cap: None,
            clamp: true,
            fill_model: FillModel::MeanMatched,
        }
    }
}

impl PathConfig {
    /// Validates against the horizon and returns the number of steps.
    pub fn n_steps(&self, horizon: f64) -> Result<usize> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_paths == 0 {
            return bad("n_paths must be >= 1".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= horizon) {
            return bad(format!("dt must lie in (0, T = {horizon}], got {}", self.dt));
        }
        let steps = (horizon / self.dt).round();
        if (steps * self.dt - horizon).abs() > 1e-9 * horizon {
            return bad(format!("T / dt = {} is not an integer", horizon / self.dt));
        }
        if !(self.s0.is_finite() && self.x0.is_finite()) {
            return bad("s0 and x0 must be finite".into());
        }
        if let Some(cap) = self.q_cap {
            if cap < 0 || self.q0.abs() > cap {
                return bad(format!("need 0 <= |q0| <= q_cap, got q0 = {}, q_cap = {cap}", self.q0));
            }
        }
        Ok(steps as usize)
    }

    /// Explicit cap, else the strategy's inventory range.
    pub fn effective_cap(&self, strategy: &Strategy) -> Option<i64> {
        self.q_cap.or_else(|| strategy.inventory_limit())
    }
}

/// Terminal outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathResult {
    pub path: u64,
    pub x_t: f64,
    pub q_t: i64,
    pub s_t: f64,
    pub pnl: f64,
    pub utility: f64,
    pub n_buys: u64,
    pub n_sells: u64,
    /// Sum of prices paid on bid fills.
    pub bid_notional: f64,
    /// Sum of prices received on ask fills.
    pub ask_notional: f64,
    /// Steps where a grid policy fell back to closed-form quotes.
    pub grid_escapes: u64,
    /// Largest `|q|` reached along the path.
    pub max_abs_q: i64,
}

const PATH_DOMAIN: u64 = 0x7369_6d75_6c61_7465;

/// Private generator of path `index`: a ChaCha stream keyed by the master seed.
pub fn path_stream(seed: u64, index: u64) -> ChaCha8Rng {
    substream(seed, PATH_DOMAIN, index)
}

pub(crate) fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(index);
    rng
}

/// Simulates one path on its own substream.
///
/// Each step: quotes from the step-start state, independent bid/ask fill draws
/// at those prices (at most one fill per side), then `S += sigma sqrt(dt) Z`.
pub fn simulate_path(
    params: &ModelParams<f64>,
    strategy: &Strategy,
    cfg: &PathConfig,
    path: u64,
    rng: &mut impl Rng,
) -> Result<PathResult> {
    params.validate()?;
    strategy.validate(params)?;
    let horizon = params.horizon_t;
    let n_steps = cfg.n_steps(horizon)?;
    let cap = cfg.effective_cap(strategy);
    if let Some(cap) = cap {
        if cfg.q0.abs() > cap {
            return Err(Error::InvalidConfig(format!(
                "initial inventory {} exceeds the cap {cap}",
                cfg.q0
            )));
        }
    }
    let vol_step = params.sigma * cfg.dt.sqrt();

    let (mut s, mut x, mut q) = (cfg.s0, cfg.x0, cfg.q0);
    let mut out = PathResult {
        path,
        x_t: 0.0,
        q_t: 0,
        s_t: 0.0,
        pnl: 0.0,
        utility: 0.0,
        n_buys: 0,
        n_sells: 0,
        bid_notional: 0.0,
        ask_notional: 0.0,
        grid_escapes: 0,
        max_abs_q: q.abs(),
    };
    for k in 0..n_steps {
        let t = horizon * k as f64 / n_steps as f64;
        let sides = strategy.sides(params, &MarketState::new(s, t, q, x), cfg.clamp)?;
        out.grid_escapes += sides.escaped as u64;

        // Fixed draw order keeps arms on common random numbers.
        let z: f64 = rng.sample(StandardNormal);
        let u_bid: f64 = rng.random();
        let u_ask: f64 = rng.random();

        let bid_open = cap.is_none_or(|c| q < c);
        let ask_open = cap.is_none_or(|c| q > -c);
        let mut dq = 0;
        if let (Some(delta), true) = (sides.bid, bid_open) {
            if u_bid < cfg.fill_model.probability(intensity_unchecked(params, delta), cfg.dt) {
                let price = s - delta;
                x -= price;
                out.bid_notional += price;
                out.n_buys += 1;
                dq += 1;
            }
        }
        if let (Some(delta), true) = (sides.ask, ask_open) {
            if u_ask < cfg.fill_model.probability(intensity_unchecked(params, delta), cfg.dt) {
                let price = s + delta;
                x += price;
                out.ask_notional += price;
                out.n_sells += 1;
                dq -= 1;
            }
        }
        q += dq;
        out.max_abs_q = out.max_abs_q.max(q.abs());
        s += vol_step * z;
    }

    out.x_t = x;
    out.q_t = q;
    out.s_t = s;
    out.pnl = x + q as f64 * s - cfg.x0 - cfg.q0 as f64 * cfg.s0;
    out.utility = -(-params.gamma * (x + q as f64 * s)).exp();
    Ok(out)
}
