use rand::Rng;
use rand_distr::StandardNormal;

use super::McEstimate;
use crate::error::{Error, Result};
use crate::model::{MarketState, ModelParams};
use crate::sim::mean_se;

/// How the inner expectation `E[exp(-gamma q sigma W_t)]` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StationaryRoute {
    /// Uses `exp(gamma^2 q^2 sigma^2 t / 2)`; only the time integral is sampled.
    #[default]
    ExactInner,
    /// Samples `W_t ~ N(0, t)` as well. Its variance is finite only for
    /// `w > 2 gamma^2 q^2 sigma^2`.
    SampledBrownian,
}

struct Setup {
    w: f64,
    /// Growth rate `gamma^2 q^2 sigma^2 / 2` of the inner expectation.
    growth: f64,
    /// `exp(-gamma x - gamma q s)`.
    scale: f64,
}

fn setup(params: &ModelParams<f64>, st: &MarketState<f64>) -> Result<Setup> {
    let w = params.discount()?;
    let g = params.gamma;
    let q = st.q as f64;
    let growth = 0.5 * g * g * q * q * params.sigma * params.sigma;
    if w <= growth {
        return Err(Error::DivergentHorizon { q: st.q, w, bound: growth });
    }
    let exponent = -g * st.x - g * q * st.s;
    let scale = exponent.exp();
    if !scale.is_finite() || scale <= f64::MIN_POSITIVE {
        return Err(Error::Overflow { exponent });
    }
    Ok(Setup { w, growth, scale })
}

/// Bound on `|integral over [t_truncate, inf)|` from the integrand's exponential envelope.
pub fn stationary_tail_bound(params: &ModelParams<f64>, st: &MarketState<f64>, t_truncate: f64) -> Result<f64> {
    let su = setup(params, st)?;
    let rate = su.w - su.growth;
    Ok(su.scale * (-rate * t_truncate).exp() / rate)
}

/// Cut-off whose tail bound is `1e-14` of the full integral.
pub fn default_truncation(params: &ModelParams<f64>, st: &MarketState<f64>) -> Result<f64> {
    let su = setup(params, st)?;
    Ok(14.0 * std::f64::consts::LN_10 / (su.w - su.growth))
}

/// Monte Carlo value of `E[int_0^inf -exp(-w t) exp(-gamma (x + q S_t)) dt]`.
///
/// Times are drawn from an exponential density truncated to `[0, t_truncate]`,
/// one per equal-probability stratum, and weighted by the integrand over the
/// density. The standard error uses the iid formula, which overstates the
/// stratified error.
///
/// With [`StationaryRoute::ExactInner`] the integrand decays at `w - g`, where
/// `g = gamma^2 q^2 sigma^2 / 2`, and the sampling rate is `(w - g) w / (w + g)`:
/// between half and all of the decay rate, so the weights have finite variance
/// for every admissible `w` and none at all when `q = 0`. The sampled route
/// uses rate `w` and knows nothing of the inner expectation.
pub fn mc_stationary_value(
    params: &ModelParams<f64>,
    st: &MarketState<f64>,
    n_samples: usize,
    t_truncate: Option<f64>,
    route: StationaryRoute,
    rng: &mut impl Rng,
) -> Result<McEstimate> {
    let su = setup(params, st)?;
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 samples, got {n_samples}")));
    }
    let t_max = match t_truncate {
        Some(t) => t,
        None => default_truncation(params, st)?,
    };
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidConfig(format!("truncation time must be positive, got {t_max}")));
    }
    let rate = match route {
        StationaryRoute::ExactInner => (su.w - su.growth) * su.w / (su.w + su.growth),
        StationaryRoute::SampledBrownian => su.w,
    };
    let mass = -(-rate * t_max).exp_m1();
    let weight = -su.scale * mass / rate;
    let vol = params.gamma * st.q as f64 * params.sigma;
    let n = n_samples as f64;
    let samples: Vec<f64> = (0..n_samples)
        .map(|i| {
            let u = (i as f64 + rng.random::<f64>()) / n;
            let t = -(-u * mass).ln_1p() / rate;
            // log of the inner expectation (exact) or of its sampled integrand
            let inner = match route {
                StationaryRoute::ExactInner => su.growth * t,
                StationaryRoute::SampledBrownian => {
                    let z: f64 = rng.sample(StandardNormal);
                    -vol * t.sqrt() * z
                }
            };
            weight * ((rate - su.w) * t + inner).exp()
        })
        .collect();
    let (estimate, std_error) = mean_se(&samples);
    Ok(McEstimate {
        estimate,
        std_error,
        tail_bound: stationary_tail_bound(params, st, t_max)?,
    })
}
