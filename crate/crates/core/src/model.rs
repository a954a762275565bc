//! Closed-form analytics for the inventory-aware quoting model.
//!
//! The mid-price follows a driftless Brownian motion `dS = sigma dW`, the agent
//! has exponential utility `-exp(-gamma * wealth)`, and limit orders at distance
//! `delta` from the mid are hit with intensity `A exp(-kappa delta)`.
//!
//! ```text
//! frozen value      v(x,s,q,t) = -exp(-gamma x) exp(-gamma q s) exp(gamma^2 q^2 sigma^2 (T-t) / 2)
//! reservation       r_a = s + (1 - 2q) gamma sigma^2 (T-t) / 2
//!                   r_b = s + (-1 - 2q) gamma sigma^2 (T-t) / 2
//! spread            delta_a + delta_b = gamma sigma^2 (T-t) + (2/gamma) ln(1 + gamma/kappa)
//! ```

use crate::error::{Error, Result, Side};
use crate::scalar::Scalar;

/// Full parameter set of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Mid-price volatility per sqrt-time.
    pub sigma: T,
    /// Risk aversion, 1/currency.
    pub gamma: T,
    /// Base fill intensity `A`, fills per unit time.
    pub big_a: T,
    /// Intensity decay `kappa`, 1/currency.
    pub kappa: T,
    /// Terminal time `T`.
    pub horizon_t: T,
    /// Discount rate of the stationary (infinite-horizon) utility.
    pub discount_w: Option<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(sigma: T, gamma: T, big_a: T, kappa: T, horizon_t: T) -> Result<Self> {
        let p = ModelParams {
            sigma,
            gamma,
            big_a,
            kappa,
            horizon_t,
            discount_w: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_discount(mut self, w: T) -> Result<Self> {
        self.discount_w = Some(w);
        self.validate()?;
        Ok(self)
    }

    /// `sigma` and `A` may be zero (degenerate no-noise / no-fill models);
    /// `gamma`, `kappa` and `T` must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        fn check<T: Scalar>(name: &str, v: T, strict: bool) -> Result<()> {
            let ok = v.is_finite() && if strict { v > T::zero() } else { v >= T::zero() };
            if ok {
                Ok(())
            } else {
                let rel = if strict { "> 0" } else { ">= 0" };
                Err(Error::InvalidParams(format!("{name} must be finite and {rel}, got {v}")))
            }
        }
        check("sigma", self.sigma, false)?;
        check("gamma", self.gamma, true)?;
        check("A", self.big_a, false)?;
        check("kappa", self.kappa, true)?;
        check("T", self.horizon_t, true)?;
        if let Some(w) = self.discount_w {
            check("w", w, true)?;
        }
        Ok(())
    }

    /// Validates the parameters and `t`, returning `T - t`.
    pub fn time_to_expiry(&self, t: T) -> Result<T> {
        self.validate()?;
        if !(t >= T::zero() && t <= self.horizon_t) {
            return Err(Error::InvalidTime {
                t: t.as_f64(),
                horizon: self.horizon_t.as_f64(),
            });
        }
        Ok(self.horizon_t - t)
    }

    /// `(1/gamma) ln(1 + gamma/kappa)`, the intensity-driven part of each half-spread.
    pub fn log_term(&self) -> T {
        (self.gamma / self.kappa).ln_1p() / self.gamma
    }

    pub fn sigma2(&self) -> T {
        self.sigma * self.sigma
    }

    /// Validated stationary discount rate `w`.
    pub fn discount(&self) -> Result<T> {
        self.validate()?;
        self.discount_w
            .ok_or_else(|| Error::InvalidParams("stationary model requires discount w".into()))
    }
}

/// Instantaneous state of the agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState<T> {
    pub s: T,
    pub t: T,
    pub q: i64,
    pub x: T,
}

impl<T: Scalar> MarketState<T> {
    pub fn new(s: T, t: T, q: i64, x: T) -> Self {
        MarketState { s, t, q, x }
    }
}

/// Bid/ask offsets and the prices they imply around `mid`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote<T> {
    pub mid: T,
    pub delta_b: T,
    pub delta_a: T,
    pub p_b: T,
    pub p_a: T,
    pub clamped_b: bool,
    pub clamped_a: bool,
}

impl<T: Scalar> Quote<T> {
    pub fn from_offsets(mid: T, delta_b: T, delta_a: T) -> Self {
        Quote {
            mid,
            delta_b,
            delta_a,
            p_b: mid - delta_b,
            p_a: mid + delta_a,
            clamped_b: false,
            clamped_a: false,
        }
    }

    /// Raises negative offsets to zero, recording which side was clamped.
    pub fn clamped(self) -> Self {
        let mut out = self;
        if self.delta_b < T::zero() {
            out.delta_b = T::zero();
            out.p_b = self.mid;
            out.clamped_b = true;
        }
        if self.delta_a < T::zero() {
            out.delta_a = T::zero();
            out.p_a = self.mid;
            out.clamped_a = true;
        }
        out
    }

    pub fn spread(&self) -> T {
        self.delta_a + self.delta_b
    }
}

/// Reservation ask/bid prices and their midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservationPair<T> {
    pub r_a: T,
    pub r_b: T,
    pub r_mid: T,
}

impl<T: Scalar> ReservationPair<T> {
    pub fn new(r_a: T, r_b: T) -> Self {
        ReservationPair {
            r_a,
            r_b,
            r_mid: (r_a + r_b) * T::lit(0.5),
        }
    }
}

/// Coefficients of the second-order expansion `theta = theta0 + q theta1 + q^2 theta2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCoeffs<T> {
    pub theta0: T,
    pub theta1: T,
    pub theta2: T,
}

/// Expected terminal utility when the agent never trades.
pub fn frozen_value<T: Scalar>(params: &ModelParams<T>, st: &MarketState<T>) -> Result<T> {
    let tau = params.time_to_expiry(st.t)?;
    let q = T::from_int(st.q);
    let g = params.gamma;
    let exponent = -g * st.x - g * q * st.s + T::lit(0.5) * g * g * q * q * params.sigma2() * tau;
    checked_neg_exp(exponent)
}

/// `-exp(exponent)`, or an overflow error when the result is infinite or flushes to zero.
fn checked_neg_exp<T: Scalar>(exponent: T) -> Result<T> {
    let v = exponent.exp();
    if !v.is_finite() || v <= T::min_positive_value() {
        return Err(Error::Overflow {
            exponent: exponent.as_f64(),
        });
    }
    Ok(-v)
}

/// Indifference prices of the frozen model for buying (`r_b`) or selling (`r_a`) one share.
pub fn reservation_prices<T: Scalar>(
    params: &ModelParams<T>,
    st: &MarketState<T>,
) -> Result<ReservationPair<T>> {
    let tau = params.time_to_expiry(st.t)?;
    let half_var = params.gamma * params.sigma2() * tau * T::lit(0.5);
    let q = T::from_int(st.q);
    let two_q = q + q;
    let r_a = st.s + (T::one() - two_q) * half_var;
    let r_b = st.s + (-T::one() - two_q) * half_var;
    Ok(ReservationPair::new(r_a, r_b))
}

/// Discounted infinite-horizon utility of holding `q` shares forever.
pub fn stationary_value<T: Scalar>(params: &ModelParams<T>, st: &MarketState<T>) -> Result<T> {
    let w = params.discount()?;
    let g = params.gamma;
    let q = T::from_int(st.q);
    let growth = g * g * q * q * params.sigma2();
    let bound = growth * T::lit(0.5);
    if w <= bound {
        return Err(Error::DivergentHorizon {
            q: st.q,
            w: w.as_f64(),
            bound: bound.as_f64(),
        });
    }
    let scale = (-g * st.x - g * q * st.s).exp();
    if !scale.is_finite() || scale <= T::min_positive_value() {
        return Err(Error::Overflow {
            exponent: (-g * st.x - g * q * st.s).as_f64(),
        });
    }
    Ok(T::lit(2.0) * scale / (growth - (w + w)))
}

/// Indifference prices for the stationary utility.
///
/// ```text
/// r_b = s + (1/gamma) ln(1 + (-1 - 2q) gamma^2 sigma^2 / (2w - gamma^2 q^2 sigma^2))
/// r_a = s - (1/gamma) ln(1 + ( 2q - 1) gamma^2 sigma^2 / (2w - gamma^2 q^2 sigma^2))
/// ```
///
/// Both log arguments equal `(2w - gamma^2 (q +- 1)^2 sigma^2) / (2w - gamma^2 q^2 sigma^2)`,
/// so the post-trade inventories `q - 1` and `q + 1` must lie in the convergence
/// domain; a violation there surfaces as a nonpositive log argument.
pub fn stationary_reservation<T: Scalar>(
    params: &ModelParams<T>,
    s: T,
    q: i64,
) -> Result<ReservationPair<T>> {
    let w = params.discount()?;
    let g = params.gamma;
    let g2s2 = g * g * params.sigma2();
    let qf = T::from_int(q);
    let denom = (w + w) - g2s2 * qf * qf;
    if denom <= T::zero() {
        return Err(Error::DivergentHorizon {
            q,
            w: w.as_f64(),
            bound: (g2s2 * qf * qf * T::lit(0.5)).as_f64(),
        });
    }
    let log_ratio = |side: Side, slope: T| -> Result<T> {
        let argument = T::one() + slope * g2s2 / denom;
        if argument <= T::zero() {
            let neighbor = match side {
                Side::Ask => q - 1,
                Side::Bid => q + 1,
            };
            return Err(Error::NonpositiveLogArgument {
                side,
                neighbor,
                argument: argument.as_f64(),
            });
        }
        Ok(argument.ln() / g)
    };
    let r_b = s + log_ratio(Side::Bid, -T::one() - (qf + qf))?;
    let r_a = s - log_ratio(Side::Ask, (qf + qf) - T::one())?;
    Ok(ReservationPair::new(r_a, r_b))
}

/// Fill intensity `A exp(-kappa delta)` of a quote at offset `delta >= 0`.
pub fn intensity<T: Scalar>(params: &ModelParams<T>, delta: T) -> Result<T> {
    if delta.is_nan() || delta < T::zero() {
        return Err(Error::NegativeOffset(delta.as_f64()));
    }
    Ok(intensity_unchecked(params, delta))
}

/// Same as [`intensity`] but accepts crossed (negative) offsets.
pub fn intensity_unchecked<T: Scalar>(params: &ModelParams<T>, delta: T) -> T {
    params.big_a * (-params.kappa * delta).exp()
}

pub fn theta_coeffs<T: Scalar>(params: &ModelParams<T>, s: T, t: T) -> Result<ThetaCoeffs<T>> {
    let tau = params.time_to_expiry(t)?;
    Ok(ThetaCoeffs {
        theta0: T::lit(2.0) * params.big_a / (params.kappa + params.gamma) * tau,
        theta1: s,
        theta2: -params.gamma * params.sigma2() * tau,
    })
}

/// Reservation prices from the second-order expansion of `theta` in `q`.
pub fn asymptotic_reservation<T: Scalar>(
    params: &ModelParams<T>,
    st: &MarketState<T>,
) -> Result<ReservationPair<T>> {
    let c = theta_coeffs(params, st.s, st.t)?;
    let q = T::from_int(st.q);
    let half = T::lit(0.5);
    let two_q = q + q;
    Ok(ReservationPair {
        r_b: c.theta1 + half * c.theta2 * (two_q + T::one()),
        r_a: c.theta1 + half * c.theta2 * (two_q - T::one()),
        r_mid: c.theta1 + c.theta2 * q,
    })
}

/// Total optimal spread; depends only on time to expiry.
pub fn optimal_spread<T: Scalar>(params: &ModelParams<T>, t: T) -> Result<T> {
    let tau = params.time_to_expiry(t)?;
    let lt = params.log_term();
    Ok(params.gamma * params.sigma2() * tau + lt + lt)
}

/// Optimal quotes around the asymptotic reservation prices.
pub fn optimal_offsets<T: Scalar>(
    params: &ModelParams<T>,
    st: &MarketState<T>,
    clamp: bool,
) -> Result<Quote<T>> {
    let pair = asymptotic_reservation(params, st)?;
    let raw = offsets_from_reservation(params, &pair, st.s);
    Ok(if clamp { raw.clamped() } else { raw })
}

/// First-order-condition offsets for exponential intensity, unclamped.
pub fn offsets_from_reservation<T: Scalar>(
    params: &ModelParams<T>,
    pair: &ReservationPair<T>,
    s: T,
) -> Quote<T> {
    let lt = params.log_term();
    Quote::from_offsets(s, (s - pair.r_b) + lt, (pair.r_a - s) + lt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(sigma: f64, gamma: f64, a: f64, kappa: f64, t: f64) -> ModelParams<f64> {
        ModelParams::new(sigma, gamma, a, kappa, t).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 1.0, f64::NAN).is_err());
        assert!(params(1.0, 1.0, 1.0, 1.0, 1.0).with_discount(0.0).is_err());
        // degenerate but allowed
        assert!(ModelParams::new(0.0, 1.0, 0.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn frozen_value_examples() {
        let p = params(1.0, 0.7, 1.0, 1.0, 2.0);
        let v = frozen_value(&p, &MarketState::new(3.0, 2.0, 2, 1.0)).unwrap();
        assert_eq!(v, -(-0.7f64 * 7.0).exp());

        let p = params(1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(frozen_value(&p, &MarketState::new(5.0, 0.0, 0, 0.0)).unwrap(), -1.0);
        let v = frozen_value(&p, &MarketState::new(0.0, 0.0, 1, 0.0)).unwrap();
        assert!(close(v, -1.648_721_270_700_128_1, 1e-15));
    }

    #[test]
    fn frozen_value_errors() {
        let p = params(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            frozen_value(&p, &MarketState::new(0.0, 1.5, 0, 0.0)),
            Err(Error::InvalidTime { .. })
        ));
        assert!(matches!(
            frozen_value(&p, &MarketState::new(0.0, -0.1, 0, 0.0)),
            Err(Error::InvalidTime { .. })
        ));
        let huge = params(1.0, 50.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            frozen_value(&huge, &MarketState::new(0.0, 0.0, 10, 0.0)),
            Err(Error::Overflow { .. })
        ));
        assert!(matches!(
            frozen_value(&huge, &MarketState::new(0.0, 1.0, 0, 100.0)),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn reservation_examples() {
        let p = params(2.0, 0.1, 140.0, 1.5, 1.0);
        let at_t = reservation_prices(&p, &MarketState::new(100.0, 1.0, 4, 0.0)).unwrap();
        assert_eq!((at_t.r_a, at_t.r_b, at_t.r_mid), (100.0, 100.0, 100.0));

        let r = reservation_prices(&p, &MarketState::new(100.0, 0.0, 0, 0.0)).unwrap();
        assert!(close(r.r_a, 100.2, 1e-12) && close(r.r_b, 99.8, 1e-12));

        let r = reservation_prices(&p, &MarketState::new(100.0, 0.0, 3, 0.0)).unwrap();
        assert!(close(r.r_a, 99.0, 1e-12));
        assert!(close(r.r_b, 98.6, 1e-12));
        assert!(close(r.r_mid, 98.8, 1e-12));
    }

    #[test]
    fn stationary_value_examples() {
        let p = params(1.0, 1.0, 1.0, 1.0, 1.0).with_discount(1.0).unwrap();
        let v = stationary_value(&p, &MarketState::new(0.0, 0.0, 1, 0.0)).unwrap();
        assert!(close(v, -2.0, 1e-15));
        let v0 = stationary_value(&p, &MarketState::new(0.0, 0.0, 0, 0.0)).unwrap();
        assert!(close(v0, -1.0, 1e-15));

        let edge = params(1.0, 1.0, 1.0, 1.0, 1.0).with_discount(0.5).unwrap();
        assert!(matches!(
            stationary_value(&edge, &MarketState::new(0.0, 0.0, 1, 0.0)),
            Err(Error::DivergentHorizon { q: 1, .. })
        ));

        let no_w = params(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            stationary_value(&no_w, &MarketState::new(0.0, 0.0, 0, 0.0)),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn stationary_reservation_examples() {
        let p = params(1.0, 1.0, 1.0, 1.0, 1.0).with_discount(1.0).unwrap();
        let r = stationary_reservation(&p, 0.0, 0).unwrap();
        // ask mirrors bid at q = 0: r_a - s = s - r_b
        assert!(close(r.r_a, 0.693_147_180_559_945_3, 1e-15));
        assert!(close(r.r_b, -0.693_147_180_559_945_3, 1e-15));

        let narrow = params(1.0, 1.0, 1.0, 1.0, 1.0).with_discount(0.4).unwrap();
        let err = stationary_reservation(&narrow, 0.0, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::NonpositiveLogArgument { side: Side::Bid, neighbor: 1, .. }
        ));

        let own = params(1.0, 1.0, 1.0, 1.0, 1.0).with_discount(1.0).unwrap();
        assert!(matches!(
            stationary_reservation(&own, 0.0, 2),
            Err(Error::DivergentHorizon { q: 2, .. })
        ));

        let tiny = params(1.0, 1e-4, 1.0, 1.0, 1.0).with_discount(1.0).unwrap();
        let r = stationary_reservation(&tiny, 5.0, 0).unwrap();
        assert!(close(r.r_a, 5.000_050_000_000_125, 1e-11));
        assert!(close(r.r_b, 4.999_949_999_999_875, 1e-11));
    }

    #[test]
    fn intensity_examples() {
        let p = params(1.0, 0.1, 140.0, 1.5, 1.0);
        assert_eq!(intensity(&p, 0.0).unwrap(), 140.0);
        assert!(close(intensity(&p, 1.0).unwrap(), 31.238_222_420_780_176, 1e-12));
        let half = params(1.0, 0.1, 1.0, 2.0, 1.0);
        assert!(close(intensity(&half, 2f64.ln() / 2.0).unwrap(), 0.5, 1e-15));
        assert!(matches!(intensity(&p, -0.1), Err(Error::NegativeOffset(_))));
        assert!(intensity(&p, f64::NAN).is_err());
    }

    #[test]
    fn theta_examples() {
        let p = params(2.0, 0.1, 140.0, 1.5, 1.0);
        let c = theta_coeffs(&p, 42.0, 1.0).unwrap();
        assert_eq!((c.theta0, c.theta1, c.theta2), (0.0, 42.0, 0.0));
        assert_eq!(theta_coeffs(&p, 7.0, 0.3).unwrap().theta1, 7.0);
        let c = theta_coeffs(&p, 100.0, 0.0).unwrap();
        assert!(close(c.theta0, 175.0, 1e-12));
        assert!(close(c.theta2, -0.4, 1e-15));
        assert!(theta_coeffs(&p, 100.0, 1.1).is_err());
    }

    #[test]
    fn asymptotic_reservation_examples() {
        let p = params(2.0, 0.1, 140.0, 1.5, 1.0);
        let r = asymptotic_reservation(&p, &MarketState::new(100.0, 1.0, 5, 0.0)).unwrap();
        assert_eq!((r.r_a, r.r_b, r.r_mid), (100.0, 100.0, 100.0));
        let r = asymptotic_reservation(&p, &MarketState::new(100.0, 0.0, 3, 0.0)).unwrap();
        assert!(close(r.r_mid, 98.8, 1e-12));
        let r = asymptotic_reservation(&p, &MarketState::new(100.0, 0.0, 0, 0.0)).unwrap();
        assert!(close(r.r_a, 100.2, 1e-12) && close(r.r_b, 99.8, 1e-12));
    }

    #[test]
    fn spread_examples() {
        let p = params(2.0, 0.1, 140.0, 1.5, 1.0);
        assert!(close(optimal_spread(&p, 1.0).unwrap(), 1.290_770_422_751_423_4, 1e-14));
        assert!(close(optimal_spread(&p, 0.0).unwrap(), 1.690_770_422_751_423_4, 1e-14));
        let unit = params(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(close(optimal_spread(&unit, 0.0).unwrap(), 2.386_294_361_119_890_6, 1e-14));
    }

    #[test]
    fn offsets_examples() {
        let p = params(2.0, 0.1, 140.0, 1.5, 1.0);
        let flat = optimal_offsets(&p, &MarketState::new(100.0, 0.25, 0, 0.0), true).unwrap();
        let half = optimal_spread(&p, 0.25).unwrap() / 2.0;
        assert!(close(flat.delta_a, half, 1e-12) && close(flat.delta_b, half, 1e-12));

        let st = MarketState::new(100.0, 0.0, 3, 0.0);
        let raw = optimal_offsets(&p, &st, false).unwrap();
        assert!(close(raw.delta_b, 2.045_385_211_375_711_7, 1e-12));
        assert!(close(raw.delta_a, -0.354_614_788_624_288_3, 1e-12));
        assert!(!raw.clamped_a && raw.p_a < st.s);
        let clamped = optimal_offsets(&p, &st, true).unwrap();
        assert_eq!(clamped.delta_a, 0.0);
        assert!(clamped.clamped_a && !clamped.clamped_b);
        assert_eq!(clamped.p_a, 100.0);
        assert_eq!(clamped.delta_b, raw.delta_b);

        let q1 = optimal_offsets(&p, &MarketState::new(100.0, 0.0, 1, 0.0), false).unwrap();
        assert!(close(q1.delta_b, 1.245_385_211_375_711_7, 1e-12));
        assert!(close(q1.delta_a, 0.445_385_211_375_711_7, 1e-12));
        assert!(close(q1.spread(), 1.690_770_422_751_423_4, 1e-12));
    }

    #[test]
    fn offsets_from_reservation_examples() {
        let unit = params(1.0, 1.0, 1.0, 1.0, 1.0);
        let q = offsets_from_reservation(&unit, &ReservationPair::new(3.0, 3.0), 3.0);
        assert!(close(q.delta_a, std::f64::consts::LN_2, 1e-15));
        assert!(close(q.delta_b, std::f64::consts::LN_2, 1e-15));

        let p = params(2.0, 0.1, 140.0, 1.5, 1.0);
        let q = offsets_from_reservation(&p, &ReservationPair::new(10.2, 9.9), 10.0);
        assert!(close(q.delta_a, 0.845_385_211_375_711_7, 1e-12));
    }

    #[test]
    fn generic_over_f32() {
        let p = ModelParams::<f32>::new(2.0, 0.1, 140.0, 1.5, 1.0).unwrap();
        let st = MarketState::new(100.0f32, 0.0, 1, 0.0);
        let q = optimal_offsets(&p, &st, false).unwrap();
        assert!((q.delta_b - 1.245_385_2).abs() < 1e-4);
        assert!((optimal_spread(&p, 0.0).unwrap() - 1.690_770_4).abs() < 1e-5);
    }
}
