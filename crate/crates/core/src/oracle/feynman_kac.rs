use rand::distr::Open01;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::McEstimate;
use crate::error::{Error, Result};
use crate::hjb::ThetaOrder;
use crate::model::ModelParams;
use crate::sim::mean_se;

/// Slack for comparing the deterministic estimators with the closed forms:
/// they apply the same operations in a different order.
pub fn rounding_tolerance(exact: f64) -> f64 {
    8.0 * f64::EPSILON * exact.abs()
}

/// Feynman-Kac representation of the order-`k` coefficient of `theta` at `(s, t)`.
///
/// * order 0: `(1/gamma) ln E[exp(a (T - t))]`, `a = 2 A gamma / (kappa + gamma)`; deterministic.
/// * order 1: `E[s + sigma (W_T - W_t)]`, sampled with one normal per stratum.
/// * order 2: `E[int_t^T -gamma sigma^2 du]`; deterministic.
pub fn fk_check_theta(
    params: &ModelParams<f64>,
    s: f64,
    t: f64,
    order: ThetaOrder,
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<McEstimate> {
    let tau = params.time_to_expiry(t)?;
    let deterministic = |estimate| McEstimate {
        estimate,
        std_error: 0.0,
        tail_bound: 0.0,
    };
    match order {
        ThetaOrder::Zero => {
            let a = 2.0 * params.big_a * params.gamma / (params.kappa + params.gamma);
            // the discount is not random, so ln E[e^{a tau}] = a tau
            Ok(deterministic(a * tau / params.gamma))
        }
        ThetaOrder::One => {
            if n_samples < 2 {
                return Err(Error::InvalidConfig(format!("need at least 2 samples, got {n_samples}")));
            }
            let normal = Normal::standard();
            let step = params.sigma * tau.sqrt();
            let n = n_samples as f64;
            let samples: Vec<f64> = (0..n_samples)
                .map(|i| {
                    let u = (i as f64 + rng.sample::<f64, _>(Open01)) / n;
                    s + step * normal.inverse_cdf(u)
                })
                .collect();
            let (estimate, std_error) = mean_se(&samples);
            Ok(McEstimate {
                estimate,
                std_error,
                tail_bound: 0.0,
            })
        }
        ThetaOrder::Two => Ok(deterministic(-params.gamma * params.sigma2() * tau)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::theta_coeffs;
    use crate::sim::path_stream;

    fn params() -> ModelParams<f64> {
        ModelParams::new(2.0, 0.1, 140.0, 1.5, 1.0).unwrap()
    }

    #[test]
    fn order_zero_reference() {
        let est = fk_check_theta(&params(), 100.0, 0.0, ThetaOrder::Zero, 0, &mut path_stream(0, 0)).unwrap();
        assert_eq!(est.std_error, 0.0);
        assert!((est.estimate - 175.0).abs() <= rounding_tolerance(175.0));
    }

    #[test]
    fn order_two_reference() {
        let est = fk_check_theta(&params(), 100.0, 0.0, ThetaOrder::Two, 0, &mut path_stream(0, 0)).unwrap();
        let exact = theta_coeffs(&params(), 100.0, 0.0).unwrap().theta2;
        assert_eq!(est.estimate, exact);
        assert!((est.estimate + 0.4).abs() < 1e-15);
    }

    #[test]
    fn order_one_within_three_se() {
        let est = fk_check_theta(&params(), 7.0, 0.3, ThetaOrder::One, 100_000, &mut path_stream(5, 0)).unwrap();
        assert!(est.std_error > 0.0);
        assert!(est.agrees_with(7.0, 3.0, 0.0).passed, "{est:?}");
    }

    #[test]
    fn time_past_expiry_is_rejected() {
        assert!(fk_check_theta(&params(), 7.0, 1.5, ThetaOrder::Zero, 10, &mut path_stream(5, 0)).is_err());
    }
}
