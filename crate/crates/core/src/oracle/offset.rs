use super::ResidualReport;
use crate::error::{Error, Result, Side};
use crate::model::ModelParams;

/// Step of the central difference taken on `f'` in [`concavity_check`].
pub const FD_STEP: f64 = 1e-5;

/// Relative agreement required between the finite-difference and analytic `f''`.
const FD_TOL: f64 = 1e-6;

/// Expected profit of a single quote at offset `delta`:
///
/// ```text
/// bid  f(d) = (A/gamma) e^{-kappa d} (1 - e^{gamma (s - d - r_b)})
/// ask  f(d) = (A/gamma) e^{-kappa d} (1 - e^{-gamma (s + d - r_a)})
/// ```
///
/// Both are `(A/gamma) e^{-kappa d} (1 - e^{-gamma (d - edge)})`, with `edge` the
/// offset at which the quote trades exactly at the reservation price. The
/// derivatives are scaled by `e^{kappa anchor}` so they stay representable far
/// from the mid; the scaling is positive and drops out of signs and ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub gamma: f64,
    pub kappa: f64,
    pub big_a: f64,
    pub edge: f64,
    pub anchor: f64,
}

impl Objective {
    pub fn new(params: &ModelParams<f64>, s: f64, r: f64, side: Side) -> Result<Self> {
        params.validate()?;
        if params.big_a <= 0.0 {
            return Err(Error::InvalidParams("the quote objective needs A > 0".into()));
        }
        if !(s.is_finite() && r.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite price s = {s}, r = {r}")));
        }
        let edge = match side {
            Side::Bid => s - r,
            Side::Ask => r - s,
        };
        Ok(Objective {
            gamma: params.gamma,
            kappa: params.kappa,
            big_a: params.big_a,
            edge,
            anchor: 0.0,
        })
    }

    pub fn anchored(self, anchor: f64) -> Self {
        Objective { anchor, ..self }
    }

    fn decay(&self, delta: f64) -> f64 {
        (-self.gamma * (delta - self.edge)).exp()
    }

    /// `f(delta)`, unscaled.
    pub fn value(&self, delta: f64) -> f64 {
        self.big_a / self.gamma * (-self.kappa * delta).exp() * -(-self.gamma * (delta - self.edge)).exp_m1()
    }

    /// `ln f(delta)`; `-inf` where the quote loses money.
    pub fn log_value(&self, delta: f64) -> f64 {
        let gain = -(-self.gamma * (delta - self.edge)).exp_m1();
        if gain <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.big_a / self.gamma).ln() - self.kappa * delta + gain.ln()
    }

    /// Rounding bound of [`Objective::log_value`]: machine epsilon times the summed term magnitudes.
    pub fn log_rounding(&self, delta: f64) -> f64 {
        let gain = -(-self.gamma * (delta - self.edge)).exp_m1();
        f64::EPSILON * ((self.big_a / self.gamma).ln().abs() + (self.kappa * delta).abs() + gain.ln().abs() + 1.0)
    }

    fn scale(&self, delta: f64) -> f64 {
        self.big_a / self.gamma * (-self.kappa * (delta - self.anchor)).exp()
    }

    /// `e^{kappa anchor} f'(delta)`.
    pub fn d1(&self, delta: f64) -> f64 {
        // (kappa + gamma) e^{-gamma u} - kappa, written to avoid cancellation for small gamma
        let u = delta - self.edge;
        let bracket = self.kappa * (-self.gamma * u).exp_m1() + self.gamma * (-self.gamma * u).exp();
        self.scale(delta) * bracket
    }

    /// `e^{kappa anchor} f''(delta)`.
    pub fn d2(&self, delta: f64) -> f64 {
        let k = self.kappa;
        let kg = self.kappa + self.gamma;
        self.scale(delta) * (k * k - kg * kg * self.decay(delta))
    }
}

/// Search window, as offsets from the reservation edge, and grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_grid: usize,
}

impl SearchSpec {
    /// `[edge, edge + 10/kappa]`; the optimum sits at most `1/kappa` above the edge.
    pub fn for_params(params: &ModelParams<f64>) -> Self {
        SearchSpec {
            lo: 0.0,
            hi: 10.0 / params.kappa,
            n_grid: 4001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetOptimum {
    pub delta: f64,
    /// `f(delta)` evaluated directly; may underflow to 0 for offsets far from the mid.
    pub value: f64,
    pub log_value: f64,
    /// Golden-section estimate before the derivative polish.
    pub golden: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximises the quote objective by grid search, golden-section refinement of
/// `ln f`, and a final bisection on the sign of `f'`.
pub fn brute_force_offset(
    params: &ModelParams<f64>,
    s: f64,
    r: f64,
    side: Side,
    search: &SearchSpec,
) -> Result<OffsetOptimum> {
    let obj = Objective::new(params, s, r, side)?;
    if !(search.n_grid >= 3 && search.lo.is_finite() && search.hi > search.lo) {
        return Err(Error::InvalidConfig(format!("bad search window {search:?}")));
    }
    let (lo, hi) = (obj.edge + search.lo, obj.edge + search.hi);
    let step = (hi - lo) / (search.n_grid - 1) as f64;
    let node = |i: usize| lo + step * i as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..search.n_grid {
        let v = obj.log_value(node(i));
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best == 0 || best == search.n_grid - 1 {
        return Err(Error::BracketMiss { lo, hi });
    }

    let (mut a, mut b) = (node(best - 1), node(best + 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (obj.log_value(c), obj.log_value(d));
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj.log_value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj.log_value(d);
        }
    }
    let golden = 0.5 * (a + b);

    // ln f is flat to O(eps) near its peak, so the last digits come from f' = 0.
    let obj = obj.anchored(golden);
    let (mut a, mut b) = (node(best - 1), node(best + 1));
    let delta = if obj.d1(a) > 0.0 && obj.d1(b) < 0.0 {
        loop {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break m;
            }
            if obj.d1(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
    } else {
        golden
    };
    Ok(OffsetOptimum {
        delta,
        value: obj.value(delta),
        log_value: obj.log_value(delta),
        golden,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    /// Analytic `f''(delta*)`, scaled by `e^{kappa delta*}`.
    pub second_derivative: f64,
    /// Central difference of the analytic `f'`, same scaling.
    pub finite_difference: f64,
    /// Relative gap between the two; infinite unless the analytic value is negative.
    pub report: ResidualReport,
}

/// Evaluates `f''` at a candidate optimum, requires it negative and
/// cross-checks it against a central difference of `f'` with step [`FD_STEP`].
pub fn concavity_check(
    params: &ModelParams<f64>,
    s: f64,
    r: f64,
    side: Side,
    delta_star: f64,
) -> Result<ConcavityReport> {
    let obj = Objective::new(params, s, r, side)?.anchored(delta_star);
    let f2 = obj.d2(delta_star);
    let fd = (obj.d1(delta_star + FD_STEP) - obj.d1(delta_star - FD_STEP)) / (2.0 * FD_STEP);
    let residual = if f2 < 0.0 { ((fd - f2) / f2).abs() } else { f64::INFINITY };
    Ok(ConcavityReport {
        second_derivative: f2,
        finite_difference: fd,
        report: ResidualReport::new(residual, FD_TOL, format!("{} second derivative at {delta_star}", side.as_str())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{offsets_from_reservation, ReservationPair};

    fn params(gamma: f64, kappa: f64) -> ModelParams<f64> {
        ModelParams::new(2.0, gamma, 140.0, kappa, 1.0).unwrap()
    }

    #[test]
    fn unit_parameters_give_ln_two() {
        let p = params(1.0, 1.0);
        let opt = brute_force_offset(&p, 100.0, 100.0, Side::Bid, &SearchSpec::for_params(&p)).unwrap();
        assert!((opt.delta - std::f64::consts::LN_2).abs() < 1e-12, "{opt:?}");
        assert!((opt.value - Objective::new(&p, 100.0, 100.0, Side::Bid).unwrap().value(opt.delta)).abs() == 0.0);
        // f(ln 2) = (A/gamma) * 1/2 * 1/2
        assert!((opt.value - 35.0).abs() < 1e-12);
    }

    #[test]
    fn ask_side_reference_value() {
        let p = params(0.1, 1.5);
        let opt = brute_force_offset(&p, 10.0, 10.2, Side::Ask, &SearchSpec::for_params(&p)).unwrap();
        assert!((opt.delta - 0.845_385_211_375_711_7).abs() < 1e-12, "{opt:?}");
    }

    #[test]
    fn risk_neutral_limit() {
        let p = params(1e-6, 1.5);
        let opt = brute_force_offset(&p, 5.0, 5.0, Side::Bid, &SearchSpec::for_params(&p)).unwrap();
        // (1/gamma) ln(1 + gamma/kappa) at gamma = 1e-6
        assert!((opt.delta - 0.666_666_444_444_543_2).abs() < 1e-9, "{opt:?}");
        assert!((opt.delta - 1.0 / 1.5).abs() < 1e-6);
    }

    #[test]
    fn matches_closed_form_both_sides() {
        let p = params(0.3, 0.7);
        let pair = ReservationPair::new(101.3, 98.1);
        let quote = offsets_from_reservation(&p, &pair, 100.0);
        let spec = SearchSpec::for_params(&p);
        let bid = brute_force_offset(&p, 100.0, pair.r_b, Side::Bid, &spec).unwrap();
        let ask = brute_force_offset(&p, 100.0, pair.r_a, Side::Ask, &spec).unwrap();
        assert!((bid.delta - quote.delta_b).abs() < 1e-10);
        assert!((ask.delta - quote.delta_a).abs() < 1e-10);
    }

    #[test]
    fn narrow_window_misses() {
        let p = params(1.0, 1.0);
        let spec = SearchSpec { lo: 0.0, hi: 0.3, n_grid: 101 };
        assert!(matches!(
            brute_force_offset(&p, 0.0, 0.0, Side::Bid, &spec),
            Err(Error::BracketMiss { .. })
        ));
    }

    #[test]
    fn concave_at_optimum() {
        let p = params(1.0, 1.0);
        let c = concavity_check(&p, 0.0, 0.0, Side::Bid, std::f64::consts::LN_2).unwrap();
        assert!(c.second_derivative < 0.0);
        // f'' = -A kappa e^{-kappa delta} at the optimum; scaled by e^{kappa delta} that is -A
        assert!((c.second_derivative + 140.0).abs() < 1e-10);
        assert!(c.report.passed, "{c:?}");
        let ask = concavity_check(&p, 0.0, 0.0, Side::Ask, std::f64::consts::LN_2).unwrap();
        assert_eq!(ask.second_derivative, c.second_derivative);
    }

    #[test]
    fn convex_point_fails() {
        // past 2 ln 2 / gamma above the edge the objective turns convex
        let p = params(1.0, 1.0);
        let c = concavity_check(&p, 0.0, 0.0, Side::Bid, 3.0).unwrap();
        assert!(c.second_derivative > 0.0 && !c.report.passed);
    }
}
