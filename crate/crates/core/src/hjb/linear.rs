use std::time::Instant;

use super::field::{OrderField, SolveReport};
use super::grid::Grid;
use super::{extrapolate_boundaries, BOUNDARY_NOTE};
use crate::error::{Error, Result};
use crate::model::{theta_coeffs, ModelParams};
use crate::scalar::Scalar;

/// Order of the coefficient in `theta = theta0 + q theta1 + q^2 theta2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaOrder {
    Zero,
    One,
    Two,
}

impl ThetaOrder {
    pub fn from_index(k: usize) -> Option<Self> {
        match k {
            0 => Some(ThetaOrder::Zero),
            1 => Some(ThetaOrder::One),
            2 => Some(ThetaOrder::Two),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            ThetaOrder::Zero => 0,
            ThetaOrder::One => 1,
            ThetaOrder::Two => 2,
        }
    }
}

/// Where the lower-order coefficients feeding orders 1 and 2 come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowerOrders {
    /// Use the closed forms (`theta0_s = 0`, `theta1_s = 1`).
    #[default]
    ClosedForm,
    /// Solve the lower orders on the same grid and difference them numerically.
    Solved,
}

/// Price derivative of a lower-order coefficient at time level `n`.
enum Gradient<T> {
    Constant(T),
    Field(OrderField<T>),
}

impl<T: Scalar> Gradient<T> {
    fn at(&self, n: usize, i: usize, inv_2h: T) -> T {
        match self {
            Gradient::Constant(c) => *c,
            Gradient::Field(f) => (f.value(n, i + 1) - f.value(n, i - 1)) * inv_2h,
        }
    }
}

/// Backward explicit solve of the linear PDE for one expansion order.
///
/// ```text
/// k = 0:  u_t + sigma^2/2 u_ss - gamma sigma^2/2 (u_s)^2 + 2A/(kappa+gamma) = 0,        u(T) = 0
/// k = 1:  u_t + sigma^2/2 u_ss - gamma sigma^2 theta0_s u_s = 0,                        u(T) = s
/// k = 2:  u_t + sigma^2/2 u_ss - gamma sigma^2 (theta1_s)^2 - gamma sigma^2 theta0_s u_s = 0,  u(T) = 0
/// ```
pub fn solve_theta_k<T: Scalar>(
    params: &ModelParams<T>,
    grid: &Grid<T>,
    order: ThetaOrder,
    lower: LowerOrders,
) -> Result<(OrderField<T>, SolveReport<T>)> {
    let started = Instant::now();
    params.validate()?;
    grid.validate()?;
    let horizon = params.horizon_t;
    let cfl_ratio = grid.check_cfl(params.sigma, horizon)?;

    let theta0_s = match (order, lower) {
        (ThetaOrder::Zero, _) | (_, LowerOrders::ClosedForm) => Gradient::Constant(T::zero()),
        (_, LowerOrders::Solved) => {
            Gradient::Field(solve_theta_k(params, grid, ThetaOrder::Zero, lower)?.0)
        }
    };
    let theta1_s = match (order, lower) {
        (ThetaOrder::Two, LowerOrders::Solved) => {
            Gradient::Field(solve_theta_k(params, grid, ThetaOrder::One, lower)?.0)
        }
        _ => Gradient::Constant(T::one()),
    };

    let sigma2 = params.sigma * params.sigma;
    let gs2 = params.gamma * sigma2;
    let half = T::lit(0.5);
    let level_rate = T::lit(2.0) * params.big_a / (params.kappa + params.gamma);
    let h = grid.h();
    let inv_h2 = T::one() / (h * h);
    let inv_2h = T::one() / (h + h);
    let dt = grid.dt(horizon);
    let width = grid.n_nodes();

    let mut values = vec![T::zero(); (grid.n_t + 1) * width];
    let terminal = &mut values[grid.n_t * width..];
    for (i, v) in terminal.iter_mut().enumerate() {
        *v = match order {
            ThetaOrder::One => grid.s_at(i),
            _ => T::zero(),
        };
    }

    for n in (0..grid.n_t).rev() {
        let (head, tail) = values.split_at_mut((n + 1) * width);
        let prev = &tail[..width];
        let cur = &mut head[n * width..];
        for i in 1..width - 1 {
            let u = prev[i];
            let u_ss = (prev[i + 1] - (u + u) + prev[i - 1]) * inv_h2;
            let u_s = (prev[i + 1] - prev[i - 1]) * inv_2h;
            let diffusion = half * sigma2 * u_ss;
            let rhs = match order {
                ThetaOrder::Zero => diffusion - half * gs2 * u_s * u_s + level_rate,
                ThetaOrder::One => diffusion - gs2 * theta0_s.at(n + 1, i, inv_2h) * u_s,
                ThetaOrder::Two => {
                    let d1 = theta1_s.at(n + 1, i, inv_2h);
                    diffusion - gs2 * d1 * d1 - gs2 * theta0_s.at(n + 1, i, inv_2h) * u_s
                }
            };
            cur[i] = u + dt * rhs;
        }
        extrapolate_boundaries(cur);
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonfiniteField {
                step: grid.n_t - n,
                t: grid.t_at(n, horizon).as_f64(),
            });
        }
    }

    let field = OrderField {
        grid: *grid,
        horizon,
        values,
    };
    let sup = field.sup_error(|s, t| {
        let c = theta_coeffs(params, s, t).expect("grid times lie in [0, T]");
        match order {
            ThetaOrder::Zero => c.theta0,
            ThetaOrder::One => c.theta1,
            ThetaOrder::Two => c.theta2,
        }
    });
    let report = SolveReport {
        sup_error_vs_closed_form: Some(sup),
        steps: grid.n_t,
        cfl_ratio,
        wall_time: started.elapsed().as_secs_f64(),
        clamp_events: 0,
        notes: vec![BOUNDARY_NOTE.to_string()],
    };
    Ok((field, report))
}
