use std::time::Instant;

use rayon::prelude::*;

use super::field::{SolveReport, ThetaField};
use super::grid::Grid;
use super::{extrapolate_boundaries, BOUNDARY_NOTE};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;

pub(crate) const DIFFUSION_NOTE: &str =
    "diffusion term is sigma^2/2 * theta_ss (no gamma factor, first power of theta_ss)";
pub(crate) const FILL_NOTE: &str =
    "fill term is A/(kappa+gamma) * exp(-kappa delta) per side; the sum of both sides tends to 2A/(kappa+gamma) as delta -> 0";
pub(crate) const INVENTORY_NOTE: &str =
    "inventory bounds saturate: bid term dropped at q_max, ask term dropped at q_min";

/// `theta(s, q, t) = q s - gamma sigma^2 q^2 (T - t) / 2`, the exact solution when `A = 0`.
pub fn frozen_theta<T: Scalar>(params: &ModelParams<T>, s: T, q: i64, t: T) -> T {
    let q = T::from_int(q);
    q * s - T::lit(0.5) * params.gamma * params.sigma * params.sigma * q * q * (params.horizon_t - t)
}

/// Bound on how fast the fill terms react to `theta(q)`: each side's
/// Hamiltonian has `|d/d theta| <= kappa A / (kappa + gamma)` for offsets `>= 0`.
pub fn fill_rate_bound<T: Scalar>(params: &ModelParams<T>) -> T {
    T::lit(2.0) * params.kappa * params.big_a / (params.kappa + params.gamma)
}

/// Smallest `n_t` for which the explicit step of [`solve_full_hjb`] is monotone,
/// `dt (sigma^2 / h^2 + fill_rate_bound) <= 1`, and satisfies the diffusive CFL bound.
pub fn required_full_n_t<T: Scalar>(params: &ModelParams<T>, grid: &Grid<T>) -> usize {
    let h = grid.h();
    let steps = (params.horizon_t * (params.sigma * params.sigma / (h * h) + fill_rate_bound(params))).ceil();
    let steps = steps.to_usize().unwrap_or(usize::MAX);
    steps.max(grid.required_n_t(params.sigma, params.horizon_t))
}

/// Backward explicit solve of the coupled nonlinear system
///
/// ```text
/// theta_t + sigma^2/2 theta_ss - gamma sigma^2/2 (theta_s)^2
///     + A/(kappa+gamma) [exp(-kappa delta_b*) + exp(-kappa delta_a*)] = 0,   theta(s,q,T) = q s
/// delta_b* = s - (theta(q+1) - theta(q)) + (1/gamma) ln(1 + gamma/kappa)
/// delta_a* = (theta(q) - theta(q-1)) - s + (1/gamma) ln(1 + gamma/kappa)
/// ```
///
/// With `clamp`, a negative optimal offset is replaced by zero and the side's
/// Hamiltonian `(A/gamma) e^{-kappa d} (1 - e^{gamma (s - d - r_b)})` (ask:
/// `1 - e^{-gamma (s + d - r_a)}`) is evaluated there, which is the maximum over
/// `d >= 0` because the objective is unimodal.
pub fn solve_full_hjb<T: Scalar>(
    params: &ModelParams<T>,
    grid: &Grid<T>,
    clamp: bool,
) -> Result<(ThetaField<T>, SolveReport<T>)> {
    let started = Instant::now();
    params.validate()?;
    grid.validate()?;
    if grid.q_max - grid.q_min < 2 {
        return Err(Error::GridTooSmall(
            "full system needs q_max - q_min >= 2".into(),
        ));
    }
    let horizon = params.horizon_t;
    let cfl_ratio = grid.check_cfl(params.sigma, horizon)?;
    let h = grid.h();
    let step_ratio = grid.dt(horizon) * (params.sigma * params.sigma / (h * h) + fill_rate_bound(params));
    if step_ratio > T::one() {
        return Err(Error::StepTooLarge {
            ratio: step_ratio.as_f64(),
            required_n_t: required_full_n_t(params, grid),
        });
    }

    let width = grid.n_nodes();
    let n_q = grid.n_q();
    let level = n_q * width;
    let mut values = vec![T::zero(); (grid.n_t + 1) * level];
    for (qi, row) in values[grid.n_t * level..].chunks_mut(width).enumerate() {
        let q = T::from_int(grid.q_min + qi as i64);
        for (i, v) in row.iter_mut().enumerate() {
            *v = q * grid.s_at(i);
        }
    }

    let sigma2 = params.sigma * params.sigma;
    let gs2 = params.gamma * sigma2;
    let half = T::lit(0.5);
    let inv_h2 = T::one() / (h * h);
    let inv_2h = T::one() / (h + h);
    let dt = grid.dt(horizon);
    let log_term = params.log_term();
    let unclamped_weight = params.big_a / (params.kappa + params.gamma);
    let a_over_g = params.big_a / params.gamma;
    let kappa = params.kappa;
    let gamma = params.gamma;
    let s_nodes: Vec<T> = (0..width).map(|i| grid.s_at(i)).collect();

    let mut clamp_events = 0usize;
    for n in (0..grid.n_t).rev() {
        let (head, tail) = values.split_at_mut((n + 1) * level);
        let prev = &tail[..level];
        let cur = &mut head[n * level..];
        clamp_events += cur
            .par_chunks_mut(width)
            .enumerate()
            .map(|(qi, row)| {
                let here = &prev[qi * width..(qi + 1) * width];
                let above = (qi + 1 < n_q).then(|| &prev[(qi + 1) * width..(qi + 2) * width]);
                let below = (qi > 0).then(|| &prev[(qi - 1) * width..qi * width]);
                let mut clamped = 0usize;
                for i in 1..width - 1 {
                    let s = s_nodes[i];
                    let u = here[i];
                    let u_ss = (here[i + 1] - (u + u) + here[i - 1]) * inv_h2;
                    let u_s = (here[i + 1] - here[i - 1]) * inv_2h;
                    let mut rhs = half * sigma2 * u_ss - half * gs2 * u_s * u_s;
                    if let Some(above) = above {
                        let r_b = above[i] - u;
                        let delta = (s - r_b) + log_term;
                        rhs = rhs
                            + if clamp && delta < T::zero() {
                                clamped += 1;
                                a_over_g * (T::one() - (gamma * (s - r_b)).exp())
                            } else {
                                unclamped_weight * (-kappa * delta).exp()
                            };
                    }
                    if let Some(below) = below {
                        let r_a = u - below[i];
                        let delta = (r_a - s) + log_term;
                        rhs = rhs
                            + if clamp && delta < T::zero() {
                                clamped += 1;
                                a_over_g * (T::one() - (gamma * (r_a - s)).exp())
                            } else {
                                unclamped_weight * (-kappa * delta).exp()
                            };
                    }
                    row[i] = u + dt * rhs;
                }
                extrapolate_boundaries(row);
                clamped
            })
            .sum::<usize>();
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonfiniteField {
                step: grid.n_t - n,
                t: grid.t_at(n, horizon).as_f64(),
            });
        }
    }

    let field = ThetaField {
        grid: *grid,
        params: *params,
        clamp,
        values,
    };
    let sup_error_vs_closed_form = (params.big_a == T::zero())
        .then(|| field.sup_error(|s, q, t| frozen_theta(params, s, q, t)));
    let report = SolveReport {
        sup_error_vs_closed_form,
        steps: grid.n_t,
        cfl_ratio,
        wall_time: started.elapsed().as_secs_f64(),
        clamp_events,
        notes: vec![
            DIFFUSION_NOTE.to_string(),
            FILL_NOTE.to_string(),
            BOUNDARY_NOTE.to_string(),
            INVENTORY_NOTE.to_string(),
        ],
    };
    Ok((field, report))
}
