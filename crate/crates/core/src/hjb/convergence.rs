use std::io::Write;

use super::full::{frozen_theta, solve_full_hjb};
use super::grid::Grid;
use super::linear::{solve_theta_k, LowerOrders, ThetaOrder};
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::model::ModelParams;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Theta0,
    Theta1,
    Theta2,
    /// Full coupled system with `A = 0` against the frozen closed form.
    FrozenFull,
}

impl Column {
    pub const ALL: [Column; 4] = [Column::Theta0, Column::Theta1, Column::Theta2, Column::FrozenFull];

    pub fn name(self) -> &'static str {
        match self {
            Column::Theta0 => "theta0",
            Column::Theta1 => "theta1",
            Column::Theta2 => "theta2",
            Column::FrozenFull => "full_frozen",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub level: usize,
    pub n_s: usize,
    pub n_t: usize,
    pub h: T,
    pub dt: T,
    pub theta0: T,
    pub theta1: T,
    pub theta2: T,
    pub frozen_full: T,
    /// Accumulated rounding a scheme that is exact in exact arithmetic can
    /// still show: `4 n_t eps max|theta|`.
    pub roundoff_floor: T,
}

impl<T: Scalar> ConvergenceRow<T> {
    pub fn error(&self, c: Column) -> T {
        match c {
            Column::Theta0 => self.theta0,
            Column::Theta1 => self.theta1,
            Column::Theta2 => self.theta2,
            Column::FrozenFull => self.frozen_full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub rows: Vec<ConvergenceRow<T>>,
}

impl<T: Scalar> ConvergenceTable<T> {
    pub fn errors(&self, c: Column) -> Vec<T> {
        self.rows.iter().map(|r| r.error(c)).collect()
    }

    /// Errors never grow from one level to the next, except within the next
    /// level's rounding floor.
    pub fn is_monotone(&self, c: Column) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].error(c) <= w[0].error(c) || w[1].error(c) <= w[1].roundoff_floor)
    }

    /// Empirical order between consecutive levels; `None` when either error
    /// sits at the rounding floor (the scheme is exact there).
    pub fn orders(&self, c: Column) -> Vec<Option<T>> {
        self.rows
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].error(c), w[1].error(c));
                if a <= w[0].roundoff_floor || b <= w[1].roundoff_floor {
                    None
                } else {
                    Some((a / b).ln() / (w[0].h / w[1].h).ln())
                }
            })
            .collect()
    }

    /// Every resolved order is at least 1.
    pub fn first_order_or_exact(&self, c: Column) -> bool {
        self.orders(c).iter().flatten().all(|p| *p >= T::one())
    }

    pub fn final_error(&self, c: Column) -> T {
        self.rows.last().map(|r| r.error(c)).unwrap_or(T::nan())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "level", "n_s", "n_t", "h", "dt", "theta0", "theta1", "theta2", "full_frozen", "roundoff_floor",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.level.to_string(),
                r.n_s.to_string(),
                r.n_t.to_string(),
                sig9(r.h.as_f64()),
                sig9(r.dt.as_f64()),
                sig9(r.theta0.as_f64()),
                sig9(r.theta1.as_f64()),
                sig9(r.theta2.as_f64()),
                sig9(r.frozen_full.as_f64()),
                sig9(r.roundoff_floor.as_f64()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves every order and the `A = 0` full system on `levels` successively refined grids.
pub fn convergence_study<T: Scalar>(
    params: &ModelParams<T>,
    base_grid: &Grid<T>,
    levels: usize,
) -> Result<ConvergenceTable<T>> {
    if levels < 2 {
        return Err(Error::TooFewLevels(levels));
    }
    let frozen = ModelParams {
        big_a: T::zero(),
        ..*params
    };
    let mut grid = *base_grid;
    let mut rows = Vec::with_capacity(levels);
    for level in 1..=levels {
        if level > 1 {
            grid = grid.refined(params.sigma, params.horizon_t);
        }
        let mut scale = T::one();
        let mut linear = [T::zero(); 3];
        for (k, slot) in linear.iter_mut().enumerate() {
            let order = ThetaOrder::from_index(k).expect("k < 3");
            let (field, report) = solve_theta_k(params, &grid, order, LowerOrders::Solved)?;
            scale = scale.max(field.max_abs());
            *slot = report.sup_error_vs_closed_form.expect("linear solves report an error");
        }
        let (field, _) = solve_full_hjb(&frozen, &grid, true)?;
        scale = scale.max(field.max_abs());
        let frozen_full = field.sup_error(|s, q, t| frozen_theta(&frozen, s, q, t));
        rows.push(ConvergenceRow {
            level,
            n_s: grid.n_s,
            n_t: grid.n_t,
            h: grid.h(),
            dt: grid.dt(params.horizon_t),
            theta0: linear[0],
            theta1: linear[1],
            theta2: linear[2],
            frozen_full,
            roundoff_floor: T::lit(4.0) * T::from_usize(grid.n_t).unwrap() * T::epsilon() * scale,
        });
    }
    Ok(ConvergenceTable { rows })
}
