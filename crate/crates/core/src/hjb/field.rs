use std::io::Write;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::model::{offsets_from_reservation, ModelParams, Quote, ReservationPair};
use crate::scalar::Scalar;

/// Solution of one scalar PDE over the `(s, t)` mesh.
#[derive(Debug, Clone)]
pub struct OrderField<T> {
    pub grid: Grid<T>,
    pub horizon: T,
    /// Time-major: `values[n * n_nodes + i]`.
    pub(crate) values: Vec<T>,
}

impl<T: Scalar> OrderField<T> {
    pub fn value(&self, n: usize, i: usize) -> T {
        self.values[n * self.grid.n_nodes() + i]
    }

    pub fn time_slice(&self, n: usize) -> &[T] {
        let w = self.grid.n_nodes();
        &self.values[n * w..(n + 1) * w]
    }

    /// Bilinear interpolation in `(s, t)`.
    pub fn interpolate(&self, s: T, t: T) -> Option<T> {
        let (i, fs) = self.grid.locate_s(s)?;
        let (n, ft) = self.grid.locate_t(t, self.horizon)?;
        Some(bilinear(|n, i| self.value(n, i), n, i, ft, fs))
    }

    /// `max |value - exact(s, t)|` over every node.
    pub fn sup_error(&self, exact: impl Fn(T, T) -> T) -> T {
        let mut worst = T::zero();
        for n in 0..=self.grid.n_t {
            let t = self.grid.t_at(n, self.horizon);
            for i in 0..self.grid.n_nodes() {
                let e = (self.value(n, i) - exact(self.grid.s_at(i), t)).abs();
                if e > worst || e.is_nan() {
                    worst = e;
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Writes `s,t,theta` rows for every node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "t", "theta"])?;
        for n in 0..=self.grid.n_t {
            let t = sig9(self.grid.t_at(n, self.horizon).as_f64());
            for i in 0..self.grid.n_nodes() {
                w.write_record([sig9(self.grid.s_at(i).as_f64()), t.clone(), sig9(self.value(n, i).as_f64())])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn bilinear<T: Scalar>(at: impl Fn(usize, usize) -> T, n: usize, i: usize, ft: T, fs: T) -> T {
    let one = T::one();
    let lo = at(n, i) * (one - fs) + at(n, i + 1) * fs;
    let hi = at(n + 1, i) * (one - fs) + at(n + 1, i + 1) * fs;
    lo * (one - ft) + hi * ft
}

/// Solved `theta(s, q, t)` of the coupled Bellman system.
#[derive(Debug, Clone)]
pub struct ThetaField<T> {
    pub grid: Grid<T>,
    pub params: ModelParams<T>,
    pub clamp: bool,
    /// Time-major, then inventory, then price: `values[(n * n_q + qi) * n_nodes + i]`.
    pub(crate) values: Vec<T>,
}

impl<T: Scalar> ThetaField<T> {
    fn index(&self, q: i64, n: usize, i: usize) -> usize {
        let qi = (q - self.grid.q_min) as usize;
        (n * self.grid.n_q() + qi) * self.grid.n_nodes() + i
    }

    /// `theta` at inventory `q`, time index `n`, price index `i`.
    pub fn value(&self, q: i64, n: usize, i: usize) -> T {
        self.values[self.index(q, n, i)]
    }

    pub fn horizon(&self) -> T {
        self.params.horizon_t
    }

    pub fn contains(&self, s: T, q: i64, t: T) -> bool {
        q >= self.grid.q_min
            && q <= self.grid.q_max
            && self.grid.locate_s(s).is_some()
            && self.grid.locate_t(t, self.horizon()).is_some()
    }

    /// Bilinear interpolation of `theta(., q, .)` at `(s, t)`.
    pub fn interpolate(&self, s: T, q: i64, t: T) -> Result<T> {
        let oob = || Error::OutOfGrid {
            s: s.as_f64(),
            q,
            t: t.as_f64(),
        };
        if q < self.grid.q_min || q > self.grid.q_max {
            return Err(oob());
        }
        let (i, fs) = self.grid.locate_s(s).ok_or_else(oob)?;
        let (n, ft) = self.grid.locate_t(t, self.horizon()).ok_or_else(oob)?;
        Ok(bilinear(|n, i| self.value(q, n, i), n, i, ft, fs))
    }

    /// Reservation bid `theta(q+1) - theta(q)` and ask `theta(q) - theta(q-1)`;
    /// a side is `None` when its post-trade inventory leaves the solved range.
    pub fn reservation_sides(&self, s: T, q: i64, t: T) -> Result<(Option<T>, Option<T>)> {
        let here = self.interpolate(s, q, t)?;
        let r_b = if q < self.grid.q_max {
            Some(self.interpolate(s, q + 1, t)? - here)
        } else {
            None
        };
        let r_a = if q > self.grid.q_min {
            Some(here - self.interpolate(s, q - 1, t)?)
        } else {
            None
        };
        Ok((r_b, r_a))
    }

    /// `max |theta - exact(s, q, t)|` over every node.
    pub fn sup_error(&self, exact: impl Fn(T, i64, T) -> T) -> T {
        let mut worst = T::zero();
        for n in 0..=self.grid.n_t {
            let t = self.grid.t_at(n, self.horizon());
            for q in self.grid.q_min..=self.grid.q_max {
                for i in 0..self.grid.n_nodes() {
                    let e = (self.value(q, n, i) - exact(self.grid.s_at(i), q, t)).abs();
                    if e > worst || e.is_nan() {
                        worst = e;
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `sup |theta(s, 0, t) - theta0(t)|`: how far the zero-inventory row sits
    /// from the level coefficient of the truncated expansion.
    pub fn zero_inventory_gap(&self) -> T {
        let p = &self.params;
        let rate = T::lit(2.0) * p.big_a / (p.kappa + p.gamma);
        let mut worst = T::zero();
        for n in 0..=self.grid.n_t {
            let theta0 = rate * (self.horizon() - self.grid.t_at(n, self.horizon()));
            for i in 0..self.grid.n_nodes() {
                worst = worst.max((self.value(0, n, i) - theta0).abs());
            }
        }
        worst
    }

    /// Writes `s,q,t,theta` rows for every node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "q", "t", "theta"])?;
        for q in self.grid.q_min..=self.grid.q_max {
            for n in 0..=self.grid.n_t {
                let t = sig9(self.grid.t_at(n, self.horizon()).as_f64());
                for i in 0..self.grid.n_nodes() {
                    w.write_record([
                        sig9(self.grid.s_at(i).as_f64()),
                        q.to_string(),
                        t.clone(),
                        sig9(self.value(q, n, i).as_f64()),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Quotes implied by a solved field at `(s, q, t)`, `q` strictly inside the inventory range.
pub fn extract_quotes<T: Scalar>(field: &ThetaField<T>, s: T, q: i64, t: T) -> Result<Quote<T>> {
    if q <= field.grid.q_min || q >= field.grid.q_max {
        return Err(Error::OutOfGrid {
            s: s.as_f64(),
            q,
            t: t.as_f64(),
        });
    }
    let (r_b, r_a) = field.reservation_sides(s, q, t)?;
    let (r_b, r_a) = (r_b.expect("interior q"), r_a.expect("interior q"));
    let pair = ReservationPair::new(r_a, r_b);
    let raw = offsets_from_reservation(&field.params, &pair, s);
    Ok(if field.clamp { raw.clamped() } else { raw })
}

/// Diagnostics of a finite-difference solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    /// Sup-norm error against the closed form, when one exists.
    pub sup_error_vs_closed_form: Option<T>,
    pub steps: usize,
    pub cfl_ratio: T,
    pub wall_time: f64,
    /// Nodes where a negative optimal offset was raised to zero.
    pub clamp_events: usize,
    pub notes: Vec<String>,
}
