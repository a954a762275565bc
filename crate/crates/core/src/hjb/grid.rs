use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform `(s, t)` mesh plus the inventory range of the coupled system.
///
/// Price nodes are `s_min + i h` for `i = 0..=n_s + 1`; nodes `0` and `n_s + 1`
/// are boundary nodes, the `n_s` in between are interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub s_min: T,
    pub s_max: T,
    pub n_s: usize,
    pub n_t: usize,
    pub q_min: i64,
    pub q_max: i64,
}

impl<T: Scalar> Grid<T> {
    pub fn new(s_min: T, s_max: T, n_s: usize, n_t: usize, q_min: i64, q_max: i64) -> Result<Self> {
        let g = Grid {
            s_min,
            s_max,
            n_s,
            n_t,
            q_min,
            q_max,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_min.is_finite() && self.s_max.is_finite() && self.s_max > self.s_min) {
            return Err(Error::GridTooSmall(format!(
                "need s_max > s_min, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.n_s < 3 {
            return Err(Error::GridTooSmall(format!("n_s = {} < 3", self.n_s)));
        }
        if self.n_t < 1 {
            return Err(Error::GridTooSmall("n_t must be >= 1".into()));
        }
        if !(self.q_min < 0 && self.q_max > 0) {
            return Err(Error::GridTooSmall(format!(
                "inventory bounds must satisfy q_min < 0 < q_max, got [{}, {}]",
                self.q_min, self.q_max
            )));
        }
        Ok(())
    }

    /// Total price nodes including both boundary nodes.
    pub fn n_nodes(&self) -> usize {
        self.n_s + 2
    }

    pub fn n_q(&self) -> usize {
        (self.q_max - self.q_min + 1) as usize
    }

    pub fn h(&self) -> T {
        (self.s_max - self.s_min) / T::from_usize(self.n_s + 1).unwrap()
    }

    pub fn s_at(&self, i: usize) -> T {
        if i == self.n_s + 1 {
            return self.s_max;
        }
        self.s_min + self.h() * T::from_usize(i).unwrap()
    }

    pub fn dt(&self, horizon: T) -> T {
        horizon / T::from_usize(self.n_t).unwrap()
    }

    pub fn t_at(&self, n: usize, horizon: T) -> T {
        if n == self.n_t {
            return horizon;
        }
        self.dt(horizon) * T::from_usize(n).unwrap()
    }

    /// `sigma^2 dt / h^2`; the explicit scheme requires this to be at most 1/2.
    pub fn cfl_ratio(&self, sigma: T, horizon: T) -> T {
        let h = self.h();
        sigma * sigma * self.dt(horizon) / (h * h)
    }

    /// Smallest step count satisfying the stability bound on this price mesh.
    pub fn required_n_t(&self, sigma: T, horizon: T) -> usize {
        let h = self.h();
        let min_steps = (T::lit(2.0) * sigma * sigma * horizon / (h * h)).ceil();
        min_steps.to_usize().unwrap_or(usize::MAX).max(1)
    }

    pub fn check_cfl(&self, sigma: T, horizon: T) -> Result<T> {
        let ratio = self.cfl_ratio(sigma, horizon);
        if ratio > T::lit(0.5) {
            return Err(Error::CflViolation {
                ratio: ratio.as_f64(),
                required_n_t: self.required_n_t(sigma, horizon),
            });
        }
        Ok(ratio)
    }

    /// Next convergence level: price nodes doubled, time steps at least doubled
    /// and raised further if the stability bound demands it.
    pub fn refined(&self, sigma: T, horizon: T) -> Self {
        let mut g = Grid {
            n_s: self.n_s * 2,
            n_t: self.n_t * 2,
            ..*self
        };
        g.n_t = g.n_t.max(g.required_n_t(sigma, horizon));
        g
    }

    /// Same mesh with the price window translated by `c`.
    pub fn shifted(&self, c: T) -> Self {
        Grid {
            s_min: self.s_min + c,
            s_max: self.s_max + c,
            ..*self
        }
    }

    /// Index of the cell containing `s` and the fractional position inside it.
    pub(crate) fn locate_s(&self, s: T) -> Option<(usize, T)> {
        if !(s >= self.s_min && s <= self.s_max) {
            return None;
        }
        let pos = (s - self.s_min) / self.h();
        let last = self.n_s; // left node of the final cell
        let i = pos.floor().to_usize().unwrap_or(0).min(last);
        Some((i, pos - T::from_usize(i).unwrap()))
    }

    pub(crate) fn locate_t(&self, t: T, horizon: T) -> Option<(usize, T)> {
        if !(t >= T::zero() && t <= horizon) {
            return None;
        }
        let pos = t / self.dt(horizon);
        let i = pos.floor().to_usize().unwrap_or(0).min(self.n_t - 1);
        Some((i, pos - T::from_usize(i).unwrap()))
    }
}
