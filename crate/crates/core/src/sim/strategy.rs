use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hjb::ThetaField;
use crate::model::{
    offsets_from_reservation, optimal_offsets, reservation_prices, MarketState, ModelParams, Quote,
    ReservationPair,
};

/// Quoting policy evaluated at the start of every simulation step.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Closed-form inventory-skewed quotes from the second-order expansion.
    AsymptoticInventory,
    /// Fixed half-spread on both sides of the mid.
    Symmetric { half_spread: f64 },
    /// First-order-condition offsets around the no-trade reservation prices.
    FrozenReservation,
    /// Quotes read off a solved Bellman field.
    GridPolicy(Arc<ThetaField<f64>>),
}

/// Offsets the strategy posts this step; `None` means the side is not quoted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sides {
    pub bid: Option<f64>,
    pub ask: Option<f64>,
    pub escaped: bool,
}

impl Strategy {
    /// Symmetric quotes whose spread equals the time-average of the optimal spread over `[0, T]`.
    pub fn matched_symmetric(params: &ModelParams<f64>) -> Result<Self> {
        params.validate()?;
        let mean_spread = params.gamma * params.sigma * params.sigma * params.horizon_t / 2.0
            + 2.0 * params.log_term();
        Ok(Strategy::Symmetric {
            half_spread: mean_spread / 2.0,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::AsymptoticInventory => "asymptotic",
            Strategy::Symmetric { .. } => "symmetric",
            Strategy::FrozenReservation => "frozen",
            Strategy::GridPolicy(_) => "grid",
        }
    }

    pub fn validate(&self, params: &ModelParams<f64>) -> Result<()> {
        match self {
            Strategy::Symmetric { half_spread } if !(half_spread.is_finite() && *half_spread >= 0.0) => {
                Err(Error::InvalidConfig(format!(
                    "symmetric half-spread must be finite and >= 0, got {half_spread}"
                )))
            }
            Strategy::GridPolicy(field) if field.params != *params => Err(Error::InvalidConfig(
                "grid policy was solved with different model parameters".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Largest symmetric inventory the strategy can price, if it has one.
    pub fn inventory_limit(&self) -> Option<i64> {
        match self {
            Strategy::GridPolicy(field) => Some(field.grid.q_max.min(-field.grid.q_min)),
            _ => None,
        }
    }

    pub(crate) fn sides(&self, params: &ModelParams<f64>, st: &MarketState<f64>, clamp: bool) -> Result<Sides> {
        let finish = |q: Quote<f64>, escaped| {
            let q = if clamp { q.clamped() } else { q };
            Sides {
                bid: Some(q.delta_b),
                ask: Some(q.delta_a),
                escaped,
            }
        };
        match self {
            Strategy::AsymptoticInventory => Ok(finish(optimal_offsets(params, st, false)?, false)),
            Strategy::Symmetric { half_spread } => Ok(Sides {
                bid: Some(*half_spread),
                ask: Some(*half_spread),
                escaped: false,
            }),
            Strategy::FrozenReservation => {
                let pair = reservation_prices(params, st)?;
                Ok(finish(offsets_from_reservation(params, &pair, st.s), false))
            }
            Strategy::GridPolicy(field) => {
                if !field.contains(st.s, st.q, st.t) {
                    return Ok(finish(optimal_offsets(params, st, false)?, true));
                }
                let (r_b, r_a) = field.reservation_sides(st.s, st.q, st.t)?;
                // A missing side only happens at the inventory bounds, where the cap withdraws it anyway.
                let pair = ReservationPair::new(r_a.unwrap_or(f64::NAN), r_b.unwrap_or(f64::NAN));
                let mut sides = finish(offsets_from_reservation(params, &pair, st.s), false);
                if r_b.is_none() {
                    sides.bid = None;
                }
                if r_a.is_none() {
                    sides.ask = None;
                }
                Ok(sides)
            }
        }
    }
}
