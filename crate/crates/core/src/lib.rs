//! Inventory-aware limit-order quoting.
//!
//! * [`model`]: closed-form value functions, reservation prices and optimal quotes.
//! * [`hjb`]: explicit finite-difference solvers for the Bellman system in `theta`.
//! * [`sim`]: Monte Carlo trading simulator with Poisson fills.
//! * [`oracle`]: independent numerical checks of every closed form.
//!
//! The analytic and PDE layers are generic over [`Scalar`] (`f32`/`f64`); the
//! Monte Carlo layers run in `f64`. The `*64` aliases below name the `f64` forms.

pub mod error;
pub mod fmt;
pub mod hjb;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result, Side};
pub use scalar::Scalar;

/// Scalar used by the simulator, oracles and CLI.
pub type Real = f64;

pub type ModelParams64 = model::ModelParams<f64>;
pub type MarketState64 = model::MarketState<f64>;
pub type Quote64 = model::Quote<f64>;
pub type ReservationPair64 = model::ReservationPair<f64>;
pub type ThetaCoeffs64 = model::ThetaCoeffs<f64>;
pub type Grid64 = hjb::Grid<f64>;
pub type ThetaField64 = hjb::ThetaField<f64>;
pub type SolveReport64 = hjb::SolveReport<f64>;
