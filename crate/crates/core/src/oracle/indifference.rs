use super::ResidualReport;
use crate::error::Result;
use crate::model::{frozen_value, reservation_prices, stationary_reservation, stationary_value, MarketState, ModelParams};

/// Relative tolerance of every indifference residual.
pub const INDIFFERENCE_TOL: f64 = 1e-12;

fn relative(after: f64, before: f64) -> f64 {
    (after - before).abs() / before.abs()
}

/// Residuals of `v(x - r_b, s, q+1, t) = v(x, s, q, t)` and `v(x + r_a, s, q-1, t) = v(x, s, q, t)`
/// with the closed-form reservation prices.
pub fn check_indifference(params: &ModelParams<f64>, st: &MarketState<f64>) -> Result<(ResidualReport, ResidualReport)> {
    check_indifference_perturbed(params, st, 0.0)
}

/// As [`check_indifference`], with `bump` added to both reservation prices first.
pub fn check_indifference_perturbed(
    params: &ModelParams<f64>,
    st: &MarketState<f64>,
    bump: f64,
) -> Result<(ResidualReport, ResidualReport)> {
    let pair = reservation_prices(params, st)?;
    let (r_b, r_a) = (pair.r_b + bump, pair.r_a + bump);
    let before = frozen_value(params, st)?;
    let bought = frozen_value(params, &MarketState { x: st.x - r_b, q: st.q + 1, ..*st })?;
    let sold = frozen_value(params, &MarketState { x: st.x + r_a, q: st.q - 1, ..*st })?;
    Ok((
        ResidualReport::new(relative(bought, before), INDIFFERENCE_TOL, "indifference after buying at r_b"),
        ResidualReport::new(relative(sold, before), INDIFFERENCE_TOL, "indifference after selling at r_a"),
    ))
}

/// Same identities for the stationary utility and its reservation prices.
pub fn check_stationary_indifference(
    params: &ModelParams<f64>,
    st: &MarketState<f64>,
    bump: f64,
) -> Result<(ResidualReport, ResidualReport)> {
    let pair = stationary_reservation(params, st.s, st.q)?;
    let (r_b, r_a) = (pair.r_b + bump, pair.r_a + bump);
    let before = stationary_value(params, st)?;
    let bought = stationary_value(params, &MarketState { x: st.x - r_b, q: st.q + 1, ..*st })?;
    let sold = stationary_value(params, &MarketState { x: st.x + r_a, q: st.q - 1, ..*st })?;
    Ok((
        ResidualReport::new(relative(bought, before), INDIFFERENCE_TOL, "stationary indifference after buying"),
        ResidualReport::new(relative(sold, before), INDIFFERENCE_TOL, "stationary indifference after selling"),
    ))
}
