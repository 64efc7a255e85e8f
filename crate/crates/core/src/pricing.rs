//! Supplier price and product-quality dynamics.

use crate::error::{OscError, Result};

pub const QUALITY_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceState {
    pub price: f64,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityState {
    pub phi: f64,
    pub gamma: f64,
    pub perishable: bool,
}

/// Exact lognormal GBM step: `p · exp((μ − σ²/2)·dt + σ·√dt·z)`.
pub fn gbm_step(state: PriceState, z: f64, dt: f64) -> Result<PriceState> {
    if !z.is_finite() || !dt.is_finite() {
        return Err(OscError::InvalidArgument(format!("gbm_step needs finite z and dt, got z={z}, dt={dt}")));
    }
    if dt <= 0.0 || state.price <= 0.0 {
        return Err(OscError::InvalidArgument(format!(
            "gbm_step needs dt > 0 and price > 0, got dt={dt}, price={}",
            state.price
        )));
    }
    let PriceState { price, mu, sigma } = state;
    let next = price * ((mu - 0.5 * sigma * sigma) * dt + sigma * dt.sqrt() * z).exp();
    // exp underflow on absurd paths; keep the positivity guarantee
    let next = next.max(f64::MIN_POSITIVE);
    Ok(PriceState { price: next, ..state })
}

/// Perishable lots decay by `gamma`; otherwise a bounded random walk with
/// the supplied increment, clamped to `[0.01, 1]`.
pub fn quality_step(state: QualityState, noise: f64) -> QualityState {
    let phi = if state.perishable {
        (state.gamma * state.phi).max(f64::MIN_POSITIVE)
    } else {
        (state.phi + noise).clamp(QUALITY_FLOOR, 1.0)
    };
    QualityState { phi, ..state }
}
