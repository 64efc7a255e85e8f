//! Belief maintenance: smoothed updates, two-hypothesis Bayes and log-odds.

use crate::error::{OscError, Result};
use crate::rng::RngStream;

pub const GUARD: f64 = 1e-6;

pub fn clamp_belief(b: f64) -> f64 {
    b.clamp(GUARD, 1.0 - GUARD)
}

fn check_outcome(s: u8) -> Result<f64> {
    match s {
        0 => Ok(0.0),
        1 => Ok(1.0),
        _ => Err(OscError::InvalidArgument(format!("outcome must be 0 or 1, got {s}"))),
    }
}

/// `(1 − λ)·B + λ·s`, clamped to the guard band.
pub fn smoothed_update(belief: f64, lambda: f64, outcome: u8) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(OscError::InvalidArgument(format!("learning rate {lambda} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&belief) {
        return Err(OscError::InvalidArgument(format!("belief {belief} outside [0, 1]")));
    }
    let s = check_outcome(outcome)?;
    Ok(clamp_belief((1.0 - lambda) * belief + lambda * s))
}

fn likelihoods(p_reliable: f64, p_unreliable: f64, outcome: u8) -> Result<(f64, f64)> {
    for p in [p_reliable, p_unreliable] {
        if !(p > 0.0 && p < 1.0) {
            return Err(OscError::InvalidArgument(format!("likelihood {p} must be strictly inside (0, 1)")));
        }
    }
    Ok(if check_outcome(outcome)? == 1.0 { (p_reliable, p_unreliable) } else { (1.0 - p_reliable, 1.0 - p_unreliable) })
}

/// Posterior that the counterparty is reliable after observing `outcome`.
pub fn bayes_update(belief: f64, p_reliable: f64, p_unreliable: f64, outcome: u8) -> Result<f64> {
    if !(belief > 0.0 && belief < 1.0) {
        return Err(OscError::InvalidArgument(format!("belief {belief} must be inside (0, 1)")));
    }
    let (l1, l0) = likelihoods(p_reliable, p_unreliable, outcome)?;
    Ok(l1 * belief / (l1 * belief + l0 * (1.0 - belief)))
}

pub fn log_odds(belief: f64) -> Result<f64> {
    if !(belief > 0.0 && belief < 1.0) {
        return Err(OscError::InvalidArgument(format!("belief {belief} must be inside (0, 1)")));
    }
    Ok((belief / (1.0 - belief)).ln())
}

pub fn from_log_odds(tau: f64) -> f64 {
    if tau >= 0.0 {
        1.0 / (1.0 + (-tau).exp())
    } else {
        let e = tau.exp();
        e / (1.0 + e)
    }
}

/// Bayes update in additive form: `log τ' = log τ + log Λ`.
pub fn log_odds_update(tau: f64, p_reliable: f64, p_unreliable: f64, outcome: u8) -> Result<f64> {
    let (l1, l0) = likelihoods(p_reliable, p_unreliable, outcome)?;
    Ok(tau + (l1 / l0).ln())
}

/// Bernoulli draw with the counterparty's reliability as success probability.
pub fn transaction_outcome(reliability: f64, rng: &mut RngStream) -> u8 {
    u8::from(rng.uniform() < reliability)
}

/// Reliability proxy used for outcome draws: quality blended with belief.
pub fn reliability(phi: f64, belief: f64, quality_weight: f64) -> f64 {
    quality_weight * phi + (1.0 - quality_weight) * belief
}

/// Dense belief matrix keyed by agent indices, shrinking as agents exit.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefMatrix {
    row_ids: Vec<usize>,
    col_ids: Vec<usize>,
    data: Vec<f64>,
}

impl BeliefMatrix {
    pub fn filled(row_ids: Vec<usize>, col_ids: Vec<usize>, value: f64) -> Self {
        let data = vec![clamp_belief(value); row_ids.len() * col_ids.len()];
        Self { row_ids, col_ids, data }
    }

    pub fn rows(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn cols(&self) -> &[usize] {
        &self.col_ids
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let r = self.row_ids.binary_search(&row).ok()?;
        let c = self.col_ids.binary_search(&col).ok()?;
        Some(r * self.col_ids.len() + c)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.slot(row, col).map(|i| self.data[i])
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        let i = self
            .slot(row, col)
            .ok_or_else(|| OscError::InvalidArgument(format!("no belief entry for ({row}, {col})")))?;
        self.data[i] = clamp_belief(value);
        Ok(())
    }

    /// Entries in row-major order as `(row, col, belief)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nc = self.col_ids.len();
        self.data.iter().enumerate().map(move |(i, b)| (self.row_ids[i / nc], self.col_ids[i % nc], *b))
    }

    pub fn scale_all(&mut self, factor: f64) {
        for b in &mut self.data {
            *b = clamp_belief(*b * factor);
        }
    }

    pub fn remove_row(&mut self, row: usize) -> bool {
        let Ok(r) = self.row_ids.binary_search(&row) else { return false };
        let nc = self.col_ids.len();
        self.data.drain(r * nc..(r + 1) * nc);
        self.row_ids.remove(r);
        true
    }

    pub fn remove_col(&mut self, col: usize) -> bool {
        let Ok(c) = self.col_ids.binary_search(&col) else { return false };
        let nc = self.col_ids.len();
        let mut i = 0;
        self.data.retain(|_| {
            let keep = i % nc != c;
            i += 1;
            keep
        });
        self.col_ids.remove(c);
        true
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.data.iter().fold(None, |acc, &b| match acc {
            None => Some((b, b)),
            Some((lo, hi)) => Some((lo.min(b), hi.max(b))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrustState {
    /// Beliefs of distributors about suppliers, indexed (supplier, distributor).
    pub sd: BeliefMatrix,
    /// Beliefs of distributors about consumers, indexed (distributor, consumer).
    pub dc: BeliefMatrix,
    /// Learning rate per distributor index.
    pub learning_rate: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrustSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl TrustState {
    pub fn new(
        n_suppliers: usize,
        n_distributors: usize,
        n_consumers: usize,
        baseline: f64,
        learning_rate: Vec<f64>,
    ) -> Self {
        Self {
            sd: BeliefMatrix::filled((0..n_suppliers).collect(), (0..n_distributors).collect(), baseline),
            dc: BeliefMatrix::filled((0..n_distributors).collect(), (0..n_consumers).collect(), baseline),
            learning_rate,
        }
    }

    pub fn scale_all(&mut self, factor: f64) {
        self.sd.scale_all(factor);
        self.dc.scale_all(factor);
    }

    pub fn n_beliefs(&self) -> usize {
        self.sd.len() + self.dc.len()
    }

    pub fn mean(&self) -> f64 {
        let n = self.n_beliefs();
        if n == 0 {
            0.0
        } else {
            (self.sd.sum() + self.dc.sum()) / n as f64
        }
    }

    pub fn summary(&self) -> TrustSummary {
        let (min, max) = match (self.sd.min_max(), self.dc.min_max()) {
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => (0.0, 0.0),
        };
        TrustSummary { mean: self.mean(), min, max }
    }

    pub fn check_invariants(&self) -> Result<()> {
        let ok = self.sd.iter().chain(self.dc.iter()).all(|(_, _, b)| (GUARD..=1.0 - GUARD).contains(&b));
        if ok {
            Ok(())
        } else {
            Err(OscError::InvalidArgument("belief outside guard band".into()))
        }
    }
}
