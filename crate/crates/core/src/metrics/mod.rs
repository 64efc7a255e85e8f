//! Resilience metrics and node-importance ranking.

pub mod survival;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};
use crate::netdyn::influence::influence_index;
use crate::netdyn::stability::ProfitOracle;
use crate::network::{AgentId, NetworkState};
use crate::trust::TrustState;

pub use survival::{estimate_sigma_c, pava_nonincreasing, survival_curve, SeedMode, SurvivalCurve, SurvivalPoint};

/// Share of last period's links still active, or 0 when there were none.
pub fn mlsp<T: Ord>(prev: &BTreeSet<T>, cur: &BTreeSet<T>) -> f64 {
    if prev.is_empty() {
        return 0.0;
    }
    prev.intersection(cur).count() as f64 / prev.len() as f64
}

/// Symmetric difference of node sets over the previous node count.
pub fn ncr<T: Ord>(prev: &BTreeSet<T>, cur: &BTreeSet<T>) -> Result<f64> {
    if prev.is_empty() {
        return Err(OscError::InvalidArgument("node churn needs a nonempty previous node set".into()));
    }
    Ok(prev.symmetric_difference(cur).count() as f64 / prev.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: usize,
    pub mlsp: f64,
    pub ncr: f64,
    pub n_edges: usize,
    pub n_nodes: usize,
    pub mean_trust: f64,
    pub mean_price: f64,
    pub shock_type: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub horizon: usize,
    pub records: Vec<PeriodRecord>,
}

impl MetricsSeries {
    pub fn new(horizon: usize) -> Self {
        Self { horizon, records: Vec::with_capacity(horizon) }
    }

    pub fn mean_mlsp(&self) -> Result<f64> {
        temporal_averages(self).map(|a| a.0)
    }

    pub fn mean_ncr(&self) -> Result<f64> {
        temporal_averages(self).map(|a| a.1)
    }
}

/// `(mean MLSP, mean NCR)` over periods `1..=T`.
pub fn temporal_averages(series: &MetricsSeries) -> Result<(f64, f64)> {
    let n = series.records.len();
    if n == 0 {
        return Err(OscError::InvalidArgument("empty metrics series".into()));
    }
    if n != series.horizon {
        return Err(OscError::InvalidArgument(format!("series has {n} records but the horizon is {}", series.horizon)));
    }
    let (m, c) = series.records.iter().fold((0.0, 0.0), |(m, c), r| (m + r.mlsp, c + r.ncr));
    Ok((m / n as f64, c / n as f64))
}

/// Influence of every supplier and distributor, highest first; ties keep
/// agent order.
pub fn influence_report(
    net: &NetworkState,
    trust: &TrustState,
    oracle: &impl ProfitOracle,
) -> Result<Vec<(AgentId, f64)>> {
    let mut out = Vec::new();
    for &agent in net.suppliers.iter().chain(net.distributors.iter()) {
        out.push((agent, influence_index(agent, net, trust, oracle)?));
    }
    rank(&mut out);
    Ok(out)
}

/// Sorts descending by value, ascending by agent on ties.
pub fn rank(entries: &mut [(AgentId, f64)]) {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}
