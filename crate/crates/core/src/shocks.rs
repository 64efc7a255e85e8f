//! Exogenous disturbances: price spikes, node exits and trust collapses.

use serde::Serialize;

use crate::config::ShockSection;
use crate::error::{OscError, Result};
use crate::network::{AgentId, Echelon, NetworkState};
use crate::rng::RngStream;
use crate::trust::TrustState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShockKind {
    PriceSpike { supplier: usize },
    NodeExit { agent: AgentId },
    TrustCollapse { distributor: usize, consumer: usize },
}

impl ShockKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShockKind::PriceSpike { .. } => "price_spike",
            ShockKind::NodeExit { .. } => "node_exit",
            ShockKind::TrustCollapse { .. } => "trust_collapse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShockEvent {
    pub kind: ShockKind,
    pub period: usize,
}

fn pick(layer: &std::collections::BTreeSet<AgentId>, u: f64) -> Option<AgentId> {
    let n = layer.len();
    if n == 0 {
        return None;
    }
    let i = ((u * n as f64) as usize).min(n - 1);
    layer.iter().nth(i).copied()
}

/// Draws at most one shock for the period. Exactly four uniforms are consumed
/// per call, so the stream stays aligned across scenarios. A node exit with
/// no layer holding two or more nodes degrades to no shock.
pub fn maybe_draw_shock(cfg: &ShockSection, net: &NetworkState, rng: &mut RngStream) -> Option<ShockEvent> {
    let u: [f64; 4] = std::array::from_fn(|_| rng.uniform());
    if u[0] >= cfg.probability {
        return None;
    }
    let kind = match ((u[1] * 3.0) as usize).min(2) {
        0 => ShockKind::PriceSpike { supplier: pick(&net.suppliers, u[2])?.index },
        1 => {
            let eligible: Vec<_> =
                [&net.suppliers, &net.distributors, &net.consumers].into_iter().filter(|l| l.len() >= 2).collect();
            if eligible.is_empty() {
                return None;
            }
            let layer = eligible[((u[2] * eligible.len() as f64) as usize).min(eligible.len() - 1)];
            ShockKind::NodeExit { agent: pick(layer, u[3])? }
        }
        _ => {
            let pairs = net.distributors.len() * net.consumers.len();
            if pairs == 0 {
                return None;
            }
            let p = ((u[2] * pairs as f64) as usize).min(pairs - 1);
            let j = net.distributors.iter().nth(p / net.consumers.len())?.index;
            let k = net.consumers.iter().nth(p % net.consumers.len())?.index;
            ShockKind::TrustCollapse { distributor: j, consumer: k }
        }
    };
    Some(ShockEvent { kind, period: net.period })
}

/// Applies the event, then the global belief decay.
pub fn apply_shock(
    event: &ShockEvent,
    net: &mut NetworkState,
    trust: &mut TrustState,
    prices: &mut [f64],
    cfg: &ShockSection,
) -> Result<()> {
    match event.kind {
        ShockKind::PriceSpike { supplier } => {
            if !net.has_supplier(supplier) {
                return Err(OscError::UnknownAgent(AgentId::supplier(supplier)));
            }
            prices[supplier] *= cfg.price_spike_factor;
        }
        ShockKind::NodeExit { agent } => {
            if !net.contains(agent) {
                return Err(OscError::UnknownAgent(agent));
            }
            if net.layer(agent.echelon).len() < 2 {
                return Err(OscError::InvalidArgument(format!(
                    "{agent} is the last node of its layer and cannot exit"
                )));
            }
            net.remove_agent(agent)?;
            match agent.echelon {
                Echelon::Supplier => {
                    trust.sd.remove_row(agent.index);
                }
                Echelon::Distributor => {
                    trust.sd.remove_col(agent.index);
                    trust.dc.remove_row(agent.index);
                }
                Echelon::Consumer => {
                    trust.dc.remove_col(agent.index);
                }
            }
        }
        ShockKind::TrustCollapse { distributor, consumer } => {
            let b = trust.dc.get(distributor, consumer).ok_or(OscError::UnknownAgent(AgentId::consumer(consumer)))?;
            trust.dc.set(distributor, consumer, b * cfg.collapse_factor)?;
        }
    }
    if cfg.decay_on_every_shock || matches!(event.kind, ShockKind::TrustCollapse { .. }) {
        trust.scale_all(cfg.trust_decay);
    }
    Ok(())
}
