//! Trust-weighted node influence and belief perturbations.

use crate::error::{OscError, Result};
use crate::netdyn::lolog::{activation_probability, link_utility, LologParams};
use crate::netdyn::stability::ProfitOracle;
use crate::network::{AgentId, Echelon, Link, NetworkState};
use crate::trust::TrustState;

/// Belief attached to a link: the distributor's view of the supplier for
/// SD links, of the consumer for DC links.
pub fn link_belief(trust: &TrustState, link: Link) -> Option<f64> {
    let (s, d) = (link.src().index, link.dst().index);
    if link.is_sd() {
        trust.sd.get(s, d)
    } else {
        trust.dc.get(s, d)
    }
}

fn set_link_belief(trust: &mut TrustState, link: Link, value: f64) -> Result<()> {
    let (s, d) = (link.src().index, link.dst().index);
    if link.is_sd() {
        trust.sd.set(s, d, value)
    } else {
        trust.dc.set(s, d, value)
    }
}

/// `Σ_j E[π_j]·B_ij` over the node's active outgoing links.
pub fn influence_index(
    node: AgentId,
    net: &NetworkState,
    trust: &TrustState,
    oracle: &impl ProfitOracle,
) -> Result<f64> {
    if !net.contains(node) {
        return Err(OscError::UnknownAgent(node));
    }
    let mut total = 0.0;
    for link in net.out_links(node) {
        let b = link_belief(trust, link).ok_or(OscError::UnknownAgent(link.dst()))?;
        total += oracle.link_profit(net, link) * b;
    }
    Ok(total)
}

/// Candidate outgoing links of `node` over the current node sets.
pub fn candidate_out_links(net: &NetworkState, node: AgentId) -> Vec<Link> {
    let Some(down) = node.echelon.downstream() else { return Vec::new() };
    net.layer(down)
        .iter()
        .map(|d| match node.echelon {
            Echelon::Supplier => Link::sd(node.index, d.index),
            _ => Link::dc(node.index, d.index),
        })
        .collect()
}

/// Raises every belief on the node's candidate outgoing links by `delta`,
/// clamped to the guard band.
pub fn perturb_downstream_beliefs(trust: &mut TrustState, net: &NetworkState, node: AgentId, delta: f64) -> Result<()> {
    for link in candidate_out_links(net, node) {
        if let Some(b) = link_belief(trust, link) {
            set_link_belief(trust, link, b + delta)?;
        }
    }
    Ok(())
}

/// Mean activation probability over the node's candidate outgoing links,
/// given frozen profit and structural inputs.
pub fn mean_activation(
    net: &NetworkState,
    trust: &TrustState,
    node: AgentId,
    params: &LologParams,
    inputs: impl Fn(Link) -> (f64, f64),
) -> f64 {
    let links = candidate_out_links(net, node);
    if links.is_empty() {
        return 0.0;
    }
    links
        .iter()
        .map(|&l| {
            let (psi, structural) = inputs(l);
            let b = link_belief(trust, l).unwrap_or(0.5);
            activation_probability(link_utility(psi, b, structural, params))
        })
        .sum::<f64>()
        / links.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn hand_value() {
        let mut net = NetworkState::empty(1, 2, 0);
        net.insert_link(Link::sd(0, 0)).unwrap();
        net.insert_link(Link::sd(0, 1)).unwrap();
        let mut trust = TrustState::new(1, 2, 0, 0.5, vec![0.1; 2]);
        trust.sd.set(0, 1, 0.25).unwrap();
        let profits: BTreeMap<Link, f64> = [(Link::sd(0, 0), 6.0), (Link::sd(0, 1), 4.0)].into();
        let oracle = |_: &NetworkState, l: Link| profits[&l];
        let i = influence_index(AgentId::supplier(0), &net, &trust, &oracle).unwrap();
        assert!((i - 4.0).abs() < 1e-12);

        trust.sd.set(0, 1, 0.3).unwrap();
        assert!(influence_index(AgentId::supplier(0), &net, &trust, &oracle).unwrap() > i);
    }

    #[test]
    fn isolated_node_zero() {
        let net = NetworkState::empty(2, 2, 2);
        let trust = TrustState::new(2, 2, 2, 0.5, vec![0.1; 2]);
        let oracle = |_: &NetworkState, _: Link| 3.0;
        assert_eq!(influence_index(AgentId::distributor(1), &net, &trust, &oracle).unwrap(), 0.0);
        assert!(influence_index(AgentId::distributor(5), &net, &trust, &oracle).is_err());
    }

    #[test]
    fn perturbation_raises_activation() {
        let net = NetworkState::empty(2, 3, 4);
        let mut trust = TrustState::new(2, 3, 4, 0.4, vec![0.2; 3]);
        let params = LologParams::new(2.0, 0.3, 0.15);
        let node = AgentId::distributor(1);
        let before = mean_activation(&net, &trust, node, &params, |_| (0.5, 0.7));
        perturb_downstream_beliefs(&mut trust, &net, node, 0.05).unwrap();
        let after = mean_activation(&net, &trust, node, &params, |_| (0.5, 0.7));
        assert!(after > before);
        assert!((trust.dc.get(1, 0).unwrap() - 0.45).abs() < 1e-12);
        assert!((trust.dc.get(0, 0).unwrap() - 0.4).abs() < 1e-12);
    }
}
