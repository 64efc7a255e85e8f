//! Improvement dynamics toward a configuration where no agent gains from a
//! unilateral single-link toggle.

use std::collections::{BTreeMap, HashSet};

use crate::error::{OscError, Result};
use crate::network::{AgentId, Link, NetworkState};

/// Expected profit of an active link in a given configuration, with beliefs
/// and prices frozen.
pub trait ProfitOracle {
    fn link_profit(&self, net: &NetworkState, link: Link) -> f64;
}

impl<F: Fn(&NetworkState, Link) -> f64> ProfitOracle for F {
    fn link_profit(&self, net: &NetworkState, link: Link) -> f64 {
        self(net, link)
    }
}

/// Stand-alone link values minus a congestion charge per competing in-link
/// at the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionOracle {
    pub base: BTreeMap<Link, f64>,
    pub congestion: f64,
}

impl ProfitOracle for CongestionOracle {
    fn link_profit(&self, net: &NetworkState, link: Link) -> f64 {
        let base = self.base.get(&link).copied().unwrap_or(0.0);
        let others = net.in_degree(link.dst()) - usize::from(net.has_link(link));
        base - self.congestion * others as f64
    }
}

/// Payoff of the agent owning (sourcing) the links: each active link earns
/// its profit minus the threshold.
pub fn agent_payoff(net: &NetworkState, agent: AgentId, oracle: &impl ProfitOracle, epsilon: f64) -> f64 {
    net.out_links(agent).into_iter().map(|l| oracle.link_profit(net, l) - epsilon).sum()
}

/// Change in the owner's payoff from toggling `link`.
pub fn toggle_gain(net: &NetworkState, link: Link, oracle: &impl ProfitOracle, epsilon: f64) -> Result<f64> {
    let owner = link.src();
    let before = agent_payoff(net, owner, oracle, epsilon);
    let mut next = net.clone();
    next.toggle_link(link)?;
    Ok(agent_payoff(&next, owner, oracle, epsilon) - before)
}

/// Opening requires a strict gain; an active link is dropped when keeping it
/// is no better than dropping it, so nothing earning `≤ ε` is sustained.
pub fn is_improving(net: &NetworkState, link: Link, oracle: &impl ProfitOracle, epsilon: f64) -> Result<bool> {
    let gain = toggle_gain(net, link, oracle, epsilon)?;
    Ok(if net.has_link(link) { gain >= 0.0 } else { gain > 0.0 })
}

pub fn improving_moves(net: &NetworkState, oracle: &impl ProfitOracle, epsilon: f64) -> Result<Vec<Link>> {
    let mut moves = Vec::new();
    for link in net.candidate_links() {
        if is_improving(net, link, oracle, epsilon)? {
            moves.push(link);
        }
    }
    Ok(moves)
}

pub fn is_stable(net: &NetworkState, oracle: &impl ProfitOracle, epsilon: f64) -> Result<bool> {
    Ok(improving_moves(net, oracle, epsilon)?.is_empty())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableOutcome {
    pub network: NetworkState,
    pub toggles: usize,
}

/// Repeatedly applies the first improving toggle in candidate order
/// (suppliers, then distributors, by index). Revisiting a configuration is
/// reported as [`OscError::Oscillation`].
pub fn find_stable_configuration(
    net: &NetworkState,
    oracle: &impl ProfitOracle,
    epsilon: f64,
) -> Result<StableOutcome> {
    let mut current = net.clone();
    let candidates = current.candidate_links();
    let cap = 1usize.checked_shl(candidates.len() as u32).unwrap_or(usize::MAX);
    let mut seen = HashSet::new();
    seen.insert(current.links());
    let mut toggles = 0;
    loop {
        let mut moved = false;
        for &link in &candidates {
            if is_improving(&current, link, oracle, epsilon)? {
                current.toggle_link(link)?;
                toggles += 1;
                moved = true;
                if !seen.insert(current.links()) || toggles > cap {
                    return Err(OscError::Oscillation(format!("revisited a configuration after {toggles} toggles")));
                }
                break;
            }
        }
        if !moved {
            return Ok(StableOutcome { network: current, toggles });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn congestion(values: &[(Link, f64)], c: f64) -> CongestionOracle {
        CongestionOracle { base: values.iter().copied().collect(), congestion: c }
    }

    #[test]
    fn single_profitable_link_one_toggle() {
        let net = NetworkState::empty(1, 1, 0);
        let oracle = congestion(&[(Link::sd(0, 0), 1.0)], 0.0);
        let out = find_stable_configuration(&net, &oracle, 0.01).unwrap();
        assert_eq!(out.toggles, 1);
        assert!(out.network.has_link(Link::sd(0, 0)));
    }

    #[test]
    fn stable_start_unchanged() {
        let mut net = NetworkState::empty(2, 1, 0);
        net.insert_link(Link::sd(0, 0)).unwrap();
        let oracle = congestion(&[(Link::sd(0, 0), 1.0), (Link::sd(1, 0), 0.5)], 1.0);
        let out = find_stable_configuration(&net, &oracle, 0.01).unwrap();
        assert_eq!(out.toggles, 0);
        assert_eq!(out.network, net);
    }

    #[test]
    fn threshold_link_dissolved() {
        let mut net = NetworkState::empty(1, 1, 0);
        net.insert_link(Link::sd(0, 0)).unwrap();
        let oracle = congestion(&[(Link::sd(0, 0), 0.01)], 0.0);
        let out = find_stable_configuration(&net, &oracle, 0.01).unwrap();
        assert_eq!(out.network.n_edges(), 0);
    }

    #[test]
    fn cycling_oracle_detected() {
        // S0 wants in only alongside S1; S1 wants in only without S0.
        let oracle = |n: &NetworkState, l: Link| {
            let other = Link::sd(1 - l.src().index, 0);
            let with_other = n.has_link(other);
            match (l.src().index, with_other) {
                (0, true) | (1, false) => 1.0,
                _ => -1.0,
            }
        };
        let out = find_stable_configuration(&NetworkState::empty(2, 1, 0), &oracle, 0.0);
        assert!(matches!(out, Err(OscError::Oscillation(_))));
    }

    fn owner_total(net: &NetworkState, owner: AgentId, oracle: &CongestionOracle, eps: f64) -> f64 {
        net.links().into_iter().filter(|l| l.src() == owner).map(|l| oracle.link_profit(net, l) - eps).sum()
    }

    #[test]
    fn two_by_two_matches_enumeration() {
        let links = [Link::sd(0, 0), Link::sd(0, 1), Link::sd(1, 0), Link::sd(1, 1)];
        let mut rng = crate::rng::RngStream::new(8);
        for _ in 0..40 {
            let base: Vec<(Link, f64)> = links.iter().map(|&l| (l, rng.uniform_range(-0.3, 1.0))).collect();
            let oracle = congestion(&base, rng.uniform_range(0.0, 0.8));
            let configs: Vec<NetworkState> = (0..16u32)
                .map(|mask| {
                    let mut n = NetworkState::empty(2, 2, 0);
                    for (b, &l) in links.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            n.insert_link(l).unwrap();
                        }
                    }
                    n
                })
                .collect();
            // opening must strictly pay, closing must not be weakly better
            let stable: Vec<&NetworkState> = configs
                .iter()
                .filter(|n| {
                    links.iter().all(|&l| {
                        let mut alt = (*n).clone();
                        alt.toggle_link(l).unwrap();
                        let gain = owner_total(&alt, l.src(), &oracle, 0.01) - owner_total(n, l.src(), &oracle, 0.01);
                        if n.has_link(l) { gain < 0.0 } else { gain <= 0.0 }
                    })
                })
                .collect();
            let start = &configs[rng.index(16)];
            let out = find_stable_configuration(start, &oracle, 0.01).unwrap();
            assert!(stable.contains(&&out.network));
        }
    }
}
