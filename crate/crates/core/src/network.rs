//! Tripartite supplier → distributor → consumer network.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Echelon {
    Supplier,
    Distributor,
    Consumer,
}

impl Echelon {
    pub fn as_str(self) -> &'static str {
        match self {
            Echelon::Supplier => "supplier",
            Echelon::Distributor => "distributor",
            Echelon::Consumer => "consumer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "supplier" => Some(Echelon::Supplier),
            "distributor" => Some(Echelon::Distributor),
            "consumer" => Some(Echelon::Consumer),
            _ => None,
        }
    }

    /// The echelon an outgoing link from this layer may point to.
    pub fn downstream(self) -> Option<Self> {
        match self {
            Echelon::Supplier => Some(Echelon::Distributor),
            Echelon::Distributor => Some(Echelon::Consumer),
            Echelon::Consumer => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId {
    pub echelon: Echelon,
    pub index: usize,
}

impl AgentId {
    pub const fn supplier(index: usize) -> Self {
        Self { echelon: Echelon::Supplier, index }
    }
    pub const fn distributor(index: usize) -> Self {
        Self { echelon: Echelon::Distributor, index }
    }
    pub const fn consumer(index: usize) -> Self {
        Self { echelon: Echelon::Consumer, index }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.echelon {
            Echelon::Supplier => 'S',
            Echelon::Distributor => 'D',
            Echelon::Consumer => 'C',
        };
        write!(f, "{tag}{}", self.index)
    }
}

/// A directed link between adjacent echelons. Construction enforces the
/// echelon-adjacency rule, so a `Link` value is always well-formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    src: AgentId,
    dst: AgentId,
}

impl Link {
    pub fn new(src: AgentId, dst: AgentId) -> Result<Self> {
        if src.echelon.downstream() != Some(dst.echelon) {
            return Err(OscError::InvalidArgument(format!(
                "link {src}->{dst} does not connect adjacent echelons downstream"
            )));
        }
        Ok(Self { src, dst })
    }

    pub const fn sd(supplier: usize, distributor: usize) -> Self {
        Self { src: AgentId::supplier(supplier), dst: AgentId::distributor(distributor) }
    }

    pub const fn dc(distributor: usize, consumer: usize) -> Self {
        Self { src: AgentId::distributor(distributor), dst: AgentId::consumer(consumer) }
    }

    pub fn src(&self) -> AgentId {
        self.src
    }

    pub fn dst(&self) -> AgentId {
        self.dst
    }

    pub fn is_sd(&self) -> bool {
        self.src.echelon == Echelon::Supplier
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.src, self.dst)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkState {
    pub suppliers: BTreeSet<AgentId>,
    pub distributors: BTreeSet<AgentId>,
    pub consumers: BTreeSet<AgentId>,
    /// (supplier index, distributor index)
    pub sd_edges: BTreeSet<(usize, usize)>,
    /// (distributor index, consumer index)
    pub dc_edges: BTreeSet<(usize, usize)>,
    pub period: usize,
}

impl NetworkState {
    /// Node sets of the given sizes, no edges, period 0.
    pub fn empty(n_suppliers: usize, n_distributors: usize, n_consumers: usize) -> Self {
        Self {
            suppliers: (0..n_suppliers).map(AgentId::supplier).collect(),
            distributors: (0..n_distributors).map(AgentId::distributor).collect(),
            consumers: (0..n_consumers).map(AgentId::consumer).collect(),
            sd_edges: BTreeSet::new(),
            dc_edges: BTreeSet::new(),
            period: 0,
        }
    }

    pub fn layer(&self, echelon: Echelon) -> &BTreeSet<AgentId> {
        match echelon {
            Echelon::Supplier => &self.suppliers,
            Echelon::Distributor => &self.distributors,
            Echelon::Consumer => &self.consumers,
        }
    }

    fn layer_mut(&mut self, echelon: Echelon) -> &mut BTreeSet<AgentId> {
        match echelon {
            Echelon::Supplier => &mut self.suppliers,
            Echelon::Distributor => &mut self.distributors,
            Echelon::Consumer => &mut self.consumers,
        }
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.layer(agent.echelon).contains(&agent)
    }

    pub fn has_supplier(&self, i: usize) -> bool {
        self.suppliers.contains(&AgentId::supplier(i))
    }

    pub fn has_distributor(&self, j: usize) -> bool {
        self.distributors.contains(&AgentId::distributor(j))
    }

    pub fn has_consumer(&self, k: usize) -> bool {
        self.consumers.contains(&AgentId::consumer(k))
    }

    pub fn nodes(&self) -> BTreeSet<AgentId> {
        self.suppliers.iter().chain(&self.distributors).chain(&self.consumers).copied().collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.suppliers.len() + self.distributors.len() + self.consumers.len()
    }

    pub fn n_edges(&self) -> usize {
        self.sd_edges.len() + self.dc_edges.len()
    }

    pub fn links(&self) -> BTreeSet<Link> {
        self.sd_edges
            .iter()
            .map(|&(i, j)| Link::sd(i, j))
            .chain(self.dc_edges.iter().map(|&(j, k)| Link::dc(j, k)))
            .collect()
    }

    pub fn has_link(&self, link: Link) -> bool {
        let (s, d) = (link.src().index, link.dst().index);
        if link.is_sd() {
            self.sd_edges.contains(&(s, d))
        } else {
            self.dc_edges.contains(&(s, d))
        }
    }

    /// Inserts a link; both endpoints must exist.
    pub fn insert_link(&mut self, link: Link) -> Result<bool> {
        for a in [link.src(), link.dst()] {
            if !self.contains(a) {
                return Err(OscError::UnknownAgent(a));
            }
        }
        let key = (link.src().index, link.dst().index);
        Ok(if link.is_sd() { self.sd_edges.insert(key) } else { self.dc_edges.insert(key) })
    }

    pub fn remove_link(&mut self, link: Link) -> bool {
        let key = (link.src().index, link.dst().index);
        if link.is_sd() {
            self.sd_edges.remove(&key)
        } else {
            self.dc_edges.remove(&key)
        }
    }

    /// Toggles a link, returning whether it is active afterwards.
    pub fn toggle_link(&mut self, link: Link) -> Result<bool> {
        if self.remove_link(link) {
            Ok(false)
        } else {
            self.insert_link(link)?;
            Ok(true)
        }
    }

    /// Removes an agent and every incident edge; returns the number of edges removed.
    pub fn remove_agent(&mut self, agent: AgentId) -> Result<usize> {
        if !self.layer_mut(agent.echelon).remove(&agent) {
            return Err(OscError::UnknownAgent(agent));
        }
        let idx = agent.index;
        let before = self.n_edges();
        match agent.echelon {
            Echelon::Supplier => self.sd_edges.retain(|&(i, _)| i != idx),
            Echelon::Distributor => {
                self.sd_edges.retain(|&(_, j)| j != idx);
                self.dc_edges.retain(|&(j, _)| j != idx);
            }
            Echelon::Consumer => self.dc_edges.retain(|&(_, k)| k != idx),
        }
        Ok(before - self.n_edges())
    }

    pub fn out_links(&self, agent: AgentId) -> Vec<Link> {
        let idx = agent.index;
        match agent.echelon {
            Echelon::Supplier => {
                self.sd_edges.iter().filter(|&&(i, _)| i == idx).map(|&(i, j)| Link::sd(i, j)).collect()
            }
            Echelon::Distributor => {
                self.dc_edges.iter().filter(|&&(j, _)| j == idx).map(|&(j, k)| Link::dc(j, k)).collect()
            }
            Echelon::Consumer => Vec::new(),
        }
    }

    pub fn in_degree(&self, agent: AgentId) -> usize {
        let idx = agent.index;
        match agent.echelon {
            Echelon::Supplier => 0,
            Echelon::Distributor => self.sd_edges.iter().filter(|&&(_, j)| j == idx).count(),
            Echelon::Consumer => self.dc_edges.iter().filter(|&&(_, k)| k == idx).count(),
        }
    }

    /// All directed pairs between adjacent layers of the current node sets.
    pub fn candidate_links(&self) -> Vec<Link> {
        let sd = self.suppliers.iter().flat_map(|s| self.distributors.iter().map(move |d| Link::sd(s.index, d.index)));
        let dc = self.distributors.iter().flat_map(|d| self.consumers.iter().map(move |c| Link::dc(d.index, c.index)));
        sd.chain(dc).collect()
    }

    /// Checks the echelon-adjacency and endpoint-existence invariants.
    pub fn check_invariants(&self) -> Result<()> {
        for (echelon, layer) in [
            (Echelon::Supplier, &self.suppliers),
            (Echelon::Distributor, &self.distributors),
            (Echelon::Consumer, &self.consumers),
        ] {
            if let Some(bad) = layer.iter().find(|a| a.echelon != echelon) {
                return Err(OscError::InvalidArgument(format!("agent {bad} stored in the {} layer", echelon.as_str())));
            }
        }
        for &(i, j) in &self.sd_edges {
            if !self.has_supplier(i) || !self.has_distributor(j) {
                return Err(OscError::InvalidArgument(format!("dangling edge S{i}->D{j}")));
            }
        }
        for &(j, k) in &self.dc_edges {
            if !self.has_distributor(j) || !self.has_consumer(k) {
                return Err(OscError::InvalidArgument(format!("dangling edge D{j}->C{k}")));
            }
        }
        Ok(())
    }
}
