//! Period loop: shock, prices, supplier links, trust, consumer links, trust,
//! metrics.
//!
//! Demand intercepts are quoted against the market price index (geometric
//! mean of live supplier prices), so link payoffs are nominal and shrink with
//! the price level. Payoffs exposed to volatility are valued at the
//! certainty-equivalent factor from [`ScenarioConfig::risk_factor`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ScenarioConfig, TrustRule};
use crate::economics::{
    best_response, consumer_utility, effective_cost, Contract, DemandParams, ProcurementProblem, RevenueTerm,
};
use crate::error::{OscError, Result};
use crate::metrics::survival::mean_stderr;
use crate::metrics::{mlsp, ncr, MetricsSeries, PeriodRecord};
use crate::netdyn::lolog::{evaluate_links, LinkDecision, LinkInputs, LologParams, StructuralStats};
use crate::netdyn::stability::ProfitOracle;
use crate::network::{AgentId, Link, NetworkState};
use crate::pricing::{gbm_step, quality_step, PriceState, QualityState};
use crate::rng::RngStream;
use crate::shocks::{apply_shock, maybe_draw_shock, ShockEvent};
use crate::trust::{bayes_update, reliability, smoothed_update, TrustState, TrustSummary};

pub const EVAL_ORDER: &str = "shock,price,sd_links,sd_trust,dc_links,dc_trust,metrics";

/// Validated empty network of the configured sizes.
pub fn build_initial_network(cfg: &ScenarioConfig) -> Result<NetworkState> {
    cfg.validate()?;
    let n = &cfg.network;
    Ok(NetworkState::empty(n.suppliers, n.distributors, n.consumers))
}

#[derive(Debug, Clone, PartialEq)]
struct Supplier {
    fresh_phi: f64,
    phi: f64,
    q_max: u32,
    delta: f64,
    // distributors served last period
    served: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Distributor {
    agent_type: usize,
    stock: f64,
    stock_phi: f64,
    unit_cost: Option<f64>,
}

/// State of one candidate link at the end of a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkRecord {
    pub link: Link,
    pub active: bool,
    pub expected_profit: f64,
    pub belief: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct SdPlan {
    problem: ProcurementProblem,
    q_star: f64,
}

/// Frozen link payoffs of the latest period. Supplier links share the
/// distributor's downstream demand equally among its active suppliers.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    sd: BTreeMap<Link, ProcurementProblem>,
    dc: BTreeMap<Link, f64>,
    structural: BTreeMap<Link, f64>,
}

impl Snapshot {
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.sd.keys().chain(self.dc.keys()).copied()
    }

    /// Stand-alone payoff and structural term of a link.
    pub fn inputs(&self, link: Link) -> Option<(f64, f64)> {
        let psi = if link.is_sd() { best_response(self.sd.get(&link)?).objective } else { *self.dc.get(&link)? };
        Some((psi, self.structural.get(&link).copied().unwrap_or(0.0)))
    }
}

fn split_problem(p: &ProcurementProblem, n: usize) -> ProcurementProblem {
    let n = n.max(1) as f64;
    let terms = p
        .terms
        .iter()
        .map(|t| RevenueTerm {
            belief: t.belief,
            demand: DemandParams { alpha: t.demand.alpha / n, beta: t.demand.beta / (n * n) },
        })
        .collect();
    ProcurementProblem::new(terms, p.contract).expect("scaled terms stay valid")
}

impl ProfitOracle for Snapshot {
    fn link_profit(&self, net: &NetworkState, link: Link) -> f64 {
        if link.is_sd() {
            let Some(p) = self.sd.get(&link) else { return 0.0 };
            let sharing = net.in_degree(link.dst()) + usize::from(!net.has_link(link));
            best_response(&split_problem(p, sharing)).objective
        } else {
            self.dc.get(&link).copied().unwrap_or(0.0)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub metrics: MetricsSeries,
    pub final_network: NetworkState,
    pub final_trust: TrustSummary,
    pub shock_log: Vec<ShockEvent>,
    pub final_links: Vec<LinkRecord>,
    pub config: ScenarioConfig,
}

/// One simulation in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ScenarioConfig,
    net: NetworkState,
    trust: TrustState,
    prices: Vec<f64>,
    suppliers: Vec<Supplier>,
    distributors: Vec<Distributor>,
    params: LologParams,
    pricing_rng: RngStream,
    shock_rng: RngStream,
    links_rng: RngStream,
    outcome_rng: RngStream,
    metrics: MetricsSeries,
    shock_log: Vec<ShockEvent>,
    snapshot: Snapshot,
    last_links: Vec<LinkRecord>,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let net = build_initial_network(cfg)?;
        let root = RngStream::new(cfg.scenario.seed);
        let mut init = root.child("init");
        let p = &cfg.pricing;
        let e = &cfg.economics;
        let mut prices = Vec::with_capacity(cfg.network.suppliers);
        let mut suppliers = Vec::with_capacity(cfg.network.suppliers);
        for _ in 0..cfg.network.suppliers {
            prices.push(init.uniform_range(p.initial_price_range[0], p.initial_price_range[1]));
            let phi = init.uniform_range(p.initial_quality_range[0], p.initial_quality_range[1]);
            let q_max = init.int_inclusive(e.q_max_range[0], e.q_max_range[1]);
            let delta = init.uniform_range(e.rebate_delta_range[0], e.rebate_delta_range[1]);
            suppliers.push(Supplier { fresh_phi: phi, phi, q_max, delta, served: 0 });
        }
        let mut distributors = Vec::with_capacity(cfg.network.distributors);
        for _ in 0..cfg.network.distributors {
            let agent_type = init.categorical(&cfg.trust.agent_type_weights);
            distributors.push(Distributor { agent_type, stock: 0.0, stock_phi: 1.0, unit_cost: None });
        }
        let rates = distributors.iter().map(|d| cfg.trust.learning_rates_by_type[d.agent_type]).collect();
        let trust = TrustState::new(
            cfg.network.suppliers,
            cfg.network.distributors,
            cfg.network.consumers,
            cfg.trust.baseline_trust,
            rates,
        );
        Ok(Self {
            params: LologParams::from(&cfg.lolog),
            pricing_rng: root.child("pricing"),
            shock_rng: root.child("shocks"),
            links_rng: root.child("links"),
            outcome_rng: root.child("outcomes"),
            metrics: MetricsSeries::new(cfg.scenario.horizon),
            cfg: cfg.clone(),
            net,
            trust,
            prices,
            suppliers,
            distributors,
            shock_log: Vec::new(),
            snapshot: Snapshot { sd: BTreeMap::new(), dc: BTreeMap::new(), structural: BTreeMap::new() },
            last_links: Vec::new(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn network(&self) -> &NetworkState {
        &self.net
    }

    pub fn trust(&self) -> &TrustState {
        &self.trust
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn params(&self) -> &LologParams {
        &self.params
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn metrics(&self) -> &MetricsSeries {
        &self.metrics
    }

    pub fn is_done(&self) -> bool {
        self.net.period >= self.cfg.scenario.horizon
    }

    /// Geometric mean of live supplier prices.
    fn price_index(&self) -> f64 {
        let live: Vec<f64> = self.net.suppliers.iter().map(|s| self.prices[s.index]).collect();
        (live.iter().map(|p| p.ln()).sum::<f64>() / live.len() as f64).exp()
    }

    fn update_belief(&self, belief: f64, lambda: f64, s: u8) -> Result<f64> {
        match self.cfg.trust.update_rule {
            TrustRule::Smoothed => smoothed_update(belief, lambda, s),
            TrustRule::Bayes => {
                bayes_update(belief, self.cfg.trust.bayes_p_reliable, self.cfg.trust.bayes_p_unreliable, s)
            }
        }
    }

    fn breach(&self, detail: impl Into<String>) -> OscError {
        OscError::InvariantBreach { period: self.net.period, detail: detail.into() }
    }

    pub fn step(&mut self) -> Result<&PeriodRecord> {
        let cfg = self.cfg.clone();
        let (ns, nd, nc) = (cfg.network.suppliers, cfg.network.distributors, cfg.network.consumers);
        self.net.period += 1;
        let prev_edges = self.net.links();
        let prev_nodes = self.net.nodes();

        // shock
        let mut shock_type = "none";
        if cfg.shocks.enabled {
            if let Some(event) = maybe_draw_shock(&cfg.shocks, &self.net, &mut self.shock_rng) {
                apply_shock(&event, &mut self.net, &mut self.trust, &mut self.prices, &cfg.shocks)?;
                shock_type = event.kind.name();
                self.shock_log.push(event);
            }
        }

        // prices and quality; draws for every original supplier
        let p = &cfg.pricing;
        let n_dist_alive = self.net.distributors.len().max(1) as f64;
        for i in 0..ns {
            let z = self.pricing_rng.normal();
            let noise = self.pricing_rng.uniform_range(-p.quality_noise, p.quality_noise);
            if !self.net.has_supplier(i) {
                continue;
            }
            self.prices[i] = gbm_step(PriceState { price: self.prices[i], mu: p.mu, sigma: p.sigma }, z, 1.0)?.price;
            let s = &mut self.suppliers[i];
            let aged = quality_step(QualityState { phi: s.phi, gamma: p.gamma, perishable: p.perishable }, noise).phi;
            s.phi = if p.perishable {
                // sold share is replaced by fresh stock, the rest ages
                let through = (s.served as f64 / n_dist_alive).min(1.0);
                through * s.fresh_phi + (1.0 - through) * aged
            } else {
                aged
            };
            s.served = 0;
        }
        if p.perishable {
            for d in &mut self.distributors {
                d.stock_phi *= p.gamma;
            }
        }

        // contracts
        let mut contracts: BTreeMap<usize, Contract> = BTreeMap::new();
        for s in &self.net.suppliers {
            let sup = &self.suppliers[s.index];
            let price = self.prices[s.index];
            let cap = 0.5 * price / f64::from(sup.q_max).sqrt();
            contracts.insert(s.index, Contract::new(price, sup.q_max, sup.phi, sup.delta.min(cap))?);
        }

        let h = cfg.risk_factor();
        let index = self.price_index();
        let e = &cfg.economics;
        let l = &cfg.lolog;
        let consumers: Vec<usize> = self.net.consumers.iter().map(|c| c.index).collect();
        let k = consumers.len() as f64;
        let n_sup_alive = self.net.suppliers.len() as f64;
        let n_dist_alive = self.net.distributors.len() as f64;

        // supplier-distributor links
        let mut plans: BTreeMap<Link, SdPlan> = BTreeMap::new();
        let mut structural: BTreeMap<Link, f64> = BTreeMap::new();
        for d in &self.net.distributors {
            let terms: Vec<RevenueTerm> = consumers
                .iter()
                .map(|&c| RevenueTerm {
                    belief: self.trust.dc.get(d.index, c).unwrap_or(cfg.trust.baseline_trust),
                    demand: DemandParams {
                        alpha: h * index * e.demand_alpha / k,
                        beta: h * index * e.demand_beta / (k * k),
                    },
                })
                .collect();
            let degree = self.net.in_degree(*d) as f64 / n_sup_alive;
            for (&i, contract) in &contracts {
                let link = Link::sd(i, d.index);
                let problem = ProcurementProblem::new(terms.clone(), *contract)?;
                let q_star = best_response(&problem).q_star;
                structural.insert(
                    link,
                    StructuralStats { quality: contract.phi, degree }
                        .value(l.structural_quality_weight, l.structural_degree_weight),
                );
                plans.insert(link, SdPlan { problem, q_star });
            }
        }
        let sd_candidates: Vec<Link> = (0..ns).flat_map(|i| (0..nd).map(move |j| Link::sd(i, j))).collect();
        let sd_decisions = evaluate_links(
            &sd_candidates,
            |link| match plans.get(link) {
                Some(plan) => LinkInputs {
                    psi: plan.problem.objective(plan.q_star),
                    trust: self.trust.sd.get(link.src().index, link.dst().index).unwrap_or(0.5),
                    structural: structural[link],
                },
                None => LinkInputs { psi: f64::NEG_INFINITY, trust: 0.5, structural: 0.0 },
            },
            &self.params,
            l.epsilon,
            &mut self.links_rng,
        );
        self.net.sd_edges = active_pairs(&sd_decisions);

        // supplier outcomes, trust and deliveries
        let mut bought: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 0.0); nd]; // units, cost, quality·units
        for dec in &sd_decisions {
            let u = self.outcome_rng.uniform();
            if !dec.active {
                continue;
            }
            let (i, j) = (dec.link.src().index, dec.link.dst().index);
            let belief = self.trust.sd.get(i, j).ok_or_else(|| self.breach(format!("no belief for {}", dec.link)))?;
            let phi = self.suppliers[i].phi;
            let s = u8::from(u < reliability(phi, belief, cfg.trust.outcome_quality_weight));
            let updated = self.update_belief(belief, self.trust.learning_rate[j], s)?;
            self.trust.sd.set(i, j, updated)?;
            if s == 1 {
                self.suppliers[i].served += 1;
                let units = plans[&dec.link].q_star.floor();
                if units > 0.0 {
                    let unit_cost = effective_cost(&contracts[&i], units)?;
                    let b = &mut bought[j];
                    b.0 += units;
                    b.1 += units * unit_cost;
                    b.2 += units * phi;
                }
            }
        }
        let mut carried = vec![0.0; nd];
        for j in 0..nd {
            let d = &mut self.distributors[j];
            carried[j] = d.stock;
            let (units, cost, q_units) = bought[j];
            if units > 0.0 {
                d.stock_phi = (d.stock_phi * d.stock + q_units) / (d.stock + units);
                d.stock += units;
                d.unit_cost = Some(cost / units);
            }
        }

        // distributor pricing and consumer links
        let demand = DemandParams::new(h * index * e.demand_alpha, h * index * e.demand_beta)?;
        let mut dc_psi: BTreeMap<Link, (f64, f64)> = BTreeMap::new(); // (surplus, q*)
        for d in &self.net.distributors {
            let dist = &self.distributors[d.index];
            let Some(cost) = dist.unit_cost else { continue };
            if dist.stock <= 0.0 {
                continue;
            }
            let price = e.markup * cost;
            let choice = consumer_utility(&demand, price, 0.0);
            for &c in &consumers {
                let link = Link::dc(d.index, c);
                let degree = self.net.in_degree(AgentId::consumer(c)) as f64 / n_dist_alive;
                structural.insert(
                    link,
                    StructuralStats { quality: dist.stock_phi, degree }
                        .value(l.structural_quality_weight, l.structural_degree_weight),
                );
                dc_psi.insert(link, (choice.utility, choice.q_star));
            }
        }
        let dc_candidates: Vec<Link> = (0..nd).flat_map(|j| (0..nc).map(move |c| Link::dc(j, c))).collect();
        let dc_decisions = evaluate_links(
            &dc_candidates,
            |link| match dc_psi.get(link) {
                Some(&(psi, _)) => LinkInputs {
                    psi,
                    trust: self.trust.dc.get(link.src().index, link.dst().index).unwrap_or(0.5),
                    structural: structural[link],
                },
                None => LinkInputs { psi: f64::NEG_INFINITY, trust: 0.5, structural: 0.0 },
            },
            &self.params,
            l.epsilon,
            &mut self.links_rng,
        );
        self.net.dc_edges = active_pairs(&dc_decisions);

        // sales, consumers in index order
        let mut sold = vec![0.0; nd];
        for &c in &consumers {
            for d in &self.net.distributors {
                if self.net.dc_edges.contains(&(d.index, c)) {
                    let want = dc_psi[&Link::dc(d.index, c)].1;
                    let dist = &mut self.distributors[d.index];
                    let sale = want.min(dist.stock);
                    dist.stock -= sale;
                    sold[d.index] += sale;
                }
            }
        }
        for j in 0..nd {
            let d = &self.distributors[j];
            if d.stock < -1e-9 || sold[j] > carried[j] + bought[j].0 + 1e-9 {
                return Err(self.breach(format!(
                    "stock ledger of D{j}: sold {} of {}",
                    sold[j],
                    carried[j] + bought[j].0
                )));
            }
        }

        // consumer outcomes and trust
        for dec in &dc_decisions {
            let u = self.outcome_rng.uniform();
            if !dec.active {
                continue;
            }
            let (j, c) = (dec.link.src().index, dec.link.dst().index);
            let belief = self.trust.dc.get(j, c).ok_or_else(|| self.breach(format!("no belief for {}", dec.link)))?;
            let s = u8::from(u < reliability(self.distributors[j].stock_phi, belief, cfg.trust.outcome_quality_weight));
            let updated = self.update_belief(belief, self.trust.learning_rate[j], s)?;
            self.trust.dc.set(j, c, updated)?;
        }

        if cfg!(debug_assertions) {
            self.net.check_invariants().map_err(|e| self.breach(e.to_string()))?;
            self.trust.check_invariants().map_err(|e| self.breach(e.to_string()))?;
        }

        // snapshot for frozen analyses
        let dc_links: BTreeMap<Link, f64> = dc_psi.iter().map(|(l, v)| (*l, v.0)).collect();
        self.last_links = sd_decisions
            .iter()
            .chain(dc_decisions.iter())
            .filter(|d| d.psi.is_finite())
            .map(|d| LinkRecord {
                link: d.link,
                active: d.active,
                expected_profit: d.psi,
                belief: crate::netdyn::link_belief(&self.trust, d.link).unwrap_or(0.5),
            })
            .collect();
        self.snapshot =
            Snapshot { sd: plans.into_iter().map(|(l, p)| (l, p.problem)).collect(), dc: dc_links, structural };

        // metrics
        let cur_edges = self.net.links();
        let cur_nodes = self.net.nodes();
        let mean_price =
            self.net.suppliers.iter().map(|s| self.prices[s.index]).sum::<f64>() / self.net.suppliers.len() as f64;
        self.metrics.records.push(PeriodRecord {
            period: self.net.period,
            mlsp: mlsp(&prev_edges, &cur_edges),
            ncr: ncr(&prev_nodes, &cur_nodes)?,
            n_edges: cur_edges.len(),
            n_nodes: cur_nodes.len(),
            mean_trust: self.trust.mean(),
            mean_price,
            shock_type: shock_type.to_string(),
        });
        Ok(self.metrics.records.last().expect("just pushed"))
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_result(self) -> SimulationResult {
        SimulationResult {
            final_trust: self.trust.summary(),
            metrics: self.metrics,
            final_network: self.net,
            shock_log: self.shock_log,
            final_links: self.last_links,
            config: self.cfg,
        }
    }
}

fn active_pairs(decisions: &[LinkDecision]) -> std::collections::BTreeSet<(usize, usize)> {
    decisions.iter().filter(|d| d.active).map(|d| (d.link.src().index, d.link.dst().index)).collect()
}

pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimulationResult> {
    let mut sim = Simulation::new(cfg)?;
    sim.run_to_end()?;
    Ok(sim.into_result())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Replications {
    pub results: Vec<SimulationResult>,
    pub mean_mlsp: Estimate,
    pub mean_ncr: Estimate,
}

/// Runs replication `r` with seed `base_seed + r`, in parallel; results are
/// ordered by replication index.
pub fn run_replications(cfg: &ScenarioConfig, n_reps: usize, base_seed: u64) -> Result<Replications> {
    if n_reps == 0 {
        return Err(OscError::InvalidArgument("need at least one replication".into()));
    }
    let results: Vec<SimulationResult> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.scenario.seed = base_seed.wrapping_add(r as u64);
            run_simulation(&c)
        })
        .collect::<Result<_>>()?;
    let mut mlsps = Vec::with_capacity(n_reps);
    let mut ncrs = Vec::with_capacity(n_reps);
    for r in &results {
        mlsps.push(r.metrics.mean_mlsp()?);
        ncrs.push(r.metrics.mean_ncr()?);
    }
    let (m, ms) = mean_stderr(&mlsps);
    let (n, ns) = mean_stderr(&ncrs);
    Ok(Replications {
        results,
        mean_mlsp: Estimate { mean: m, stderr: ms },
        mean_ncr: Estimate { mean: n, stderr: ns },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;

    fn small(seed: u64) -> ScenarioConfig {
        let mut cfg = Preset::FastFashion.config();
        cfg.scenario.horizon = 30;
        cfg.scenario.seed = seed;
        cfg
    }

    #[test]
    fn length_and_determinism() {
        let cfg = Preset::FastFashion.config();
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a.metrics.records.len(), 100);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn initial_network_empty() {
        let net = build_initial_network(&Preset::FastFashion.config()).unwrap();
        assert_eq!((net.suppliers.len(), net.distributors.len(), net.consumers.len()), (5, 8, 14));
        assert_eq!((net.n_edges(), net.period), (0, 0));
        let mut cfg = small(1);
        cfg.network.suppliers = 0;
        assert!(build_initial_network(&cfg).is_err());
    }

    #[test]
    fn single_agent_layers_never_churn() {
        let mut cfg = small(3);
        cfg.network.suppliers = 1;
        cfg.network.distributors = 1;
        cfg.network.consumers = 1;
        cfg.shocks.enabled = true;
        let r = run_simulation(&cfg).unwrap();
        assert!(r.metrics.records.iter().all(|x| x.ncr == 0.0));
    }

    #[test]
    fn first_period_mlsp_zero() {
        let r = run_simulation(&small(4)).unwrap();
        assert_eq!(r.metrics.records[0].mlsp, 0.0);
        assert!(r.metrics.records.iter().all(|x| (0.0..=1.0).contains(&x.mlsp)));
    }

    #[test]
    fn disabled_shocks_leave_other_streams_alone() {
        let mut cfg = small(5);
        cfg.shocks.enabled = true;
        cfg.shocks.probability = 0.0;
        let a = run_simulation(&cfg).unwrap();
        cfg.shocks.enabled = false;
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a.metrics.records, b.metrics.records);
    }

    #[test]
    fn replications_ordered_and_repeatable() {
        let cfg = small(0);
        let a = run_replications(&cfg, 4, 10).unwrap();
        let b = run_replications(&cfg, 4, 10).unwrap();
        assert_eq!(a.mean_mlsp, b.mean_mlsp);
        for (r, res) in a.results.iter().enumerate() {
            assert_eq!(res.config.scenario.seed, 10 + r as u64);
        }
        let one = run_replications(&cfg, 1, 7).unwrap();
        let single = run_simulation(&{
            let mut c = cfg.clone();
            c.scenario.seed = 7;
            c
        })
        .unwrap();
        assert_eq!(one.mean_mlsp.mean, single.metrics.mean_mlsp().unwrap());
    }
}
