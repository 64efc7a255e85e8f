//! Exact Markov chain over all link configurations of a tiny network.
//!
//! A state is a bitmask over the candidate links. From every state the chain
//! either toggles one link or stays; each of those `m + 1` moves gets at
//! least `eta`, and the rest of the mass follows a lazy Gibbs kernel built
//! from the logistic activation probabilities.

use crate::error::{OscError, Result};
use crate::netdyn::lolog::{activation_probability, link_utility, LologParams};
use crate::network::Link;
use crate::rng::RngStream;

pub const MAX_LINKS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicityConfig {
    pub eta: f64,
    pub max_states: usize,
}

impl Default for ErgodicityConfig {
    fn default() -> Self {
        Self { eta: 0.01, max_states: 1 << MAX_LINKS }
    }
}

/// Candidate links with fixed base utilities plus a configuration-dependent
/// degree term: each other active link of the same source adds
/// `degree_weight / m` to a link's utility.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyNetSpec {
    pub links: Vec<Link>,
    pub base_utility: Vec<f64>,
    pub degree_weight: f64,
}

impl TinyNetSpec {
    pub fn new(links: Vec<Link>, base_utility: Vec<f64>, degree_weight: f64) -> Result<Self> {
        if links.len() != base_utility.len() {
            return Err(OscError::InvalidArgument("one base utility per link required".into()));
        }
        if base_utility.iter().any(|u| !u.is_finite()) || !degree_weight.is_finite() {
            return Err(OscError::InvalidArgument("utilities must be finite".into()));
        }
        Ok(Self { links, base_utility, degree_weight })
    }

    /// Every supplier-distributor pair of an `ns × nd` instance with random
    /// profit, trust and quality covariates weighted by `params`.
    pub fn random_sd(
        ns: usize,
        nd: usize,
        params: &LologParams,
        degree_weight: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let links: Vec<Link> = (0..ns).flat_map(|i| (0..nd).map(move |j| Link::sd(i, j))).collect();
        let base = links
            .iter()
            .map(|_| {
                let psi = rng.uniform_range(-1.0, 2.0);
                let trust = rng.uniform_range(0.2, 0.8);
                let quality = rng.uniform_range(0.5, 1.0);
                link_utility(psi, trust, quality, params)
            })
            .collect();
        Self::new(links, base, degree_weight)
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_states(&self) -> usize {
        1 << self.links.len()
    }

    pub fn is_active(state: usize, l: usize) -> bool {
        state >> l & 1 == 1
    }

    pub fn utility(&self, state: usize, l: usize) -> f64 {
        let m = self.n_links() as f64;
        let src = self.links[l].src();
        let siblings =
            (0..self.n_links()).filter(|&o| o != l && Self::is_active(state, o) && self.links[o].src() == src).count();
        self.base_utility[l] + self.degree_weight * siblings as f64 / m
    }

    /// Mean activation probability over links in one configuration.
    pub fn mean_activation(&self, state: usize) -> f64 {
        if self.links.is_empty() {
            return 0.0;
        }
        (0..self.n_links()).map(|l| activation_probability(self.utility(state, l))).sum::<f64>() / self.n_links() as f64
    }
}

/// Row-stochastic matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl StochasticMatrix {
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            if row.len() != n {
                return Err(OscError::InvalidArgument("matrix must be square".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                if v < 0.0 || !v.is_finite() {
                    return Err(OscError::InvalidArgument(format!("invalid transition probability {v}")));
                }
                if v > 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        let m = Self { n, row_ptr, cols, vals };
        if m.max_row_error() > 1e-9 {
            return Err(OscError::InvalidArgument("rows must sum to 1".into()));
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|r| {
                let mut row = vec![0.0; self.n];
                for (c, v) in self.row(r) {
                    row[c] += v;
                }
                row
            })
            .collect()
    }

    pub fn max_row_error(&self) -> f64 {
        (0..self.n).map(|r| (self.row(r).map(|(_, v)| v).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `π P`.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, &mass) in pi.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += mass * v;
            }
        }
        out
    }

    fn reachable(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.n];
        for r in 0..self.n {
            for (c, _) in self.row(r) {
                if forward {
                    adj[r].push(c);
                } else {
                    adj[c].push(r);
                }
            }
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Strong connectivity of the positive-entry graph.
    pub fn is_irreducible(&self) -> bool {
        self.n > 0 && self.reachable(0, true).into_iter().all(|x| x) && self.reachable(0, false).into_iter().all(|x| x)
    }

    /// A positive diagonal entry in an irreducible chain forces period 1.
    pub fn has_positive_diagonal(&self) -> bool {
        (0..self.n).all(|r| self.get(r, r) > 0.0)
    }

    /// Samples the next state with one uniform draw.
    pub fn step(&self, state: usize, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut last = state;
        for (c, v) in self.row(state) {
            acc += v;
            last = c;
            if u < acc {
                return c;
            }
        }
        last
    }
}

/// Transition matrix of the tiny-network chain.
pub fn build_transition_matrix(spec: &TinyNetSpec, cfg: &ErgodicityConfig) -> Result<StochasticMatrix> {
    let m = spec.n_links();
    if m > MAX_LINKS || (1usize << m) > cfg.max_states {
        let states = 1usize.checked_shl(m as u32).unwrap_or(usize::MAX);
        return Err(OscError::StateSpaceTooLarge { states, cap: cfg.max_states.min(1 << MAX_LINKS) });
    }
    let moves = (m + 1) as f64;
    if !(cfg.eta > 0.0 && cfg.eta <= 1.0 / moves) {
        return Err(OscError::InvalidArgument(format!(
            "eta must lie in (0, 1/{}] for {m} candidate links, got {}",
            m + 1,
            cfg.eta
        )));
    }
    let residual = 1.0 - moves * cfg.eta;
    let n = 1usize << m;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * (m + 1));
    let mut vals = Vec::with_capacity(n * (m + 1));
    row_ptr.push(0);
    for x in 0..n {
        let mut weights = Vec::with_capacity(m);
        for l in 0..m {
            let f = activation_probability(spec.utility(x, l));
            let a = if TinyNetSpec::is_active(x, l) { 1.0 - f } else { f };
            weights.push(a / m as f64);
        }
        let stay = 1.0 - weights.iter().sum::<f64>();
        let mut entries: Vec<(usize, f64)> =
            weights.iter().enumerate().map(|(l, w)| (x ^ (1 << l), cfg.eta + residual * w)).collect();
        entries.push((x, cfg.eta + residual * stay));
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(StochasticMatrix { n, row_ptr, cols, vals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub pi: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

pub const STATIONARY_TOL: f64 = 1e-12;
const MAX_POWER_ITERATIONS: usize = 2_000_000;

/// Stationary law by power iteration from the uniform vector, after
/// checking irreducibility and aperiodicity.
pub fn stationary_distribution(p: &StochasticMatrix) -> Result<Stationary> {
    if p.max_row_error() > 1e-9 {
        return Err(OscError::InvalidArgument("matrix is not row-stochastic".into()));
    }
    if !p.is_irreducible() || !p.has_positive_diagonal() {
        return Err(OscError::NotErgodic("chain is not irreducible with a positive diagonal".into()));
    }
    let n = p.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_POWER_ITERATIONS {
        let next = p.left_multiply(&pi);
        let total: f64 = next.iter().sum();
        let next: Vec<f64> = next.into_iter().map(|v| v / total).collect();
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if residual < STATIONARY_TOL {
            return Ok(Stationary { pi, iterations: it, residual });
        }
    }
    Err(OscError::NoConvergence { iterations: MAX_POWER_ITERATIONS, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicCheck {
    pub time_average: f64,
    pub stationary_expectation: f64,
    pub gap: f64,
}

/// Simulates `t_sim` steps from `initial` and compares the time average of
/// `f` with its stationary expectation.
pub fn ergodic_average_check(
    p: &StochasticMatrix,
    stationary: &[f64],
    f: impl Fn(usize) -> f64,
    t_sim: usize,
    initial: usize,
    rng: &mut RngStream,
) -> Result<ErgodicCheck> {
    if t_sim == 0 || initial >= p.n() {
        return Err(OscError::InvalidArgument("need t_sim ≥ 1 and a valid initial state".into()));
    }
    // Both averages are accumulated as offsets from f(initial) so that a
    // constant statistic yields identical values.
    let reference = f(initial);
    let mut state = initial;
    let mut total = 0.0;
    for _ in 0..t_sim {
        state = p.step(state, rng);
        total += f(state) - reference;
    }
    let time_average = reference + total / t_sim as f64;
    let stationary_expectation =
        reference + stationary.iter().enumerate().map(|(s, w)| w * (f(s) - reference)).sum::<f64>();
    Ok(ErgodicCheck { time_average, stationary_expectation, gap: (time_average - stationary_expectation).abs() })
}

/// Bounded statistics of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    EdgeCount,
    FirstLinkActive,
    MaxOutDegree,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::EdgeCount, Statistic::FirstLinkActive, Statistic::MaxOutDegree];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::EdgeCount => "edge_count",
            Statistic::FirstLinkActive => "link0_active",
            Statistic::MaxOutDegree => "max_out_degree",
        }
    }

    pub fn eval(self, spec: &TinyNetSpec, state: usize) -> f64 {
        match self {
            Statistic::EdgeCount => state.count_ones() as f64,
            Statistic::FirstLinkActive => f64::from(u8::from(TinyNetSpec::is_active(state, 0))),
            Statistic::MaxOutDegree => {
                let mut counts = std::collections::BTreeMap::new();
                for (l, link) in spec.links.iter().enumerate() {
                    if TinyNetSpec::is_active(state, l) {
                        *counts.entry(link.src()).or_insert(0u32) += 1;
                    }
                }
                f64::from(counts.values().copied().max().unwrap_or(0))
            }
        }
    }
}

/// Mean link-activation probability averaged over configurations under `pi`.
pub fn exact_survival(spec: &TinyNetSpec, pi: &[f64]) -> f64 {
    pi.iter().enumerate().map(|(s, w)| w * spec.mean_activation(s)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_link(u: f64) -> TinyNetSpec {
        TinyNetSpec::new(vec![Link::sd(0, 0)], vec![u], 0.0).unwrap()
    }

    #[test]
    fn one_link_zero_utility() {
        let p = build_transition_matrix(&one_link(0.0), &ErgodicityConfig { eta: 0.1, max_states: 16 }).unwrap();
        let d = p.to_dense();
        for row in &d {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d[0][1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1][0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn one_link_asymmetric() {
        let p = build_transition_matrix(&one_link(3f64.ln()), &ErgodicityConfig { eta: 0.1, max_states: 16 }).unwrap();
        let d = p.to_dense();
        assert_abs_diff_eq!(d[0][1], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(d[1][0], 0.3, epsilon = 1e-12);
        let s = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(s.pi[1], 0.7, epsilon = 1e-10);
    }

    #[test]
    fn hand_stationary() {
        let p = StochasticMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let s = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(s.pi[0], 2.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.pi[1], 1.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn identity_rejected() {
        let id: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let p = StochasticMatrix::from_dense(&id).unwrap();
        assert!(matches!(stationary_distribution(&p), Err(OscError::NotErgodic(_))));
    }

    #[test]
    fn doubly_stochastic_uniform() {
        let d = vec![
            vec![0.4, 0.3, 0.2, 0.1],
            vec![0.3, 0.4, 0.1, 0.2],
            vec![0.2, 0.1, 0.4, 0.3],
            vec![0.1, 0.2, 0.3, 0.4],
        ];
        let s = stationary_distribution(&StochasticMatrix::from_dense(&d).unwrap()).unwrap();
        for v in s.pi {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-10);
        }
    }

    #[test]
    fn state_cap_enforced() {
        let links: Vec<Link> = (0..13).map(|j| Link::sd(0, j)).collect();
        let spec = TinyNetSpec::new(links, vec![0.0; 13], 0.0).unwrap();
        assert!(matches!(
            build_transition_matrix(&spec, &ErgodicityConfig::default()),
            Err(OscError::StateSpaceTooLarge { .. })
        ));
        let spec = one_link(0.0);
        assert!(build_transition_matrix(&spec, &ErgodicityConfig { eta: 0.6, max_states: 16 }).is_err());
    }

    #[test]
    fn random_instances_ergodic() {
        let params = LologParams::new(2.0, 0.3, 0.15);
        let mut rng = RngStream::new(11);
        for (ns, nd) in [(1, 1), (2, 2), (2, 3), (3, 3), (2, 5)] {
            let spec = TinyNetSpec::random_sd(ns, nd, &params, 0.5, &mut rng).unwrap();
            let p = build_transition_matrix(&spec, &ErgodicityConfig { eta: 0.01, max_states: 4096 }).unwrap();
            assert!(p.max_row_error() < 1e-12);
            assert!(p.is_irreducible() && p.has_positive_diagonal());
            let s = stationary_distribution(&p).unwrap();
            assert!(s.residual < STATIONARY_TOL);
            let e = exact_survival(&spec, &s.pi);
            assert!(e > 0.0 && e < 1.0);
        }
    }

    #[test]
    fn constant_statistic_has_zero_gap() {
        let p = build_transition_matrix(&one_link(0.4), &ErgodicityConfig { eta: 0.05, max_states: 16 }).unwrap();
        let s = stationary_distribution(&p).unwrap();
        let c = ergodic_average_check(&p, &s.pi, |_| 2.5, 1000, 0, &mut RngStream::new(1)).unwrap();
        assert_eq!(c.gap, 0.0);
    }
}
