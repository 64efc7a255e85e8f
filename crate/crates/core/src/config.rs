//! Scenario configuration and validation.

use serde::{Deserialize, Serialize};

use crate::error::{OscError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub network: NetworkSection,
    pub pricing: PricingSection,
    pub economics: EconomicsSection,
    pub lolog: LologSection,
    pub trust: TrustSection,
    pub shocks: ShockSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub suppliers: usize,
    pub distributors: usize,
    pub consumers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSection {
    /// GBM drift per period.
    pub mu: f64,
    /// GBM volatility per sqrt-period.
    pub sigma: f64,
    pub initial_price_range: [f64; 2],
    pub perishable: bool,
    /// Quality retained per period by unsold perishable lots.
    pub gamma: f64,
    /// Amplitude of the bounded quality random walk (non-perishables).
    pub quality_noise: f64,
    pub initial_quality_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomicsSection {
    pub q_max_range: [u32; 2],
    pub rebate_delta_range: [f64; 2],
    /// Consumer inverse-demand intercept.
    pub demand_alpha: f64,
    /// Consumer inverse-demand slope.
    pub demand_beta: f64,
    /// Distributor resale price as a multiple of unit procurement cost.
    pub markup: f64,
    /// Relative risk aversion applied to volatile payoffs; the certainty
    /// equivalent factor is `exp(-risk_aversion * sigma^2 / 2)`.
    pub risk_aversion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LologSection {
    pub theta_p: f64,
    pub theta_t: f64,
    pub theta_q: f64,
    /// Profitability threshold: links with payoff <= epsilon dissolve.
    pub epsilon: f64,
    pub structural_quality_weight: f64,
    pub structural_degree_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrustRule {
    Smoothed,
    Bayes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustSection {
    pub baseline_trust: f64,
    pub agent_type_weights: [f64; 4],
    pub learning_rates_by_type: [f64; 4],
    /// Weight of counterparty quality in the transaction success probability;
    /// the remainder goes to the current belief.
    pub outcome_quality_weight: f64,
    pub update_rule: TrustRule,
    pub bayes_p_reliable: f64,
    pub bayes_p_unreliable: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSection {
    pub enabled: bool,
    pub probability: f64,
    /// Multiplier applied to every belief when a shock occurs.
    pub trust_decay: f64,
    pub price_spike_factor: f64,
    pub collapse_factor: f64,
    /// When false, the global decay applies only to trust collapses.
    pub decay_on_every_shock: bool,
}

/// Outcome of [`validate_config`]: empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(OscError::InvalidConfig(self.violations))
        }
    }

    fn check(&mut self, ok: bool, msg: &str) {
        if !ok {
            self.violations.push(msg.to_string());
        }
    }
}

fn in_open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

fn in_closed_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

pub fn validate_config(cfg: &ScenarioConfig) -> ValidationReport {
    let mut r = ValidationReport::default();
    let n = &cfg.network;
    r.check(n.suppliers >= 1, "suppliers must be ≥ 1");
    r.check(n.distributors >= 1, "distributors must be ≥ 1");
    r.check(n.consumers >= 1, "consumers must be ≥ 1");
    r.check(cfg.scenario.horizon >= 1, "horizon must be ≥ 1");
    r.check(i64::try_from(cfg.scenario.seed).is_ok(), "seed must fit in a signed 64-bit integer");

    let p = &cfg.pricing;
    r.check(p.mu.is_finite(), "mu must be finite");
    r.check(p.sigma.is_finite() && p.sigma >= 0.0, "sigma must be ≥ 0");
    let [plo, phi] = p.initial_price_range;
    r.check(
        plo > 0.0 && plo <= phi && phi.is_finite(),
        "initial_price_range must be a nonempty interval of positive prices",
    );
    r.check(p.gamma > 0.0 && p.gamma <= 1.0, "gamma must be in (0, 1]");
    r.check(p.quality_noise >= 0.0, "quality_noise must be ≥ 0");
    let [qlo, qhi] = p.initial_quality_range;
    r.check(qlo > 0.0 && qlo <= qhi && qhi <= 1.0, "initial_quality_range must lie in (0, 1]");

    let e = &cfg.economics;
    let [cap_lo, cap_hi] = e.q_max_range;
    r.check(cap_lo >= 1 && cap_lo <= cap_hi, "q_max_range must be a nonempty interval with lower bound ≥ 1");
    let [dlo, dhi] = e.rebate_delta_range;
    r.check(dlo >= 0.0 && dlo <= dhi, "rebate_delta_range must be a nonempty interval with nonnegative bounds");
    r.check(e.demand_alpha > 0.0, "demand_alpha must be > 0");
    r.check(e.demand_beta > 0.0, "demand_beta must be > 0");
    r.check(e.markup >= 1.0, "markup must be ≥ 1");
    r.check(e.risk_aversion >= 0.0, "risk_aversion must be ≥ 0");
    r.check(
        dhi * f64::from(cap_hi).sqrt() < plo,
        "rebate cannot drive effective cost negative: δ_max·√q_max must be < p_min",
    );

    let l = &cfg.lolog;
    r.check(
        l.theta_p.is_finite() && l.theta_t.is_finite() && l.theta_q.is_finite(),
        "LOLOG coefficients must be finite",
    );
    r.check(l.epsilon >= 0.0, "epsilon must be ≥ 0");
    r.check(l.structural_quality_weight >= 0.0 && l.structural_degree_weight >= 0.0, "structural weights must be ≥ 0");

    let t = &cfg.trust;
    r.check(in_open_unit(t.baseline_trust), "baseline_trust must be in (0, 1)");
    r.check(t.agent_type_weights.iter().all(|w| *w >= 0.0), "agent_type_weights must be nonnegative");
    r.check((t.agent_type_weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "weights must sum to 1");
    r.check(t.learning_rates_by_type.iter().all(|x| in_open_unit(*x)), "learning rates must be in (0, 1)");
    r.check(in_closed_unit(t.outcome_quality_weight), "outcome_quality_weight must be in [0, 1]");
    r.check(
        in_open_unit(t.bayes_p_reliable) && in_open_unit(t.bayes_p_unreliable),
        "Bayes likelihoods must be in (0, 1)",
    );

    let s = &cfg.shocks;
    r.check(in_closed_unit(s.probability), "shock probability must be in [0, 1]");
    r.check(s.trust_decay > 0.0 && s.trust_decay <= 1.0, "shock trust_decay must be in (0, 1]");
    r.check(s.price_spike_factor > 1.0, "price_spike_factor must be > 1");
    r.check(s.collapse_factor > 0.0 && s.collapse_factor <= 1.0, "collapse_factor must be in (0, 1]");
    r
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        validate_config(self).into_result()
    }

    /// Certainty-equivalent factor for payoffs exposed to market volatility.
    pub fn risk_factor(&self) -> f64 {
        (-0.5 * self.economics.risk_aversion * self.pricing.sigma.powi(2)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;

    #[test]
    fn presets_validate() {
        for p in Preset::ALL {
            let report = validate_config(&p.config());
            assert!(report.is_ok(), "{}: {:?}", p.name(), report.violations);
        }
    }

    #[test]
    fn negative_sigma_named() {
        let mut cfg = Preset::FastFashion.config();
        cfg.pricing.sigma = -0.1;
        let report = validate_config(&cfg);
        assert!(report.violations.iter().any(|v| v == "sigma must be ≥ 0"));
    }

    #[test]
    fn unnormalized_weights_named() {
        let mut cfg = Preset::FastFashion.config();
        cfg.trust.agent_type_weights = [0.5; 4];
        let report = validate_config(&cfg);
        assert!(report.violations.iter().any(|v| v == "weights must sum to 1"));
    }

    #[test]
    fn rebate_cross_check() {
        let mut cfg = Preset::FastFashion.config();
        cfg.economics.rebate_delta_range = [0.0, 10.0];
        assert!(!validate_config(&cfg).is_ok());
    }

    #[test]
    fn collects_multiple_violations() {
        let mut cfg = Preset::Electronics.config();
        cfg.pricing.sigma = -1.0;
        cfg.shocks.probability = 1.5;
        cfg.network.consumers = 0;
        assert_eq!(validate_config(&cfg).violations.len(), 3);
    }
}
