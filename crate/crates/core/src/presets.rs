//! Industry presets.
//!
//! Volatility, drift, baseline trust, agent-type mix, LOLOG coefficients and
//! perishability follow the industry calibration table; network size,
//! horizon, shock probability/decay and capacity range are shared globals.
//! The remaining economic scales are model defaults, identical across presets.

use std::fmt;
use std::str::FromStr;

use crate::config::*;
use crate::error::OscError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    FastFashion,
    Electronics,
    Perishables,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::FastFashion, Preset::Electronics, Preset::Perishables];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FastFashion => "fast_fashion",
            Preset::Electronics => "electronics",
            Preset::Perishables => "perishables",
        }
    }

    pub fn config(self) -> ScenarioConfig {
        let mut cfg = base(self.name());
        let (sigma, mu, trust, weights, theta, perishable) = match self {
            Preset::FastFashion => (0.30, 0.02, 0.55, [0.50, 0.20, 0.10, 0.20], (2.0, 0.3, 0.15), false),
            Preset::Electronics => (0.70, 0.05, 0.35, [0.60, 0.10, 0.05, 0.25], (3.5, 0.1, 0.40), false),
            Preset::Perishables => (0.40, 0.01, 0.75, [0.40, 0.25, 0.25, 0.10], (2.5, 0.4, 0.80), true),
        };
        cfg.pricing.sigma = sigma;
        cfg.pricing.mu = mu;
        cfg.pricing.perishable = perishable;
        cfg.trust.baseline_trust = trust;
        cfg.trust.agent_type_weights = weights;
        cfg.lolog.theta_p = theta.0;
        cfg.lolog.theta_t = theta.1;
        cfg.lolog.theta_q = theta.2;
        cfg
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = OscError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            OscError::InvalidArgument(format!("unknown preset `{s}`; available presets: {}", names.join(", ")))
        })
    }
}

fn base(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        scenario: ScenarioSection { name: name.to_string(), horizon: 100, seed: 42 },
        network: NetworkSection { suppliers: 5, distributors: 8, consumers: 14 },
        pricing: PricingSection {
            mu: 0.0,
            sigma: 0.0,
            initial_price_range: [0.8, 1.2],
            perishable: false,
            gamma: 0.90,
            quality_noise: 0.02,
            initial_quality_range: [0.6, 1.0],
        },
        economics: EconomicsSection {
            q_max_range: [8, 15],
            rebate_delta_range: [0.0, 0.05],
            demand_alpha: 3.0,
            demand_beta: 1.0,
            markup: 1.25,
            risk_aversion: 2.0,
        },
        lolog: LologSection {
            theta_p: 0.0,
            theta_t: 0.0,
            theta_q: 0.0,
            epsilon: 0.01,
            structural_quality_weight: 1.0,
            structural_degree_weight: 0.0,
        },
        trust: TrustSection {
            baseline_trust: 0.5,
            agent_type_weights: [0.25; 4],
            learning_rates_by_type: [0.10, 0.20, 0.30, 0.40],
            outcome_quality_weight: 0.5,
            update_rule: TrustRule::Smoothed,
            bayes_p_reliable: 0.8,
            bayes_p_unreliable: 0.2,
        },
        shocks: ShockSection {
            enabled: false,
            probability: 0.2,
            trust_decay: 0.85,
            price_spike_factor: 1.4,
            collapse_factor: 0.3,
            decay_on_every_shock: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let ff = Preset::FastFashion.config();
        assert_eq!((ff.pricing.sigma, ff.pricing.mu, ff.trust.baseline_trust), (0.30, 0.02, 0.55));
        assert_eq!((ff.lolog.theta_p, ff.lolog.theta_t, ff.lolog.theta_q), (2.0, 0.3, 0.15));
        assert!(!ff.pricing.perishable);

        let el = Preset::Electronics.config();
        assert_eq!((el.pricing.sigma, el.pricing.mu, el.trust.baseline_trust), (0.70, 0.05, 0.35));
        assert_eq!((el.lolog.theta_p, el.lolog.theta_t, el.lolog.theta_q), (3.5, 0.1, 0.40));
        assert_eq!(el.trust.agent_type_weights, [0.60, 0.10, 0.05, 0.25]);

        let pe = Preset::Perishables.config();
        assert_eq!((pe.pricing.sigma, pe.pricing.mu, pe.trust.baseline_trust), (0.40, 0.01, 0.75));
        assert_eq!((pe.lolog.theta_p, pe.lolog.theta_t, pe.lolog.theta_q), (2.5, 0.4, 0.80));
        assert!(pe.pricing.perishable);
        assert_eq!(pe.pricing.gamma, 0.90);

        for p in Preset::ALL {
            let c = p.config();
            assert_eq!((c.network.suppliers, c.network.distributors, c.network.consumers), (5, 8, 14));
            assert_eq!(c.scenario.horizon, 100);
            assert_eq!(c.shocks.probability, 0.2);
            assert_eq!(c.shocks.trust_decay, 0.85);
            assert_eq!(c.economics.q_max_range, [8, 15]);
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = "retail".parse::<Preset>().unwrap_err().to_string();
        assert!(err.contains("fast_fashion") && err.contains("perishables"));
    }
}
