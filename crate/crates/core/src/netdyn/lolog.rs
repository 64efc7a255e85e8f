//! Logistic link utilities and per-link activation.

use crate::config::LologSection;
use crate::network::Link;
use crate::rng::RngStream;
use crate::trust::{clamp_belief, log_odds};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LologParams {
    pub theta_p: f64,
    pub theta_t: f64,
    pub theta_q: f64,
}

impl LologParams {
    pub fn new(theta_p: f64, theta_t: f64, theta_q: f64) -> Self {
        Self { theta_p, theta_t, theta_q }
    }
}

impl From<&LologSection> for LologParams {
    fn from(s: &LologSection) -> Self {
        Self::new(s.theta_p, s.theta_t, s.theta_q)
    }
}

/// Structural covariates of a candidate link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralStats {
    /// Counterparty quality.
    pub quality: f64,
    /// Counterparty in-degree over the size of its source layer, in `[0, 1]`.
    pub degree: f64,
}

impl StructuralStats {
    pub fn value(&self, quality_weight: f64, degree_weight: f64) -> f64 {
        quality_weight * self.quality + degree_weight * self.degree
    }
}

/// Components of a link utility before weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkUtility {
    pub psi: f64,
    pub trust_term: f64,
    pub structural: f64,
}

impl LinkUtility {
    pub fn new(psi: f64, trust: f64, structural: f64) -> Self {
        let trust_term = log_odds(clamp_belief(trust)).expect("clamped belief is interior");
        Self { psi, trust_term, structural }
    }

    pub fn total(&self, params: &LologParams) -> f64 {
        params.theta_p * scaled_psi(self.psi) + params.theta_t * self.trust_term + params.theta_q * self.structural
    }
}

/// Bounded profit scaling `ψ/(1 + |ψ|)`.
pub fn scaled_psi(psi: f64) -> f64 {
    if psi.is_infinite() {
        psi.signum()
    } else {
        psi / (1.0 + psi.abs())
    }
}

pub fn link_utility(psi: f64, trust: f64, structural: f64, params: &LologParams) -> f64 {
    LinkUtility::new(psi, trust, structural).total(params)
}

pub fn activation_probability(utility: f64) -> f64 {
    crate::trust::from_log_odds(utility)
}

/// Inputs for one candidate link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkInputs {
    pub psi: f64,
    pub trust: f64,
    pub structural: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDecision {
    pub link: Link,
    pub psi: f64,
    pub probability: f64,
    pub active: bool,
}

/// Evaluates candidates in order. One uniform is drawn per candidate whether
/// or not it is profitable, so the draw sequence depends only on the
/// candidate list. A link is active iff `ψ > ε` and `u < F(U)`.
pub fn evaluate_links(
    candidates: &[Link],
    mut inputs: impl FnMut(&Link) -> LinkInputs,
    params: &LologParams,
    epsilon: f64,
    rng: &mut RngStream,
) -> Vec<LinkDecision> {
    candidates
        .iter()
        .map(|link| {
            let u = rng.uniform();
            let x = inputs(link);
            let probability = activation_probability(link_utility(x.psi, x.trust, x.structural, params));
            LinkDecision { link: *link, psi: x.psi, probability, active: x.psi > epsilon && u < probability }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FF: LologParams = LologParams { theta_p: 2.0, theta_t: 0.3, theta_q: 0.15 };

    #[test]
    fn utility_hand_value() {
        // ψ = 1 gives ψ̃ = 0.5
        let u = link_utility(1.0, 0.55, 0.7, &FF);
        assert_abs_diff_eq!(u, 1.0 + 0.3 * (0.55f64 / 0.45).ln() + 0.105, epsilon = 1e-12);
        assert_abs_diff_eq!(u, 1.1652, epsilon = 1e-4);
        assert_abs_diff_eq!(activation_probability(u), 0.7623, epsilon = 1e-4);
    }

    #[test]
    fn null_and_saturated() {
        let zero = LologParams::new(0.0, 0.0, 0.0);
        assert_eq!(link_utility(5.0, 0.9, 3.0, &zero), 0.0);
        let sat = link_utility(f64::INFINITY, 0.55, 0.7, &FF);
        assert_abs_diff_eq!(sat, 2.0 + 0.3 * (0.55f64 / 0.45).ln() + 0.105, epsilon = 1e-12);
        assert_abs_diff_eq!(link_utility(1e12, 0.55, 0.7, &FF), sat, epsilon = 1e-9);
    }

    #[test]
    fn logistic_identities() {
        assert_eq!(activation_probability(0.0), 0.5);
        for u in [0.3, 2.0, 7.0] {
            assert_abs_diff_eq!(activation_probability(u) + activation_probability(-u), 1.0, epsilon = 1e-15);
        }
        let p = activation_probability(-800.0);
        assert!((0.0..1e-300).contains(&p));
    }

    #[test]
    fn threshold_blocks_activation() {
        let eps = 0.01;
        let mut rng = RngStream::new(1);
        let d = evaluate_links(
            &[Link::sd(0, 0)],
            |_| LinkInputs { psi: eps, trust: 0.99, structural: 50.0 },
            &FF,
            eps,
            &mut rng,
        );
        assert!(!d[0].active);
        let mut rng = RngStream::new(1);
        let d = evaluate_links(
            &[Link::sd(0, 0)],
            |_| LinkInputs { psi: 1.0, trust: 0.5, structural: 1e6 },
            &FF,
            eps,
            &mut rng,
        );
        assert!(d[0].active);
    }

    #[test]
    fn evaluation_deterministic() {
        let cands: Vec<Link> = (0..3).flat_map(|i| (0..4).map(move |j| Link::sd(i, j))).collect();
        let f = |l: &Link| LinkInputs {
            psi: l.src().index as f64 - 0.5,
            trust: 0.3 + 0.1 * l.dst().index as f64,
            structural: 0.5,
        };
        let a = evaluate_links(&cands, f, &FF, 0.01, &mut RngStream::new(5));
        let b = evaluate_links(&cands, f, &FF, 0.01, &mut RngStream::new(5));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn activation_monotone(psi in -20.0f64..20.0, trust in 0.01f64..0.98, s in -2.0f64..2.0, tp in 0.1f64..4.0, tt in 0.1f64..1.0) {
            let params = LologParams::new(tp, tt, 0.2);
            let base = activation_probability(link_utility(psi, trust, s, &params));
            prop_assert!(activation_probability(link_utility(psi + 0.01, trust, s, &params)) > base);
            prop_assert!(activation_probability(link_utility(psi, trust + 0.01, s, &params)) > base);
        }
    }
}
