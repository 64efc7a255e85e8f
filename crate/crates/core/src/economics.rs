//! Contracts, linear demand, expected distributor profit and the procurement
//! optimizer.
//!
//! Resale prices are deterministic given quantity; a stochastic resale price
//! would enter through [`DownstreamLink::demand`].

use crate::error::{OscError, Result};

/// Supplier offer for one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    pub unit_price: f64,
    pub q_max: u32,
    pub phi: f64,
    pub rebate_delta: f64,
}

impl Contract {
    pub fn new(unit_price: f64, q_max: u32, phi: f64, rebate_delta: f64) -> Result<Self> {
        if !(unit_price > 0.0 && unit_price.is_finite()) {
            return Err(OscError::InvalidArgument(format!("unit price {unit_price} must be > 0")));
        }
        if q_max < 1 {
            return Err(OscError::InvalidArgument("q_max must be ≥ 1".into()));
        }
        if !(phi > 0.0 && phi <= 1.0) {
            return Err(OscError::InvalidArgument(format!("quality {phi} must be in (0, 1]")));
        }
        if rebate_delta < 0.0 {
            return Err(OscError::InvalidArgument("rebate coefficient must be ≥ 0".into()));
        }
        if rebate_delta * f64::from(q_max).sqrt() >= unit_price {
            return Err(OscError::InvalidArgument(format!(
                "rebate δ={rebate_delta} drives effective cost non-positive at q_max={q_max}, price={unit_price}"
            )));
        }
        Ok(Self { unit_price, q_max, phi, rebate_delta })
    }

    pub fn capacity(&self) -> f64 {
        f64::from(self.q_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandParams {
    pub alpha: f64,
    pub beta: f64,
}

impl DemandParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(OscError::InvalidArgument(format!(
                "demand needs alpha > 0 and beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Inverse demand `α − βq`.
    pub fn price_at(&self, q: f64) -> f64 {
        self.alpha - self.beta * q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownstreamLink {
    pub belief: f64,
    pub demand: DemandParams,
    pub quantity: f64,
}

/// Volume rebate `δ·√q`.
pub fn rebate(delta: f64, q: f64) -> Result<f64> {
    if delta < 0.0 || q < 0.0 {
        return Err(OscError::InvalidArgument(format!("rebate needs nonnegative inputs, got δ={delta}, q={q}")));
    }
    Ok(delta * q.sqrt())
}

/// Unit cost after rebate, `p − δ√q`.
pub fn effective_cost(contract: &Contract, q: f64) -> Result<f64> {
    check_capacity(contract, q)?;
    Ok(contract.unit_price - rebate(contract.rebate_delta, q)?)
}

fn check_capacity(contract: &Contract, q: f64) -> Result<()> {
    if q < 0.0 || !q.is_finite() {
        return Err(OscError::InvalidArgument(format!("quantity {q} must be ≥ 0")));
    }
    if q > contract.capacity() {
        return Err(OscError::CapacityExceeded { q, q_max: contract.capacity() });
    }
    Ok(())
}

/// Utility-maximizing purchase `(α − p)/β`, clamped at zero above the choke price.
pub fn demand_quantity(d: &DemandParams, price: f64) -> f64 {
    ((d.alpha - price) / d.beta).max(0.0)
}

/// Area under the inverse demand curve up to `q`.
pub fn willingness_to_pay(d: &DemandParams, q: f64) -> f64 {
    d.alpha * q - 0.5 * d.beta * q * q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumerChoice {
    pub q_star: f64,
    pub utility: f64,
}

/// Consumer surplus buying from a distributor that charges `price` and
/// offers a `δ√q` rebate: `(α − p)q* − (β/2)q*² + δ√q*·q*`.
pub fn consumer_utility(d: &DemandParams, price: f64, rebate_delta: f64) -> ConsumerChoice {
    let q = demand_quantity(d, price);
    let utility = (d.alpha - price) * q - 0.5 * d.beta * q * q + rebate_delta * q.sqrt() * q;
    ConsumerChoice { q_star: q, utility }
}

/// Belief-weighted resale revenue minus rebated procurement cost.
pub fn expected_profit(contract: &Contract, q_procured: f64, downstream: &[DownstreamLink]) -> Result<f64> {
    let cost = effective_cost(contract, q_procured)?;
    let mut revenue = 0.0;
    for link in downstream {
        if !(link.belief > 0.0 && link.belief < 1.0) {
            return Err(OscError::InvalidArgument(format!("belief {} must be strictly inside (0, 1)", link.belief)));
        }
        if link.quantity < 0.0 {
            return Err(OscError::InvalidArgument("downstream quantity must be ≥ 0".into()));
        }
        revenue += link.belief * link.demand.price_at(link.quantity) * link.quantity;
    }
    Ok(revenue - cost * q_procured)
}

/// One `B_k · P_k(q) · q` term of the procurement objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueTerm {
    pub belief: f64,
    pub demand: DemandParams,
}

/// `max_{q ∈ [0, q_max]} Σ_k B_k (α_k − β_k q) q − (p − δ√q) q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcurementProblem {
    pub terms: Vec<RevenueTerm>,
    pub contract: Contract,
    // Σ B α and Σ B β, so evaluation is O(1).
    lin: f64,
    quad: f64,
}

impl ProcurementProblem {
    pub fn new(terms: Vec<RevenueTerm>, contract: Contract) -> Result<Self> {
        let mut lin = 0.0;
        let mut quad = 0.0;
        for t in &terms {
            if !(0.0..=1.0).contains(&t.belief) {
                return Err(OscError::InvalidArgument(format!("belief {} outside [0, 1]", t.belief)));
            }
            lin += t.belief * t.demand.alpha;
            quad += t.belief * t.demand.beta;
        }
        Ok(Self { terms, contract, lin, quad })
    }

    pub fn q_max(&self) -> f64 {
        self.contract.capacity()
    }

    pub fn revenue(&self, q: f64) -> f64 {
        self.lin * q - self.quad * q * q
    }

    pub fn marginal_revenue(&self, q: f64) -> f64 {
        self.lin - 2.0 * self.quad * q
    }

    /// `d/dq [c(q)·q] = c(q) + c'(q)·q = p − 1.5·δ·√q`.
    pub fn marginal_cost(&self, q: f64) -> f64 {
        self.contract.unit_price - 1.5 * self.contract.rebate_delta * q.sqrt()
    }

    pub fn objective(&self, q: f64) -> f64 {
        let c = self.contract.unit_price - self.contract.rebate_delta * q.sqrt();
        self.revenue(q) - c * q
    }

    pub fn derivative(&self, q: f64) -> f64 {
        self.marginal_revenue(q) - self.marginal_cost(q)
    }

    /// Three-point second differences at ten interior points.
    pub fn concavity_probe(&self) -> Result<()> {
        let q_max = self.q_max();
        let h = q_max / 20.0;
        let scale = 1.0 + self.lin.abs() * q_max + self.contract.unit_price * q_max;
        for i in 0..10 {
            let q = (i as f64 + 0.5) * q_max / 10.0;
            let d2 = self.objective(q + h) - 2.0 * self.objective(q) + self.objective(q - h);
            if d2 > 1e-12 * scale {
                return Err(OscError::NonConcave { q_max, at: q, second_diff: d2 });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcurementSolution {
    pub q_star: f64,
    pub objective: f64,
    /// Marginal revenue minus marginal cost at `q_star`.
    pub foc_residual: f64,
    pub boundary: Option<Boundary>,
}

const SOLVER_TOL: f64 = 1e-6;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Root of a decreasing function on `[lo, hi]` with `g(lo) > 0 > g(hi)`.
fn bisect_decreasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 || hi - lo < 1e-13 {
            return mid;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn solution(problem: &ProcurementProblem, q: f64) -> ProcurementSolution {
    let q_max = problem.q_max();
    let boundary = if q <= 0.0 {
        Some(Boundary::Lower)
    } else if q >= q_max {
        Some(Boundary::Upper)
    } else {
        None
    };
    ProcurementSolution { q_star: q, objective: problem.objective(q), foc_residual: problem.derivative(q), boundary }
}

/// Unique maximizer of a concave procurement problem.
///
/// Golden-section search brackets the optimum; an interior result is then
/// polished by bisection on the sign of the closed-form derivative so the
/// first-order condition holds to solver precision. Boundary optima are
/// confirmed by the one-sided derivative sign. Instances that fail the
/// concavity probe are rejected.
pub fn optimal_procurement(problem: &ProcurementProblem) -> Result<ProcurementSolution> {
    problem.concavity_probe()?;
    let q_max = problem.q_max();
    let q_gs = golden_section_max(|q| problem.objective(q), 0.0, q_max, SOLVER_TOL);

    let q = if q_gs < SOLVER_TOL && problem.derivative(0.0) <= 0.0 {
        0.0
    } else if q_gs > q_max - SOLVER_TOL && problem.derivative(q_max) >= 0.0 {
        q_max
    } else {
        let lo = (q_gs - 4.0 * SOLVER_TOL).max(0.0);
        let hi = (q_gs + 4.0 * SOLVER_TOL).min(q_max);
        if problem.derivative(lo) > 0.0 && problem.derivative(hi) < 0.0 {
            bisect_decreasing(|q| problem.derivative(q), lo, hi)
        } else {
            q_gs
        }
    };
    // Endpoint guard for rebate curvature that the probe cannot see.
    let best = [q, 0.0, q_max]
        .into_iter()
        .fold(q, |acc, c| if problem.objective(c) > problem.objective(acc) { c } else { acc });
    Ok(solution(problem, best))
}

/// Maximizer for any problem with a nonnegative rebate coefficient.
///
/// With `δ√q` rebates the objective is convex near zero, but its derivative
/// `a − p − 2bq + 1.5δ√q` is concave, so the maximizer is either `0` or the
/// right-most root of the derivative (or `q_max`). Concave problems go
/// through [`optimal_procurement`].
pub fn best_response(problem: &ProcurementProblem) -> ProcurementSolution {
    if let Ok(sol) = optimal_procurement(problem) {
        return sol;
    }
    let q_max = problem.q_max();
    let candidate = if problem.derivative(q_max) >= 0.0 {
        q_max
    } else {
        let peak = golden_section_max(|q| problem.derivative(q), 0.0, q_max, 1e-9);
        if problem.derivative(peak) <= 0.0 {
            0.0
        } else {
            bisect_decreasing(|q| problem.derivative(q), peak, q_max)
        }
    };
    let q = if problem.objective(candidate) > problem.objective(0.0) { candidate } else { 0.0 };
    solution(problem, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid_argmax(problem: &ProcurementProblem, step: f64) -> f64 {
        let n = (problem.q_max() / step).round() as usize;
        (0..=n)
            .map(|i| (i as f64 * step).min(problem.q_max()))
            .fold((0.0, f64::NEG_INFINITY), |(bq, bv), q| {
                let v = problem.objective(q);
                if v > bv {
                    (q, v)
                } else {
                    (bq, bv)
                }
            })
            .0
    }

    fn single(belief: f64, alpha: f64, beta: f64, price: f64, delta: f64, q_max: u32) -> ProcurementProblem {
        ProcurementProblem::new(
            vec![RevenueTerm { belief, demand: DemandParams::new(alpha, beta).unwrap() }],
            Contract::new(price, q_max, 1.0, delta).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rebate_values() {
        assert_eq!(rebate(1.0, 4.0).unwrap(), 2.0);
        assert_eq!(rebate(0.0, 100.0).unwrap(), 0.0);
        assert_eq!(rebate(2.0, 9.0).unwrap(), 6.0);
        assert!(rebate(-1.0, 1.0).is_err());
        assert!(rebate(1.0, -1.0).is_err());
    }

    #[test]
    fn effective_cost_values() {
        let c = Contract::new(10.0, 16, 1.0, 1.0).unwrap();
        assert_eq!(effective_cost(&c, 4.0).unwrap(), 8.0);
        assert_eq!(effective_cost(&c, 0.0).unwrap(), 10.0);
        let c0 = Contract::new(10.0, 16, 1.0, 0.0).unwrap();
        assert_eq!(effective_cost(&c0, 4.0).unwrap(), 10.0);
        assert!(matches!(effective_cost(&c, 17.0), Err(OscError::CapacityExceeded { .. })));
    }

    #[test]
    fn contract_invariant() {
        assert!(Contract::new(2.0, 4, 1.0, 1.0).is_err()); // 1·2 = 2, not < 2
        assert!(Contract::new(2.0, 4, 1.0, 0.99).is_ok());
    }

    #[test]
    fn demand_values() {
        let d = DemandParams::new(10.0, 2.0).unwrap();
        assert_eq!(demand_quantity(&d, 4.0), 3.0);
        assert_eq!(demand_quantity(&d, 10.0), 0.0);
        assert_eq!(demand_quantity(&d, 12.0), 0.0);
    }

    #[test]
    fn wtp_values() {
        let d = DemandParams::new(10.0, 2.0).unwrap();
        assert_eq!(willingness_to_pay(&d, 3.0), 21.0);
        assert_eq!(willingness_to_pay(&d, 0.0), 0.0);
        assert_eq!(willingness_to_pay(&DemandParams::new(1.0, 1.0).unwrap(), 1.0), 0.5);
    }

    #[test]
    fn consumer_utility_values() {
        let d = DemandParams::new(10.0, 2.0).unwrap();
        let c = consumer_utility(&d, 4.0, 0.0);
        assert_eq!((c.q_star, c.utility), (3.0, 9.0));
        let c = consumer_utility(&d, 4.0, 1.0);
        assert_eq!(c.q_star, 3.0);
        assert_abs_diff_eq!(c.utility, 9.0 + 3.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.utility, 14.196, epsilon = 1e-3);
        let c = consumer_utility(&d, 10.0, 1.0);
        assert_eq!((c.q_star, c.utility), (0.0, 0.0));
    }

    #[test]
    fn surplus_is_wtp_minus_expenditure() {
        let d = DemandParams::new(7.5, 0.8).unwrap();
        for p in [0.5, 2.0, 4.0, 7.0] {
            let c = consumer_utility(&d, p, 0.0);
            let direct = willingness_to_pay(&d, c.q_star) - p * c.q_star;
            assert_abs_diff_eq!(c.utility, direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn expected_profit_values() {
        let link = DownstreamLink { belief: 0.5, demand: DemandParams::new(8.0, 4.0 / 3.0).unwrap(), quantity: 3.0 };
        let c = Contract::new(2.0, 4, 1.0, 0.99).unwrap();
        // δ = 0.99 keeps the contract valid; cost (2 − 0.99·2)·4 = 0.08
        let p = expected_profit(&c, 4.0, &[link]).unwrap();
        assert_abs_diff_eq!(p, 6.0 - 0.08, epsilon = 1e-12);
        // the boundary case δ = 1 (cost exactly zero) evaluated through the formula
        let revenue = link.belief * link.demand.price_at(3.0) * 3.0;
        assert_abs_diff_eq!(revenue - (2.0 - 1.0 * 2.0) * 4.0, 6.0, epsilon = 1e-12);

        let c = Contract::new(3.0, 10, 1.0, 0.0).unwrap();
        assert_eq!(expected_profit(&c, 0.0, &[]).unwrap(), 0.0);
        assert!(expected_profit(&c, 11.0, &[]).is_err());
    }

    #[test]
    fn closed_form_optima() {
        let s = optimal_procurement(&single(1.0, 10.0, 1.0, 2.0, 0.0, 10)).unwrap();
        assert_abs_diff_eq!(s.q_star, 4.0, epsilon = 1e-6);
        assert!(s.boundary.is_none() && s.foc_residual.abs() < 1e-6);

        let s = optimal_procurement(&single(1.0, 10.0, 1.0, 4.0, 0.0, 10)).unwrap();
        assert_abs_diff_eq!(s.q_star, 3.0, epsilon = 1e-6);

        let s = optimal_procurement(&single(1.0, 10.0, 1.0, 2.0, 0.0, 2)).unwrap();
        assert_eq!(s.q_star, 2.0);
        assert_eq!(s.boundary, Some(Boundary::Upper));
        assert!(s.foc_residual > 0.0);
    }

    #[test]
    fn unprofitable_stays_at_zero() {
        let s = optimal_procurement(&single(0.5, 4.0, 1.0, 3.0, 0.0, 10)).unwrap();
        assert_eq!(s.q_star, 0.0);
        assert_eq!(s.boundary, Some(Boundary::Lower));
        assert!(s.foc_residual <= 0.0);
    }

    #[test]
    fn large_rebate_rejected_as_non_concave() {
        // weak demand curvature, strong rebate convexity
        let p = single(0.2, 5.0, 0.001, 4.0, 1.0, 15);
        assert!(matches!(optimal_procurement(&p), Err(OscError::NonConcave { .. })));
        let s = best_response(&p);
        let g = grid_argmax(&p, 1e-4);
        assert!((p.objective(s.q_star) - p.objective(g)).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn best_response_matches_grid(
            belief in 0.05f64..0.95, alpha in 1.0f64..20.0, beta in 0.01f64..3.0,
            price in 0.5f64..15.0, delta_frac in 0.0f64..0.9, q_max in 1u32..20,
        ) {
            let delta = delta_frac * price / f64::from(q_max).sqrt();
            let p = single(belief, alpha, beta, price, delta, q_max);
            let s = best_response(&p);
            let g = grid_argmax(&p, 1e-3);
            prop_assert!(p.objective(s.q_star) >= p.objective(g) - 1e-6);
        }
    }
}
