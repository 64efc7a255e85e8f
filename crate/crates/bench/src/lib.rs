//! Shared fixtures for the benchmarks.

use osc_core::economics::{Contract, DemandParams, ProcurementProblem, RevenueTerm};
use osc_core::{Preset, ScenarioConfig};

/// A preset with shocks switched on.
pub fn shocked(preset: Preset) -> ScenarioConfig {
    let mut cfg = preset.config();
    cfg.shocks.enabled = true;
    cfg
}

/// A procurement problem of the size a distributor solves every period.
pub fn procurement_problem(consumers: usize) -> ProcurementProblem {
    let k = consumers as f64;
    let terms = (0..consumers)
        .map(|c| RevenueTerm {
            belief: 0.4 + 0.4 * c as f64 / k,
            demand: DemandParams { alpha: 3.0 / k, beta: 1.0 / (k * k) },
        })
        .collect();
    ProcurementProblem::new(terms, Contract::new(1.0, 12, 0.9, 0.05).expect("valid contract")).expect("valid problem")
}
