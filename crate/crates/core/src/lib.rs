//! Agent-based simulator of opportunistic supply chains: GBM supplier
//! prices, adaptive trust, logistic link dynamics, shocks and resilience
//! metrics, plus analysis tools for stability, survival thresholds and
//! ergodicity on small instances.

pub mod config;
pub mod economics;
pub mod engine;
pub mod error;
pub mod io;
pub mod metrics;
pub mod netdyn;
pub mod network;
pub mod presets;
pub mod pricing;
pub mod rng;
pub mod shocks;
pub mod trust;

pub use config::{validate_config, ScenarioConfig, TrustRule, ValidationReport};
pub use economics::{Contract, DemandParams, DownstreamLink, ProcurementProblem, RevenueTerm};
pub use engine::{build_initial_network, run_replications, run_simulation, Simulation, SimulationResult};
pub use error::{OscError, Result};
pub use metrics::{MetricsSeries, PeriodRecord, SurvivalCurve};
pub use network::{AgentId, Echelon, Link, NetworkState};
pub use presets::Preset;
pub use pricing::{PriceState, QualityState};
pub use rng::RngStream;
pub use shocks::{ShockEvent, ShockKind};
pub use trust::TrustState;
