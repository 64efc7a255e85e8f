//! Link dynamics: logistic activation, improvement dynamics, the exact
//! tiny-network chain and node influence.

pub mod ergodic;
pub mod influence;
pub mod lolog;
pub mod stability;

pub use ergodic::{
    build_transition_matrix, ergodic_average_check, exact_survival, stationary_distribution, ErgodicCheck,
    ErgodicityConfig, Stationary, Statistic, StochasticMatrix, TinyNetSpec,
};
pub use influence::{influence_index, link_belief, mean_activation, perturb_downstream_beliefs};
pub use lolog::{
    activation_probability, evaluate_links, link_utility, scaled_psi, LinkDecision, LinkInputs, LinkUtility,
    LologParams, StructuralStats,
};
pub use stability::{find_stable_configuration, is_stable, toggle_gain, CongestionOracle, ProfitOracle, StableOutcome};
