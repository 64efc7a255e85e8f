//! Scenario files and run outputs.

pub mod config;
pub mod output;

pub use config::{apply_overrides, from_toml, load_config, save_config, to_toml};
pub use output::{
    fmt_num, read_edges_csv, read_link_state_csv, read_metrics_csv, write_curve_csv, write_matrix_csv,
    write_metrics_csv, write_run_outputs, write_sweep_outputs, write_vector_csv, RunSummary, SweepSummary,
};
