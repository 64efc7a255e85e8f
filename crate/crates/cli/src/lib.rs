//! Command-line front end for the supply-chain simulator.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use osc_core::io::config::load_config;
use osc_core::io::output::{
    fmt_num, read_edges_csv, read_link_state_csv, read_metrics_csv, write_edges_csv, write_matrix_csv,
    write_run_outputs, write_sweep_outputs, write_vector_csv, SweepSummary,
};
use osc_core::metrics::survival::{estimate_sigma_c, survival_curve, SeedMode};
use osc_core::metrics::{influence_report, temporal_averages};
use osc_core::netdyn::ergodic::{
    build_transition_matrix, ergodic_average_check, exact_survival, stationary_distribution, ErgodicityConfig,
    Statistic, TinyNetSpec,
};
use osc_core::netdyn::stability::find_stable_configuration;
use osc_core::netdyn::LologParams;
use osc_core::{run_simulation, Link, NetworkState, RngStream, ScenarioConfig, Simulation, TrustState};

#[derive(Debug, Parser)]
#[command(name = "oscsim", version, about = "Opportunistic supply-chain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write metrics, edges and a summary.
    Run(RunArgs),
    /// Survival curve over a volatility grid and the critical volatility.
    Sweep(SweepArgs),
    /// Improvement dynamics on the final snapshot of a run.
    Stability(StabilityArgs),
    /// Stationary analysis of a tiny supplier-distributor instance.
    Ergodicity(ErgodicityArgs),
    /// Recompute averages and influence ranking from a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Seeds {
    Common,
    Independent,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Preset name or path to a scenario file.
    #[arg(long, default_value = "fast_fashion")]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    shocks: Option<Switch>,
    /// Configuration override, e.g. `--set sigma=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("scenario.seed={seed}"));
        }
        if let Some(s) = self.shocks {
            overrides.push(format!("shocks.enabled={}", s == Switch::On));
        }
        load_config(&self.preset, &overrides).with_context(|| format!("loading scenario `{}`", self.preset))
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0.05)]
    sigma_min: f64,
    #[arg(long, default_value_t = 1.5)]
    sigma_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 15)]
    steps: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Survival level defining the threshold; defaults to the curve midpoint.
    #[arg(long)]
    s_star: Option<f64>,
    #[arg(long, value_enum, default_value = "common")]
    seed_mode: Seeds,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Write the stable edge list here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ErgodicityArgs {
    #[arg(long, default_value_t = 2)]
    suppliers: usize,
    #[arg(long, default_value_t = 2)]
    distributors: usize,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long, default_value_t = 100_000)]
    t_sim: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Preset supplying the link-utility coefficients.
    #[arg(long, default_value = "fast_fashion")]
    preset: String,
    /// Utility added per other active link of the same supplier, scaled by
    /// the number of candidate links.
    #[arg(long, default_value_t = 0.5)]
    degree_weight: f64,
    /// Write transition.csv and stationary.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

/// Parses `argv` (program name first) and runs the command. Returns 0 on
/// success, 2 on usage errors and 1 on runtime failures.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Stability(a) => stability(a),
        Command::Ergodicity(a) => ergodicity(a),
        Command::Report(a) => report(a),
    }
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = a.scenario.load()?;
    let result = run_simulation(&cfg)?;
    let summary = write_run_outputs(&result, &a.out).with_context(|| format!("writing to {}", a.out.display()))?;
    println!(
        "{} seed {}: mean MLSP {}, mean NCR {}, {} shocks",
        summary.preset,
        summary.seed,
        fmt_num(summary.mean_mlsp),
        fmt_num(summary.mean_ncr),
        summary.shock_count
    );
    println!("wrote {}", a.out.display());
    Ok(())
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || lo.is_nan() || hi.is_nan() || lo < 0.0 || hi < lo {
        bail!("need steps ≥ 1 and 0 ≤ sigma-min ≤ sigma-max");
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    if hi == lo {
        bail!("sigma-min and sigma-max coincide; use --steps 1");
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = a.scenario.load()?;
    let sigmas = grid(a.sigma_min, a.sigma_max, a.steps)?;
    let mode = match a.seed_mode {
        Seeds::Common => SeedMode::Common,
        Seeds::Independent => SeedMode::Independent,
    };
    let curve = survival_curve(&cfg, &sigmas, a.reps, cfg.scenario.seed, mode)?;
    let s_star = match a.s_star {
        Some(s) => s,
        None => curve.midpoint().context("empty curve")?,
    };
    let summary = SweepSummary {
        preset: cfg.scenario.name.clone(),
        seed: cfg.scenario.seed,
        replications: a.reps,
        s_star,
        sigma_c: estimate_sigma_c(&curve, s_star),
        crossing_at_origin: curve.crossing_at_origin(s_star),
        fit_range: curve.fit_range(),
    };
    println!("sigma,s_raw,stderr,s_fit");
    for p in &curve.points {
        println!("{},{},{},{}", fmt_num(p.sigma), fmt_num(p.s_raw), fmt_num(p.stderr), fmt_num(p.s_fit));
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(dir) = &a.out {
        write_sweep_outputs(&curve, &summary, dir).with_context(|| format!("writing to {}", dir.display()))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn stability(a: StabilityArgs) -> Result<()> {
    let cfg = a.scenario.load()?;
    let mut sim = Simulation::new(&cfg)?;
    sim.run_to_end()?;
    let start = sim.network().n_edges();
    let outcome = find_stable_configuration(sim.network(), sim.snapshot(), cfg.lolog.epsilon)?;
    let links: Vec<Link> = outcome.network.links().into_iter().collect();
    println!("stable after {} toggles: {} links (final simulated network had {start})", outcome.toggles, links.len());
    for l in &links {
        println!("{l}");
    }
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        write_edges_csv(&links, File::create(dir.join("stable_edges.csv"))?)?;
    }
    Ok(())
}

fn ergodicity(a: ErgodicityArgs) -> Result<()> {
    let cfg = load_config(&a.preset, &[])?;
    let params = LologParams::from(&cfg.lolog);
    let rng = RngStream::new(a.seed);
    let spec =
        TinyNetSpec::random_sd(a.suppliers, a.distributors, &params, a.degree_weight, &mut rng.child("instance"))?;
    let p = build_transition_matrix(&spec, &ErgodicityConfig { eta: a.eta, ..Default::default() })?;
    let st = stationary_distribution(&p)?;
    println!(
        "{} links, {} states, stationary after {} iterations (residual {})",
        spec.n_links(),
        p.n(),
        st.iterations,
        fmt_num(st.residual)
    );
    println!("state,pi");
    for (s, w) in st.pi.iter().enumerate() {
        println!("{s},{}", fmt_num(*w));
    }
    println!("statistic,time_average,stationary,gap");
    let mut sim_rng = rng.child("chain");
    for stat in Statistic::ALL {
        let check = ergodic_average_check(&p, &st.pi, |s| stat.eval(&spec, s), a.t_sim, 0, &mut sim_rng)?;
        println!(
            "{},{},{},{}",
            stat.name(),
            fmt_num(check.time_average),
            fmt_num(check.stationary_expectation),
            fmt_num(check.gap)
        );
    }
    println!("stationary survival {}", fmt_num(exact_survival(&spec, &st.pi)));
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        write_matrix_csv(&p, File::create(dir.join("transition.csv"))?)?;
        write_vector_csv("pi", &st.pi, File::create(dir.join("stationary.csv"))?)?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let dir = &a.input;
    let need = |name: &str| -> Result<PathBuf> {
        let p = dir.join(name);
        if !p.exists() {
            bail!("{} is missing; expected output of `run`", p.display());
        }
        Ok(p)
    };
    let cfg = load_config(path_str(&need("config.toml")?)?, &[])?;
    let series = read_metrics_csv(&need("metrics.csv")?)?;
    let (mlsp, ncr) = temporal_averages(&series)?;
    println!("periods {}: mean MLSP {}, mean NCR {}", series.records.len(), fmt_num(mlsp), fmt_num(ncr));

    let n = &cfg.network;
    let mut net = NetworkState::empty(n.suppliers, n.distributors, n.consumers);
    for link in read_edges_csv(&need("edges.csv")?)? {
        net.insert_link(link)?;
    }
    let mut trust = TrustState::new(
        n.suppliers,
        n.distributors,
        n.consumers,
        cfg.trust.baseline_trust,
        vec![cfg.trust.learning_rates_by_type[0]; n.distributors],
    );
    let mut profit = BTreeMap::new();
    for r in read_link_state_csv(&need("link_state.csv")?)? {
        let (s, d) = (r.link.src().index, r.link.dst().index);
        if r.link.is_sd() {
            trust.sd.set(s, d, r.belief)?;
        } else {
            trust.dc.set(s, d, r.belief)?;
        }
        profit.insert(r.link, r.expected_profit);
    }
    let oracle = |_: &NetworkState, l: Link| profit.get(&l).copied().unwrap_or(0.0);
    println!("rank,agent,influence");
    for (i, (agent, v)) in influence_report(&net, &trust, &oracle)?.iter().enumerate() {
        println!("{},{agent},{}", i + 1, fmt_num(*v));
    }
    Ok(())
}

fn path_str(p: &Path) -> Result<&str> {
    p.to_str().with_context(|| format!("path {} is not valid UTF-8", p.display()))
}
