//! CSV and JSON outputs.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{LinkRecord, SimulationResult, EVAL_ORDER};
use crate::error::{OscError, Result};
use crate::io::config::save_config;
use crate::metrics::{MetricsSeries, PeriodRecord, SurvivalCurve};
use crate::netdyn::ergodic::StochasticMatrix;
use crate::network::{AgentId, Echelon, Link};
use crate::rng::RNG_ALGORITHM;

/// Nine significant digits, printed in the shortest form that reads back
/// to the same rounded value.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn write_header(w: &mut impl Write, extra: &[(&str, String)]) -> Result<()> {
    writeln!(w, "# rng: {RNG_ALGORITHM}")?;
    writeln!(w, "# eval_order: {EVAL_ORDER}")?;
    for (k, v) in extra {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn write_metrics_csv(series: &MetricsSeries, w: impl Write) -> Result<()> {
    let mut w = w;
    write_header(&mut w, &[("horizon", series.horizon.to_string())])?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["period", "mlsp", "ncr", "n_edges", "n_nodes", "mean_trust", "mean_price", "shock_type"])?;
    for r in &series.records {
        csv.write_record([
            r.period.to_string(),
            fmt_num(r.mlsp),
            fmt_num(r.ncr),
            r.n_edges.to_string(),
            r.n_nodes.to_string(),
            fmt_num(r.mean_trust),
            fmt_num(r.mean_price),
            r.shock_type.clone(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn header_value(path: &Path, key: &str) -> Result<Option<String>> {
    let prefix = format!("# {key}: ");
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.starts_with('#') {
            break;
        }
        if let Some(v) = line.strip_prefix(&prefix) {
            return Ok(Some(v.to_string()));
        }
    }
    Ok(None)
}

fn comment_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?)
}

pub fn read_metrics_csv(path: &Path) -> Result<MetricsSeries> {
    let records: Vec<PeriodRecord> = comment_reader(path)?.deserialize().collect::<std::result::Result<_, _>>()?;
    let horizon = match header_value(path, "horizon")? {
        Some(h) => h.parse().map_err(|_| OscError::Parse(format!("bad horizon header `{h}`")))?,
        None => records.len(),
    };
    Ok(MetricsSeries { horizon, records })
}

pub fn write_edges_csv(links: &[Link], w: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["src_echelon", "src_idx", "dst_echelon", "dst_idx"])?;
    for l in links {
        csv.write_record([
            l.src().echelon.as_str(),
            &l.src().index.to_string(),
            l.dst().echelon.as_str(),
            &l.dst().index.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn parse_agent(echelon: &str, idx: &str) -> Result<AgentId> {
    let echelon = Echelon::parse(echelon).ok_or_else(|| OscError::Parse(format!("unknown echelon `{echelon}`")))?;
    let index = idx.parse().map_err(|_| OscError::Parse(format!("bad index `{idx}`")))?;
    Ok(AgentId { echelon, index })
}

pub fn read_edges_csv(path: &Path) -> Result<Vec<Link>> {
    let mut out = Vec::new();
    for rec in comment_reader(path)?.records() {
        let rec = rec?;
        out.push(Link::new(parse_agent(&rec[0], &rec[1])?, parse_agent(&rec[2], &rec[3])?)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LinkStateRow {
    src_echelon: String,
    src_idx: usize,
    dst_echelon: String,
    dst_idx: usize,
    active: u8,
    expected_profit: String,
    belief: String,
}

pub fn write_link_state_csv(links: &[LinkRecord], w: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in links {
        csv.serialize(LinkStateRow {
            src_echelon: r.link.src().echelon.as_str().into(),
            src_idx: r.link.src().index,
            dst_echelon: r.link.dst().echelon.as_str().into(),
            dst_idx: r.link.dst().index,
            active: u8::from(r.active),
            expected_profit: fmt_num(r.expected_profit),
            belief: fmt_num(r.belief),
        })?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_link_state_csv(path: &Path) -> Result<Vec<LinkRecord>> {
    let mut out = Vec::new();
    for row in comment_reader(path)?.deserialize() {
        let row: LinkStateRow = row?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| OscError::Parse(format!("bad number `{s}`")));
        out.push(LinkRecord {
            link: Link::new(
                parse_agent(&row.src_echelon, &row.src_idx.to_string())?,
                parse_agent(&row.dst_echelon, &row.dst_idx.to_string())?,
            )?,
            active: row.active == 1,
            expected_profit: num(&row.expected_profit)?,
            belief: num(&row.belief)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: String,
    pub seed: u64,
    pub mean_mlsp: f64,
    pub mean_ncr: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_star: Option<f64>,
    pub shock_count: usize,
}

impl RunSummary {
    pub fn from_result(r: &SimulationResult) -> Result<Self> {
        Ok(Self {
            preset: r.config.scenario.name.clone(),
            seed: r.config.scenario.seed,
            mean_mlsp: r.metrics.mean_mlsp()?,
            mean_ncr: r.metrics.mean_ncr()?,
            sigma_c: None,
            s_star: None,
            shock_count: r.shock_log.len(),
        })
    }
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes metrics.csv, edges.csv, link_state.csv, summary.json and
/// config.toml into `dir`.
pub fn write_run_outputs(result: &SimulationResult, dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(dir)?;
    write_metrics_csv(&result.metrics, File::create(dir.join("metrics.csv"))?)?;
    let edges: Vec<Link> = result.final_network.links().into_iter().collect();
    write_edges_csv(&edges, File::create(dir.join("edges.csv"))?)?;
    write_link_state_csv(&result.final_links, File::create(dir.join("link_state.csv"))?)?;
    let summary = RunSummary::from_result(result)?;
    write_json(&summary, &dir.join("summary.json"))?;
    save_config(&result.config, &dir.join("config.toml"))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub preset: String,
    pub seed: u64,
    pub replications: usize,
    pub s_star: f64,
    pub sigma_c: Option<f64>,
    pub crossing_at_origin: bool,
    pub fit_range: f64,
}

pub fn write_curve_csv(curve: &SurvivalCurve, w: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["sigma", "s_raw", "stderr", "s_fit"])?;
    for p in &curve.points {
        csv.write_record([fmt_num(p.sigma), fmt_num(p.s_raw), fmt_num(p.stderr), fmt_num(p.s_fit)])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_sweep_outputs(curve: &SurvivalCurve, summary: &SweepSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_curve_csv(curve, File::create(dir.join("curve.csv"))?)?;
    write_json(summary, &dir.join("summary.json"))
}

/// Dense transition matrix, one row per state.
pub fn write_matrix_csv(p: &StochasticMatrix, w: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut head = vec!["state".to_string()];
    head.extend((0..p.n()).map(|c| format!("to_{c}")));
    csv.write_record(&head)?;
    for (r, row) in p.to_dense().iter().enumerate() {
        let mut rec = vec![r.to_string()];
        rec.extend(row.iter().map(|v| fmt_num(*v)));
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_vector_csv(name: &str, v: &[f64], w: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["state", name])?;
    for (i, x) in v.iter().enumerate() {
        csv.write_record([i.to_string(), fmt_num(*x)])?;
    }
    csv.flush()?;
    Ok(())
}
