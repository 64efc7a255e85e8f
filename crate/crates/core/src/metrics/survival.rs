//! Volatility-survival curve and critical threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::engine::run_simulation;
use crate::error::{OscError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub sigma: f64,
    pub s_raw: f64,
    pub stderr: f64,
    pub s_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub points: Vec<SurvivalPoint>,
}

/// Seeds per grid point: shared across sigma values, or shifted per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    Common,
    Independent,
}

/// Pool-adjacent-violators projection onto nonincreasing sequences.
pub fn pava_nonincreasing(values: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((m1 * w1 as f64 + m2 * w2 as f64) / (w1 + w2) as f64, w1 + w2));
        }
    }
    blocks.into_iter().flat_map(|(m, w)| std::iter::repeat_n(m, w)).collect()
}

impl SurvivalCurve {
    pub fn from_estimates(sigmas: &[f64], s_raw: &[f64], stderr: &[f64]) -> Result<Self> {
        if sigmas.len() != s_raw.len() || sigmas.len() != stderr.len() {
            return Err(OscError::InvalidArgument("grid and estimates differ in length".into()));
        }
        if sigmas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OscError::InvalidArgument("sigma grid must be strictly increasing".into()));
        }
        let fit = pava_nonincreasing(s_raw);
        let points = sigmas
            .iter()
            .zip(s_raw)
            .zip(stderr)
            .zip(fit)
            .map(|(((&sigma, &s_raw), &stderr), s_fit)| SurvivalPoint { sigma, s_raw, stderr, s_fit })
            .collect();
        Ok(Self { points })
    }

    pub fn fit_range(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => a.s_fit - b.s_fit,
            _ => 0.0,
        }
    }

    /// Midpoint of the fitted curve's range.
    pub fn midpoint(&self) -> Option<f64> {
        Some(0.5 * (self.points.first()?.s_fit + self.points.last()?.s_fit))
    }

    /// Largest amount by which a raw estimate exceeds an earlier one, in
    /// units of the pair's combined standard error.
    pub fn worst_raw_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                let rise = b.s_raw - a.s_raw;
                if rise > 0.0 {
                    let se = a.stderr.max(b.stderr);
                    worst = worst.max(if se > 0.0 { rise / se } else { f64::INFINITY });
                }
            }
        }
        worst
    }

    /// True when `s_star` is already above the fitted value at the first
    /// grid point, so the crossing sits at the origin of the grid.
    pub fn crossing_at_origin(&self, s_star: f64) -> bool {
        self.points.first().is_some_and(|p| p.s_fit < s_star)
    }
}

/// Smallest sigma at which the fitted curve drops below `s_star`, linearly
/// interpolated between the bracketing grid points.
pub fn estimate_sigma_c(curve: &SurvivalCurve, s_star: f64) -> Option<f64> {
    let pts = &curve.points;
    let i = pts.iter().position(|p| p.s_fit < s_star)?;
    if i == 0 {
        return Some(pts[0].sigma);
    }
    let (a, b) = (pts[i - 1], pts[i]);
    let frac = (a.s_fit - s_star) / (a.s_fit - b.s_fit);
    Some(a.sigma + frac * (b.sigma - a.sigma))
}

fn rep_seed(common_seed: u64, grid_index: usize, rep: usize, mode: SeedMode) -> u64 {
    let shift = match mode {
        SeedMode::Common => 0,
        SeedMode::Independent => (grid_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
    };
    common_seed.wrapping_add(rep as u64).wrapping_add(shift)
}

/// Mean MLSP at each sigma over `replications` runs. Replication `r` uses
/// seed `common_seed + r` at every grid point under [`SeedMode::Common`].
pub fn survival_curve(
    base: &ScenarioConfig,
    sigma_grid: &[f64],
    replications: usize,
    common_seed: u64,
    mode: SeedMode,
) -> Result<SurvivalCurve> {
    if replications == 0 || sigma_grid.is_empty() {
        return Err(OscError::InvalidArgument("need at least one grid point and one replication".into()));
    }
    let jobs: Vec<(usize, usize)> =
        (0..sigma_grid.len()).flat_map(|g| (0..replications).map(move |r| (g, r))).collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(g, r)| {
            let mut cfg = base.clone();
            cfg.pricing.sigma = sigma_grid[g];
            cfg.scenario.seed = rep_seed(common_seed, g, r, mode);
            run_simulation(&cfg)?.metrics.mean_mlsp()
        })
        .collect();
    let mut values = vec![Vec::with_capacity(replications); sigma_grid.len()];
    for (&(g, _), res) in jobs.iter().zip(results) {
        values[g].push(res?);
    }
    let (means, errs): (Vec<f64>, Vec<f64>) = values.iter().map(|v| mean_stderr(v)).unzip();
    SurvivalCurve::from_estimates(sigma_grid, &means, &errs)
}

/// Arithmetic mean and standard error of the mean.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
