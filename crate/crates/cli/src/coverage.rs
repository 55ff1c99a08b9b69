//! Monte Carlo coverage of the pointwise band on synthetic data.
//!
//! Replicate `r` draws its sample from a generator seeded with `seed + r`, and
//! results are aggregated by replicate index, so the summary does not depend
//! on how rayon schedules the work.

use std::f64::consts::PI;

use qnpr_core::linreg::{confidence_band, fit_linear, ConfidenceBand, Dataset};
use qnpr_core::localpoly::{local_band, KernelFamily, KernelSpec, LocalPolyConfig};
use qnpr_core::{Backend, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::report::round12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `y = 1 + 2x + noise`, band from the global linear fit.
    Linear,
    /// `y = sin(2 pi x) + noise`, band from the local polynomial smoother.
    Local {
        degree: usize,
        kernel: KernelFamily,
        /// Normal-reference bandwidth when `None`.
        bandwidth: Option<f64>,
    },
}

impl Model {
    pub fn truth(&self, x: f64) -> f64 {
        match self {
            Model::Linear => 1.0 + 2.0 * x,
            Model::Local { .. } => (2.0 * PI * x).sin(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Linear => "linear",
            Model::Local { .. } => "local",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageConfig {
    pub replicates: usize,
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    /// Evenly spaced evaluation points on `[0.1, 0.9]`.
    pub grid_points: usize,
    pub seed: u64,
    pub backend: Backend,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub x: f64,
    pub truth: f64,
    pub covered: usize,
    pub coverage: f64,
    pub mean_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub model: String,
    pub replicates: usize,
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub seed: u64,
    /// Replicates whose fit failed (e.g. an empty kernel neighborhood).
    pub failed: usize,
    pub points: Vec<CoveragePoint>,
    /// Fraction of (replicate, grid point) pairs covered.
    pub overall: f64,
    /// Fraction of replicates covering every grid point at once.
    pub simultaneous: f64,
}

pub fn grid(count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5];
    }
    (0..count)
        .map(|k| 0.1 + 0.8 * k as f64 / (count - 1) as f64)
        .collect()
}

/// One synthetic sample: design points uniform on `[0, 1]`.
pub fn sample(model: &Model, n: usize, sigma: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let ys = xs
        .iter()
        .map(|&x| {
            let e: f64 = rng.sample(StandardNormal);
            model.truth(x) + sigma * e
        })
        .collect();
    (xs, ys)
}

fn replicate_band(
    cfg: &CoverageConfig,
    grid: &[f64],
    seed: u64,
) -> std::result::Result<ConfidenceBand, Error> {
    let (xs, ys) = sample(&cfg.model, cfg.n, cfg.sigma, seed);
    match cfg.model {
        Model::Linear => {
            let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
            let data = Dataset::new(&rows, ys)?.with_intercept();
            let fit = fit_linear(&data, cfg.backend, seed)?;
            let points: Vec<Vec<f64>> = grid.iter().map(|&x| vec![1.0, x]).collect();
            confidence_band(&data, &fit, &points, cfg.alpha, cfg.backend)
        }
        Model::Local {
            degree,
            kernel,
            bandwidth,
        } => {
            let spec = match bandwidth {
                Some(h) => KernelSpec::new(kernel, h)?,
                None => KernelSpec::normal_reference(kernel, &xs)?,
            };
            let local = LocalPolyConfig {
                degree,
                kernel: spec,
                backend: cfg.backend,
                seed,
            };
            local_band(&xs, &ys, grid, cfg.alpha, &local)
        }
    }
}

pub fn simulate(cfg: &CoverageConfig) -> Result<CoverageSummary> {
    if cfg.replicates == 0 {
        return usage("replicates must be at least 1");
    }
    if cfg.n < 3 {
        return usage("n must be at least 3");
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return usage(format!("alpha must lie in (0, 1), got {}", cfg.alpha));
    }
    if !(cfg.sigma.is_finite() && cfg.sigma > 0.0) {
        return usage(format!("sigma must be positive, got {}", cfg.sigma));
    }
    if cfg.grid_points == 0 {
        return usage("grid points must be at least 1");
    }

    let grid = grid(cfg.grid_points);
    let truth: Vec<f64> = grid.iter().map(|&x| cfg.model.truth(x)).collect();
    let outcomes: Vec<Option<(Vec<bool>, Vec<f64>)>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let band = replicate_band(cfg, &grid, cfg.seed.wrapping_add(r as u64)).ok()?;
            let hits = (0..grid.len())
                .map(|k| band.lower[k] <= truth[k] && truth[k] <= band.upper[k])
                .collect();
            let widths = (0..grid.len()).map(|k| band.half_width(k)).collect();
            Some((hits, widths))
        })
        .collect();

    let ok: Vec<&(Vec<bool>, Vec<f64>)> = outcomes.iter().flatten().collect();
    let failed = cfg.replicates - ok.len();
    let done = ok.len().max(1) as f64;
    let points: Vec<CoveragePoint> = (0..grid.len())
        .map(|k| {
            let covered = ok.iter().filter(|(h, _)| h[k]).count();
            let width: f64 = ok.iter().map(|(_, w)| w[k]).sum();
            CoveragePoint {
                x: round12(grid[k]),
                truth: round12(truth[k]),
                covered,
                coverage: round12(covered as f64 / done),
                mean_half_width: round12(width / done),
            }
        })
        .collect();
    let covered_pairs: usize = points.iter().map(|p| p.covered).sum();
    let all_covered = ok.iter().filter(|(h, _)| h.iter().all(|&b| b)).count();

    Ok(CoverageSummary {
        model: cfg.model.name().into(),
        replicates: cfg.replicates,
        n: cfg.n,
        alpha: round12(cfg.alpha),
        sigma: round12(cfg.sigma),
        seed: cfg.seed,
        failed,
        points,
        overall: round12(covered_pairs as f64 / (done * grid.len() as f64)),
        simultaneous: round12(all_covered as f64 / done),
    })
}
