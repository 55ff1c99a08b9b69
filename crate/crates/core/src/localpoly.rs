//! Local polynomial kernel regression in one predictor.
//!
//! At each evaluation point `x` a degree-`p` polynomial in `(u - x)` is fit by
//! weighted least squares, `(X_x^T W_x X_x) a = X_x^T W_x Y`, and the estimate
//! is the intercept `a_0(x)`. The design uses the scaled Taylor basis
//! `(x_i - x)^j / j!`, and `W_x` holds one kernel weight per observation.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linreg::{band_constant, ConfidenceBand};
use crate::qgje::{
    pseudoinverse_with, rational_to_f64, rref, weighted_cross, weighted_gram, Backend,
    BackendStats, Matrix, Rational,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KernelFamily {
    #[default]
    Gaussian,
    Epanechnikov,
    Boxcar,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Boxcar => "boxcar",
        }
    }

    /// Kernel value at the scaled distance `u`.
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => (-0.5 * u * u).exp(),
            KernelFamily::Epanechnikov => (0.75 * (1.0 - u * u)).max(0.0),
            KernelFamily::Boxcar => {
                if u.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            "boxcar" | "uniform" => Ok(KernelFamily::Boxcar),
            other => invalid(format!("unknown kernel {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return invalid(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            ));
        }
        Ok(Self { family, bandwidth })
    }

    /// Normal-reference bandwidth `1.06 * sd(xs) * n^(-1/5)`.
    pub fn normal_reference(family: KernelFamily, xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return invalid("normal-reference bandwidth needs at least two observations");
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self::new(family, 1.06 * var.sqrt() * (n as f64).powf(-0.2))
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

pub fn kernel_weight(spec: &KernelSpec, distance: f64) -> f64 {
    spec.family.eval(distance / spec.bandwidth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDesign {
    pub center: f64,
    pub degree: usize,
    /// n x (degree + 1), row-major; entry (i, j) is `(x_i - center)^j / j!`.
    pub design: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LocalDesign {
    pub fn width(&self) -> usize {
        self.degree + 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.design[i * w..(i + 1) * w]
    }
}

pub fn local_design(xs: &[f64], x: f64, degree: usize, spec: &KernelSpec) -> Result<LocalDesign> {
    if xs.is_empty() {
        return invalid("local design needs at least one observation");
    }
    let width = degree + 1;
    let mut design = Vec::with_capacity(xs.len() * width);
    let mut weights = Vec::with_capacity(xs.len());
    for &xi in xs {
        let d = xi - x;
        let mut term = 1.0;
        design.push(term);
        for j in 1..=degree {
            term *= d / j as f64;
            design.push(term);
        }
        weights.push(kernel_weight(spec, d.abs()));
    }
    Ok(LocalDesign {
        center: x,
        degree,
        design,
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPolyConfig {
    pub degree: usize,
    pub kernel: KernelSpec,
    pub backend: Backend,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub a_hat: Vec<f64>,
    pub r_hat: f64,
    /// Smoother weights: `r_hat = sum_i ell[i] * y[i]`.
    pub ell: Vec<f64>,
    pub used_pseudoinverse: bool,
    pub stats: BackendStats,
}

fn check_sample(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return invalid("no observations");
    }
    if xs.len() != ys.len() {
        return invalid(format!(
            "{} predictors but {} responses",
            xs.len(),
            ys.len()
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return invalid("observations contain non-finite values");
    }
    Ok(())
}

/// Weighted local polynomial fit at `x`.
pub fn local_fit(xs: &[f64], ys: &[f64], x: f64, cfg: &LocalPolyConfig) -> Result<LocalFit> {
    check_sample(xs, ys)?;
    let ld = local_design(xs, x, cfg.degree, &cfg.kernel)?;
    let active: Vec<usize> = (0..xs.len()).filter(|&i| ld.weights[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::EmptyNeighborhood { x });
    }

    let width = ld.width();
    let gram = weighted_gram(xs.len(), width, &ld.design, Some(&ld.weights))?;
    let rhs = weighted_cross(xs.len(), width, &ld.design, Some(&ld.weights), ys)?;

    // One elimination of [G | X^T W Y | e0] yields both a_hat and, because G
    // is symmetric, the first row of its inverse.
    let mut entries = Vec::with_capacity(width * (width + 2));
    for (r, b) in rhs.iter().enumerate() {
        entries.extend_from_slice(gram.row(r));
        entries.push(b.clone());
        entries.push(if r == 0 {
            Rational::one()
        } else {
            Rational::zero()
        });
    }
    let reduced = rref(
        &Matrix::new(width, width + 2, entries)?,
        cfg.backend,
        cfg.seed,
    )?;
    let stats = reduced.stats;
    let invertible = reduced
        .pivot_cols
        .iter()
        .take_while(|&&c| c < width)
        .count()
        == width;
    let (a_hat, first_row, used_pseudoinverse) = if invertible {
        (
            reduced.rref.column(width),
            reduced.rref.column(width + 1),
            false,
        )
    } else {
        let pinv = pseudoinverse_with(&gram, cfg.backend, cfg.seed.wrapping_add(1))?;
        let mut e0 = vec![Rational::zero(); width];
        e0[0] = Rational::one();
        (pinv.mul_vec(&rhs)?, pinv.mul_vec(&e0)?, true)
    };

    let g: Vec<f64> = first_row.iter().map(rational_to_f64).collect();
    let mut ell = vec![0.0; xs.len()];
    for &i in &active {
        let dot: f64 = ld.row(i).iter().zip(&g).map(|(a, b)| a * b).sum();
        ell[i] = ld.weights[i] * dot;
    }
    let a_hat: Vec<f64> = a_hat.iter().map(rational_to_f64).collect();
    Ok(LocalFit {
        r_hat: a_hat[0],
        a_hat,
        ell,
        used_pseudoinverse,
        stats,
    })
}

/// Kernel-weighted mean of the responses.
pub fn nadaraya_watson(xs: &[f64], ys: &[f64], x: f64, spec: &KernelSpec) -> Result<f64> {
    check_sample(xs, ys)?;
    let (num, den) = xs
        .iter()
        .zip(ys)
        .fold((0.0, 0.0), |(num, den), (&xi, &yi)| {
            let w = kernel_weight(spec, (xi - x).abs());
            (num + w * yi, den + w)
        });
    if den <= 0.0 {
        return Err(Error::EmptyNeighborhood { x });
    }
    Ok(num / den)
}

/// In-sample quantities of the local smoother.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherSummary {
    pub fitted: Vec<f64>,
    /// Trace of the smoother matrix whose rows are `ell(x_i)`.
    pub effective_dof: f64,
    pub rss: f64,
    pub stats: BackendStats,
}

pub fn smoother_summary(xs: &[f64], ys: &[f64], cfg: &LocalPolyConfig) -> Result<SmootherSummary> {
    check_sample(xs, ys)?;
    let fits = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let point_cfg = LocalPolyConfig {
                seed: cfg.seed.wrapping_add(i as u64),
                ..*cfg
            };
            local_fit(xs, ys, x, &point_cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut stats = BackendStats::default();
    let mut trace = 0.0;
    let mut rss = 0.0;
    for (i, f) in fits.iter().enumerate() {
        stats.merge(&f.stats);
        trace += f.ell[i];
        rss += (ys[i] - f.r_hat).powi(2);
    }
    Ok(SmootherSummary {
        fitted: fits.iter().map(|f| f.r_hat).collect(),
        effective_dof: trace,
        rss,
        stats,
    })
}

/// Band `r_hat(x) +/- c sigma_hat ||ell(x)||` over `grid`.
///
/// `sigma_hat^2 = RSS / (n - tr S)` and `c = sqrt(nu F_{alpha; nu, n - nu})`
/// with `nu` the trace rounded to an integer no smaller than 1.
pub fn local_band(
    xs: &[f64],
    ys: &[f64],
    grid: &[f64],
    alpha: f64,
    cfg: &LocalPolyConfig,
) -> Result<ConfidenceBand> {
    let summary = smoother_summary(xs, ys, cfg)?;
    let n = xs.len();
    let residual_dof = n as f64 - summary.effective_dof;
    if residual_dof <= 0.0 {
        return Err(Error::DegreesOfFreedom {
            n,
            dof: summary.effective_dof,
        });
    }
    let nu = (summary.effective_dof.round() as usize).max(1);
    let c = band_constant(alpha, nu, n)?;
    let sigma_hat = (summary.rss / residual_dof).sqrt();

    let offset = n as u64;
    let fits = grid
        .par_iter()
        .enumerate()
        .map(|(k, &x)| {
            let point_cfg = LocalPolyConfig {
                seed: cfg.seed.wrapping_add(offset + k as u64),
                ..*cfg
            };
            local_fit(xs, ys, x, &point_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = summary.stats;
    for f in &fits {
        stats.merge(&f.stats);
    }
    let ells: Vec<Vec<f64>> = fits.into_iter().map(|f| f.ell).collect();

    let mut band = ConfidenceBand::from_smoother_vectors(
        grid.iter().map(|&x| vec![x]).collect(),
        &ells,
        ys,
        alpha,
        c,
        sigma_hat,
        nu,
    );
    band.effective_dof = summary.effective_dof;
    band.stats = stats;
    Ok(band)
}
