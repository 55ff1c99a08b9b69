//! Global linear regression as a linear smoother.
//!
//! The normal equations `(X^T X) beta = X^T Y` are formed exactly from the
//! binary values of the inputs and solved by exact Gauss-Jordan elimination.
//! When `X^T X` is singular the minimum-norm solution
//! `beta = (X^T X)^+ X^T Y` is used instead. Everything downstream of the
//! solve (variance, bands) is ordinary floating point.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fdist::f_quantile;
use crate::qgje::{
    inverse_with, pseudoinverse_with, rational_to_f64, solve, weighted_cross, weighted_gram,
    Backend, BackendStats, Matrix, Rational,
};

/// Design matrix `X` (n x p, row-major) and response `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    design: Vec<f64>,
    response: Vec<f64>,
}

impl Dataset {
    pub fn new(design_rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let p = design_rows.first().map_or(0, Vec::len);
        if design_rows.iter().any(|r| r.len() != p) {
            return invalid("design rows have different lengths");
        }
        let design = design_rows.iter().flatten().copied().collect();
        Self::from_row_major(design_rows.len(), p, design, response)
    }

    pub fn from_row_major(
        n: usize,
        p: usize,
        design: Vec<f64>,
        response: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || p == 0 {
            return invalid(format!("dataset must be non-empty (n = {n}, p = {p})"));
        }
        if design.len() != n * p {
            return invalid(format!(
                "design has {} entries, expected {}",
                design.len(),
                n * p
            ));
        }
        if response.len() != n {
            return invalid(format!(
                "response has {} entries, expected {n}",
                response.len()
            ));
        }
        if design.iter().chain(&response).any(|v| !v.is_finite()) {
            return invalid("dataset contains non-finite values");
        }
        Ok(Self {
            n,
            p,
            design,
            response,
        })
    }

    /// Copy of this dataset with a leading column of ones.
    pub fn with_intercept(&self) -> Self {
        let mut design = Vec::with_capacity(self.n * (self.p + 1));
        for i in 0..self.n {
            design.push(1.0);
            design.extend_from_slice(self.row(i));
        }
        Self {
            n: self.n,
            p: self.p + 1,
            design,
            response: self.response.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.design[i * self.p..(i + 1) * self.p]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.design[i * self.p + j]).collect()
    }

    pub fn design(&self) -> &[f64] {
        &self.design
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }
}

/// Exact `X^T X` and `X^T Y`.
pub fn normal_equations(data: &Dataset) -> Result<(Matrix, Vec<Rational>)> {
    let xtx = weighted_gram(data.n, data.p, &data.design, None)?;
    let xty = weighted_cross(data.n, data.p, &data.design, None, &data.response)?;
    Ok((xtx, xty))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    /// `||residuals||^2 / (n - p)`; absent when `n <= p`.
    pub sigma2_hat: Option<f64>,
    pub residuals: Vec<f64>,
    /// `tr(L)`. The hat matrix is a projection, so this is the rank of `X`.
    pub effective_dof: f64,
    pub rank: usize,
    pub used_pseudoinverse: bool,
    pub stats: BackendStats,
}

pub fn fit_linear(data: &Dataset, backend: Backend, seed: u64) -> Result<FitResult> {
    let (xtx, xty) = normal_equations(data)?;
    let solution = solve(&xtx, &xty, backend, seed)?;
    let stats = solution.stats;

    let (beta, used_pseudoinverse) = match solution.particular {
        Some(beta) if solution.is_unique() => (beta, false),
        _ => {
            let pinv = pseudoinverse_with(&xtx, backend, seed.wrapping_add(1))?;
            (pinv.mul_vec(&xty)?, true)
        }
    };

    let beta_hat: Vec<f64> = beta.iter().map(rational_to_f64).collect();
    let residuals: Vec<f64> = (0..data.n)
        .map(|i| {
            let fitted: f64 = data.row(i).iter().zip(&beta_hat).map(|(x, b)| x * b).sum();
            data.response[i] - fitted
        })
        .collect();
    let sigma2_hat = (data.n > data.p)
        .then(|| residuals.iter().map(|r| r * r).sum::<f64>() / (data.n - data.p) as f64);

    Ok(FitResult {
        beta_hat,
        sigma2_hat,
        residuals,
        effective_dof: solution.rank as f64,
        rank: solution.rank,
        used_pseudoinverse,
        stats,
    })
}

/// `||residuals||^2 / (n - p)`.
pub fn residual_variance(fit: &FitResult, n: usize, p: usize) -> Result<f64> {
    if n <= p {
        return Err(Error::DegreesOfFreedom { n, dof: p as f64 });
    }
    if fit.residuals.len() != n {
        return invalid(format!(
            "fit has {} residuals, expected {n}",
            fit.residuals.len()
        ));
    }
    let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
    Ok(rss / (n - p) as f64)
}

/// Precomputed `(X^T X)^+` for evaluating smoother vectors at many points.
#[derive(Debug, Clone)]
pub struct LinearSmoother<'a> {
    data: &'a Dataset,
    gram_pinv: Vec<f64>,
}

impl<'a> LinearSmoother<'a> {
    pub fn new(data: &'a Dataset, backend: Backend, seed: u64) -> Result<Self> {
        let (xtx, _) = normal_equations(data)?;
        let pinv = match inverse_with(&xtx, backend, seed)? {
            Some(inv) => inv,
            None => pseudoinverse_with(&xtx, backend, seed)?,
        };
        Ok(Self {
            data,
            gram_pinv: pinv.to_f64(),
        })
    }

    /// `l(x) = X (X^T X)^+ x`, so that `r_hat(x) = l(x)^T Y`.
    pub fn smoother_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.data.p;
        if x.len() != p {
            return invalid(format!(
                "evaluation point has length {}, expected {p}",
                x.len()
            ));
        }
        let gx: Vec<f64> = (0..p)
            .map(|r| (0..p).map(|c| self.gram_pinv[r * p + c] * x[c]).sum())
            .collect();
        Ok((0..self.data.n)
            .map(|i| self.data.row(i).iter().zip(&gx).map(|(a, b)| a * b).sum())
            .collect())
    }
}

pub fn smoother_vector(data: &Dataset, x: &[f64], backend: Backend) -> Result<Vec<f64>> {
    LinearSmoother::new(data, backend, 0)?.smoother_vector(x)
}

/// Hat matrix `L = X (X^T X)^+ X^T` (n x n, row-major) and its trace.
pub fn hat_matrix(data: &Dataset) -> Result<(Vec<f64>, f64)> {
    let smoother = LinearSmoother::new(data, Backend::Classical, 0)?;
    let n = data.n;
    let mut l = Vec::with_capacity(n * n);
    for i in 0..n {
        // Row i of L is l(x_i)^T.
        l.extend(smoother.smoother_vector(data.row(i))?);
    }
    let trace = (0..n).map(|i| l[i * n + i]).sum();
    Ok((l, trace))
}

/// Pointwise band `r_hat(x) +/- c sigma_hat ||l(x)||`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBand {
    pub grid: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub center: Vec<f64>,
    pub upper: Vec<f64>,
    pub alpha: f64,
    pub c: f64,
    pub sigma_hat: f64,
    /// Numerator degrees of freedom of the F quantile behind `c`.
    pub dof: usize,
    /// Trace of the smoother matrix (before rounding to `dof`).
    pub effective_dof: f64,
    /// Pivot-search work spent on the fits behind the band.
    pub stats: BackendStats,
}

impl ConfidenceBand {
    pub(crate) fn from_smoother_vectors(
        grid: Vec<Vec<f64>>,
        ells: &[Vec<f64>],
        response: &[f64],
        alpha: f64,
        c: f64,
        sigma_hat: f64,
        dof: usize,
    ) -> Self {
        let mut lower = Vec::with_capacity(ells.len());
        let mut center = Vec::with_capacity(ells.len());
        let mut upper = Vec::with_capacity(ells.len());
        for ell in ells {
            let r: f64 = ell.iter().zip(response).map(|(l, y)| l * y).sum();
            let norm = ell.iter().map(|l| l * l).sum::<f64>().sqrt();
            let half = c * sigma_hat * norm;
            lower.push(r - half);
            center.push(r);
            upper.push(r + half);
        }
        Self {
            grid,
            lower,
            center,
            upper,
            alpha,
            c,
            sigma_hat,
            dof,
            effective_dof: dof as f64,
            stats: BackendStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.center.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_empty()
    }

    pub fn half_width(&self, i: usize) -> f64 {
        self.upper[i] - self.center[i]
    }
}

/// Band constant `sqrt(dof * F_{alpha; dof, n - dof})`.
pub fn band_constant(alpha: f64, dof: usize, n: usize) -> Result<f64> {
    if n <= dof {
        return Err(Error::DegreesOfFreedom { n, dof: dof as f64 });
    }
    Ok((dof as f64 * f_quantile(alpha, dof, n - dof)?).sqrt())
}

pub fn confidence_band(
    data: &Dataset,
    fit: &FitResult,
    grid: &[Vec<f64>],
    alpha: f64,
    backend: Backend,
) -> Result<ConfidenceBand> {
    let (n, p) = (data.n, data.p);
    let sigma2 = residual_variance(fit, n, p)?;
    let c = band_constant(alpha, p, n)?;
    let smoother = LinearSmoother::new(data, backend, 0)?;
    let ells = grid
        .par_iter()
        .map(|x| smoother.smoother_vector(x))
        .collect::<Result<Vec<_>>>()?;
    let mut band = ConfidenceBand::from_smoother_vectors(
        grid.to_vec(),
        &ells,
        &data.response,
        alpha,
        c,
        sigma2.sqrt(),
        p,
    );
    band.effective_dof = fit.effective_dof;
    band.stats = fit.stats;
    Ok(band)
}

/// Training rule: accept `observed` iff it lies in the closed band interval
/// at `grid_index`.
pub fn training_accept(observed: f64, band: &ConfidenceBand, grid_index: usize) -> Result<bool> {
    if grid_index >= band.len() {
        return invalid(format!(
            "grid index {grid_index} out of range ({})",
            band.len()
        ));
    }
    Ok(band.lower[grid_index] <= observed && observed <= band.upper[grid_index])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data(ys: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = (1..=ys.len()).map(|i| vec![1.0, i as f64]).collect();
        Dataset::new(&rows, ys.to_vec()).unwrap()
    }

    #[test]
    fn perfect_fit() {
        let d = line_data(&[2.0, 4.0, 6.0]);
        let f = fit_linear(&d, Backend::Classical, 0).unwrap();
        assert_eq!(f.beta_hat, vec![0.0, 2.0]);
        assert_eq!(f.sigma2_hat, Some(0.0));
        assert!(!f.used_pseudoinverse);
        assert_eq!(f.rank, 2);
        assert_eq!(residual_variance(&f, 3, 2).unwrap(), 0.0);
    }

    #[test]
    fn hand_worked_normal_equations() {
        // X^T X = [[3, 6], [6, 14]], X^T Y = (5, 11) -> beta = (2/3, 1/2)
        let d = line_data(&[1.0, 2.0, 2.0]);
        let (xtx, xty) = normal_equations(&d).unwrap();
        assert_eq!(xtx, Matrix::from_i64(&[&[3, 6], &[6, 14]]));
        assert_eq!(
            xty,
            vec![
                Rational::from_integer(5.into()),
                Rational::from_integer(11.into())
            ]
        );
        let f = fit_linear(&d, Backend::QuantumSim, 4).unwrap();
        assert!((f.beta_hat[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((f.beta_hat[1] - 0.5).abs() < 1e-12);
        let expect = [-1.0 / 6.0, 1.0 / 3.0, -1.0 / 6.0];
        for (r, e) in f.residuals.iter().zip(expect) {
            assert!((r - e).abs() < 1e-12);
        }
        assert!((f.sigma2_hat.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!((residual_variance(&f, 3, 2).unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_uses_minimum_norm_solution() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, i as f64, i as f64]).collect();
        let ys = vec![0.5, 1.7, 2.2, 3.9, 4.1, 6.0];
        let d = Dataset::new(&rows, ys.clone()).unwrap();
        let f = fit_linear(&d, Backend::Classical, 0).unwrap();
        assert!(f.used_pseudoinverse);
        assert_eq!(f.rank, 2);

        // Oracle: pseudoinverse of X itself (not of X^T X) applied to Y.
        let x = Matrix::from_f64(6, 3, d.design()).unwrap();
        let y: Vec<Rational> = ys
            .iter()
            .map(|&v| crate::qgje::rational_from_f64(v).unwrap())
            .collect();
        let beta = crate::qgje::pseudoinverse(&x).mul_vec(&y).unwrap();
        for (a, b) in f.beta_hat.iter().zip(&beta) {
            assert!((a - rational_to_f64(b)).abs() < 1e-12);
        }
        // Minimum norm: the two identical columns share the slope equally.
        assert!((f.beta_hat[1] - f.beta_hat[2]).abs() < 1e-12);
    }

    #[test]
    fn underdetermined_fit_refuses_variance() {
        let d = Dataset::new(&[vec![1.0, 0.0], vec![1.0, 1.0]], vec![1.0, 3.0]).unwrap();
        let f = fit_linear(&d, Backend::Classical, 0).unwrap();
        assert_eq!(f.sigma2_hat, None);
        assert!(matches!(
            residual_variance(&f, 2, 2),
            Err(Error::DegreesOfFreedom { .. })
        ));
        let grid = vec![vec![1.0, 0.5]];
        assert!(matches!(
            confidence_band(&d, &f, &grid, 0.05, Backend::Classical),
            Err(Error::DegreesOfFreedom { .. })
        ));
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(Dataset::new(&[], vec![]).is_err());
        assert!(Dataset::new(&[vec![1.0]], vec![1.0, 2.0]).is_err());
        assert!(Dataset::new(&[vec![f64::NAN]], vec![1.0]).is_err());
    }

    #[test]
    fn smoother_vector_cases() {
        // Square full-rank X: interpolation.
        let rows = vec![vec![1.0, 0.0], vec![1.0, 2.0]];
        let d = Dataset::new(&rows, vec![0.0, 0.0]).unwrap();
        let ell = smoother_vector(&d, &rows[1], Backend::Classical).unwrap();
        assert!((ell[0]).abs() < 1e-12 && (ell[1] - 1.0).abs() < 1e-12);

        // Column of ones: sample mean.
        let d = Dataset::new(&vec![vec![1.0]; 5], vec![1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        let ell = smoother_vector(&d, &[1.0], Backend::QuantumSim).unwrap();
        for l in &ell {
            assert!((l - 0.2).abs() < 1e-15);
        }
        assert!(smoother_vector(&d, &[1.0, 2.0], Backend::Classical).is_err());
    }

    #[test]
    fn hat_matrix_cases() {
        let id: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let (l, tr) = hat_matrix(&Dataset::new(&id, vec![0.0; 4]).unwrap()).unwrap();
        assert!((tr - 4.0).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((l[i * 4 + j] - e).abs() < 1e-12);
            }
        }

        let ones = Dataset::new(&vec![vec![1.0]; 4], vec![0.0; 4]).unwrap();
        let (l, tr) = hat_matrix(&ones).unwrap();
        assert!(l.iter().all(|v| (v - 0.25).abs() < 1e-15));
        assert!((tr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_collapses_on_perfect_fit() {
        let d = line_data(&[3.0, 5.0, 7.0, 9.0]);
        let f = fit_linear(&d, Backend::Classical, 0).unwrap();
        let grid: Vec<Vec<f64>> = [0.0, 2.5, 6.0].iter().map(|&x| vec![1.0, x]).collect();
        let band = confidence_band(&d, &f, &grid, 0.05, Backend::Classical).unwrap();
        for i in 0..band.len() {
            assert_eq!(band.lower[i], band.center[i]);
            assert_eq!(band.upper[i], band.center[i]);
        }
        assert!((band.center[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn band_constant_for_two_parameters() {
        let c = band_constant(0.05, 2, 12).unwrap();
        let expect = (2.0 * f_quantile(0.05, 2, 10).unwrap()).sqrt();
        assert_eq!(c, expect);
        assert!((c - 2.8646).abs() < 1e-3, "{c}");
    }

    #[test]
    fn training_rule_uses_closed_interval() {
        let d = line_data(&[1.0, 2.0, 2.0, 4.0, 4.5]);
        let f = fit_linear(&d, Backend::Classical, 0).unwrap();
        let band = confidence_band(&d, &f, &[vec![1.0, 3.0]], 0.1, Backend::Classical).unwrap();
        assert!(training_accept(band.center[0], &band, 0).unwrap());
        assert!(training_accept(band.lower[0], &band, 0).unwrap());
        assert!(training_accept(band.upper[0], &band, 0).unwrap());
        let above = band.upper[0] + 1e-9;
        assert!(!training_accept(above, &band, 0).unwrap());
        assert!(training_accept(band.center[0], &band, 1).is_err());
    }
}
