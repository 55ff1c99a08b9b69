use qnpr_core::fdist::{f_cdf, f_quantile};
use qnpr_core::linreg::{
    confidence_band, fit_linear, hat_matrix, smoother_vector, Dataset, LinearSmoother,
};
use qnpr_core::localpoly::{
    local_band, local_fit, nadaraya_watson, KernelFamily, KernelSpec, LocalPolyConfig,
};
use qnpr_core::Backend;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| normal(rng)).collect())
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

// --- F quantile oracle: Simpson quadrature of the density + bisection --------

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// F density in the variable s = sqrt(x), unnormalized.
fn root_density(s: f64, d1: f64, d2: f64) -> f64 {
    2.0 * s.powf(d1 - 1.0) * (1.0 + d1 * s * s / d2).powf(-(d1 + d2) / 2.0)
}

fn oracle_cdf(q: f64, d1: f64, d2: f64) -> f64 {
    // Total mass via s = t / (1 - t) on [0, 1).
    let total = simpson(
        |t| {
            if t >= 1.0 {
                0.0
            } else {
                root_density(t / (1.0 - t), d1, d2) / (1.0 - t).powi(2)
            }
        },
        0.0,
        1.0,
        200_000,
    );
    simpson(|s| root_density(s, d1, d2), 0.0, q.sqrt(), 200_000) / total
}

fn oracle_quantile(alpha: f64, d1: f64, d2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if oracle_cdf(mid, d1, d2) < 1.0 - alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn f_quantile_matches_quadrature_oracle() {
    for (d1, expect) in [(1usize, 4.9646), (2, 4.1028)] {
        let oracle = oracle_quantile(0.05, d1 as f64, 10.0);
        assert!((oracle - expect).abs() < 1e-3, "oracle {oracle}");
        let q = f_quantile(0.05, d1, 10).unwrap();
        assert!((q - oracle).abs() < 1e-3, "d1={d1}: {q} vs {oracle}");
    }
}

#[test]
fn f_cdf_matches_quadrature_at_scattered_points() {
    for &(d1, d2) in &[(1.0, 10.0), (3.0, 7.0), (5.0, 12.0)] {
        for &x in &[0.3, 1.0, 2.5] {
            let a = f_cdf(x, d1, d2).unwrap();
            let b = oracle_cdf(x, d1, d2);
            assert!((a - b).abs() < 1e-6, "({d1},{d2}) x={x}: {a} vs {b}");
        }
    }
}

// --- global linear smoother ---------------------------------------------------

#[test]
fn smoother_reproduces_fitted_regression() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let p = rng.random_range(1..=5);
        let n = rng.random_range(p + 1..=30);
        let rows = random_design(&mut rng, n, p);
        let ys: Vec<f64> = (0..n).map(|_| normal(&mut rng) * 3.0).collect();
        let data = Dataset::new(&rows, ys).unwrap();
        let fit = fit_linear(&data, Backend::Classical, 0).unwrap();
        assert_eq!(fit.rank, p);
        let smoother = LinearSmoother::new(&data, Backend::Classical, 0).unwrap();
        let x: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
        let ell = smoother.smoother_vector(&x).unwrap();
        let via_ell: f64 = ell.iter().zip(data.response()).map(|(l, y)| l * y).sum();
        let via_beta: f64 = x.iter().zip(&fit.beta_hat).map(|(a, b)| a * b).sum();
        assert!(close(via_ell, via_beta, 1e-9), "{via_ell} vs {via_beta}");
    }
}

#[test]
fn smoother_vector_does_not_depend_on_response() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows = random_design(&mut rng, 12, 3);
    let x = vec![0.3, -1.2, 0.8];
    let ell = smoother_vector(
        &Dataset::new(&rows, vec![0.0; 12]).unwrap(),
        &x,
        Backend::Classical,
    )
    .unwrap();
    for _ in 0..20 {
        let ys: Vec<f64> = (0..12).map(|_| normal(&mut rng)).collect();
        let data = Dataset::new(&rows, ys).unwrap();
        let fit = fit_linear(&data, Backend::Classical, 0).unwrap();
        let a: f64 = ell.iter().zip(data.response()).map(|(l, y)| l * y).sum();
        let b: f64 = x.iter().zip(&fit.beta_hat).map(|(u, v)| u * v).sum();
        assert!(close(a, b, 1e-9));
    }
}

#[test]
fn hat_matrix_is_a_projection_with_trace_equal_to_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..50 {
        let p = rng.random_range(1..=5);
        let n = rng.random_range(p + 1..=20);
        let mut rows = random_design(&mut rng, n, p);
        let mut rank = p;
        if p >= 2 && case % 3 == 0 {
            for r in &mut rows {
                r[p - 1] = 2.0 * r[0];
            }
            rank -= 1;
        }
        let data = Dataset::new(&rows, vec![0.0; n]).unwrap();
        let (l, tr) = hat_matrix(&data).unwrap();
        assert!(
            (tr - rank as f64).abs() < 1e-9,
            "case {case}: tr {tr} rank {rank}"
        );
        for i in 0..n {
            for j in 0..n {
                assert!((l[i * n + j] - l[j * n + i]).abs() < 1e-9);
                let ll: f64 = (0..n).map(|k| l[i * n + k] * l[k * n + j]).sum();
                assert!((ll - l[i * n + j]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn hat_trace_for_random_ten_by_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = Dataset::new(&random_design(&mut rng, 10, 3), vec![0.0; 10]).unwrap();
    let (_, tr) = hat_matrix(&data).unwrap();
    assert!((tr - 3.0).abs() < 1e-9);
}

#[test]
fn residual_variance_is_unbiased() {
    let n = 20;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reps = 5000;
    let mut total = 0.0;
    for _ in 0..reps {
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 1.0 + 2.0 * x + normal(&mut rng))
            .collect();
        let fit = fit_linear(&Dataset::new(&rows, ys).unwrap(), Backend::Classical, 0).unwrap();
        total += fit.sigma2_hat.unwrap();
    }
    let mean = total / reps as f64;
    assert!((0.97..=1.03).contains(&mean), "mean sigma2 {mean}");
}

#[test]
fn smaller_alpha_gives_wider_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xs: Vec<f64> = (0..15).map(|i| i as f64).collect();
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + normal(&mut rng)).collect();
    let data = Dataset::new(&rows, ys).unwrap();
    let fit = fit_linear(&data, Backend::Classical, 0).unwrap();
    let grid: Vec<Vec<f64>> = (0..7).map(|i| vec![1.0, i as f64 * 2.5]).collect();
    let alphas = [0.01, 0.05, 0.1, 0.3, 0.6];
    let bands: Vec<_> = alphas
        .iter()
        .map(|&a| confidence_band(&data, &fit, &grid, a, Backend::Classical).unwrap())
        .collect();
    for w in bands.windows(2) {
        for i in 0..grid.len() {
            assert!(w[0].lower[i] <= w[1].lower[i] && w[1].upper[i] <= w[0].upper[i]);
        }
    }
}

#[test]
fn backends_give_identical_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..10 {
        let rows = random_design(&mut rng, 15, 3);
        let ys: Vec<f64> = (0..15).map(|_| normal(&mut rng)).collect();
        let data = Dataset::new(&rows, ys).unwrap();
        let a = fit_linear(&data, Backend::Classical, 0).unwrap();
        let b = fit_linear(&data, Backend::QuantumSim, k).unwrap();
        assert_eq!(a.beta_hat, b.beta_hat);
        assert_eq!(a.residuals, b.residuals);
    }
}

// --- local polynomial ---------------------------------------------------------

fn local_cfg(degree: usize, family: KernelFamily, h: f64) -> LocalPolyConfig {
    LocalPolyConfig {
        degree,
        kernel: KernelSpec::new(family, h).unwrap(),
        backend: Backend::Classical,
        seed: 0,
    }
}

#[test]
fn local_fit_reproduces_polynomials() {
    let xs: Vec<f64> = (0..40).map(|i| -2.0 + i as f64 * 0.1).collect();
    let poly = |x: f64, deg: usize| -> f64 {
        [0.7, -1.3, 0.4, 0.25][..=deg]
            .iter()
            .enumerate()
            .map(|(j, c)| c * x.powi(j as i32))
            .sum()
    };
    for degree in 0..=3 {
        for data_degree in 0..=degree {
            let ys: Vec<f64> = xs.iter().map(|&x| poly(x, data_degree)).collect();
            for family in [
                KernelFamily::Gaussian,
                KernelFamily::Epanechnikov,
                KernelFamily::Boxcar,
            ] {
                let cfg = local_cfg(degree, family, 0.9);
                for q in 0..20 {
                    let x = -1.8 + q as f64 * 0.18;
                    let f = local_fit(&xs, &ys, x, &cfg).unwrap();
                    let truth = poly(x, data_degree);
                    assert!(
                        (f.r_hat - truth).abs() < 1e-8,
                        "deg {degree} data {data_degree} {family} x={x}: {} vs {truth}",
                        f.r_hat
                    );
                    let via_ell: f64 = f.ell.iter().zip(&ys).map(|(l, y)| l * y).sum();
                    assert!((via_ell - f.r_hat).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn degree_zero_matches_nadaraya_watson_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(2..=30);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let h = rng.random_range(0.5..3.0);
        let cfg = local_cfg(0, KernelFamily::Gaussian, h);
        let x = rng.random_range(0.0..5.0);
        let a = local_fit(&xs, &ys, x, &cfg).unwrap().r_hat;
        let b = nadaraya_watson(&xs, &ys, x, &cfg.kernel).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn wide_boxcar_local_linear_is_global_ols() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let xs: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..3.0)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| x.exp() + normal(&mut rng) * 0.2)
        .collect();
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
    let ols = fit_linear(
        &Dataset::new(&rows, ys.clone()).unwrap(),
        Backend::Classical,
        0,
    )
    .unwrap();
    let cfg = local_cfg(1, KernelFamily::Boxcar, 100.0);
    for q in 0..10 {
        let x = -1.0 + q as f64 * 0.4;
        let local = local_fit(&xs, &ys, x, &cfg).unwrap().r_hat;
        let global = ols.beta_hat[0] + ols.beta_hat[1] * x;
        assert!((local - global).abs() < 1e-8, "{local} vs {global}");
    }
}

#[test]
fn local_backends_agree_exactly() {
    let xs: Vec<f64> = (0..12).map(|i| i as f64 * 0.3).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).cos()).collect();
    let classical = local_cfg(2, KernelFamily::Epanechnikov, 1.0);
    for seed in 0..5 {
        let quantum = LocalPolyConfig {
            backend: Backend::QuantumSim,
            seed,
            ..classical
        };
        for &x in &[0.5, 1.7, 3.0] {
            let a = local_fit(&xs, &ys, x, &classical).unwrap();
            let b = local_fit(&xs, &ys, x, &quantum).unwrap();
            assert_eq!(a.a_hat, b.a_hat);
            assert_eq!(a.ell, b.ell);
        }
    }
}

#[test]
fn local_band_covers_sinusoid() {
    let n = 50;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let truth = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let alpha = 0.05;
    let cfg = local_cfg(1, KernelFamily::Gaussian, 0.06);
    let reps = 2000;
    let mut covered = vec![0usize; grid.len()];
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + rep);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| truth(x) + 0.3 * normal(&mut rng))
            .collect();
        let band = local_band(&xs, &ys, &grid, alpha, &cfg).unwrap();
        for (k, &g) in grid.iter().enumerate() {
            if band.lower[k] <= truth(g) && truth(g) <= band.upper[k] {
                covered[k] += 1;
            }
        }
    }
    for (k, c) in covered.iter().enumerate() {
        let rate = *c as f64 / reps as f64;
        assert!(
            rate >= 1.0 - alpha,
            "grid point {}: coverage {rate}",
            grid[k]
        );
    }
}
