use std::io::Write;
use std::path::{Path, PathBuf};

use qnpr_core::grover::{
    grover_iterate, grover_search, marked_probability, optimal_iterations, success_probability,
    uniform_state, Oracle,
};
use qnpr_core::linreg::{confidence_band, fit_linear, training_accept, ConfidenceBand};
use qnpr_core::localpoly::{local_band, KernelFamily, KernelSpec, LocalPolyConfig};
use qnpr_core::qgje::rref;
use qnpr_core::quantum::DEFAULT_MAX_QUBITS;
use qnpr_core::Backend;
use serde::{Deserialize, Serialize};

use crate::args::{
    check_alpha, effective_seed, Command, CoverageArgs, FitArgs, FitLinearArgs, FitLocalArgs,
    GridSpec, GroverArgs, ModelArg, RrefArgs,
};
use crate::coverage::{simulate, CoverageConfig, Model};
use crate::error::{usage, CliError, Result};
use crate::ingest::{ingest_csv, read_matrix_csv, Table};
use crate::plot::render_svg;
use crate::report::{
    band_csv, band_rows, round12, to_json, write_text, Coefficient, ConfigEcho, FitReport,
    StatsReport,
};

/// Runs one subcommand. `env_seed` is the raw value of the seed override.
pub fn dispatch(command: Command, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::FitLinear(args) => fit_linear_cmd(args, env_seed, stdout),
        Command::FitLocal(args) => fit_local_cmd(args, env_seed, stdout),
        Command::Rref(args) => rref_cmd(args, env_seed, stdout),
        Command::GroverDemo(args) => grover_cmd(args, env_seed, stdout),
        Command::CoverageSim(args) => coverage_cmd(args, env_seed, stdout),
    }
}

fn print(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn emit_json(stdout: &mut dyn Write, out: Option<&Path>, json: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, json),
        None => print(stdout, json),
    }
}

fn default_grid(xs: &[f64]) -> GridSpec {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        GridSpec::Range {
            min,
            max,
            count: 25,
        }
    } else {
        GridSpec::List(vec![min])
    }
}

struct FitOutput {
    report: FitReport,
    points: Vec<(f64, f64)>,
}

fn write_fit(fit: &FitArgs, output: FitOutput, stdout: &mut dyn Write) -> Result<()> {
    let json = to_json(&output.report);
    emit_json(stdout, fit.out.as_deref(), &json)?;
    let csv_path = fit
        .csv
        .clone()
        .or_else(|| fit.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = csv_path {
        write_text(&path, &band_csv(&output.report.band))?;
    }
    if let Some(path) = &fit.plot {
        let title = format!(
            "{}: {} vs {}",
            output.report.command,
            output.report.response,
            output.report.predictors.first().map_or("x", String::as_str)
        );
        write_text(
            path,
            &render_svg(&title, &output.points, &output.report.band),
        )?;
    }
    Ok(())
}

fn echo(fit: &FitArgs, seed: u64, grid: &GridSpec) -> ConfigEcho {
    ConfigEcho {
        input: fit.input.display().to_string(),
        y_column: fit.y_column.to_string(),
        alpha: round12(fit.alpha),
        backend: Backend::from(fit.backend).name().into(),
        seed,
        intercept: false,
        degree: None,
        kernel: None,
        bandwidth: None,
        grid: grid.to_string(),
    }
}

fn load_holdout(fit: &FitArgs, table: &Table) -> Result<Option<Table>> {
    let Some(path) = &fit.holdout else {
        return Ok(None);
    };
    let holdout = ingest_csv(path, &fit.y_column)?;
    if holdout.predictor_names != table.predictor_names {
        return Err(CliError::Data(format!(
            "{}: columns {:?} do not match the training columns {:?}",
            path.display(),
            holdout.predictor_names,
            table.predictor_names
        )));
    }
    Ok(Some(holdout))
}

fn count_accepted(band: &ConfidenceBand, observed: &[f64]) -> Result<usize> {
    let mut accepted = 0;
    for (i, &y) in observed.iter().enumerate() {
        if training_accept(y, band, i)? {
            accepted += 1;
        }
    }
    Ok(accepted)
}

fn fit_linear_cmd(
    args: FitLinearArgs,
    env_seed: Option<&str>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let fit_args = &args.fit;
    check_alpha(fit_args.alpha)?;
    let seed = effective_seed(fit_args.seed, env_seed)?;
    let backend = Backend::from(fit_args.backend);
    let intercept = !args.no_intercept;

    let table = ingest_csv(&fit_args.input, &fit_args.y_column)?;
    if table.p() == 0 {
        return usage("fit-linear needs at least one predictor column");
    }
    let data = table.to_dataset(intercept)?;
    let fit = fit_linear(&data, backend, seed)?;

    // The grid moves the first predictor; the others stay at their means.
    let first = table.predictor(0);
    let grid = fit_args
        .grid
        .clone()
        .unwrap_or_else(|| default_grid(&first));
    let means: Vec<f64> = (0..table.p())
        .map(|j| table.predictor(j).iter().sum::<f64>() / table.n() as f64)
        .collect();
    let design_point = |values: &[f64]| -> Vec<f64> {
        let mut row = Vec::with_capacity(values.len() + 1);
        if intercept {
            row.push(1.0);
        }
        row.extend_from_slice(values);
        row
    };
    let xs = grid.points();
    let points: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let mut values = means.clone();
            values[0] = x;
            design_point(&values)
        })
        .collect();
    let band = confidence_band(&data, &fit, &points, fit_args.alpha, backend)?;

    let (holdout_count, accepted_count) = match load_holdout(fit_args, &table)? {
        Some(holdout) => {
            let rows: Vec<Vec<f64>> = holdout.predictors.iter().map(|r| design_point(r)).collect();
            let hb = confidence_band(&data, &fit, &rows, fit_args.alpha, backend)?;
            (
                Some(holdout.n()),
                Some(count_accepted(&hb, &holdout.response)?),
            )
        }
        None => (None, None),
    };

    let mut names = Vec::new();
    if intercept {
        names.push("intercept".to_string());
    }
    names.extend(table.predictor_names.iter().cloned());
    let coefficients = names
        .into_iter()
        .zip(&fit.beta_hat)
        .map(|(name, &b)| Coefficient {
            name,
            value: round12(b),
        })
        .collect();

    let mut config = echo(fit_args, seed, &grid);
    config.intercept = intercept;
    let report = FitReport {
        command: "fit-linear".into(),
        config,
        n: data.n(),
        p: data.p(),
        predictors: table.predictor_names.clone(),
        response: table.response_name.clone(),
        coefficients,
        sigma2_hat: fit.sigma2_hat.map(round12),
        effective_dof: round12(band.effective_dof),
        dof: band.dof,
        c: round12(band.c),
        sigma_hat: round12(band.sigma_hat),
        band: band_rows(&band, &xs),
        backend_stats: StatsReport::from(&band.stats),
        holdout_count,
        accepted_count,
    };
    let points = first
        .iter()
        .copied()
        .zip(table.response.iter().copied())
        .collect();
    write_fit(fit_args, FitOutput { report, points }, stdout)
}

fn fit_local_cmd(args: FitLocalArgs, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let fit_args = &args.fit;
    check_alpha(fit_args.alpha)?;
    let seed = effective_seed(fit_args.seed, env_seed)?;
    let backend = Backend::from(fit_args.backend);
    if let Some(h) = args.bandwidth {
        if !(h.is_finite() && h > 0.0) {
            return usage(format!("bandwidth must be positive, got {h}"));
        }
    }

    let table = ingest_csv(&fit_args.input, &fit_args.y_column)?;
    if table.p() != 1 {
        return usage(format!(
            "fit-local takes exactly one predictor column, found {}",
            table.p()
        ));
    }
    let xs = table.predictor(0);
    let family = KernelFamily::from(args.kernel);
    let kernel = match args.bandwidth {
        Some(h) => KernelSpec::new(family, h)?,
        None => KernelSpec::normal_reference(family, &xs)?,
    };
    let cfg = LocalPolyConfig {
        degree: args.degree,
        kernel,
        backend,
        seed,
    };
    let grid = fit_args.grid.clone().unwrap_or_else(|| default_grid(&xs));
    let grid_x = grid.points();
    let band = local_band(&xs, &table.response, &grid_x, fit_args.alpha, &cfg)?;

    let (holdout_count, accepted_count) = match load_holdout(fit_args, &table)? {
        Some(holdout) => {
            let hb = local_band(
                &xs,
                &table.response,
                &holdout.predictor(0),
                fit_args.alpha,
                &cfg,
            )?;
            (
                Some(holdout.n()),
                Some(count_accepted(&hb, &holdout.response)?),
            )
        }
        None => (None, None),
    };

    let mut config = echo(fit_args, seed, &grid);
    config.degree = Some(args.degree);
    config.kernel = Some(family.name().into());
    config.bandwidth = Some(round12(kernel.bandwidth()));
    let report = FitReport {
        command: "fit-local".into(),
        config,
        n: table.n(),
        p: 1,
        predictors: table.predictor_names.clone(),
        response: table.response_name.clone(),
        coefficients: Vec::new(),
        sigma2_hat: Some(round12(band.sigma_hat * band.sigma_hat)),
        effective_dof: round12(band.effective_dof),
        dof: band.dof,
        c: round12(band.c),
        sigma_hat: round12(band.sigma_hat),
        band: band_rows(&band, &grid_x),
        backend_stats: StatsReport::from(&band.stats),
        holdout_count,
        accepted_count,
    };
    let points = xs
        .iter()
        .copied()
        .zip(table.response.iter().copied())
        .collect();
    write_fit(fit_args, FitOutput { report, points }, stdout)
}

fn rref_cmd(args: RrefArgs, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let seed = effective_seed(args.seed, env_seed)?;
    let m = read_matrix_csv(&args.input)?;
    let result = rref(&m, Backend::from(args.backend), seed)?;
    let pivots: Vec<String> = result.pivot_cols.iter().map(usize::to_string).collect();
    let text = format!(
        "rank: {}\npivots: {}\noracle_calls: {}\n{}",
        result.rank,
        pivots.join(","),
        result.stats.oracle_calls,
        result.rref
    );
    print(stdout, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub iterations: usize,
    pub simulated: f64,
    /// `sin^2((2k + 1) theta)`; absent when nothing is marked.
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub found_index: Option<usize>,
    pub verified: bool,
    pub iterations_used: usize,
    pub oracle_calls: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverReport {
    pub qubits: usize,
    pub domain_size: usize,
    pub marked: Vec<usize>,
    pub seed: u64,
    pub optimal_iterations: Option<usize>,
    pub probabilities: Vec<ProbabilityRow>,
    pub search: SearchReport,
}

fn grover_cmd(args: GroverArgs, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let seed = effective_seed(args.seed, env_seed)?;
    if args.qubits == 0 || args.qubits > DEFAULT_MAX_QUBITS {
        return usage(format!(
            "qubits must be between 1 and {DEFAULT_MAX_QUBITS}, got {}",
            args.qubits
        ));
    }
    let size = 1usize << args.qubits;
    let mut marked = args.marked.clone();
    marked.sort_unstable();
    marked.dedup();
    if let Some(&bad) = marked.iter().find(|&&i| i >= size) {
        return usage(format!("marked index {bad} is outside 0..{size}"));
    }
    let oracle = Oracle::from_marked(size, &marked)?;
    let m = marked.len();

    let mut state = uniform_state(args.qubits)?;
    let mut probabilities = Vec::with_capacity(args.max_iterations + 1);
    for k in 0..=args.max_iterations {
        if k > 0 {
            state = grover_iterate(&state, &oracle)?;
        }
        let closed_form = if m > 0 {
            Some(round12(success_probability(size, m, k)?))
        } else {
            None
        };
        probabilities.push(ProbabilityRow {
            iterations: k,
            simulated: round12(marked_probability(&state, &oracle)),
            closed_form,
        });
    }
    let optimal = if m > 0 {
        Some(optimal_iterations(size, m)?)
    } else {
        None
    };
    let result = grover_search(&oracle, args.qubits, seed, args.max_rounds)?;

    let report = GroverReport {
        qubits: args.qubits,
        domain_size: size,
        marked,
        seed,
        optimal_iterations: optimal,
        probabilities,
        search: SearchReport {
            found_index: result.found_index,
            verified: result.verified,
            iterations_used: result.iterations_used,
            oracle_calls: result.oracle_calls,
            rounds: result.rounds,
        },
    };
    emit_json(stdout, args.out.as_deref(), &to_json(&report))
}

fn coverage_cmd(args: CoverageArgs, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    check_alpha(args.alpha)?;
    let seed = effective_seed(args.seed, env_seed)?;
    if let Some(h) = args.bandwidth {
        if !(h.is_finite() && h > 0.0) {
            return usage(format!("bandwidth must be positive, got {h}"));
        }
    }
    let model = match args.model {
        ModelArg::Linear => Model::Linear,
        ModelArg::Local => Model::Local {
            degree: args.degree,
            kernel: args.kernel.into(),
            bandwidth: args.bandwidth,
        },
    };
    let summary = simulate(&CoverageConfig {
        replicates: args.replicates,
        n: args.n,
        alpha: args.alpha,
        sigma: args.sigma,
        grid_points: args.grid_points,
        seed,
        backend: args.backend.into(),
        model,
    })?;
    emit_json(stdout, args.out.as_deref(), &to_json(&summary))
}
