//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 solver did not
//! converge (outputs are still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::apps::{self, CvSettings, Discriminant, LambdaChoice};
use crate::error::{Error, Result};
use crate::estimator::{fit_gram, lambda_max, sample_covariance, Dispatch, FitResult};
use crate::io;
use crate::linalg::SampleMatrix;
use crate::modelselect::{cross_validate, lambda_grid};
use crate::penalty::WeightScheme;
use crate::rowsolver::SolverConfig;
use crate::simulate::{self, Model, SimulationSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "varband", version, about = "Adaptively banded precision matrix estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit L̂ and Ω̂ at one λ.
    Fit(FitArgs),
    /// Generate a simulation model and a sample from it.
    Simulate(SimulateArgs),
    /// Support recovery along a λ grid.
    Roc(RocArgs),
    /// Cross-validate a λ grid by validation likelihood.
    Cv(CvArgs),
    /// Train and evaluate an LDA/QDA classifier.
    Classify(ClassifyArgs),
    /// Held-out prediction error of a fitted factor.
    PredictError(PredictArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long, default_value = "quadratic")]
    pub scheme: WeightScheme,
    /// Worker threads; does not affect results.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_abs: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_rel: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho_init: f64,
    #[arg(long, default_value_t = 10)]
    pub rho_check_period: usize,
    /// Center columns before fitting.
    #[arg(long)]
    pub center: bool,
    /// Input CSV files start with a header line.
    #[arg(long)]
    pub header: bool,
}

impl Common {
    fn solver(&self) -> Result<SolverConfig<f64>> {
        let cfg = SolverConfig {
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iter: self.max_iter,
            rho_init: self.rho_init,
            rho_check_period: self.rho_check_period,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 100)]
    pub grid_count: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub grid_ratio: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, required_unless_present = "lambda_max", conflicts_with = "lambda_max")]
    pub lambda: Option<f64>,
    /// Fit at the smallest λ giving a diagonal factor.
    #[arg(long)]
    pub lambda_max: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: Model,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    /// Simulate from this model instead of reading --input/--truth.
    #[arg(long, conflicts_with_all = ["input", "truth"], requires_all = ["p", "n"])]
    pub model: Option<Model>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, requires = "truth")]
    pub input: Option<PathBuf>,
    /// True factor as a dense CSV.
    #[arg(long, requires = "input")]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Labeled training CSV (last column is the integer label).
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value = "lda")]
    pub mode: Discriminant,
    /// Fixed λ; cross-validated when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Use the one-standard-error λ.
    #[arg(long)]
    pub one_se: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training CSV used to fit L̂.
    #[arg(long)]
    pub input: PathBuf,
    /// Held-out vectors, one per row.
    #[arg(long)]
    pub test: PathBuf,
    /// Fixed λ; chosen by cross-validation with the one-standard-error rule
    /// when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: Common,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Row { source, .. } => exit_code(source),
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Fit(a) => &a.common,
        Command::Simulate(a) => &a.common,
        Command::Roc(a) => &a.common,
        Command::Cv(a) => &a.common,
        Command::Classify(a) => &a.common,
        Command::PredictError(a) => &a.common,
    }
}

/// Runs a parsed command on a pool of the requested size.
pub fn execute(cmd: Command) -> Result<i32> {
    let c = common(&cmd);
    if c.threads == Some(0) {
        return Err(Error::InvalidArgument("--threads must be positive".into()));
    }
    std::fs::create_dir_all(&c.output_dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = c.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    pool.install(|| match cmd {
        Command::Fit(a) => cmd_fit(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Roc(a) => cmd_roc(&a),
        Command::Cv(a) => cmd_cv(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::PredictError(a) => cmd_predict_error(&a),
    })
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be nonnegative, got {v}")))
    }
}

fn grid_ratio(g: &GridArgs) -> Result<f64> {
    let r = positive("--grid-ratio", g.grid_ratio)?;
    if r >= 1.0 || g.grid_count < 2 {
        return Err(Error::InvalidArgument("need --grid-ratio < 1 and --grid-count >= 2".into()));
    }
    Ok(r)
}

fn load(path: &Path, c: &Common) -> Result<SampleMatrix<f64>> {
    let x = io::read_matrix(path, c.header)?;
    Ok(if c.center { x.centered() } else { x })
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    lambda: f64,
    scheme: WeightScheme,
    p: usize,
    n: usize,
    converged: bool,
    converged_rows: usize,
    kkt_max: f64,
    total_iterations: usize,
    iterations: &'a [usize],
    wall_time_seconds: f64,
}

fn write_fit(c: &Common, fit: &FitResult<f64>, n: usize, started: Instant) -> Result<()> {
    io::write_lower(&c.out("L_hat.csv"), &fit.l_hat)?;
    io::write_sym(&c.out("omega_hat.csv"), &fit.omega())?;
    io::write_table(
        &c.out("bandwidths.csv"),
        Some(&["row", "bandwidth"]),
        fit.bandwidths.iter().enumerate().map(|(r, k)| vec![(r + 1).to_string(), k.to_string()]),
    )?;
    io::write_json(
        &c.out("diagnostics.json"),
        &Diagnostics {
            lambda: fit.lambda,
            scheme: fit.scheme,
            p: fit.dim(),
            n,
            converged: fit.converged(),
            converged_rows: fit.converged_rows,
            kkt_max: fit.kkt_max,
            total_iterations: fit.total_iterations(),
            iterations: &fit.iterations,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        },
    )
}

fn converged_code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        eprintln!("warning: some row problems did not converge");
        EXIT_NONCONVERGENCE
    }
}

fn cmd_fit(a: &FitArgs) -> Result<i32> {
    let started = Instant::now();
    let c = &a.common;
    let cfg = c.solver()?;
    let x = load(&a.input, c)?;
    let s = sample_covariance(&x, false)?;
    let lambda = match a.lambda {
        Some(l) => nonnegative("--lambda", l)?,
        None => lambda_max(&s, c.scheme)?,
    };
    let fit = fit_gram(&s, lambda, c.scheme, &cfg, Dispatch::Parallel)?;
    write_fit(c, &fit, x.n(), started)?;
    Ok(converged_code(fit.converged()))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let c = &a.common;
    let spec = SimulationSpec::new(a.model, a.p, a.n, c.seed)?;
    let (truth, x) = simulate::simulate::<f64>(&spec)?;
    io::write_lower(&c.out("L_true.csv"), &truth.l)?;
    io::write_sym(&c.out("omega_true.csv"), &truth.omega())?;
    io::write_samples(&c.out("X.csv"), &x)?;
    io::write_table(
        &c.out("true_bandwidths.csv"),
        Some(&["row", "bandwidth"]),
        truth.bandwidths.iter().enumerate().map(|(r, k)| vec![(r + 1).to_string(), k.to_string()]),
    )?;
    io::write_json(&c.out("simulation.json"), &spec)?;
    Ok(EXIT_OK)
}

fn cmd_roc(a: &RocArgs) -> Result<i32> {
    let c = &a.common;
    let cfg = c.solver()?;
    let ratio = grid_ratio(&a.grid)?;
    let (x, l_true) = match (a.model, &a.input, &a.truth) {
        (Some(model), _, _) => {
            let spec = SimulationSpec::new(model, a.p.unwrap_or(0), a.n.unwrap_or(0), c.seed)?;
            let (truth, x) = simulate::simulate::<f64>(&spec)?;
            (x, truth.l)
        }
        (None, Some(input), Some(truth)) => (load(input, c)?, io::read_lower(truth)?),
        _ => return Err(Error::InvalidArgument("give --model/--p/--n or --input/--truth".into())),
    };
    let x = if c.center { x.centered() } else { x };
    let s = sample_covariance(&x, false)?;
    let grid = lambda_grid(&s, c.scheme, a.grid.grid_count, ratio)?;
    let points = simulate::roc_curve(&x, &l_true, &grid, c.scheme, &cfg)?;
    io::write_table(
        &c.out("roc.csv"),
        Some(&["lambda", "sensitivity", "specificity"]),
        points
            .iter()
            .map(|p| vec![io::format_float(p.lambda), io::format_float(p.sensitivity), io::format_float(p.specificity)]),
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CvSelection {
    folds: usize,
    best_idx: usize,
    one_se_idx: usize,
    best_lambda: f64,
    one_se_lambda: f64,
}

fn cmd_cv(a: &CvArgs) -> Result<i32> {
    let c = &a.common;
    let cfg = c.solver()?;
    let ratio = grid_ratio(&a.grid)?;
    let x = io::read_matrix::<f64>(&a.input, c.header)?;
    let s = sample_covariance(&if c.center { x.centered() } else { x.clone() }, false)?;
    let grid = lambda_grid(&s, c.scheme, a.grid.grid_count, ratio)?;
    let cv = cross_validate(&x, &grid, a.folds, c.scheme, &cfg, c.seed, c.center)?;
    io::write_table(
        &c.out("cv.csv"),
        Some(&["lambda", "mean_score", "se_score"]),
        (0..grid.len()).map(|i| {
            vec![
                io::format_float(cv.lambdas[i]),
                io::format_float(cv.mean_score[i]),
                io::format_float(cv.se_score[i]),
            ]
        }),
    )?;
    io::write_json(
        &c.out("cv_selection.json"),
        &CvSelection {
            folds: a.folds,
            best_idx: cv.best_idx,
            one_se_idx: cv.one_se_idx,
            best_lambda: cv.best_lambda(),
            one_se_lambda: cv.one_se_lambda(),
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ClassifySummary {
    mode: Discriminant,
    scheme: WeightScheme,
    lambdas: Vec<f64>,
    train_error: f64,
    test_error: f64,
}

fn cmd_classify(a: &ClassifyArgs) -> Result<i32> {
    let c = &a.common;
    let cfg = c.solver()?;
    let (train, train_y) = io::read_labeled::<f64>(&a.train, c.header)?;
    let (test, test_y) = io::read_labeled::<f64>(&a.test, c.header)?;
    let choice = match a.lambda {
        Some(l) => LambdaChoice::Fixed(nonnegative("--lambda", l)?),
        None => LambdaChoice::CrossValidated(CvSettings {
            grid_count: a.grid.grid_count,
            grid_ratio: grid_ratio(&a.grid)?,
            folds: a.folds,
            seed: c.seed,
            one_se: a.one_se,
        }),
    };
    let model = apps::fit_classifier(&train, &train_y, a.mode, c.scheme, choice, &cfg)?;
    let train_eval = apps::evaluate(&model, &train, &train_y)?;
    let test_eval = apps::evaluate(&model, &test, &test_y)?;
    let predicted = model.classify_all(&test)?;
    let mut header = vec!["true".to_string()];
    header.extend(test_eval.labels.iter().map(|l| format!("pred_{l}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    io::write_table(
        &c.out("confusion.csv"),
        Some(&header_refs),
        test_eval.labels.iter().zip(&test_eval.counts).map(|(l, row)| {
            std::iter::once(l.to_string()).chain(row.iter().map(usize::to_string)).collect()
        }),
    )?;
    io::write_table(
        &c.out("predictions.csv"),
        Some(&["true", "predicted"]),
        test_y.iter().zip(&predicted).map(|(t, p)| vec![t.to_string(), p.to_string()]),
    )?;
    io::write_table(
        &c.out("error_rate.csv"),
        Some(&["split", "error_rate"]),
        [
            vec!["train".to_string(), io::format_float(train_eval.error_rate)],
            vec!["test".to_string(), io::format_float(test_eval.error_rate)],
        ],
    )?;
    io::write_json(
        &c.out("classify.json"),
        &ClassifySummary {
            mode: a.mode,
            scheme: c.scheme,
            lambdas: model.lambdas.clone(),
            train_error: train_eval.error_rate,
            test_error: test_eval.error_rate,
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PredictSummary {
    lambda: f64,
    mean_error: f64,
    converged: bool,
}

fn cmd_predict_error(a: &PredictArgs) -> Result<i32> {
    let c = &a.common;
    let cfg = c.solver()?;
    let x = io::read_matrix::<f64>(&a.input, c.header)?;
    let test = io::read_matrix::<f64>(&a.test, c.header)?;
    if test.p() != x.p() {
        return Err(Error::DimensionMismatch { expected: x.p(), found: test.p() });
    }
    let (x, test) = if c.center {
        let means = x.column_means();
        (x.shifted(&means), test.shifted(&means))
    } else {
        (x, test)
    };
    let s = sample_covariance(&x, false)?;
    let lambda = match a.lambda {
        Some(l) => nonnegative("--lambda", l)?,
        None => {
            let grid = lambda_grid(&s, c.scheme, a.grid.grid_count, grid_ratio(&a.grid)?)?;
            cross_validate(&x, &grid, a.folds, c.scheme, &cfg, c.seed, false)?.one_se_lambda()
        }
    };
    let fit = fit_gram(&s, lambda, c.scheme, &cfg, Dispatch::Parallel)?;
    let errors: Vec<f64> = test
        .rows()
        .map(|row| apps::prediction_error(&fit.l_hat, row))
        .collect::<Result<_>>()?;
    io::write_table(
        &c.out("prediction_error.csv"),
        Some(&["index", "error"]),
        errors.iter().enumerate().map(|(i, e)| vec![(i + 1).to_string(), io::format_float(*e)]),
    )?;
    io::write_lower(&c.out("L_hat.csv"), &fit.l_hat)?;
    io::write_json(
        &c.out("prediction_summary.json"),
        &PredictSummary {
            lambda,
            mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
            converged: fit.converged(),
        },
    )?;
    Ok(converged_code(fit.converged()))
}
