//! The `invspec` command line.
//!
//! Everything lives in the library so that tests and the acceptance suite
//! drive the same code as the binary; `src/bin/invspec.rs` only maps errors
//! to an exit code.
//!
//! A `--config file.toml` holds flag values: top-level keys apply to every
//! subcommand, a `[train]` (or `[gen]`, ...) table to that subcommand only.
//! Keys use the long flag name; flags given on the command line win.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::dataset::{self, Axis, Dataset, GridSpec};
use crate::error::{Error, Result};
use crate::mlcore::{
    grid_search_cv, item_rmse, permutation_importance, r2_score_with, rmse, ConstantOutput, FitReport, ForestConfig,
    Importance, MlpConfig, ModelSpec, Optimizer, Pipeline, Predict,
};
use crate::sturm::{sample_potential, sl_eigenvalues, RobinBc, SymmetricPotential};
use crate::transmission::{
    det_eigenvalues, det_eigenvalues_adaptive, det_scan, galerkin_eigenvalues, DetConfig, LayeredIndex, Spectrum,
};

/// Out-of-sample `b` values for the Sturm–Liouville inverse problem.
pub const SL_TEST_B: [f64; 4] = [
    -10.0 * std::f64::consts::SQRT_2,
    -std::f64::consts::SQRT_2,
    std::f64::consts::SQRT_2,
    10.0 * std::f64::consts::SQRT_2,
];

/// Out-of-sample `(n_1, n_2, d_1)` for the two-layer problem.
pub const TE2_TEST_INDICES: [[f64; 3]; 10] = [
    [5.6, 3.7, 0.1],
    [3.1, 2.8, 0.9],
    [6.2, 9.8, 0.5],
    [9.1, 2.5, 0.6],
    [3.5, 5.7, 0.8],
    [3.3, 3.9, 0.4],
    [3.9, 7.3, 0.2],
    [6.0, 5.5, 0.7],
    [2.4, 8.2, 0.6],
    [8.3, 2.8, 0.3],
];

/// Out-of-sample `(n_1, .., n_4)` for the four-layer problem.
pub const TE4_TEST_INDICES: [[f64; 4]; 10] = [
    [4.0, 4.0, 4.0, 4.0],
    [5.5, 3.1, 3.1, 3.1],
    [6.1, 6.1, 3.5, 3.5],
    [4.6, 7.9, 8.2, 5.5],
    [2.5, 7.3, 3.7, 6.5],
    [6.8, 7.3, 5.6, 5.3],
    [6.8, 2.5, 2.0, 5.0],
    [6.6, 5.0, 6.0, 9.0],
    [7.7, 7.5, 8.0, 2.8],
    [6.1, 8.4, 4.0, 4.8],
];

const TE4_JUMPS: [f64; 3] = [0.25, 0.5, 0.75];

/// Initial scan limit and angular order for test-time determinant solves.
const TEST_K_MAX: f64 = 10.0;
const TEST_M_MAX: u32 = 5;

#[derive(Debug, Parser)]
#[command(name = "invspec", version, about = "Direct and inverse eigenvalue problems")]
pub struct Cli {
    /// TOML file with flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled dataset by sweeping a parameter grid.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Solve a direct problem and print its eigenvalues.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Fit a model on a dataset (70/30 split by default).
    Train(TrainArgs),
    /// Score a saved model on labeled data or the built-in test potentials.
    Eval(EvalArgs),
    /// Predict parameters from a list of eigenvalues.
    Predict(PredictArgs),
    /// Rank eigenvalues by permutation importance.
    Importance(ImportanceArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Sturm–Liouville potentials `q = 1 - exp(b (x - 1/2)²)`.
    Sl(GenSlArgs),
    /// Layered refractive indices (transmission eigenvalues, Galerkin path).
    Te(GenTeArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GenSlArgs {
    #[arg(long, default_value_t = -20.0)]
    pub b_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub b_max: f64,
    /// Defaults to 0.04 (1001 samples), or 0.4 with --desk.
    #[arg(long)]
    pub b_step: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub eigs: usize,
    /// Reduced grid for quick runs.
    #[arg(long)]
    pub desk: bool,
    #[arg(long, default_value = "sl.csv")]
    pub out: PathBuf,
    /// Recorded in the manifest; the sweep itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenTeArgs {
    /// 2 (free jump radius) or 4 (equal widths).
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 2.0)]
    pub n_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub n_max: f64,
    /// Defaults to 0.1 (2 layers) or 0.25 (4 layers); --desk doubles it.
    #[arg(long)]
    pub n_step: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub d_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub d_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub d_step: f64,
    #[arg(long, default_value_t = 6)]
    pub eigs: usize,
    #[arg(long, default_value_t = 12)]
    pub n_r: usize,
    #[arg(long, default_value_t = 5)]
    pub m_max: u32,
    #[arg(long)]
    pub desk: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Lowest Sturm–Liouville eigenvalues for one `b`.
    Sl(SolveSlArgs),
    /// Lowest real transmission eigenvalues of a layered disc.
    Te(SolveTeArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveSlArgs {
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    /// Robin coefficient at x = 0.
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// Robin coefficient at x = 1.
    #[arg(long, default_value_t = 0.0)]
    pub big_h: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Det,
    Galerkin,
    /// Both over `m = 0..=m_max`, with the largest difference.
    Compare,
}

#[derive(Debug, Args)]
pub struct SolveTeArgs {
    /// Layer values from the centre out.
    #[arg(long, value_delimiter = ',', required = true)]
    pub index: Vec<f64>,
    /// Jump radii; equal widths when omitted.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Det)]
    pub method: Method,
    #[arg(long, default_value_t = 6)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub m_max: u32,
    /// Initial determinant scan limit.
    #[arg(long, default_value_t = 10.0)]
    pub k_max: f64,
    /// Keep `m_max` and `k_max` fixed instead of extending them when the list is unstable.
    #[arg(long)]
    pub fixed: bool,
    #[arg(long, default_value_t = 20)]
    pub n_r: usize,
    /// Write the determinant curves `k, D_0, .., D_mmax` as CSV.
    #[arg(long, value_name = "PATH")]
    pub emit_scan: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Knn,
    Rf,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Knn)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "10,30")]
    pub hidden: Vec<usize>,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Adam)]
    pub optimizer: OptimizerKind,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 500)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 20)]
    pub patience: usize,
    /// Fit the network against raw rather than standardized targets.
    #[arg(long)]
    pub raw_targets: bool,
    /// Fraction of the shuffled data used for training.
    #[arg(long, default_value_t = 0.7)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid file of candidate models; the best by k-fold CV is refit.
    #[arg(long, value_name = "PATH")]
    pub tune: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Model file.
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Score table (CSV).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-epoch losses of the network (CSV).
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled CSV; without it the built-in test potentials are used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Use only the first N built-in test items.
    #[arg(long)]
    pub tests: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub eigs: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Score on the validation part of this train fraction (same as `train --split`).
    #[arg(long)]
    pub split: Option<f64>,
    /// Seed of that split; defaults to --seed.
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Candidate list for `train --tune`.
#[derive(Debug, Deserialize)]
struct TuneGrid {
    folds: Option<usize>,
    candidate: Vec<ModelSpec>,
}

// ---------------------------------------------------------------------------
// config file
// ---------------------------------------------------------------------------

fn config_arg(args: &[OsString]) -> Result<Option<(usize, usize, PathBuf)>> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| Error::Usage("--config needs a path".into()))?;
            return Ok(Some((i, 2, PathBuf::from(path))));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some((i, 1, PathBuf::from(p))));
        }
    }
    Ok(None)
}

fn flag_value(value: &toml::Value) -> Result<Option<String>> {
    Ok(match value {
        toml::Value::Boolean(_) => None,
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Array(items) => {
            let parts: Result<Vec<String>> = items
                .iter()
                .map(|v| flag_value(v)?.ok_or_else(|| Error::Usage("arrays of booleans are not flags".into())))
                .collect();
            Some(parts?.join(","))
        }
        other => return Err(Error::Usage(format!("unsupported config value {other}"))),
    })
}

/// Splices the values of a `--config` file into the argument list, just
/// after the subcommand, skipping flags the user passed explicitly.
pub fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some((at, width, path)) = config_arg(&args)? else {
        return Ok(args);
    };
    args.drain(at..at + width);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;

    // program name, then one or two subcommand words
    let mut end = 1;
    while end < args.len().min(3) && !args[end].to_string_lossy().starts_with('-') {
        end += 1;
    }
    let words: Vec<String> = args[1..end].iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let given: Vec<String> = args[end..]
        .iter()
        .filter_map(|a| {
            let a = a.to_string_lossy();
            a.strip_prefix("--").map(|f| f.split('=').next().unwrap_or_default().to_string())
        })
        .collect();

    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    let mut collect = |t: &toml::Table| {
        for (k, v) in t {
            if !v.is_table() {
                entries.retain(|(e, _)| e != k);
                entries.push((k.clone(), v.clone()));
            }
        }
    };
    collect(&table);
    let mut scope = &table;
    for w in &words {
        match scope.get(w).and_then(|v| v.as_table()) {
            Some(t) => {
                collect(t);
                scope = t;
            }
            None => break,
        }
    }

    let mut extra = Vec::new();
    for (key, value) in entries {
        let flag = key.replace('_', "-");
        if given.contains(&flag) {
            continue;
        }
        match (&value, flag_value(&value)?) {
            (toml::Value::Boolean(true), _) => extra.push(OsString::from(format!("--{flag}"))),
            (toml::Value::Boolean(false), _) => {}
            (_, Some(v)) => extra.push(OsString::from(format!("--{flag}={v}"))),
            (_, None) => {}
        }
    }
    args.splice(end..end, extra);
    Ok(args)
}

// ---------------------------------------------------------------------------
// entry points
// ---------------------------------------------------------------------------

/// Parses `args` (program name first) and runs the command, writing tables
/// to `out`. Help and version requests print and succeed.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = expand_config(args.into_iter().map(Into::into).collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(stdout_err)?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.trim().trim_start_matches("error: ");
            return Err(Error::Usage(msg.to_string()));
        }
    };
    match cli.command {
        Command::Gen(GenCommand::Sl(a)) => run_gen_sl(&a, out),
        Command::Gen(GenCommand::Te(a)) => run_gen_te(&a, out),
        Command::Solve(SolveCommand::Sl(a)) => run_solve_sl(&a, out),
        Command::Solve(SolveCommand::Te(a)) => run_solve_te(&a, out),
        Command::Train(a) => run_train(&a, out),
        Command::Eval(a) => run_eval(&a, out),
        Command::Predict(a) => run_predict(&a, out),
        Command::Importance(a) => run_importance(&a, out),
    }
}

/// [`run_with`] on the process arguments and standard output.
pub fn run() -> Result<()> {
    run_with(std::env::args_os(), &mut std::io::stdout().lock())
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Prints `text` and, when asked, writes it to `path` as well.
fn emit(out: &mut dyn Write, text: &str, path: Option<&Path>) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if let Some(p) = path {
        write_file(p, text)?;
    }
    Ok(())
}

fn run_gen(spec: &GridSpec, path: &Path, seed: Option<u64>, out: &mut dyn Write) -> Result<()> {
    spec.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let generated = dataset::generate(spec)?;
    let mut manifest = generated.manifest(spec);
    manifest.seed = seed;
    dataset::save(&generated.data, path, &manifest)?;
    writeln!(
        out,
        "wrote {} samples ({} skipped) to {}",
        generated.data.len(),
        generated.skipped,
        path.display()
    )
    .map_err(stdout_err)
}

fn axis(min: f64, max: f64, step: f64) -> Result<Axis> {
    Axis::new(min, max, step).map_err(|e| Error::Usage(e.to_string()))
}

pub fn run_gen_sl(a: &GenSlArgs, out: &mut dyn Write) -> Result<()> {
    let step = a.b_step.unwrap_or(if a.desk { 0.4 } else { 0.04 });
    let mut spec = GridSpec::sl(axis(a.b_min, a.b_max, step)?);
    spec.eigs = a.eigs;
    run_gen(&spec, &a.out, a.seed, out)
}

pub fn run_gen_te(a: &GenTeArgs, out: &mut dyn Write) -> Result<()> {
    if a.layers != 2 && a.layers != 4 {
        return Err(Error::Usage(format!("--layers must be 2 or 4, got {}", a.layers)));
    }
    let full = if a.layers == 2 { 0.1 } else { 0.25 };
    let n_step = a.n_step.unwrap_or(if a.desk { 2.0 * full } else { full });
    let n = axis(a.n_min, a.n_max, n_step)?;
    let mut spec = if a.layers == 2 {
        let mut s = GridSpec::te2(n_step, a.d_step);
        s.axes = vec![n, n, axis(a.d_min, a.d_max, a.d_step)?];
        s
    } else {
        let mut s = GridSpec::te4(n_step);
        s.axes = vec![n; 4];
        s
    };
    spec.eigs = a.eigs;
    spec.n_r = a.n_r;
    spec.m_max = a.m_max;
    let path = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("te{}.csv", a.layers)));
    run_gen(&spec, &path, a.seed, out)
}

pub fn run_solve_sl(a: &SolveSlArgs, out: &mut dyn Write) -> Result<()> {
    let spectrum = sl_eigenvalues(&SymmetricPotential::new(a.b), RobinBc::new(a.h, a.big_h), a.count)?;
    let mut text = String::from("l,lambda\n");
    for (l, v) in spectrum.eigenvalues.iter().enumerate() {
        let _ = writeln!(text, "{l},{}", num(*v));
    }
    emit(out, &text, a.out.as_deref())
}

fn equal_jumps(layers: usize) -> Vec<f64> {
    (1..layers).map(|i| i as f64 / layers as f64).collect()
}

fn spectrum_table(header: &str, s: &Spectrum) -> String {
    let mut text = format!("{header}\n");
    for e in &s.entries {
        let _ = writeln!(text, "{},{}", num(e.k), e.m);
    }
    text
}

fn warn_spectrum(s: &Spectrum) {
    if s.warnings.near_scan_limit {
        eprintln!("warning: last eigenvalue lies near the scan limit");
    }
    if s.warnings.mode_cutoff_sensitive {
        eprintln!("warning: list changes when one more angular order is added");
    }
}

pub fn run_solve_te(a: &SolveTeArgs, out: &mut dyn Write) -> Result<()> {
    let jumps = if a.d.is_empty() { equal_jumps(a.index.len()) } else { a.d.clone() };
    let index = LayeredIndex::new(a.index.clone(), jumps)?;
    let det = |index: &LayeredIndex| -> Result<Spectrum> {
        let s = if a.fixed {
            det_eigenvalues(index, a.m_max, a.k_max, a.count)?
        } else {
            det_eigenvalues_adaptive(index, a.m_max, a.k_max, a.count)?
        };
        warn_spectrum(&s);
        Ok(s)
    };
    let text = match a.method {
        Method::Det => spectrum_table("k,m", &det(&index)?),
        Method::Galerkin => spectrum_table("k,m", &galerkin_eigenvalues(&index, a.m_max, a.n_r, a.count)?),
        Method::Compare => {
            // same angular orders on both sides
            let d = det_eigenvalues(&index, a.m_max, a.k_max, a.count)?;
            warn_spectrum(&d);
            let g = galerkin_eigenvalues(&index, a.m_max, a.n_r, a.count)?;
            let mut text = String::from("det_k,det_m,galerkin_k,galerkin_m,difference\n");
            let mut worst: f64 = 0.0;
            for (x, y) in d.entries.iter().zip(&g.entries) {
                let diff = (x.k - y.k).abs();
                worst = worst.max(diff);
                let _ = writeln!(text, "{},{},{},{},{}", num(x.k), x.m, num(y.k), y.m, num(diff));
            }
            let _ = writeln!(text, "max_difference,,,,{}", num(worst));
            text
        }
    };
    emit(out, &text, a.out.as_deref())?;
    if let Some(path) = &a.emit_scan {
        write_file(path, &scan_table(&index, a.m_max, a.k_max)?)?;
    }
    Ok(())
}

/// Columns `k, D_0, .., D_mmax` of the row-scaled determinants on the scan grid.
pub fn scan_table(index: &LayeredIndex, m_max: u32, k_max: f64) -> Result<String> {
    let cfg = DetConfig::default();
    let curves: Vec<Vec<(f64, f64)>> = (0..=m_max).map(|m| det_scan(index, m, k_max, &cfg)).collect::<Result<_>>()?;
    let mut text = String::from("k");
    for m in 0..=m_max {
        let _ = write!(text, ",D_{m}");
    }
    text.push('\n');
    for i in 0..curves[0].len() {
        let _ = write!(text, "{}", num(curves[0][i].0));
        for c in &curves {
            let _ = write!(text, ",{}", num(c[i].1));
        }
        text.push('\n');
    }
    Ok(text)
}

impl TrainArgs {
    /// The model the flags describe.
    pub fn spec(&self) -> ModelSpec {
        match self.model {
            ModelKind::Knn => ModelSpec::Knn { k: self.k },
            ModelKind::Rf => ModelSpec::Forest(ForestConfig {
                trees: self.trees,
                max_features: self.max_features,
                min_leaf: self.min_leaf,
                max_depth: self.max_depth,
                seed: self.seed,
            }),
            ModelKind::Mlp => {
                let optimizer = match (self.optimizer, self.learning_rate) {
                    (OptimizerKind::Adam, None) => Optimizer::adam(),
                    (OptimizerKind::Adam, Some(lr)) => match Optimizer::adam() {
                        Optimizer::Adam { beta1, beta2, epsilon, .. } => Optimizer::Adam {
                            learning_rate: lr,
                            beta1,
                            beta2,
                            epsilon,
                        },
                        sgd => sgd,
                    },
                    (OptimizerKind::Sgd, lr) => Optimizer::Sgd {
                        learning_rate: lr.unwrap_or(1e-2),
                    },
                };
                ModelSpec::Mlp(MlpConfig {
                    hidden: self.hidden.clone(),
                    optimizer,
                    l2: self.l2,
                    batch_size: self.batch_size,
                    max_epochs: self.max_epochs,
                    patience: self.patience,
                    scale_targets: !self.raw_targets,
                    seed: self.seed,
                })
            }
        }
    }
}

/// One-row score table of a fit.
pub fn fit_report_csv(report: &FitReport, n_train: usize, n_validate: usize) -> String {
    let (epochs, best) = report
        .history
        .as_ref()
        .map_or((String::new(), String::new()), |h| (h.train_loss.len().to_string(), h.best_epoch.to_string()));
    format!(
        "model,train_samples,validate_samples,train_r2,validate_r2,train_rmse,validate_rmse,epochs,best_epoch\n\
         {},{n_train},{n_validate},{},{},{},{},{epochs},{best}\n",
        report.spec.name(),
        num(report.train_r2),
        num(report.validate_r2),
        num(report.train_rmse),
        num(report.validate_rmse),
    )
}

/// Splits, optionally tunes, and fits; the returned report is the CSV text.
pub fn train(data: &Dataset, spec: &ModelSpec, split: f64, seed: u64) -> Result<(Pipeline, FitReport, String)> {
    let (train, validate) = dataset::shuffle_split(data, split, seed)?;
    let (pipeline, report) = Pipeline::fit(&spec.with_seed(seed), &train, &validate)?;
    let csv = fit_report_csv(&report, train.len(), validate.len());
    Ok((pipeline, report, csv))
}

pub fn run_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let (data, _) = dataset::load(&a.data)?;
    let spec = match &a.tune {
        None => a.spec(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let grid: TuneGrid = toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
            let (train, _) = dataset::shuffle_split(&data, a.split, a.seed)?;
            let candidates: Vec<ModelSpec> = grid.candidate.iter().map(|c| c.with_seed(a.seed)).collect();
            let result = grid_search_cv(&candidates, &train, grid.folds.unwrap_or(a.folds), a.seed)?;
            let mut text = String::from("candidate,spec,cv_mse\n");
            for (i, (c, s)) in candidates.iter().zip(&result.scores).enumerate() {
                let desc = serde_json::to_string(c).map_err(|e| Error::Format(e.to_string()))?;
                let _ = writeln!(text, "{i},\"{}\",{}", desc.replace('"', "\"\""), num(*s));
            }
            let _ = writeln!(text, "best,{},", result.best_index);
            out.write_all(text.as_bytes()).map_err(stdout_err)?;
            result.best
        }
    };
    let (pipeline, report, csv) = train(&data, &spec, a.split, a.seed)?;
    pipeline.save(&a.out)?;
    emit(out, &csv, a.report.as_deref())?;
    if let (Some(path), Some(h)) = (&a.history, &report.history) {
        let mut text = String::from("epoch,train_loss,validate_loss\n");
        for (i, (t, v)) in h.train_loss.iter().zip(&h.validate_loss).enumerate() {
            let _ = writeln!(text, "{},{},{}", i + 1, num(*t), num(*v));
        }
        write_file(path, &text)?;
    }
    Ok(())
}

/// Labeled out-of-sample items with display names.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub labels: Vec<String>,
    pub data: Dataset,
}

/// SL test items: exact Neumann eigenvalues → sampled potential.
pub fn sl_test_set(bs: &[f64], eigs: usize) -> Result<TestSet> {
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for &b in bs {
        let q = SymmetricPotential::new(b);
        features.push(sl_eigenvalues(&q, RobinBc::NEUMANN, eigs)?.eigenvalues);
        targets.push(sample_potential(&q).to_vec());
    }
    Ok(TestSet {
        labels: bs.iter().map(|b| format!("b={b:.4}")).collect(),
        data: Dataset::new(features, targets)?,
    })
}

/// Transmission test items: determinant eigenvalues → index parameters.
/// Two-layer points are `(n_1, n_2, d_1)`; four-layer points are `n_1..n_4`
/// with equal widths.
pub fn te_test_set(points: &[Vec<f64>], eigs: usize) -> Result<TestSet> {
    let mut features = Vec::new();
    for p in points {
        let index = match p.len() {
            3 => LayeredIndex::new(vec![p[0], p[1]], vec![p[2]])?,
            4 => LayeredIndex::new(p.clone(), TE4_JUMPS.to_vec())?,
            n => return Err(Error::Contract(format!("no layered family with {n} parameters"))),
        };
        let s = det_eigenvalues_adaptive(&index, TEST_M_MAX, TEST_K_MAX, eigs)?;
        warn_spectrum(&s);
        features.push(s.values());
    }
    let labels = points
        .iter()
        .map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    Ok(TestSet {
        labels,
        data: Dataset::new(features, points.to_vec())?,
    })
}

/// The built-in test items matching a model's shape, truncated to `limit`.
pub fn builtin_tests(n_features: usize, n_targets: usize, limit: Option<usize>) -> Result<TestSet> {
    let take = |n: usize| limit.unwrap_or(n).min(n);
    match n_targets {
        21 => sl_test_set(&SL_TEST_B[..take(SL_TEST_B.len())], n_features),
        3 => te_test_set(
            &TE2_TEST_INDICES[..take(10)].iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
            n_features,
        ),
        4 => te_test_set(
            &TE4_TEST_INDICES[..take(10)].iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
            n_features,
        ),
        n => Err(Error::Usage(format!("no built-in tests for models with {n} outputs; pass --data"))),
    }
}

/// Per-item and total errors of a model on a test set.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub actual: Vec<Vec<f64>>,
    pub predicted: Vec<Vec<f64>>,
    pub item_rmse: Vec<f64>,
    /// RMSE over every entry of every item.
    pub total_rmse: f64,
    /// `None` with fewer than two items.
    pub r2: Option<f64>,
}

impl EvalReport {
    /// `item, rmse, t1..tM, p1..pM` per item, then a `total` row with R².
    pub fn to_csv(&self) -> String {
        let m = self.actual.first().map_or(0, Vec::len);
        let mut text = String::from("item,rmse,r2");
        for i in 1..=m {
            let _ = write!(text, ",t{i}");
        }
        for i in 1..=m {
            let _ = write!(text, ",p{i}");
        }
        text.push('\n');
        for (((label, a), p), e) in self.labels.iter().zip(&self.actual).zip(&self.predicted).zip(&self.item_rmse) {
            let _ = write!(text, "{label},{},", num(*e));
            for v in a.iter().chain(p) {
                let _ = write!(text, ",{}", num(*v));
            }
            text.push('\n');
        }
        let r2 = self.r2.map_or(String::new(), num);
        let _ = writeln!(text, "total,{},{r2}{}", num(self.total_rmse), ",".repeat(2 * m));
        text
    }
}

pub fn evaluate(model: &Pipeline, tests: &TestSet) -> Result<EvalReport> {
    let predicted = model.predict(&tests.data.features)?;
    let actual = tests.data.targets.clone();
    if predicted.first().map(Vec::len) != actual.first().map(Vec::len) {
        return Err(Error::Contract(format!(
            "model predicts {} outputs, data has {}",
            predicted.first().map_or(0, Vec::len),
            actual.first().map_or(0, Vec::len)
        )));
    }
    let item_rmse = actual.iter().zip(&predicted).map(|(a, p)| item_rmse(a, p)).collect();
    let r2 = if actual.len() >= 2 {
        Some(r2_score_with(&actual, &predicted, ConstantOutput::Convention)?)
    } else {
        None
    };
    Ok(EvalReport {
        labels: tests.labels.clone(),
        total_rmse: rmse(&actual, &predicted)?,
        actual,
        predicted,
        item_rmse,
        r2,
    })
}

fn model_outputs(model: &Pipeline) -> Result<usize> {
    let probe = vec![model.scaler.means.clone()];
    Ok(model.predict(&probe)?.first().map_or(0, Vec::len))
}

pub fn run_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = Pipeline::load(&a.model)?;
    let tests = match &a.data {
        Some(path) => {
            let (data, _) = dataset::load(path)?;
            let labels = (1..=data.len()).map(|i| i.to_string()).collect();
            TestSet { labels, data }
        }
        None => builtin_tests(model.n_features(), model_outputs(&model)?, a.tests)?,
    };
    if tests.data.n_features() != model.n_features() {
        return Err(Error::Contract(format!(
            "model expects {} eigenvalues, data has {}",
            model.n_features(),
            tests.data.n_features()
        )));
    }
    emit(out, &evaluate(&model, &tests)?.to_csv(), a.out.as_deref())
}

pub fn run_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = Pipeline::load(&a.model)?;
    let p = model.predict(std::slice::from_ref(&a.eigs))?.remove(0);
    let header: Vec<String> = (1..=p.len()).map(|i| format!("t{i}")).collect();
    let row: Vec<String> = p.iter().map(|v| num(*v)).collect();
    emit(out, &format!("{}\n{}\n", header.join(","), row.join(",")), a.out.as_deref())
}

/// `rank, feature, importance, std`, most important first.
pub fn importance_csv(imp: &Importance) -> String {
    let mut text = String::from("rank,feature,importance,std\n");
    for (rank, &f) in imp.ranking.iter().enumerate() {
        let _ = writeln!(text, "{},k{},{},{}", rank + 1, f + 1, num(imp.raw[f]), num(imp.std[f]));
    }
    text
}

pub fn run_importance(a: &ImportanceArgs, out: &mut dyn Write) -> Result<()> {
    let model = Pipeline::load(&a.model)?;
    let (data, _) = dataset::load(&a.data)?;
    let data = match a.split {
        Some(f) => dataset::shuffle_split(&data, f, a.split_seed.unwrap_or(a.seed))?.1,
        None => data,
    };
    let imp = permutation_importance(&model, &data.features, &data.targets, a.repeats, a.seed)?;
    emit(out, &importance_csv(&imp), a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    fn run_str(s: &str) -> Result<String> {
        let mut buf = Vec::new();
        run_with(args(s), &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn zero_step_is_a_usage_error() {
        let err = run_str("invspec gen sl --b-step 0 --out /dev/null").unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
    }

    #[test]
    fn unknown_model_is_a_usage_error() {
        let err = run_str("invspec train --data x.csv --model svm").unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{err}");
    }

    #[test]
    fn solve_sl_flat_potential() {
        let text = run_str("invspec solve sl --b 0 --count 3").unwrap();
        let vals: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        let pi2 = std::f64::consts::PI.powi(2);
        for (v, want) in vals.iter().zip([0.0, pi2, 4.0 * pi2]) {
            assert!((v - want).abs() < 1e-8, "{v} vs {want}");
        }
    }

    #[test]
    fn negative_b_parses() {
        let text = run_str("invspec solve sl --b -14.5 --count 2").unwrap();
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn help_succeeds() {
        assert!(run_str("invspec --help").unwrap().contains("Usage"));
    }

    #[test]
    fn config_values_fill_in_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "seed = 7\n[train]\nmodel = \"rf\"\ntrees = 12\nhidden = [4, 5]\n[gen.sl]\ndesk = true\n").unwrap();
        let cfg = cfg.display();
        let a = expand_config(args(&format!("invspec train --config {cfg} --data d.csv --trees 3"))).unwrap();
        let cli = Cli::try_parse_from(a).unwrap();
        let Command::Train(t) = cli.command else { panic!() };
        assert_eq!((t.model, t.trees, t.seed, t.hidden.clone()), (ModelKind::Rf, 3, 7, vec![4, 5]));

        let a = expand_config(args(&format!("invspec gen sl --config={cfg}"))).unwrap();
        let Command::Gen(GenCommand::Sl(g)) = Cli::try_parse_from(a).unwrap().command else { panic!() };
        assert!(g.desk);
    }

    #[test]
    fn equal_widths_by_default() {
        assert_eq!(equal_jumps(4), vec![0.25, 0.5, 0.75]);
        assert_eq!(equal_jumps(2), vec![0.5]);
    }

    #[test]
    fn eval_report_layout() {
        let r = EvalReport {
            labels: vec!["a".into(), "b".into()],
            actual: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            predicted: vec![vec![1.0, 2.5], vec![3.0, 4.0]],
            item_rmse: vec![0.35, 0.0],
            total_rmse: 0.25,
            r2: Some(0.9),
        };
        let csv = r.to_csv();
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.iter().all(|&w| w == 7), "{csv}");
        assert!(csv.lines().last().unwrap().starts_with("total,0.25,0.9"));
    }
}
