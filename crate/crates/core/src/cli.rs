//! The `lsenet` command-line tool.
//!
//! Every subcommand writes its artifact to `--output` (or stdout when
//! omitted). Failures print a one-line JSON error object on stderr and exit
//! with [`Error::exit_code`]; argument errors exit with 2.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{render_table, run_bench};
use crate::dataset::{Dataset, Space};
use crate::error::{Error, Result};
use crate::fit::{
    compute_metrics, cross_validate, fit_gpos, fit_lse, fit_max_affine, CvConfig, FitConfig,
};
use crate::model::Model;
use crate::optimize::{
    maximize_via_reciprocal, minimize_lse_box, solve_gp_box, BoxConstraints, SolveReport,
    SolverOptions,
};
use crate::synth::{generate_dataset, Family, GeneratorSpec};

#[derive(Debug, Parser)]
#[command(
    name = "lsenet",
    version,
    about = "Fit and optimize log-sum-exp convex surrogate models"
)]
pub struct CommandConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV dataset; writes the model JSON and a fit report.
    Fit(FitArgs),
    /// Evaluate a model on the inputs of a CSV file.
    Predict(PredictArgs),
    /// Error metrics of a model on a labelled CSV dataset.
    Metrics(MetricsArgs),
    /// Grid search over terms and temperature by k-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Minimize an LSE (or GPOS) model over a box.
    Optimize(OptimizeArgs),
    /// Minimize a GPOS model over a positive box via its log transform.
    GpOptimize(OptimizeArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Run the built-in property checks and print a summary table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct TrainerArgs {
    /// Number of terms K.
    #[arg(long, default_value_t = 3)]
    pub terms: usize,
    /// Temperature T.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 3000)]
    pub max_iterations: usize,
    /// Ridge weight on the exponents.
    #[arg(long, default_value_t = 0.0)]
    pub regularization: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the space implied by the CSV header.
    #[arg(long, value_parser = parse_space)]
    pub space: Option<Space>,
}

impl TrainerArgs {
    fn fit_config(&self) -> FitConfig {
        FitConfig {
            terms: self.terms,
            temperature: self.temperature,
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            regularization: self.regularization,
            seed: self.seed,
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the fitted model JSON.
    #[arg(long)]
    pub model_out: PathBuf,
    /// Where to write the fit report JSON (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Fit a max-affine model instead of an LSE model.
    #[arg(long)]
    pub max_affine: bool,
    #[command(flatten)]
    pub trainer: TrainerArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with columns x1..xn (or z1..zn), optionally followed by y (or w).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated term counts to try.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub terms_grid: Vec<usize>,
    /// Comma-separated temperatures to try.
    #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01")]
    pub temperature_grid: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_space)]
    pub space: Option<Space>,
    /// Refit the selected cell on all data and write the model here.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Where to write the grid table JSON (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Lower bounds, comma-separated; a single value applies to every axis.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub box_lower: Vec<f64>,
    /// Upper bounds, comma-separated; a single value applies to every axis.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub box_upper: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    /// Treat the model as a surrogate of 1/P and report the estimated maximum of P.
    #[arg(long)]
    pub reciprocal: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Quadratic,
    Norm,
    MaxAffine,
    Lse,
    Posynomial,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator spec JSON; overrides the family flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FamilyName::Quadratic)]
    pub family: FamilyName,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Pieces or terms of the random families.
    #[arg(long, default_value_t = 3)]
    pub terms: usize,
    /// Temperature of the lse family.
    #[arg(long, default_value_t = 0.1)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub box_lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub box_upper: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_space(s: &str) -> std::result::Result<Space, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

fn load_data(path: &Path, space: Option<Space>) -> Result<Dataset> {
    let data = Dataset::load(path)?;
    match space {
        Some(s) if s != data.space() => data.with_space(s),
        _ => Ok(data),
    }
}

fn broadcast(values: &[f64], dim: usize, flag: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; dim]),
        n if n == dim => Ok(values.to_vec()),
        n => Err(Error::Input(format!(
            "--{flag} has {n} values but the model has dimension {dim}"
        ))),
    }
}

/// Reads the input columns of a CSV file; a trailing `y`/`w` column is
/// ignored.
fn read_inputs(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let schema = |row: Option<usize>, message: String| Error::Schema { row, message };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::fs::File::open(path)?);
    let headers = rdr
        .headers()
        .map_err(|e| schema(None, e.to_string()))?
        .clone();
    let mut names: Vec<String> = headers.iter().map(str::to_string).collect();
    if matches!(names.last().map(String::as_str), Some("y" | "w")) {
        names.pop();
    }
    let prefix = names.first().and_then(|n| n.chars().next()).unwrap_or('x');
    for (j, name) in names.iter().enumerate() {
        let expected = format!("{prefix}{}", j + 1);
        if prefix != 'x' && prefix != 'z' || *name != expected {
            return Err(schema(None, format!("unexpected input column {name:?}")));
        }
    }
    if names.is_empty() {
        return Err(schema(None, "no input columns".into()));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| schema(Some(i + 1), e.to_string()))?;
        if record.len() != headers.len() {
            return Err(schema(
                Some(i + 1),
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let row = record
            .iter()
            .take(names.len())
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| schema(Some(i + 1), format!("cannot parse {f:?} as a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

fn fit(args: &FitArgs) -> Result<()> {
    let data = load_data(&args.data, args.trainer.space)?;
    let cfg = args.trainer.fit_config();
    let started = Instant::now();
    let (model, report): (Model, _) = if args.max_affine {
        let (m, r) = fit_max_affine(&data, cfg.terms, cfg.seed, cfg.restarts)?;
        (m.into(), r)
    } else {
        match data.space() {
            Space::Convex => {
                let (m, r) = fit_lse(&data, &cfg)?;
                (m.into(), r)
            }
            Space::LogLog => {
                let (m, r) = fit_gpos(&data, &cfg)?;
                (m.into(), r)
            }
        }
    };
    log::info!("fit finished in {:.3} s", started.elapsed().as_secs_f64());
    model.save(&args.model_out)?;
    emit(args.output.as_deref(), &with_newline(report.to_json()))
}

fn predict(args: &PredictArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let (names, rows) = read_inputs(&args.data)?;
    let mut buf = Vec::new();
    {
        let mut wtr = csv::Writer::from_writer(&mut buf);
        let mut header = names.clone();
        header.push("prediction".into());
        wtr.write_record(&header)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for row in &rows {
            let p = model.predict(row)?;
            let fields: Vec<String> = row.iter().chain([&p]).map(|v| format!("{v:?}")).collect();
            wtr.write_record(&fields)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        wtr.flush()?;
    }
    emit(args.output.as_deref(), &String::from_utf8_lossy(&buf))
}

fn metrics(args: &MetricsArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let space = match model {
        Model::Gpos(_) => Space::LogLog,
        _ => Space::Convex,
    };
    let data = load_data(&args.data, Some(space))?;
    let m = compute_metrics(&model, &data)?;
    emit(
        args.output.as_deref(),
        &with_newline(serde_json::to_string_pretty(&m)?),
    )
}

fn crossval(args: &CrossvalArgs) -> Result<()> {
    let data = load_data(&args.data, args.space)?;
    let base = FitConfig {
        restarts: args.restarts,
        max_iterations: args.max_iterations,
        seed: args.seed,
        ..FitConfig::default()
    };
    let cfg = CvConfig {
        terms_grid: args.terms_grid.clone(),
        temperature_grid: args.temperature_grid.clone(),
        folds: args.folds,
        seed: args.seed,
        base: base.clone(),
    };
    for &t in &cfg.temperature_grid {
        FitConfig {
            temperature: t,
            ..base.clone()
        }
        .validate()?;
    }
    let result = cross_validate(&data, &cfg)?;
    if let Some(path) = &args.model_out {
        let best = result.best();
        let full = FitConfig {
            terms: best.terms,
            temperature: best.temperature,
            ..base
        };
        let model: Model = match data.space() {
            Space::Convex => fit_lse(&data, &full)?.0.into(),
            Space::LogLog => fit_gpos(&data, &full)?.0.into(),
        };
        model.save(path)?;
    }
    emit(
        args.output.as_deref(),
        &with_newline(serde_json::to_string_pretty(&result)?),
    )
}

fn optimize(args: &OptimizeArgs, gp_only: bool) -> Result<()> {
    let model = Model::load(&args.model)?;
    if gp_only && !matches!(model, Model::Gpos(_)) {
        return Err(Error::Input(format!(
            "gp-optimize needs a gpos model, found {}",
            model.kind()
        )));
    }
    let dim = model.dim();
    let bounds = BoxConstraints::new(
        broadcast(&args.box_lower, dim, "box-lower")?,
        broadcast(&args.box_upper, dim, "box-upper")?,
    )?;
    let options = SolverOptions {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        ..SolverOptions::default()
    };
    let (text, solve): (String, SolveReport) = if args.reciprocal {
        let rep = maximize_via_reciprocal(&model, &bounds, &options)?;
        (serde_json::to_string_pretty(&rep)?, rep.solve)
    } else {
        let rep = match &model {
            Model::Lse(m) => minimize_lse_box(m, &bounds, &options)?,
            Model::Gpos(m) => solve_gp_box(m, &bounds, &options)?,
            Model::MaxAffine(_) => {
                return Err(Error::input("box optimization needs an lse or gpos model"))
            }
        };
        (rep.to_json(), rep)
    };
    emit(args.output.as_deref(), &with_newline(text))?;
    if args.output.is_some() {
        println!(
            "minimizer {:?} value {:?} iterations {} stationarity {:e}",
            solve.minimizer, solve.objective, solve.iterations, solve.stationarity
        );
    }
    if solve.converged {
        Ok(())
    } else {
        Err(Error::NotConverged {
            iterations: solve.iterations,
            stationarity: solve.stationarity,
        })
    }
}

fn gen(args: &GenArgs) -> Result<()> {
    let spec: GeneratorSpec = match &args.spec {
        Some(path) => {
            serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Schema {
                row: None,
                message: format!("generator spec: {e}"),
            })?
        }
        None => {
            let family = match args.family {
                FamilyName::Quadratic => Family::Quadratic,
                FamilyName::Norm => Family::Norm,
                FamilyName::MaxAffine => Family::MaxAffine { terms: args.terms },
                FamilyName::Lse => Family::Lse {
                    terms: args.terms,
                    temperature: args.temperature,
                },
                FamilyName::Posynomial => Family::Posynomial { terms: args.terms },
            };
            let (lo, hi) = match args.family {
                FamilyName::Posynomial => (0.5, 2.0),
                _ => (-1.0, 1.0),
            };
            let lower = args.box_lower.clone().unwrap_or(vec![lo]);
            let upper = args.box_upper.clone().unwrap_or(vec![hi]);
            GeneratorSpec {
                family,
                dim: args.dim,
                noise: args.noise,
                lower: broadcast(&lower, args.dim, "box-lower")?,
                upper: broadcast(&upper, args.dim, "box-upper")?,
                seed: args.seed,
            }
        }
    };
    let data = generate_dataset(&spec, args.samples)?;
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    emit(args.output.as_deref(), &String::from_utf8_lossy(&buf))
}

fn bench(args: &BenchArgs) -> Result<()> {
    let rows = run_bench(args.seed)?;
    emit(args.output.as_deref(), &render_table(&rows))?;
    match rows.iter().find(|r| !r.passed) {
        None => Ok(()),
        Some(r) => Err(Error::Input(format!("bench check failed: {}", r.name))),
    }
}

/// Executes one parsed command line.
pub fn run(config: CommandConfig) -> Result<()> {
    match &config.command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Metrics(a) => metrics(a),
        Command::Crossval(a) => crossval(a),
        Command::Optimize(a) => optimize(a, false),
        Command::GpOptimize(a) => optimize(a, true),
        Command::Gen(a) => gen(a),
        Command::Bench(a) => bench(a),
    }
}

/// The JSON object printed on stderr for a failed command.
pub fn error_json(err: &Error) -> String {
    let row = match err {
        Error::Schema { row, .. } => *row,
        _ => None,
    };
    json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
        "row": row,
    })
    .to_string()
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match CommandConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}
