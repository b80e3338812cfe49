//! `neff` command line: `fit`, `predict`, `report`, `serve`.
//!
//! Exit codes: 0 success, 2 user or validation error, 3 non-convergence,
//! 4 environment error (I/O, port binding).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::api::{router, ServeOptions};
use crate::design::{parse_assignment, read_csv, CovariateSpec, DesignSpec};
use crate::error::{Error, Result};
use crate::glm::{Family, FittedModel, IrlsOptions};
use crate::pipeline::{fit_dataset, predict_record, FitSettings, PredictionReport};
use crate::report::{emit_plot_data, GridAxis, PlotKind, PlotOptions, ReportBundle, DEFAULT_THRESHOLDS};
use crate::simulate::neff_simulated;
use crate::store;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_ENVIRONMENT: i32 = 4;
pub const DEFAULT_SEED: u64 = 20240101;

#[derive(Debug, Parser)]
#[command(
    name = "neff",
    version,
    about = "Effective sample sizes for individual model predictions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV file and write a model file.
    Fit(FitArgs),
    /// Predict with effective sample sizes for new patients.
    Predict(PredictArgs),
    /// Summarize n_eff distributions for development and validation data.
    Report(ReportArgs),
    /// Serve the HTTP API for a model file.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Binomial,
    Poisson,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Binomial => Family::Binomial,
            FamilyArg::Poisson => Family::Poisson,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    /// Center continuous covariates at their development means.
    Auto,
    None,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub outcome: String,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Comma-separated covariate columns, in design order.
    #[arg(long, value_delimiter = ',', default_value = "")]
    pub predictors: Vec<String>,
    /// Predictors to treat as 0/1 indicators.
    #[arg(long, value_delimiter = ',')]
    pub binary: Vec<String>,
    #[arg(long, value_enum, default_value = "none")]
    pub center: CenterArg,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
    /// n_eff thresholds to count rows below; repeatable.
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
    /// IRLS iteration cap.
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    #[arg(long)]
    pub allow_unconverged: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "set"]))]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with one patient per row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Covariate value for a single patient, `name=value`; repeatable.
    #[arg(long = "set")]
    pub set: Vec<String>,
    /// Write CSV here instead of printing.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write failing rows with an `error` column instead of aborting.
    #[arg(long)]
    pub keep_going: bool,
    /// Also estimate n_eff by resimulating this many outcome vectors (needs --dev-data).
    #[arg(long, requires = "dev_data")]
    pub simulate: Option<usize>,
    /// Development CSV for --simulate.
    #[arg(long)]
    pub dev_data: Option<PathBuf>,
    /// Outcome column of --dev-data.
    #[arg(long)]
    pub outcome: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Validation CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Development CSV, for row-level development output.
    #[arg(long)]
    pub dev_data: Option<PathBuf>,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
    /// Plot data to emit, `KIND=PATH`; KIND is one of heatmap-grid,
    /// neff-vs-p, dev-val-density, histogram, paired-model.
    #[arg(long = "plot-data")]
    pub plot_data: Vec<String>,
    /// Grid axis `min:max:step` per covariate, for heatmap-grid.
    #[arg(long = "grid")]
    pub grid: Vec<String>,
    /// Second model for the paired-model plot.
    #[arg(long)]
    pub paired_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory with UI assets.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
    #[arg(long)]
    pub cors_origin: Option<String>,
    #[arg(long)]
    pub quiet: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } | Error::UnconvergedWithoutOverride => EXIT_NOT_CONVERGED,
        Error::Io { .. } => EXIT_ENVIRONMENT,
        _ => EXIT_USAGE,
    }
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Serve(a) => return cmd_serve(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn thresholds_or_default(t: &[f64]) -> Vec<f64> {
    if t.is_empty() {
        DEFAULT_THRESHOLDS.to_vec()
    } else {
        t.to_vec()
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let predictors: Vec<String> = args.predictors.iter().filter(|s| !s.is_empty()).cloned().collect();
    if let Some(b) = args.binary.iter().find(|b| !predictors.contains(b)) {
        return Err(Error::InvalidDesign(format!(
            "--binary `{b}` is not among --predictors"
        )));
    }
    if predictors.contains(&args.outcome) {
        return Err(Error::InvalidDesign(format!(
            "outcome `{}` is also a predictor",
            args.outcome
        )));
    }
    let spec = DesignSpec::new(
        predictors
            .iter()
            .map(|p| {
                if args.binary.contains(p) {
                    CovariateSpec::binary(p)
                } else {
                    CovariateSpec::continuous(p, 0.0)
                }
            })
            .collect(),
    )?;
    let mut schema: Vec<&str> = predictors.iter().map(String::as_str).collect();
    schema.push(&args.outcome);
    let data = read_csv(&args.data, &schema)?;
    let spec = match args.center {
        CenterArg::Auto => spec.centered_at_means(&data)?,
        CenterArg::None => spec,
    };
    let settings = FitSettings {
        name: args.name.clone().unwrap_or_else(|| default_name(&args.model)),
        family: args.family.into(),
        outcome: args.outcome.clone(),
        thresholds: thresholds_or_default(&args.thresholds),
        irls: IrlsOptions {
            allow_unconverged: args.allow_unconverged,
            max_iterations: args.max_iterations,
            ..Default::default()
        },
    };
    let model = fit_dataset(&data, spec, &settings)?;
    store::save(&model, &args.model, args.allow_unconverged)?;
    print_fit_summary(&model, &settings.thresholds);
    Ok(())
}

fn default_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn print_fit_summary(model: &FittedModel, thresholds: &[f64]) {
    println!("model: {} ({})", model.name, model.family);
    println!("n: {}", model.n_dev);
    println!("p: {}", model.p());
    println!("converged: {} ({} iterations)", model.converged, model.iterations);
    println!("deviance: {}", model.deviance);
    println!("dispersion: {}", model.dispersion);
    for (c, b) in std::iter::once("(intercept)")
        .chain(model.design.names())
        .zip(&model.beta)
    {
        println!("beta[{c}]: {b}");
    }
    if let Some(dev) = &model.development {
        println!("harmonic mean n_eff: {}", dev.neff.harmonic_mean);
        let min = dev
            .sorted_neff
            .as_ref()
            .and_then(|v| v.first().copied())
            .or_else(|| dev.neff.quantile(1.0));
        if let Some(min) = min {
            println!("min n_eff: {min}");
        }
        for t in thresholds {
            println!("n_eff below {t}: {}", dev.neff.count_below(*t).unwrap_or(0));
        }
    }
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }
}

const PREDICT_HEADER: &str = "row_id,yhat,se_pred,rel_var,n_eff,dev_percentile,annotations";

fn annotations_cell(r: &PredictionReport) -> String {
    r.annotations.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(";")
}

pub fn prediction_csv_row(row_id: usize, r: &PredictionReport) -> String {
    format!(
        "{row_id},{},{},{},{},{},{}",
        r.yhat,
        r.se_pred,
        r.rel_var,
        r.n_eff,
        r.dev_percentile.map(|v| v.to_string()).unwrap_or_default(),
        annotations_cell(r)
    )
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| Error::io(p, e))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = store::load(&args.model)?;
    let out_path = args.output.clone().unwrap_or_else(|| "<stdout>".into());
    let io = |e| Error::io(&out_path, e);

    if let Some(input) = &args.input {
        let names = model.design.names();
        let data = read_csv(input, &names)?;
        let mut out = open_output(&args.output)?;
        let header = if args.keep_going {
            format!("{PREDICT_HEADER},error")
        } else {
            PREDICT_HEADER.to_string()
        };
        writeln!(out, "{header}").map_err(io)?;
        for i in 0..data.n_rows() {
            match predict_record(&model, &data.record(i)) {
                Ok(r) if args.keep_going => writeln!(out, "{},", prediction_csv_row(i + 1, &r)),
                Ok(r) => writeln!(out, "{}", prediction_csv_row(i + 1, &r)),
                Err(e) if args.keep_going => {
                    writeln!(out, "{},,,,,,,{}", i + 1, e.to_string().replace(',', ";"))
                }
                Err(e) => return Err(e),
            }
            .map_err(io)?;
        }
        out.flush().map_err(io)?;
        return Ok(());
    }

    let record: BTreeMap<String, f64> = args.set.iter().map(|s| parse_assignment(s)).collect::<Result<_>>()?;
    let r = predict_record(&model, &record)?;
    let simulated = match (args.simulate, &args.dev_data) {
        (Some(b), Some(dev)) => {
            let names = model.design.names();
            let data = read_csv(dev, &names)?;
            let x = model.design.build_design(&data)?;
            Some(neff_simulated(
                &model,
                &x,
                &model.design.encode(&record)?,
                b,
                args.seed,
            )?)
        }
        _ => None,
    };
    if args.output.is_some() {
        let mut out = open_output(&args.output)?;
        writeln!(out, "{PREDICT_HEADER}").map_err(io)?;
        writeln!(out, "{}", prediction_csv_row(1, &r)).map_err(io)?;
        out.flush().map_err(io)?;
    } else {
        println!("yhat: {}", r.yhat);
        println!("eta: {}", r.eta);
        println!("se_pred: {}", r.se_pred);
        println!("rel_var: {}", r.rel_var);
        println!("n_eff: {}", r.n_eff);
        println!("n_eff_display: {}", r.n_eff_display);
        if let Some(p) = r.dev_percentile {
            println!("dev_percentile: {p}");
        }
        if let Some(h) = r.per_hundred {
            println!("per_hundred: {h}");
        }
        println!("annotations: {}", annotations_cell(&r));
    }
    if let Some(s) = simulated {
        println!(
            "n_eff_simulated: {} ({} replicates, {} dropped, seed {})",
            s.n_eff, s.replicates, s.dropped, args.seed
        );
    }
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let model = store::load(&args.model)?;
    let names = model.design.names();
    let design_of = |path: &Option<PathBuf>| -> Result<Option<crate::linalg::Matrix>> {
        path.as_ref()
            .map(|p| model.design.build_design(&read_csv(p, &names)?))
            .transpose()
    };
    let val = design_of(&args.data)?;
    let dev = design_of(&args.dev_data)?;
    let thresholds = if args.thresholds.is_empty() {
        model
            .development
            .as_ref()
            .map(|d| d.thresholds.clone())
            .filter(|t| !t.is_empty())
            .unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec())
    } else {
        args.thresholds.clone()
    };
    let bundle = ReportBundle::build(&model, dev.as_ref(), val.as_ref(), &thresholds)?;

    let plots = args
        .plot_data
        .iter()
        .map(|s| {
            let (kind, path) = s
                .split_once('=')
                .ok_or_else(|| Error::UnknownKind(format!("expected KIND=PATH, got `{s}`")))?;
            Ok((kind.parse::<PlotKind>()?, PathBuf::from(path)))
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = args.grid.iter().map(|g| g.parse()).collect::<Result<Vec<GridAxis>>>()?;
    let paired = match &args.paired_model {
        Some(p) => {
            let other = store::load(p)?;
            let other_names = other.design.names();
            let design_of_other = |path: &Option<PathBuf>| -> Result<Option<crate::linalg::Matrix>> {
                path.as_ref()
                    .map(|p| other.design.build_design(&read_csv(p, &other_names)?))
                    .transpose()
            };
            Some(ReportBundle::build(
                &other,
                design_of_other(&args.dev_data)?.as_ref(),
                design_of_other(&args.data)?.as_ref(),
                &thresholds,
            )?)
        }
        None => None,
    };
    let opts = PlotOptions {
        model: Some(&model),
        grid,
        paired: paired.as_ref(),
        sample: None,
    };
    for (kind, path) in plots {
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        emit_plot_data(&bundle, kind, &opts, std::io::BufWriter::new(f))?;
    }

    let json = bundle.to_json()?;
    match &args.output {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| Error::io(p, e))?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn cmd_serve(args: &ServeArgs) -> i32 {
    let model = match store::load(&args.model) {
        Ok(m) => Arc::new(m),
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let opts = ServeOptions {
        static_dir: args.static_dir.clone(),
        cors_origin: args.cors_origin.clone(),
        log_requests: !args.quiet,
    };
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return EXIT_ENVIRONMENT;
        }
    };
    rt.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = match tokio::net::TcpListener::bind(&addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot bind {addr}: {e}");
                return EXIT_ENVIRONMENT;
            }
        };
        let local = listener.local_addr().map(|a| a.to_string()).unwrap_or(addr);
        println!("listening on http://{local}");
        let _ = std::io::stdout().flush();
        match axum::serve(listener, router(model, &opts))
            .with_graceful_shutdown(shutdown_signal())
            .await
        {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: server failed: {e}");
                EXIT_ENVIRONMENT
            }
        }
    })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
