//! Command-line runner: experiment runs, scaling sweeps and config checks.

mod config;

pub use config::{DatasetRef, RunConfig};

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dafi_core::data::{generate, load_csv, DataError};
use dafi_core::harness::{run_sweep, sweep_csv, BatchPlan, ExperimentReport, HarnessError, Method, SweepPoint, SweepSpec};
use dafi_core::Instance;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("data error: {0}")]
    Data(#[from] DataError),
    #[error("experiment failed: {0}")]
    Harness(#[from] HarnessError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn field(field: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(vec![format!("{field}: {msg}")])
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Harness(HarnessError::Config(_)) => "config",
            CliError::Harness(_) => "experiment",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "data" => 3,
            "io" => 4,
            _ => 1,
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            CliError::Config(v) => v.clone(),
            other => vec![other.to_string()],
        }
    }

    /// Machine-readable form printed with `--error-json`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            status: &'a str,
            kind: &'a str,
            exit_code: i32,
            messages: Vec<String>,
        }
        serde_json::to_string(&Doc {
            status: "error",
            kind: self.kind(),
            exit_code: self.exit_code(),
            messages: self.messages(),
        })
        .expect("error document serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "dafi", version, about = "Drift-aware feature importance for streaming random forests")]
pub struct Cli {
    /// Print failures as a JSON document on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the batch protocol and write report.json, batches.csv and accuracy_curve.csv.
    Run(Overrides),
    /// Time SHAP and MDI over feature-count and tree-count sweeps; writes bench.csv.
    Bench(BenchArgs),
    /// Check a configuration against its dataset schema without running it.
    Validate(Overrides),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV file to read, or `synthetic` for the built-in drifting stream.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Built-in schema name (electricity, weather, network) or a schema JSON path.
    #[arg(long)]
    pub schema: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Comma-separated subset of SHAP,MDI,DAFI.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Zero every timing field for reproducible reports.
    #[arg(long)]
    pub timing_seed_free: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: Overrides,
    /// Feature counts to sweep.
    #[arg(long, value_delimiter = ',')]
    pub feature_sweep: Option<Vec<usize>>,
    /// Tree counts to sweep.
    #[arg(long, value_delimiter = ',')]
    pub tree_sweep: Option<Vec<usize>>,
    /// Instances generated per sweep point.
    #[arg(long)]
    pub instances: Option<usize>,
}

/// The config file (if any) with command-line overrides applied, and the
/// directory relative paths in the file resolve against.
pub fn load_config(o: &Overrides) -> Result<(RunConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &o.config {
        Some(p) => (
            RunConfig::from_path(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => {
            let dataset = match o.dataset.as_deref() {
                None => {
                    return Err(CliError::field("dataset", "pass --config or --dataset"));
                }
                Some("synthetic") => DatasetRef::default_synthetic(),
                Some(path) => csv_ref(path.into(), o.schema.as_deref())?,
            };
            (RunConfig::new(dataset), PathBuf::new())
        }
    };
    if o.config.is_some() {
        if let Some(d) = o.dataset.as_deref() {
            cfg.dataset = if d == "synthetic" {
                DatasetRef::default_synthetic()
            } else {
                csv_ref(d.into(), o.schema.as_deref())?
            };
        }
    }
    if let Some(v) = &o.out {
        cfg.out = v.clone();
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.eta {
        cfg.eta = Some(v);
    }
    if let Some(v) = o.trees {
        cfg.n_trees = v;
    }
    if let Some(v) = o.samples {
        cfg.n_samples = v;
    }
    if let Some(v) = o.batches {
        cfg.n_batches = v;
    }
    if let Some(v) = o.theta {
        cfg.theta = v;
    }
    if let Some(v) = o.workers {
        cfg.workers = v;
    }
    if o.timing_seed_free {
        cfg.timing_seed_free = true;
    }
    if let Some(ms) = &o.methods {
        cfg.methods = ms
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::field("methods", e))?;
    }
    Ok((cfg, base))
}

fn csv_ref(path: PathBuf, schema: Option<&str>) -> Result<DatasetRef, CliError> {
    let schema = schema.ok_or_else(|| CliError::field("schema", "a CSV dataset needs --schema"))?;
    Ok(if schema.ends_with(".json") {
        DatasetRef::Csv { path, schema: None, schema_path: Some(schema.into()) }
    } else {
        DatasetRef::Csv { path, schema: Some(schema.into()), schema_path: None }
    })
}

/// Validation outcome: an empty list means the configuration is usable.
pub fn cmd_validate(cfg: &RunConfig, base: &Path) -> Vec<String> {
    cfg.violations(base)
}

fn check(cfg: &RunConfig, base: &Path) -> Result<(), CliError> {
    let v = cfg.violations(base);
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(v))
    }
}

/// Instances, feature universe and dropped-row count of the configured dataset.
pub fn load_dataset(cfg: &RunConfig, base: &Path) -> Result<(Vec<Instance>, Vec<String>, usize), CliError> {
    match &cfg.dataset {
        DatasetRef::Synthetic(spec) => Ok((generate(spec)?, spec.feature_names(), 0)),
        DatasetRef::Csv { path, .. } => {
            let schema = cfg.schema(base)?.expect("csv datasets carry a schema");
            let loaded = load_csv(&config::resolve(base, path), &schema)?;
            Ok((loaded.instances, schema.features, loaded.dropped))
        }
    }
}

/// Run the configured experiment in memory.
pub fn execute(cfg: &RunConfig, base: &Path) -> Result<ExperimentReport, CliError> {
    check(cfg, base)?;
    let (stream, universe, dropped) = load_dataset(cfg, base)?;
    let (_, schedule) = cfg.resolve_features(base)?;
    let plan = BatchPlan::new(cfg.n_batches, schedule);
    let mut report = dafi_core::run_experiment(&stream, &universe, &plan, &cfg.experiment())?;
    report.dropped_rows = dropped;
    Ok(report)
}

fn write(path: PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// Run and write report.json, batches.csv and accuracy_curve.csv.
pub fn cmd_run(cfg: &RunConfig, base: &Path) -> Result<ExperimentReport, CliError> {
    let report = execute(cfg, base)?;
    out_dir(&cfg.out)?;
    write(cfg.out.join("report.json"), &report.to_json())?;
    write(cfg.out.join("batches.csv"), &report.batches_csv())?;
    write(cfg.out.join("accuracy_curve.csv"), &report.accuracy_curve_csv())?;
    Ok(report)
}

/// Sweep settings from the config, with flag overrides.
pub fn sweep_spec(cfg: &RunConfig, args: &BenchArgs) -> SweepSpec {
    let mut s = cfg.sweep.clone().unwrap_or_else(|| SweepSpec {
        n_samples: cfg.n_samples,
        background_size: cfg.background_size,
        base_trees: cfg.n_trees,
        theta: cfg.theta,
        seed: cfg.seed,
        ..SweepSpec::default()
    });
    if let Some(v) = &args.feature_sweep {
        s.feature_counts = v.clone();
    }
    if let Some(v) = &args.tree_sweep {
        s.tree_counts = v.clone();
    }
    if let Some(v) = args.instances {
        s.n_instances = v;
    }
    if let Some(v) = args.run.samples {
        s.n_samples = v;
    }
    if let Some(v) = args.run.seed {
        s.seed = v;
    }
    s
}

/// Run the sweep and write bench.csv.
pub fn cmd_bench(spec: &SweepSpec, out: &Path) -> Result<Vec<SweepPoint>, CliError> {
    let v = spec.violations();
    if !v.is_empty() {
        return Err(CliError::Config(v.into_iter().map(|m| format!("sweep: {m}")).collect()));
    }
    let points = run_sweep(spec)?;
    out_dir(out)?;
    write(out.join("bench.csv"), &sweep_csv(&points))?;
    Ok(points)
}

/// Parse `args` and run; returns the process exit code. Argument errors
/// honour `--error-json` too.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(&args) {
        Ok(cli) => run_cli(cli),
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            0
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("");
            let err = CliError::Config(vec![format!("arguments: {}", first.strip_prefix("error: ").unwrap_or(first))]);
            if args.iter().any(|a| a == "--error-json") {
                eprintln!("{}", err.to_json());
            } else {
                eprint!("{e}");
            }
            err.exit_code()
        }
    }
}

/// Entry point behind `main`; returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let error_json = cli.error_json;
    let result: Result<(), CliError> = match cli.command {
        Command::Run(o) => load_config(&o).and_then(|(cfg, base)| {
            let r = cmd_run(&cfg, &base)?;
            for m in &r.summary.methods {
                println!(
                    "{:<5} runtime {:>10.4}s  saved {:>7}  set {:>6}  exact {:>6}  spearman {:>6}",
                    m.method.to_string(),
                    m.runtime_s,
                    fmt_opt(m.saved_pct, 2),
                    fmt_opt(m.topk_set, 3),
                    fmt_opt(m.topk_exact, 3),
                    fmt_opt(m.spearman, 3),
                );
            }
            println!("wrote {}", cfg.out.display());
            Ok(())
        }),
        Command::Bench(args) => {
            let loaded = if args.run.config.is_some() || args.run.dataset.is_some() {
                load_config(&args.run)
            } else {
                let mut o = args.run.clone();
                o.dataset = Some("synthetic".into());
                load_config(&o)
            };
            loaded.and_then(|(cfg, _)| {
                let spec = sweep_spec(&cfg, &args);
                for p in cmd_bench(&spec, &cfg.out)? {
                    println!(
                        "{:?} {:>3}: shap {:.6}s  mdi {:.6}s  test acc {:.3}",
                        p.axis, p.count, p.shap_runtime_s, p.mdi_runtime_s, p.test_accuracy
                    );
                }
                println!("wrote {}", cfg.out.join("bench.csv").display());
                Ok(())
            })
        }
        Command::Validate(o) => load_config(&o).and_then(|(cfg, base)| {
            let v = cmd_validate(&cfg, &base);
            if v.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Config(v))
            }
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            if error_json {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}
