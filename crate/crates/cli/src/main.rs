//! `semipos`: batch front end for generator reports, fuzz campaigns and
//! state trajectories.
//!
//! Exit codes: 0 when every consistency flag holds, 2 when some report is
//! inconsistent, 1 on input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semipos::runner::{full_report, fuzz, fuzz_text, report_text, trajectory};
use semipos::{DensityMatrix, Family, GeneratorSpec, InstanceRecipe, RunConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "semipos", version, about = "Positivity certificates for semigroups on M(n, C)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every condition for the generator in FILE.
    Report {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Generate COUNT instances of FAMILY and report each in-process.
    Fuzz {
        family: String,
        count: usize,
        #[arg(short = 'n', long, default_value_t = 2)]
        n: usize,
        /// Worker threads; output does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the generator JSON of one campaign instance.
    Instance {
        family: String,
        #[arg(short = 'n', long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Evolve the density matrix in STATE under the generator in FILE.
    Evolve {
        file: PathBuf,
        state: PathBuf,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        t_list: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random self-adjoint and unitary probes per check.
    #[arg(long)]
    samples: Option<usize>,
    /// `auto` or comma-separated λ values.
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// JSON run configuration; its fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunOpts {
    fn config(&self) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        if let Some(tol) = self.tol {
            cfg.tol = tol;
            cfg.decisive_tol = cfg.decisive_tol.max(tol);
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(k) = self.samples {
            cfg.n_selfadjoint = k;
            cfg.n_unitary = k;
        }
        if let Some(g) = &self.lambda_grid {
            cfg.lambda_grid = parse_lambda_grid(g)?;
        }
        if let Some(t) = &self.t_grid {
            cfg.t_grid = t.clone();
        }
        if let Some(path) = &self.config {
            let file: serde_json::Value = read_json(path)?;
            let serde_json::Value::Object(over) = file else {
                return Err(format!("{}: run configuration must be a JSON object", path.display()));
            };
            let mut merged = serde_json::to_value(&cfg).map_err(|e| e.to_string())?;
            merged.as_object_mut().expect("config serializes to an object").extend(over);
            cfg = serde_json::from_value(merged).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn parse_lambda_grid(s: &str) -> Result<Option<Vec<f64>>, String> {
    if s == "auto" {
        return Ok(None);
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("--lambda-grid: `{x}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit<T: Serialize>(value: &T, format: Format, text: impl FnOnce(&T) -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("reports serialize")),
        Format::Text => print!("{}", text(value)),
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Report { file, opts } => {
            let cfg = opts.config()?;
            let spec: GeneratorSpec = read_json(&file)?;
            let instance =
                serde_json::json!({ "file": file.display().to_string(), "kind": spec.kind(), "n": spec.n() });
            let report = full_report(instance, &spec, &cfg).map_err(|e| e.to_string())?;
            emit(&report, opts.format, report_text);
            Ok(report.consistency)
        }
        Command::Fuzz { family, count, n, threads, opts } => {
            let cfg = opts.config()?;
            let family: Family = family.parse().map_err(|e: semipos::Error| e.to_string())?;
            let summary = fuzz(family, count, n, &cfg, threads).map_err(|e| e.to_string())?;
            emit(&summary, opts.format, fuzz_text);
            Ok(summary.consistent())
        }
        Command::Instance { family, n, seed, index } => {
            let family: Family = family.parse().map_err(|e: semipos::Error| e.to_string())?;
            let spec = InstanceRecipe::campaign(family, n, seed, index).build().map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&spec).expect("generators serialize"));
            Ok(true)
        }
        Command::Evolve { file, state, t_list } => {
            let spec: GeneratorSpec = read_json(&file)?;
            let rho: DensityMatrix = read_json(&state)?;
            let points = trajectory(&spec, &rho, &t_list).map_err(|e| e.to_string())?;
            for p in &points {
                println!("{}", serde_json::to_string(p).expect("trajectory serializes"));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
