mod config;
mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use config::Scenario;
use scenarios::{Relation, Report};

#[derive(Parser)]
#[command(name = "fracrel", version, about = "Diagnostics for fractional relativistic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write results.json plus its CSV files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a configuration and print the problems found as JSON.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available scenarios.
    ListScenarios,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Numerics(#[from] fracrel::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn results_json(scenario: Scenario, rep: &Report) -> Value {
    let checks: Map<String, Value> = rep
        .checks
        .iter()
        .map(|(k, c)| {
            let rel = match c.relation {
                Relation::AtMost => "le",
                Relation::AtLeast => "ge",
            };
            (k.clone(), json!({"value": number(c.value), "tolerance": number(c.tolerance), "relation": rel, "pass": c.pass}))
        })
        .collect();
    let values: Map<String, Value> = rep.values.iter().map(|(k, v)| (k.clone(), number(*v))).collect();
    json!({"scenario": scenario.name(), "pass": rep.pass(), "checks": checks, "values": values})
}

fn run(config: &Path, out: &Path) -> Result<bool, CliError> {
    let text = fs::read_to_string(config).map_err(io_err(config))?;
    let cfg = config::parse(&text).map_err(CliError::Config)?;
    let rep = scenarios::run(&cfg)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let body = serde_json::to_string_pretty(&results_json(cfg.scenario, &rep)).expect("JSON values serialize");
    let path = out.join("results.json");
    fs::write(&path, body + "\n").map_err(io_err(&path))?;
    for (name, contents) in &rep.files {
        let path = out.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
    }
    for (name, c) in &rep.checks {
        let op = if c.relation == Relation::AtMost { "<=" } else { ">=" };
        let tag = if c.pass { "ok  " } else { "FAIL" };
        println!("{tag} {name}: {:e} {op} {:e}", c.value, c.tolerance);
    }
    Ok(rep.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for sc in Scenario::ALL {
                println!("{:<20} {}", sc.name(), sc.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let problems = match fs::read_to_string(&config) {
                Ok(text) => config::parse(&text).err().unwrap_or_default(),
                Err(e) => vec![format!("{}: {e}", config.display())],
            };
            println!("{}", serde_json::to_string_pretty(&json!({ "problems": problems })).expect("strings serialize"));
            if problems.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::Run { config, out } => match run(&config, &out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
