//! `supernorm` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a checked property fails (the report
//! carries the witness), 2 on unusable input.

mod commands;
mod config;
mod generate;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::{Format, Settings};

/// Run failures that prevent a verdict. Property failures are not errors.
#[derive(Debug)]
pub enum Fail {
    Input(String),
}

impl From<supernorm::Error> for Fail {
    fn from(e: supernorm::Error) -> Self {
        Fail::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "supernorm", version, about = "Supermodular norms: certification, approximation and online algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file with default values for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled supermodularity checks of a norm at exponent --p.
    Certify {
        #[arg(long, value_enum, default_value = "all")]
        property: commands::CertProperty,
    },
    /// Measured distortion of each approximation stage for a norm.
    Approx,
    /// Greedy online load balancing against the brute-force optimum.
    Loadbalance,
    /// Continuous online covering with norm-composed objectives.
    Cover,
    /// Online packing over --runs seeds.
    Pack,
    /// Adaptive, non-adaptive and hallucination values of a probing instance.
    Probe,
    /// Follow-the-perturbed-leader online linear optimization.
    Olo,
    /// Block-chain refutation and budget-norm gauge demos.
    DemoCounterexamples,
    /// Writes a reproducible random instance.
    Generate {
        #[arg(value_enum)]
        kind: generate::Kind,
        /// Generator parameter as key=value; repeatable.
        #[arg(long = "param", value_parser = generate::parse_param)]
        params: Vec<(String, f64)>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Certify { .. } => "certify",
            Command::Approx => "approx",
            Command::Loadbalance => "loadbalance",
            Command::Cover => "cover",
            Command::Pack => "pack",
            Command::Probe => "probe",
            Command::Olo => "olo",
            Command::DemoCounterexamples => "demo-counterexamples",
            Command::Generate { .. } => "generate",
        }
    }
}

/// What a subcommand hands back for printing.
pub struct Report {
    pub passed: bool,
    /// One line per check, echoed to stderr.
    pub lines: Vec<String>,
    pub results: Value,
    /// Full CSV document, header included.
    pub csv: String,
}

fn configure_threads() {
    if let Some(n) = std::env::var("SUPERNORM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn write_output(settings: &Settings, text: &str) -> Result<(), Fail> {
    match &settings.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Fail::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Fail::Input(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<bool, Fail> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut settings = cli.settings.over(file);
    settings.seed = Some(settings.seed());
    let name = cli.command.name();
    if let Command::Generate { kind, params } = &cli.command {
        let text = generate::generate(*kind, params, settings.seed())?;
        write_output(&settings, &text)?;
        return Ok(true);
    }
    let stamp = json!({ "command": name, "settings": settings });
    let report = match &cli.command {
        Command::Certify { property } => commands::certify(&settings, *property, &stamp)?,
        Command::Approx => commands::approx(&settings, &stamp)?,
        Command::Loadbalance => commands::loadbalance(&settings, &stamp)?,
        Command::Cover => commands::cover(&settings, &stamp)?,
        Command::Pack => commands::pack(&settings, &stamp)?,
        Command::Probe => commands::probe(&settings, &stamp)?,
        Command::Olo => commands::olo(&settings, &stamp)?,
        Command::DemoCounterexamples => commands::demo_counterexamples(&settings, &stamp)?,
        Command::Generate { .. } => unreachable!(),
    };
    for line in &report.lines {
        eprintln!("{line}");
    }
    let text = match settings.format() {
        Format::Csv => report.csv,
        Format::Json => {
            let doc = json!({
                "schema": "supernorm-json v1",
                "config": stamp,
                "passed": report.passed,
                "results": report.results,
            });
            serde_json::to_string_pretty(&doc).expect("report is valid JSON") + "\n"
        }
    };
    write_output(&settings, &text)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
