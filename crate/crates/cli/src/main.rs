//! `qvdp`: runs quantum and classical van der Pol scenarios from a config
//! file and writes CSV/JSON tables plus a `manifest.json` per run.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, ConfigError, KEYS};
use run::{Run, RunResult};

fn keys_help() -> String {
    let mut s = String::from("Config keys (`key = value`, one per line):\n");
    for (k, doc) in KEYS {
        s.push_str(&format!("  {k:<22} {doc}\n"));
    }
    s
}

#[derive(Parser)]
#[command(name = "qvdp", version, about = "Quantum and classical van der Pol oscillators", after_long_help = keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Simulate(RunArgs),
    /// Scan couplings (meanfield) or bisect thresholds (meanfield, classical-ensemble).
    Sweep(RunArgs),
    /// Map trapped-ion parameters to oscillator rates.
    IonPlan(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output root directory.
    #[arg(long)]
    out: Option<String>,
    /// Run label (output subdirectory).
    #[arg(long)]
    label: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn load(args: &RunArgs, forced_scenario: Option<&str>) -> Result<Config, ConfigError> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for s in &args.set {
        cfg.apply_override(s)?;
    }
    if let Some(o) = &args.out {
        cfg.set("out_dir", o)?;
    }
    if let Some(l) = &args.label {
        cfg.set("label", l)?;
    }
    if let Some(s) = forced_scenario {
        cfg.set("scenario", s)?;
    }
    Ok(cfg)
}

fn execute(name: &str, args: &RunArgs, forced: Option<&str>) -> RunResult<()> {
    let cfg = load(args, forced)?;
    let workers = args.workers.unwrap_or(0);
    if workers > 0 {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let mut run = Run::new(name, &cfg, rayon::current_num_threads())?;
    let outcome = match name {
        "simulate" => run::simulate(&cfg, &mut run),
        "sweep" => run::sweep(&cfg, &mut run),
        _ => run::ion_plan(&cfg, &mut run).map(|report| print!("{report}")),
    };
    match run.finish(&outcome) {
        Ok(path) => eprintln!("wrote {}", path.display()),
        Err(e) => eprintln!("could not write manifest: {e}"),
    }
    outcome
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => execute("simulate", a, None),
        Command::Sweep(a) => execute("sweep", a, None),
        Command::IonPlan(a) => execute("ion-plan", a, Some("ion-plan")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qvdp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
