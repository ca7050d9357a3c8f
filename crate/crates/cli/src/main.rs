//! `iet-skew`: runs one pipeline of the library per subcommand and writes a
//! JSON artifact carrying the configuration digest and the code version.

mod commands;
mod inputs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iet_skew::io::{write_json, Artifact};
use iet_skew::par::{init_workers_from_env, Exec, WORKERS_ENV};
use iet_skew::{Error, Mode, Result};
use serde::Serialize;

use commands::{
    BalancedArgs, DeviationArgs, GoodReturnsArgs, IetArgs, LyapunovArgs, ModeArg, Output,
    ProbeArgs, RenormArgs, StripArgs, TowersArgs,
};

#[derive(Parser, Debug)]
#[command(
    name = "iet-skew",
    version,
    about = "Interval exchanges, renormalization and skew products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV output for tabular results (defaults to the artifact path with a .csv extension).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Arithmetic; defaults to the mode declared by the IET input.
    #[arg(long, value_enum, global = true)]
    mode: Option<ModeArg>,
    /// Run data-parallel loops on one thread. Results are identical either way.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Describe an IET: breakpoints, irreducibility, saddle connections, an orbit.
    Iet(IetArgs),
    /// Rauzy-Veech or Zorich induction: lengths, heights, matrices.
    Renorm(RenormArgs),
    /// Rokhlin towers after n Rauzy steps.
    Towers(TowersArgs),
    /// Top two exponents of the height cocycle.
    Lyapunov(LyapunovArgs),
    /// Growth of Birkhoff sums and visit deviations over a time grid.
    Deviation(DeviationArgs),
    /// Balanced renormalization times with their tower and density checks.
    BalancedTimes(BalancedArgs),
    /// Search for a verified good return and emit its certificate.
    GoodReturns(GoodReturnsArgs),
    /// Skew-product orbit or returns to a band of the strip.
    Strip(StripArgs),
    /// Translation-invariance probe of fiber histograms.
    Probe(ProbeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Iet(_) => "iet",
            Command::Renorm(_) => "renorm",
            Command::Towers(_) => "towers",
            Command::Lyapunov(_) => "lyapunov",
            Command::Deviation(_) => "deviation",
            Command::BalancedTimes(_) => "balanced-times",
            Command::GoodReturns(_) => "good-returns",
            Command::Strip(_) => "strip",
            Command::Probe(_) => "probe",
        }
    }

    fn iet_spec(&self) -> Option<&str> {
        match self {
            Command::Iet(a) => Some(&a.iet),
            Command::Renorm(a) => Some(&a.iet),
            Command::Towers(a) => Some(&a.iet),
            Command::Lyapunov(a) => Some(&a.iet),
            Command::Deviation(a) => Some(&a.iet),
            Command::BalancedTimes(a) => Some(&a.iet),
            Command::GoodReturns(a) => Some(&a.iet),
            Command::Strip(a) => Some(&a.iet),
            Command::Probe(_) => None,
        }
    }
}

/// What the digest covers: everything that can change the result. Output
/// paths and the execution policy are left out, so sequential and parallel
/// runs produce identical artifacts.
#[derive(Serialize)]
struct ExperimentConfig<'a> {
    mode: Option<Mode>,
    #[serde(flatten)]
    command: &'a Command,
}

fn run(cli: &Cli) -> Result<()> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let desc = cli
        .command
        .iet_spec()
        .map(inputs::iet_descriptor)
        .transpose()?;
    let mode = cli.mode.map(Mode::from).or(desc.as_ref().map(|d| d.mode));
    let config = ExperimentConfig {
        mode,
        command: &cli.command,
    };
    let (desc, m) = (desc.as_ref(), mode.unwrap_or(Mode::Float));
    let need = || desc.ok_or_else(|| Error::BadConfig("missing --iet".into()));
    let out: Output = match &cli.command {
        Command::Iet(a) => commands::iet(a, need()?, m)?,
        Command::Renorm(a) => commands::renorm(a, need()?, m)?,
        Command::Towers(a) => commands::towers_cmd(a, need()?, m)?,
        Command::Lyapunov(a) => commands::lyapunov(a, need()?, m)?,
        Command::Deviation(a) => commands::deviation(a, need()?, m, exec)?,
        Command::BalancedTimes(a) => commands::balanced(a, need()?, m, exec)?,
        Command::GoodReturns(a) => commands::good_returns(a, need()?, m, exec)?,
        Command::Strip(a) => commands::strip(a, need()?, m)?,
        Command::Probe(a) => commands::probe(a, exec)?,
    };
    let artifact = Artifact::new(cli.command.name(), &config, out.result)?;
    let csv_path = cli
        .csv
        .clone()
        .or_else(|| cli.out.as_ref().map(|p| p.with_extension("csv")));
    match &cli.out {
        Some(path) => {
            write_json(path, &artifact)?;
            println!("{} -> {}", out.summary, path.display());
        }
        None => {
            print!("{}", artifact.to_json()?);
            eprintln!("{}", out.summary);
        }
    }
    if let (Some(csv), Some(path)) = (out.csv, csv_path) {
        write_text(&path, &csv)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Exit status for library errors; clap uses 2 for usage errors.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BadConfig(_) | Error::Parse(_) => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = init_workers_from_env() {
        if n == 0 {
            eprintln!("warning: {WORKERS_ENV}=0 leaves the worker count to rayon");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}
