//! Command-line front end.
//!
//! `dispatch` parses an argument list, runs one subcommand, writes its tables
//! into the output directory and prints one summary line per table. Exit codes:
//! 0 on success, 1 when a computation fails, 2 for usage or configuration
//! errors.

mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
pub use config::{ConfigFile, Settings};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DECAYLAB_OUT";
/// Output directory when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT: &str = "decaylab-out";

pub const SUBCOMMANDS: &[&str] = &[
    "sample",
    "events",
    "spectrum",
    "count",
    "localize",
    "green",
    "weyl",
    "well-curve",
    "hf-check",
    "cook",
    "phase-sweep",
    "wegner",
];

#[derive(Debug, Parser)]
#[command(
    name = "decaylab",
    version,
    about = "Finite-volume experiments on random Schrödinger operators with decaying fat-tailed disorder",
    after_help = "Settings come from --config (global keys plus a [subcommand] section), then --set, --seed and --workers.\nTables are written to --out, or $DECAYLAB_OUT, or ./decaylab-out."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one setting (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for ensemble runs
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Draw single-site couplings and compare with the closed-form law
    Sample,
    /// Exact and Monte Carlo probabilities of a small-potential event
    Events,
    /// Lowest eigenvalues of one realization
    Spectrum,
    /// Eigenvalue count below -eps against the per-cell Neumann bound
    Count,
    /// Localization study of negative-energy eigenfunctions
    Localize,
    /// Boundary-to-core resolvent norm over a ladder of box sides
    Green,
    /// Residual of Weyl wave packets over a ladder of radii
    Weyl,
    /// Ground energy of a single well over a ladder of depths
    WellCurve,
    /// Hellmann-Feynman derivative check for a single well
    HfCheck,
    /// Partial sums of the weighted potential integral
    Cook,
    /// Growth of negative-eigenvalue counts across box sides
    PhaseSweep,
    /// Near-resonance probabilities at a fixed energy
    Wegner,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Events => "events",
            Command::Spectrum => "spectrum",
            Command::Count => "count",
            Command::Localize => "localize",
            Command::Green => "green",
            Command::Weyl => "weyl",
            Command::WellCurve => "well-curve",
            Command::HfCheck => "hf-check",
            Command::Cook => "cook",
            Command::PhaseSweep => "phase-sweep",
            Command::Wegner => "wegner",
        }
    }
}

/// Exit status for an error: 1 for computational failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_computational() {
        1
    } else {
        2
    }
}

fn settings(cli: &Cli) -> crate::Result<Settings> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            ConfigFile::parse(&text, &p.display().to_string())?
        }
        None => ConfigFile::default(),
    };
    let mut values = file.merged(name);
    for s in &cli.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {s:?}")))?;
        values.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(seed) = cli.seed {
        values.insert("seed".into(), seed.to_string());
    }
    if let Some(w) = cli.workers {
        values.insert("workers".into(), w.to_string());
    }
    Ok(Settings::new(name, values))
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn dispatch<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    2
                }
            };
        }
    };
    let run = || -> crate::Result<Vec<String>> {
        let s = settings(&cli)?;
        commands::run(cli.command, s, &out_dir(&cli))
    };
    match run() {
        Ok(lines) => {
            for l in lines {
                let _ = writeln!(stdout, "{l}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "decaylab {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}
