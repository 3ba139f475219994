//! Command line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use super::{parse_counts, parse_grid, sweep, write_csv, write_json, Algo, ScenarioConfig, SweepConfig, SweepResult};
use crate::coordinate::CoordinateConfig;
use crate::error::{Error, Result};
use crate::sigproc::Modulation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Dthp,
    Cthp,
    Zf,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModArg {
    Qpsk,
    #[value(name = "16qam")]
    Qam16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// BER and sum-rate sweeps for coordinated THP in overloaded MU-MIMO
/// broadcast channels.
#[derive(Debug, Parser)]
#[command(name = "cothp", version)]
pub struct Args {
    /// Receive antennas per user and transmit antennas, e.g. "3,3,3,3x8".
    #[arg(long)]
    pub scenario: String,
    /// Streams per user, e.g. "2,2,2,2". Defaults to min(N_k, N_t / K).
    #[arg(long)]
    pub streams: Option<String>,
    #[arg(long = "mod", value_enum, default_value = "qpsk")]
    pub modulation: ModArg,
    #[arg(long, value_enum, default_value = "all")]
    pub algo: AlgoArg,
    /// Eb/N0 grid in dB as start:step:stop (inclusive).
    #[arg(long, default_value = "0:4:28")]
    pub ebn0: String,
    /// Channel draws per grid point.
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Symbol vectors per channel draw.
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Residual MUI threshold of the coordination loop.
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    /// Replace the modulo period of the constellation.
    #[arg(long)]
    pub tau_override: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl Args {
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let modulation = match self.modulation {
            ModArg::Qpsk => Modulation::Qpsk,
            ModArg::Qam16 => Modulation::Qam16,
        };
        let streams = self.streams.as_deref().map(parse_counts).transpose()?;
        let mut sc = ScenarioConfig::parse(&self.scenario, streams.as_deref(), modulation)?;
        sc.tau_override = self.tau_override;
        sc.constellation()?;
        Ok(sc)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let coordinate = CoordinateConfig {
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            ..Default::default()
        };
        coordinate.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("--trials must be at least 1".into()));
        }
        Ok(SweepConfig {
            ebn0_db: parse_grid(&self.ebn0)?,
            trials: self.trials,
            frames: self.frames,
            coordinate,
            seed: self.seed,
        })
    }

    pub fn algos(&self) -> Vec<Algo> {
        match self.algo {
            AlgoArg::Dthp => vec![Algo::Dthp],
            AlgoArg::Cthp => vec![Algo::Cthp],
            AlgoArg::Zf => vec![Algo::ZfCbf],
            AlgoArg::All => Algo::ALL.to_vec(),
        }
    }
}

/// Runs every requested sweep and returns the rows in output order.
pub fn execute(args: &Args) -> Result<Vec<SweepResult>> {
    let sc = args.scenario()?;
    let cfg = args.sweep_config()?;
    let mut rows = Vec::new();
    for algo in args.algos() {
        rows.extend(sweep(&sc, algo, &cfg)?);
    }
    Ok(rows)
}

fn emit(args: &Args, rows: &[SweepResult]) -> Result<()> {
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    match args.format {
        Format::Csv => write_csv(rows, sink),
        Format::Json => write_json(rows, sink),
    }
}

/// Parses `args` (including the program name), runs the sweeps and writes
/// the results. Returns the process exit code: 0 on success, 2 on usage or
/// configuration errors, 1 on I/O failures.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let rows = match execute(&args) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_CONFIG,
            };
        }
    };
    match emit(&args, &rows) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}
