//! `condtrack`: generation, tracking, certification, length measurement and
//! path shortening for homogeneous polynomial systems, driven by JSON files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use condtrack::condition::{DEFAULT_C, DEFAULT_EPS};
use condtrack::{HomotopyKind, TrackerConfig};

/// Process exit status. Every command ends in exactly one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success = 0,
    InputError = 1,
    NumericalFailure = 2,
    ResourceLimit = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, Parser)]
#[command(name = "condtrack", version, about = "Condition-based homotopy continuation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub config: ConfigArgs,

    /// Seed for randomized commands (gen, shorten).
    #[arg(long, global = true, env = "COND_TRACKER_SEED")]
    pub seed: Option<u64>,

    /// Format of the report printed to standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Leave the timestamp field out of written files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Trust constant C of the step radii.
    #[arg(long, global = true, default_value_t = DEFAULT_C)]
    pub c_const: f64,
    /// Allowed per-step growth of mu, as 1 + eps.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Micro-step width used to integrate the homotopy speed.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub quad_substep: f64,
    /// Newton step budget per track.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub max_steps: usize,
    /// Relative residual accepted for start points and path nodes.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub residual_tol: f64,
    /// Tracking stops once 1/mu falls below this.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub sigma_floor: f64,
}

impl ConfigArgs {
    pub fn tracker_config(&self) -> TrackerConfig {
        TrackerConfig {
            c: self.c_const,
            eps: self.eps,
            quad_substep: self.quad_substep,
            max_steps: self.max_steps,
            residual_tol: self.residual_tol,
            sigma_floor: self.sigma_floor,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random Kostlan system, or the canonical start pair.
    Gen {
        /// Number of equations; the system lives in n + 1 variables.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Comma-separated degrees, one per equation.
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
        /// Write the start system instead of a random one.
        #[arg(long)]
        start_pair: bool,
        #[arg(long, short)]
        output: PathBuf,
        /// With --start-pair, also write its zero here.
        #[arg(long)]
        point_output: Option<PathBuf>,
    },
    /// Condition number mu_norm of a system at a point.
    Mu {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Projective Newton iterations from a point.
    Newton {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// A zero to certify the point against.
        #[arg(long)]
        zero: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Track a zero along a homotopy.
    Track(TrackArgs),
    /// Condition length and product length of a path or track.
    Length {
        #[arg(long, short)]
        input: PathBuf,
    },
    /// Shorten a path in the condition metric.
    Shorten {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        /// Random proposals per node and sweep.
        #[arg(long, default_value_t = 8)]
        proposals: usize,
        #[arg(long, short)]
        output: PathBuf,
        /// Per-round length series.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Track the shortened polygon and report its step count.
        #[arg(long)]
        retrack: bool,
    },
    /// Growth audits of a track or path; exit 0 iff all pass.
    Audit {
        #[arg(long, short)]
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Start system file.
    #[arg(long, requires = "point", conflicts_with = "start_pair")]
    pub start: Option<PathBuf>,
    /// Zero of the start system.
    #[arg(long)]
    pub point: Option<PathBuf>,
    /// Start from the canonical start pair for the target's degrees.
    #[arg(long)]
    pub start_pair: bool,
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Intermediate systems of a piecewise great-circle path, in order.
    #[arg(long)]
    pub waypoint: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = KindArg::GreatCircle)]
    pub kind: KindArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Batch file: a JSON array of jobs with `target` and optional `start`,
    /// `point`, `waypoints` and `kind`.
    #[arg(long, conflicts_with_all = ["start", "target", "start_pair"])]
    pub batch: Option<PathBuf>,
    /// Worker threads for a batch.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Directory for batch results, one `job-NNNN.json` per job.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    GreatCircle,
    BwSegment,
}

impl From<KindArg> for HomotopyKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::GreatCircle => HomotopyKind::GreatCircle,
            KindArg::BwSegment => HomotopyKind::BwSegment,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::InputError.into()
            } else {
                Status::Success.into()
            };
        }
    };
    match commands::run(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::InputError.into()
        }
    }
}
