//! `eqtest`: build alarm predictions from a catalog, score them, and test
//! their significance.
//!
//! Reports go to stdout (or `--out`) as JSON or CSV; one-line human
//! summaries go to stderr. Exit status is 0 on success, 1 for usage or
//! configuration errors and 2 when an input file cannot be parsed.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_050_101;

#[derive(Parser, Debug)]
#[command(
    name = "eqtest",
    version,
    about = "Automatic-alarm earthquake predictions and their significance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a CSV or NDK catalog to canonical CSV.
    Ingest(IngestArgs),
    /// Generate alarms from a catalog and score them against it.
    Eval(EvalArgs),
    /// Permutation test of the predicted-event count.
    Test(TestArgs),
    /// Reproduce the four rows of the 2000-2004 CMT table.
    Table1(Table1Args),
    /// Remove smaller events inside the space-time windows of larger ones.
    Decluster(DeclusterArgs),
    /// Draw a synthetic catalog from one of the null models.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Catalog file, or a directory of `.ndk` files.
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Magnitude used for thresholds.
    #[arg(long, value_enum, default_value_t = MagnitudeArg::Mb)]
    pub magnitude: MagnitudeArg,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the main output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the `generated_at` timestamp so reruns are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    /// Study window start (ISO-8601, inclusive). Defaults to the catalog span.
    #[arg(long)]
    pub from: Option<String>,
    /// Study window end (ISO-8601, exclusive).
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    /// Threshold magnitude M_tau for targets and alarm triggers.
    #[arg(long)]
    pub mag_threshold: f64,
    #[arg(long, default_value_t = 21.0)]
    pub window_days: f64,
    #[arg(long, default_value_t = 50.0)]
    pub radius_km: f64,
    #[arg(long, value_enum, default_value_t = PredictorArg::I)]
    pub predictor: PredictorArg,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub predict: PredictArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also write the alarm set as CSV.
    #[arg(long)]
    pub alarms_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub predict: PredictArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Keep the observed alarms fixed, or rebuild them from each permuted catalog.
    #[arg(long, value_enum, default_value_t = AlarmsArg::Fixed)]
    pub alarms: AlarmsArg,
}

#[derive(Args, Debug)]
pub struct Table1Args {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct DeclusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Window table CSV with columns `mag_min,time_days,distance_km`.
    #[arg(long)]
    pub windows: PathBuf,
    #[arg(long, value_enum, default_value_t = HolesArg::All)]
    pub holes: HolesArg,
    /// Write the statistics JSON here instead of stderr.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub model: ModelArg,
    /// Catalog supplying marks (and times for `permute`); not needed for `gamma`.
    #[arg(long)]
    pub marks: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum, default_value_t = MagnitudeArg::Mb)]
    pub magnitude: MagnitudeArg,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Stream within the seed, e.g. a replicate index.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Events per year for `poisson`; defaults to the marks catalog's rate.
    #[arg(long)]
    pub rate_per_year: Option<f64>,
    /// Epicenters for `poisson`: resampled from the marks or uniform on the sphere.
    #[arg(long, value_enum, default_value_t = LocationsArg::Resample)]
    pub locations: LocationsArg,
    /// Cell size in degrees for `hetero`.
    #[arg(long, default_value_t = 10.0)]
    pub cell_deg: f64,
    /// Gamma shape for `gamma`.
    #[arg(long, default_value_t = 1.0)]
    pub shape: f64,
    /// Mean inter-event time in days for `gamma`.
    #[arg(long, default_value_t = 1.0)]
    pub mean_days: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Ndk,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MagnitudeArg {
    Mb,
    Ms,
    /// mb, falling back to Ms.
    MbMs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictorArg {
    I,
    Ii,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlarmsArg {
    Fixed,
    Regenerate,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolesArg {
    /// Every larger earlier event punches a hole.
    All,
    /// Only retained events punch holes.
    Retained,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    Permute,
    Uniform,
    Poisson,
    Hetero,
    Gamma,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocationsArg {
    Resample,
    Uniform,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Eval(a) => commands::eval(a),
        Command::Test(a) => commands::test(a),
        Command::Table1(a) => commands::table1(a),
        Command::Decluster(a) => commands::decluster(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eqtest: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
