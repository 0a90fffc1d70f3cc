//! `icosa`: solve, trace, analyse and export unit-edge icosahedra.

mod commands;
mod config;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use icosa_core::flex::TraceMode;

use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "icosa",
    version,
    about = "Unit-edge icosahedra with prescribed symmetry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Multistart Gauss–Newton on one symmetry case; writes a class catalog.
    Solve(SolveArgs),
    /// Merges catalogs and compares class counts with the published table.
    Report(ReportArgs),
    /// Traces the one-parameter family of d-invariant icosahedra.
    Curve(CurveArgs),
    /// Significant points, strengths and face-angle checks.
    Invariants(InvariantsArgs),
    /// Dents a vertex (and optionally its antipode).
    Dent(DentArgs),
    /// Writes OBJ meshes and a plain-text summary table.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Case id such as `d---`, `a+--`, `ad-++/1`; `ad-++` runs both
    /// sub-cases and `all` runs every case.
    #[arg(long)]
    case: String,
    /// Number of random starts per case.
    #[arg(long, default_value_t = 2000)]
    starts: usize,
    /// Seed of the counter-based start generator.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Half-width of the uniform start box.
    #[arg(long, default_value_t = 1.5)]
    start_box: f64,
    /// Gauss–Newton iteration cap per start.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Output catalog (JSON); standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Catalog, report or shape documents to merge.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Print observed counts next to the published classification table.
    #[arg(long)]
    paper_table: bool,
    /// Merged report (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Number of recorded steps after the start.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// End of the integration interval.
    #[arg(long, default_value_t = 3.0)]
    t_end: f64,
    /// `raw` (tangent field as is), `arclength` (unit speed) or `projected`
    /// (unit speed plus Gauss–Newton projection).
    #[arg(long, default_value = "arclength")]
    mode: TraceMode,
    /// Starts of the multistart that picks the starting point.
    #[arg(long, default_value_t = 2000)]
    starts: usize,
    /// Seed of that multistart.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Curve stream (JSON lines); standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an OBJ mesh every N steps.
    #[arg(long)]
    export_obj_every: Option<usize>,
    /// Directory for those meshes (default: `<out>.obj` next to the stream).
    #[arg(long)]
    obj_dir: Option<PathBuf>,
    /// Write a certificate of pairwise inequivalent members (JSON).
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InvariantsArgs {
    /// Catalog, report or shape document.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output (JSON); standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DentArgs {
    /// Shape or catalog document; the regular icosahedron if omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Index of the class to dent when the input holds several (0-based).
    #[arg(long)]
    class: Option<usize>,
    /// Start from the great icosahedron instead of the regular one.
    #[arg(long, conflicts_with = "input")]
    great: bool,
    /// Vertex to dent, 1 to 12.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=12))]
    vertex: u8,
    /// Dent the antipodal vertex afterwards.
    #[arg(long)]
    then_antipodal: bool,
    /// Output shape (JSON); standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Catalog, report or shape documents.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Directory receiving one OBJ per class and `summary.txt`.
    #[arg(long)]
    out_dir: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ICOSA_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "ICOSA_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Report(a) => commands::report(a),
        Command::Curve(a) => commands::curve(a),
        Command::Invariants(a) => commands::invariants(a),
        Command::Dent(a) => commands::dent(a),
        Command::Export(a) => commands::export(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("icosa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
