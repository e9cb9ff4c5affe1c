//! Command-line driver: synthetic curves, extraction, layout area, circuit
//! simulation, the PPA harness and SVG plots.
//!
//! Every command computes all of its results before writing anything, and
//! each file is written to a temporary sibling and renamed into place.

mod commands;
pub mod error;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult, ErrorCode};

/// Published reference values printed next to computed results.
pub mod reference {
    /// Average cell-area reduction for ch1, ch2, ch4 (percent).
    pub const AREA_REDUCTION_PCT: [f64; 3] = [9.0, 18.0, 12.0];
    /// Best-case total substrate reduction (percent).
    pub const SUBSTRATE_REDUCTION_PCT: f64 = 31.0;
    /// Average delay change for ch1, ch2, ch4 (percent).
    pub const DELAY_DELTA_PCT: [f64; 3] = [-3.0, -2.0, 2.0];
    /// Average power change for ch1, ch2, ch4 (percent).
    pub const POWER_DELTA_PCT: [f64; 3] = [-0.5, -1.0, -2.0];
}

#[derive(Debug, Parser)]
#[command(
    name = "miv-cellkit",
    about = "Device-to-standard-cell evaluation of FDSOI MIV-transistors",
    disable_version_flag = true
)]
pub struct Cli {
    /// Seed for every random stream (noise, optimizer restarts).
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Print tool, toolchain and file-format versions.
    #[arg(short = 'V', long)]
    pub version: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample curves for the eight reference devices.
    GenSynthetic(GenSyntheticArgs),
    /// Fit model parameters to a curve file (or every `*.csv` in a directory).
    Extract(ExtractArgs),
    /// Cell layout and substrate areas for the four variants.
    Area(AreaArgs),
    /// DC operating point or transient of a netlist file.
    Simulate(SimulateArgs),
    /// Delay, power and area of library cells across variants.
    Ppa(PpaArgs),
    /// SVG plots of curve fits or a PPA report.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenSyntheticArgs {
    /// Output directory; receives `<variant>_<polarity>.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Relative standard deviation of the multiplicative noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Curve file, or a directory of curve files.
    #[arg(long)]
    pub curves: PathBuf,
    /// Bounds file (`NAME lower upper initial`); defaults to the shipped one.
    #[arg(long)]
    pub bounds: Option<PathBuf>,
    /// Report JSON (a directory when `--curves` is a directory).
    #[arg(long)]
    pub out: PathBuf,
    /// Fitted model file (a directory in directory mode; defaults to `--out`
    /// there).
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AreaArgs {
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Comma-separated cell names (default: whole library).
    #[arg(long)]
    pub cells: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    /// Waveform CSV for a transient, solution JSON for a DC run.
    #[arg(long)]
    pub out: PathBuf,
    /// Time step; overrides `.tran`.
    #[arg(long)]
    pub dt: Option<String>,
    /// Stop time; overrides `.tran`.
    #[arg(long)]
    pub tstop: Option<String>,
    /// Comma-separated nodes to export (default: all).
    #[arg(long)]
    pub nodes: Option<String>,
    /// `in,out`: measure delay and power between these nodes.
    #[arg(long)]
    pub measure: Option<String>,
    /// Measurement JSON (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PpaArgs {
    /// Directory of fitted `<variant>_<polarity>.model` files (default: the
    /// reference fixtures).
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Comma-separated cell names (default: whole library).
    #[arg(long)]
    pub cells: Option<String>,
    /// Comma-separated variants (default: all four).
    #[arg(long)]
    pub variants: Option<String>,
    #[arg(long, default_value = "1p")]
    pub dt: String,
    /// Length of one stimulus segment.
    #[arg(long, default_value = "4n")]
    pub window: String,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Reference curve file.
    #[arg(long, requires = "model")]
    pub curves: Option<PathBuf>,
    /// Fitted model file overlaid on `--curves`.
    #[arg(long, requires = "curves")]
    pub model: Option<PathBuf>,
    /// PPA report JSON.
    #[arg(long)]
    pub ppa: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub verbose: u8,
    /// Replacement for the embedded fixtures and default bounds.
    pub data_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        if cli.jobs == Some(0) {
            return Err(CliError::new(ErrorCode::Usage, "--jobs must be at least 1"));
        }
        let data_dir = std::env::var_os(miv_cellkit::fixtures::DATA_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        if let Some(d) = &data_dir {
            if !d.is_dir() {
                return Err(CliError::input(format!(
                    "{} points to a missing directory {}",
                    miv_cellkit::fixtures::DATA_DIR_ENV,
                    d.display()
                )));
            }
        }
        Ok(RunConfig {
            seed: cli.seed,
            jobs: cli.jobs,
            verbose: cli.verbose,
            data_dir,
        })
    }
}

pub fn version_text() -> String {
    format!(
        "miv-cellkit {}\n{}\nformats: curves {v}, model {v}, bounds {v}, reports {v}\n",
        env!("CARGO_PKG_VERSION"),
        env!("MIVCELLKIT_RUSTC_VERSION"),
        v = miv_cellkit::FORMAT_VERSION
    )
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parse `args` and run the selected command; human-readable progress goes
/// to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return Ok(());
            }
            return Err(CliError::new(ErrorCode::Usage, e.to_string().trim_end().to_string()));
        }
    };
    if cli.version {
        let _ = write!(out, "{}", version_text());
        return Ok(());
    }
    let cfg = RunConfig::from_cli(&cli)?;
    init_logging(cfg.verbose);
    let Some(command) = &cli.command else {
        return Err(CliError::new(ErrorCode::Usage, "no subcommand given (see --help)"));
    };
    if let Some(n) = cfg.jobs {
        // Fails only if the global pool already exists (repeated in-process
        // runs); the first setting stays in force then.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match command {
        Command::GenSynthetic(a) => commands::gen_synthetic(&cfg, a, out),
        Command::Extract(a) => commands::extract(&cfg, a, out),
        Command::Area(a) => commands::area(&cfg, a, out),
        Command::Simulate(a) => commands::simulate(&cfg, a, out),
        Command::Ppa(a) => commands::ppa(&cfg, a, out),
        Command::Plot(a) => commands::plot(&cfg, a, out),
    }
}
