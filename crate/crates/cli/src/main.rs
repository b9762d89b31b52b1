use std::path::PathBuf;
use std::process::ExitCode;

use capa_isac::rates::DEFAULT_REGION_GRID;
use capa_isac::QuadratureSpec;
use capa_isac_cli::report::{self, Link, SweepAxis, SweepSpec};
use capa_isac_cli::validate::{self, Fault, Level, ValidateOptions};
use capa_isac_cli::{emit, load_scene, parse_angle_pair, AngleOverrides, CliError, CliResult};
use clap::{Parser, Subcommand, ValueEnum};

/// Rates and SR-CR regions of CAPA-based sensing and communication.
#[derive(Debug, Parser)]
#[command(name = "capa-isac", version)]
struct Cli {
    /// Scene config (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the CU direction as THETA,PHI in degrees.
    #[arg(long, global = true, value_parser = parse_angle_pair, value_name = "THETA,PHI")]
    cu_deg: Option<(f64, f64)>,
    /// Override the target direction as THETA,PHI in degrees.
    #[arg(long, global = true, value_parser = parse_angle_pair, value_name = "THETA,PHI")]
    target_deg: Option<(f64, f64)>,
    /// Chebyshev order per axis for the correlation integrals.
    #[arg(long, global = true, default_value_t = capa_isac::quadrature::DEFAULT_CHEBY_N)]
    cheby_n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// All CAPA, SPDA and FDSAC rates at one scene.
    Rates {
        /// Write CSV here instead of printing a table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rates over an SNR or aperture-size sweep.
    Sweep {
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// dB for `snr`, aperture side in metres for `aperture`.
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SR-CR region boundaries with containment verdicts.
    Region {
        #[arg(long, value_enum)]
        link: LinkArg,
        /// Samples of ε (downlink) or ς (uplink).
        #[arg(long, default_value_t = DEFAULT_REGION_GRID)]
        grid: usize,
        /// FDSAC samples per split axis.
        #[arg(long)]
        fdsac_grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle and invariant checks.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Kernel samples over both apertures.
    DumpKernel {
        /// Samples per axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Snr,
    Aperture,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LinkArg {
    Dl,
    Ul,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    Gain,
}

fn run(cli: Cli) -> CliResult<()> {
    let angles = AngleOverrides { cu_deg: cli.cu_deg, target_deg: cli.target_deg };
    let scene = load_scene(cli.config.as_deref(), angles)?;
    let spec = QuadratureSpec::default().with_cheby_n(cli.cheby_n).map_err(|e| CliError::Usage(e.to_string()))?;
    match cli.command {
        Command::Rates { out: Some(path) } => emit(&report::rates_csv(&scene, &spec)?, Some(&path)),
        Command::Rates { out: None } => emit(&report::rates_table(&scene, &spec)?, None),
        Command::Sweep { axis, start, stop, steps, out } => {
            let axis = match axis {
                AxisArg::Snr => SweepAxis::SnrDb,
                AxisArg::Aperture => SweepAxis::ApertureSideM,
            };
            let sweep = SweepSpec::new(axis, start, stop, steps)?;
            emit(&report::sweep_csv(&scene, &sweep, &spec)?, out.as_deref())
        }
        Command::Region { link, grid, fdsac_grid, out } => {
            let link = match link {
                LinkArg::Dl => Link::Downlink,
                LinkArg::Ul => Link::Uplink,
            };
            if grid < 2 {
                return Err(CliError::Usage(format!("--grid must be at least 2, got {grid}")));
            }
            let fdsac_grid = fdsac_grid.unwrap_or_else(|| report::default_fdsac_grid(link));
            emit(&report::region_csv(&scene, link, grid, fdsac_grid, &spec)?, out.as_deref())
        }
        Command::Validate { level, seed, inject_fault } => {
            let opts = ValidateOptions {
                level: match level {
                    LevelArg::Fast => Level::Fast,
                    LevelArg::Full => Level::Full,
                },
                seed,
                fault: inject_fault.map(|FaultArg::Gain| Fault::GainPerturbation),
                spec,
            };
            let result = validate::run(&scene, &opts);
            emit(&result.render(), None)?;
            result.into_result().map(|_| ())
        }
        Command::DumpKernel { grid, out } => emit(&report::dump_kernel_csv(&scene, grid)?, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
