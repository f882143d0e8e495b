//! `dense-mimo`: fixed-aperture rate sweeps for dense arrays with 1-bit
//! converters.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dense_mimo::harness::{
    parse_element_list, run_downlink_sweep, run_uplink_sweep, to_csv_bytes, validate_model, FaultInjection,
    SweepConfig, SweepRow,
};
use dense_mimo::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dense-mimo",
    version,
    about = "Rate sweeps for dense antenna arrays with 1-bit ADCs/DACs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Uplink sweep: ideal, exact 1-bit and UQN rates per element count.
    Uplink(SweepArgs),
    /// Downlink sweep: ideal, dithered and undithered 1-bit rates, α,
    /// power ratios and dither leakage.
    Downlink(SweepArgs),
    /// Run the model property suite; exits with 3 if any property fails.
    Validate {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Multiply the coupling matrix by this factor before the passivity
        /// checks (fault injection).
        #[arg(long, default_value_t = 1.0)]
        coupling_scale: f64,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Aperture side length in wavelengths.
    #[arg(long, default_value_t = 2.5)]
    aperture: f64,
    /// Comma-separated element counts, each a perfect square.
    #[arg(long, default_value = "25,49,100,196,400", value_parser = elements)]
    elements: ElementList,
    #[arg(long, default_value_t = 2)]
    users: usize,
    /// Linear SNR: ε_k/N0 on the uplink, ε/(N0·N_F) on the downlink.
    #[arg(long, default_value_t = 2.0)]
    snr: f64,
    /// Linear noise figure N_F ≥ 1.
    #[arg(long, default_value_t = 2.0)]
    noise_figure: f64,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Eigenvalue threshold δ of the dither projector.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// σ_d²/ε as a multiple of λ/a.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    dither_ratio: f64,
    /// Disable the non-radiating dither.
    #[arg(long)]
    no_dither: bool,
    /// θ nodes of the coupling-matrix quadrature oracle (φ uses twice as many).
    #[arg(long, default_value_t = 512)]
    quad_points: usize,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A whole `--elements` list as one clap value.
#[derive(Debug, Clone)]
struct ElementList(Vec<usize>);

fn elements(s: &str) -> Result<ElementList, String> {
    parse_element_list(s).map(ElementList).map_err(|e| e.to_string())
}

impl SweepArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            aperture_lambda: self.aperture,
            element_counts: self.elements.0.clone(),
            users: self.users,
            snr: self.snr,
            noise_figure: self.noise_figure,
            realizations: self.realizations,
            seed: self.seed,
            delta: self.delta,
            dither_ratio: self.dither_ratio,
            dither: !self.no_dither,
            quad_points: self.quad_points,
            workers: self
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            output_path: self.out.clone(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::UnsupportedPattern(_)
        | Error::Io { .. }
        | Error::Csv { .. }
        | Error::MalformedRecord { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn write_output(rows: &[SweepRow], cfg: &SweepConfig) -> Result<(), Error> {
    let bytes = to_csv_bytes(rows)?;
    match &cfg.output_path {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout().write_all(&bytes).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Uplink(args) => {
            let cfg = args.config();
            write_output(&run_uplink_sweep(&cfg)?, &cfg)?;
            Ok(0)
        }
        Command::Downlink(args) => {
            let cfg = args.config();
            write_output(&run_downlink_sweep(&cfg)?, &cfg)?;
            Ok(0)
        }
        Command::Validate { sweep, coupling_scale } => {
            let cfg = sweep.config();
            if !(coupling_scale.is_finite() && coupling_scale > 0.0) {
                return Err(Error::Config(format!(
                    "--coupling-scale must be positive, got {coupling_scale}"
                )));
            }
            let report = validate_model(&cfg, FaultInjection { coupling_scale })?;
            let text = format!("{report}\n");
            match &cfg.output_path {
                Some(path) => std::fs::write(path, &text).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?,
                None => print!("{text}"),
            }
            for failure in report.failures() {
                eprintln!("{failure}");
            }
            Ok(if report.passed() { 0 } else { EXIT_PROPERTY })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
