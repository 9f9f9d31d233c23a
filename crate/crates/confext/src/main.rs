use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use confext::{configure_threads, run, ARange, Command, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "confext",
    version,
    about = "Sharp inequalities for poly-harmonic extensions, checked numerically"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sharp extension inequality on the ball for 2 - n < a < 1
    VerifyThm1(Opts),
    /// Exponential inequality at the endpoint a = 2 - n
    VerifyThm2(Opts),
    /// Carleman's inequality on the disc
    VerifyCarleman(Opts),
    /// Biharmonic exponential inequality on B_4
    VerifyCorollary1(Opts),
    /// Table of the sharp constant over a range of a
    Sweep(Opts),
    /// Gradient search for a maximizer on the disc
    SearchMax(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a_max: Option<f64>,
    #[arg(long)]
    a_step: Option<f64>,
    /// Quadrature resolution (arc count for search-max)
    #[arg(long)]
    resolution: Option<usize>,
    /// Number of random test functions
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Saturation tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

fn build(command: Command, o: Opts) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(command);
    cfg.n = o.n.unwrap_or(cfg.n);
    cfg.a = o.a;
    cfg.a_range = match (o.a_min, o.a_max, o.a_step) {
        (None, None, None) => None,
        (Some(min), Some(max), Some(step)) => Some(ARange { min, max, step }),
        _ => return Err("--a-min, --a-max and --a-step go together".into()),
    };
    cfg.resolution = o.resolution.unwrap_or(cfg.resolution);
    cfg.samples = o.samples.unwrap_or(cfg.samples);
    cfg.seed = o.seed;
    cfg.tolerance = o.tolerance.unwrap_or(cfg.tolerance);
    cfg.format = match o.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    cfg.out = o.out;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::VerifyThm1(o) => (Command::VerifyThm1, o),
        Cmd::VerifyThm2(o) => (Command::VerifyThm2, o),
        Cmd::VerifyCarleman(o) => (Command::VerifyCarleman, o),
        Cmd::VerifyCorollary1(o) => (Command::VerifyCorollary1, o),
        Cmd::Sweep(o) => (Command::Sweep, o),
        Cmd::SearchMax(o) => (Command::SearchMax, o),
    };
    let cfg = match build(command, opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    configure_threads();
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let body = match cfg.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.table_csv().unwrap_or_default(),
    };
    let written = match &cfg.out {
        Some(path) => fs::write(path, &body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let s = report.summary;
    eprintln!(
        "{}: {} checks, {} passed, {} failed, {} errors",
        report.command, s.total, s.passed, s.failed, s.errors
    );
    ExitCode::from(report.exit_code() as u8)
}
