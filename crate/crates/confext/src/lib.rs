//! Verification suites, parameter sweeps and the maximizer search behind the
//! `confext` command line tool, with JSON/CSV reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod suites;

use std::time::Instant;

pub use config::{ARange, Command, ConfigError, Format, RunConfig};
pub use report::{CheckRecord, Report, Status};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CONFEXT_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set to a
/// positive integer. Has no effect once the pool exists.
pub fn configure_threads() {
    let Some(k) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|k| *k > 0)
    else {
        return;
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
}

/// Validates `cfg` and runs its command.
pub fn run(cfg: &RunConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let (records, table, candidate) = match cfg.command {
        Command::VerifyThm1 => (suites::verify_thm1(cfg), None, None),
        Command::VerifyThm2 => (suites::verify_thm2(cfg), None, None),
        Command::VerifyCarleman => (suites::verify_carleman(cfg), None, None),
        Command::VerifyCorollary1 => (suites::verify_corollary1(cfg), None, None),
        Command::Sweep => {
            let (r, t) = suites::sweep(cfg);
            (r, Some(t), None)
        }
        Command::SearchMax => {
            let (r, c) = suites::search_max(cfg);
            (r, None, c)
        }
    };
    let mut report = Report::new(cfg, records);
    report.table = table;
    report.candidate = candidate;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
