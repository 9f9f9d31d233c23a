//! Run configuration shared by all subcommands, with per-command defaults
//! and validation.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use confext_core::inequalities::SATURATION_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyThm1,
    VerifyThm2,
    VerifyCarleman,
    VerifyCorollary1,
    Sweep,
    SearchMax,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyThm1 => "verify-thm1",
            Command::VerifyThm2 => "verify-thm2",
            Command::VerifyCarleman => "verify-carleman",
            Command::VerifyCorollary1 => "verify-corollary1",
            Command::Sweep => "sweep",
            Command::SearchMax => "search-max",
        }
    }

    /// Smallest accepted `--resolution`.
    pub fn min_resolution(self) -> usize {
        match self {
            Command::SearchMax => 4,
            _ => 4,
        }
    }

    fn default_resolution(self) -> usize {
        match self {
            Command::SearchMax => 16,
            _ => 8,
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Command::VerifyThm1 => 200,
            Command::VerifyThm2 => 100,
            Command::VerifyCarleman => 50,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ARange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ARange {
    /// Grid points `min + i·step` up to `max`, inclusive up to rounding.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor();
        if !(count >= 0.0) {
            return Vec::new();
        }
        (0..=count as usize).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Everything a run depends on. The output path is not echoed into reports
/// so that runs differing only in destination compare equal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub a: Option<f64>,
    pub a_range: Option<ARange>,
    pub resolution: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    /// Defaults for `command`; dimension defaults follow the command's
    /// natural setting (disc for Carleman and the search, `B_4` for the
    /// biharmonic corollary).
    pub fn new(command: Command) -> Self {
        let n = match command {
            Command::VerifyCarleman | Command::SearchMax => 2,
            Command::VerifyCorollary1 => 4,
            _ => 3,
        };
        RunConfig {
            command,
            n,
            a: None,
            a_range: None,
            resolution: command.default_resolution(),
            samples: command.default_samples(),
            seed: 0,
            tolerance: SATURATION_TOLERANCE,
            format: Format::Json,
            out: None,
        }
    }

    /// `a` for commands that take one, defaulting to the harmonic case
    /// (`a = 0`) or `a = 1/2` for the search.
    pub fn a_or_default(&self) -> f64 {
        self.a.unwrap_or(match self.command {
            Command::SearchMax => 0.5,
            _ => 0.0,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.n;
        let lower = 2.0 - n as f64;
        if self.resolution < self.command.min_resolution() {
            return fail(format!(
                "resolution {} below the minimum {} for {}",
                self.resolution,
                self.command.min_resolution(),
                self.command.name()
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return fail(format!("tolerance {} must lie in (0, 1)", self.tolerance));
        }
        if self.format == Format::Csv && self.command != Command::Sweep {
            return fail("CSV output is only available for sweep tables");
        }
        if self.command != Command::Sweep && self.a_range.is_some() {
            return fail("--a-min/--a-max/--a-step only apply to sweep");
        }
        let open_range = |a: f64| a > lower && a < 1.0;
        match self.command {
            Command::VerifyThm1 => {
                if !(2..=6).contains(&n) {
                    return fail(format!("verify-thm1 supports 2 ≤ n ≤ 6, got {n}"));
                }
                let a = self.a_or_default();
                if !open_range(a) {
                    return fail(format!("a = {a} outside ({lower}, 1)"));
                }
            }
            Command::VerifyThm2 => {
                if !(3..=5).contains(&n) {
                    return fail(format!("verify-thm2 supports 3 ≤ n ≤ 5, got {n}"));
                }
                if let Some(a) = self.a {
                    if a != lower {
                        return fail(format!("verify-thm2 runs at the endpoint a = {lower}, got {a}"));
                    }
                }
            }
            Command::VerifyCarleman => {
                if n != 2 {
                    return fail(format!("Carleman's inequality lives on the disc, got n = {n}"));
                }
            }
            Command::VerifyCorollary1 => {
                if n != 4 {
                    return fail(format!("the biharmonic corollary lives on B_4, got n = {n}"));
                }
                if let Some(a) = self.a {
                    if a != -2.0 {
                        return fail(format!("verify-corollary1 runs at a = -2, got {a}"));
                    }
                }
            }
            Command::Sweep => {
                if !(2..=6).contains(&n) {
                    return fail(format!("sweep supports 2 ≤ n ≤ 6, got {n}"));
                }
                let Some(r) = self.a_range else {
                    return fail("sweep needs --a-min, --a-max and --a-step");
                };
                if !(r.step > 0.0) {
                    return fail(format!("a-step {} must be positive", r.step));
                }
                let values = r.values();
                if values.is_empty() {
                    return fail(format!("empty range [{}, {}]", r.min, r.max));
                }
                if let Some(bad) = values.iter().find(|a| !open_range(**a)) {
                    return fail(format!("a = {bad} outside ({lower}, 1)"));
                }
            }
            Command::SearchMax => {
                if n != 2 {
                    return fail(format!("the maximizer search runs on the disc, got n = {n}"));
                }
                let a = self.a_or_default();
                if !open_range(a) {
                    return fail(format!("a = {a} outside (0, 1)"));
                }
            }
        }
        Ok(())
    }

    /// Parameters close to `a = 1` make the kernel tails slow; the run is
    /// allowed but flagged.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let near = |a: f64| a > 0.95 && a < 1.0;
        if let Some(a) = self.a.filter(|a| near(*a)) {
            w.push(format!("a = {a} is close to 1; quadrature will be slow"));
        }
        if let Some(r) = self.a_range.filter(|r| near(r.max)) {
            w.push(format!("a-max = {} is close to 1; quadrature will be slow", r.max));
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_the_endpoint() {
        let r = ARange {
            min: -0.5,
            max: 0.5,
            step: 0.5,
        };
        assert_eq!(r.values(), vec![-0.5, 0.0, 0.5]);
        assert!(ARange {
            min: 0.5,
            max: 0.0,
            step: 0.1
        }
        .values()
        .is_empty());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(Command::VerifyThm1);
        assert!(c.validate().is_ok());
        c.a = Some(1.5);
        assert!(c.validate().is_err());
        c.a = Some(-1.0);
        assert!(c.validate().is_err());
        c.a = Some(0.999);
        assert!(c.validate().is_ok());
        assert_eq!(c.warnings().len(), 1);

        let mut s = RunConfig::new(Command::Sweep);
        assert!(s.validate().is_err());
        s.a_range = Some(ARange {
            min: 0.5,
            max: 0.0,
            step: 0.1,
        });
        assert!(s.validate().is_err());
        s.a_range = Some(ARange {
            min: -0.5,
            max: 0.5,
            step: 0.5,
        });
        assert!(s.validate().is_ok());

        let mut j = RunConfig::new(Command::VerifyCarleman);
        j.format = Format::Csv;
        assert!(j.validate().is_err());
        assert!(RunConfig {
            n: 3,
            ..RunConfig::new(Command::VerifyCarleman)
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            resolution: 2,
            ..RunConfig::new(Command::VerifyThm2)
        }
        .validate()
        .is_err());
    }
}
