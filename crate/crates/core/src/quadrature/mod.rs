//! Numerical integration on the plane, half-space, sphere and ball, plus the
//! `L^p`, weak-`L^p` and Lorentz (quasi)norms built on it.
//!
//! Error estimates are the disagreement between resolutions `m` and `2m`;
//! they are not rigorous bounds.

mod norms;
pub mod rules;

pub use norms::{distribution_function, lorentz_norm, lp_norm, weak_norm, NormSpec, Sampled};
pub use rules::{gauss_jacobi_symmetric, gauss_legendre, tanh_sinh, tanh_sinh_unit, tanh_sinh_unit_range, Rule, UnitNode, RADIAL_PER_M};

use libm::fabs;

use crate::error::{Error, Result};
use crate::field::{Domain, FieldFunction};

/// A value with its two-resolution error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }
}

/// Describes an integration: domain, resolution and target relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub domain: Domain,
    pub n: usize,
    pub m: usize,
    /// Length scale of the compactification on unbounded domains.
    pub scale: f64,
    /// Relative disagreement between `m` and `2m` above which the result is
    /// refused.
    pub target: f64,
    /// Absolute floor added to the acceptance threshold.
    pub abs_floor: f64,
}

impl Quadrature {
    pub fn new(domain: Domain, n: usize, m: usize) -> Self {
        Quadrature {
            domain,
            n,
            m,
            scale: 1.0,
            target: 1e-6,
            abs_floor: 1e-14,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = target;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn coarse(&self) -> Rule {
        Rule::for_domain(self.domain, self.n, self.m, self.scale)
    }

    pub fn fine(&self) -> Rule {
        Rule::for_domain(self.domain, self.n, 2 * self.m, self.scale)
    }

    /// Accepts `fine` as the value when it agrees with `coarse`.
    pub fn accept(&self, coarse: f64, fine: f64) -> Result<Estimate> {
        let error = fabs(fine - coarse);
        let threshold = self.target * fabs(fine) + self.abs_floor;
        if !(error <= threshold) {
            return Err(Error::NonConvergent {
                value: fine,
                error,
                target: self.target,
            });
        }
        Ok(Estimate::new(fine, error))
    }

    /// Integral of `f` over the domain.
    ///
    /// On unbounded domains `f` must declare a decay exponent larger than
    /// the domain dimension.
    pub fn integrate(&self, f: &FieldFunction) -> Result<Estimate> {
        check_domain(self, f)?;
        check_decay(self, f.decay(), 1.0)?;
        self.integrate_fn(|x| f.eval(x))
    }

    /// Integral of a bare closure; no decay check.
    pub fn integrate_fn<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Result<Estimate> {
        let coarse = self.coarse().sum(&mut f);
        let fine = self.fine().sum(&mut f);
        self.accept(coarse, fine)
    }
}

pub(crate) fn check_domain(q: &Quadrature, f: &FieldFunction) -> Result<()> {
    if f.domain() != q.domain || f.n() != q.n {
        return Err(Error::InvalidParameter(alloc::format!(
            "function on {} (n={}) integrated with a {} rule (n={})",
            f.domain().name(),
            f.n(),
            q.domain.name(),
            q.n
        )));
    }
    Ok(())
}

/// `power` multiplies the declared decay, as for `|f|^p`.
pub(crate) fn check_decay(q: &Quadrature, decay: Option<f64>, power: f64) -> Result<()> {
    if !q.domain.is_unbounded() {
        return Ok(());
    }
    let required = q.domain.measure_dim(q.n) as f64;
    match decay {
        Some(beta) if beta * power > required => Ok(()),
        other => Err(Error::BadDecay {
            decay: other.map(|b| b * power),
            required,
        }),
    }
}
