use alloc::vec::Vec;

use libm::{fabs, pow};

use super::{check_decay, check_domain, Estimate, Quadrature, Rule};
use crate::error::{invalid, Result};
use crate::field::FieldFunction;

/// Exponents of an `L^p` or Lorentz `L^{p,q}` (quasi)norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub p: f64,
    pub q: Option<f64>,
}

impl NormSpec {
    pub fn lp(p: f64) -> Self {
        NormSpec { p, q: None }
    }

    pub fn lorentz(p: f64, q: f64) -> Self {
        NormSpec { p, q: Some(q) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(invalid!("norm exponent p = {} must be positive", self.p));
        }
        if let Some(q) = self.q {
            if !(q > 0.0) {
                return Err(invalid!("Lorentz exponent q = {q} must be positive"));
            }
            if self.p.is_infinite() {
                return Err(invalid!("Lorentz norms need finite p"));
            }
        }
        Ok(())
    }
}

/// Absolute values of a function at the nodes of a rule, with the weights.
#[derive(Debug, Clone)]
pub struct Sampled {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl Sampled {
    pub fn new(f: &FieldFunction, rule: &Rule) -> Self {
        Sampled::from_fn(|x| f.eval(x), rule)
    }

    pub fn from_fn<F: FnMut(&[f64]) -> f64>(mut f: F, rule: &Rule) -> Self {
        let values = rule.iter().map(|(x, _)| fabs(f(x))).collect();
        Sampled {
            values,
            weights: rule.weights().to_vec(),
        }
    }

    pub fn from_parts(values: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(values.len(), weights.len());
        Sampled {
            values: values.into_iter().map(fabs).collect(),
            weights,
        }
    }

    /// `Σ w |f|^p`.
    pub fn power_sum(&self, p: f64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| w * pow(*v, p)).sum()
    }

    pub fn lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.max()
        } else {
            pow(self.power_sum(p), 1.0 / p)
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Smoothed measure of `{|f| > t}`: each node contributes the ramp
    /// `clamp((|f| - t)/δ, 0, 1)`, so values equal to `t` count as outside.
    pub fn distribution(&self, t: f64, delta: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| {
                let s = if delta > 0.0 {
                    ((v - t) / delta).clamp(0.0, 1.0)
                } else if *v > t {
                    1.0
                } else {
                    0.0
                };
                w * s
            })
            .sum()
    }

    /// Values sorted decreasingly with the cumulative measure of
    /// `{|f| ≥ v_k}` attached.
    fn layers(&self) -> Vec<(f64, f64)> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&i, &j| self.values[j].total_cmp(&self.values[i]).then(i.cmp(&j)));
        let mut acc = 0.0;
        idx.into_iter()
            .map(|i| {
                acc += self.weights[i];
                (self.values[i], acc)
            })
            .collect()
    }

    /// `sup_t t·|{|f| > t}|^{1/p}` of the discrete measure.
    pub fn weak(&self, p: f64) -> f64 {
        self.layers().iter().map(|&(v, mu)| v * pow(mu, 1.0 / p)).fold(0.0, f64::max)
    }

    /// Lorentz quasinorm of the discrete measure: the layer-cake integral
    /// `p^{1/q} (∫ t^{q-1} |{|f| ≥ t}|^{q/p} dt)^{1/q}` evaluated exactly for
    /// the step distribution function.
    pub fn lorentz(&self, p: f64, q: f64) -> f64 {
        if q.is_infinite() {
            return self.weak(p);
        }
        let layers = self.layers();
        let mut total = 0.0;
        for (k, &(v, mu)) in layers.iter().enumerate() {
            let next = layers.get(k + 1).map_or(0.0, |l| l.0);
            total += pow(mu, q / p) * (pow(v, q) - pow(next, q)) / q;
        }
        pow(p * total, 1.0 / q)
    }
}

/// `‖f‖_{L^p}` on the quadrature's domain; `p = ∞` takes the maximum over
/// the nodes of both resolutions.
pub fn lp_norm(f: &FieldFunction, quad: &Quadrature, spec: NormSpec) -> Result<Estimate> {
    spec.validate()?;
    if spec.q.is_some() {
        return Err(invalid!("lp_norm takes a plain L^p spec; use lorentz_norm"));
    }
    check_domain(quad, f)?;
    let p = spec.p;
    let coarse = Sampled::new(f, &quad.coarse());
    let fine = Sampled::new(f, &quad.fine());
    if p.is_infinite() {
        let (c, fv) = (coarse.max(), fine.max());
        let est = quad.accept(c, fv)?;
        return Ok(Estimate::new(c.max(fv), est.error));
    }
    check_decay(quad, f.decay(), p)?;
    let est = quad.accept(coarse.power_sum(p), fine.power_sum(p))?;
    let value = pow(est.value, 1.0 / p);
    let error = if est.value > 0.0 {
        value * est.error / (p * est.value)
    } else {
        0.0
    };
    Ok(Estimate::new(value, error))
}

/// Measure of `{|f| > t}`, smoothed over one node spacing (relative to `t`).
pub fn distribution_function(f: &FieldFunction, quad: &Quadrature, t: f64) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(invalid!("distribution level t = {t} must be positive"));
    }
    check_domain(quad, f)?;
    let (cr, fr) = (quad.coarse(), quad.fine());
    let c = Sampled::new(f, &cr).distribution(t, t * cr.spacing());
    let fv = Sampled::new(f, &fr).distribution(t, t * fr.spacing());
    quad.accept(c, fv)
}

/// `‖f‖_{L^{p,∞}} = sup_t t |{|f| > t}|^{1/p}`.
pub fn weak_norm(f: &FieldFunction, quad: &Quadrature, p: f64) -> Result<Estimate> {
    NormSpec::lp(p).validate()?;
    check_domain(quad, f)?;
    let c = Sampled::new(f, &quad.coarse()).weak(p);
    let fv = Sampled::new(f, &quad.fine()).weak(p);
    quad.accept(c, fv)
}

/// Lorentz quasinorm `‖f‖_{L^{p,q}}`.
pub fn lorentz_norm(f: &FieldFunction, quad: &Quadrature, spec: NormSpec) -> Result<Estimate> {
    spec.validate()?;
    let q = spec.q.ok_or_else(|| invalid!("lorentz_norm needs a secondary exponent q"))?;
    check_domain(quad, f)?;
    let c = Sampled::new(f, &quad.coarse()).lorentz(spec.p, q);
    let fv = Sampled::new(f, &quad.fine()).lorentz(spec.p, q);
    quad.accept(c, fv)
}
