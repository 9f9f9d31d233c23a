//! The extremal family `c (λ/(λ² + |Y - Y_0|²))^{ε/2}` on `R^{n-1}`, the
//! half-space form of the quotient and the Euler–Lagrange residual.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_2;
use libm::{cos, fabs, log, pow, sin, sqrt};

use super::{root, two_level, QuotientReport};
use crate::error::{invalid, Error, Result};
use crate::field::{Domain, FieldFunction};
use crate::kernels::{KernelParams, KernelRule, MAX_DIM};
use crate::linalg::dist_sq;
use crate::quadrature::{tanh_sinh_unit, Rule, UnitNode, RADIAL_PER_M};
use crate::special::sphere_area;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalCandidate {
    pub c: f64,
    pub lambda: f64,
    pub y0: Vec<f64>,
}

impl ExtremalCandidate {
    pub fn new(c: f64, lambda: f64, y0: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid!("scale λ = {lambda} must be positive"));
        }
        Ok(ExtremalCandidate { c, lambda, y0 })
    }

    pub fn value(&self, y: &[f64], eps: f64) -> f64 {
        self.c * pow(self.lambda / (self.lambda * self.lambda + dist_sq(y, &self.y0)), eps / 2.0)
    }
}

pub fn extremal_eval(cand: &ExtremalCandidate, params: &KernelParams) -> Result<FieldFunction> {
    if cand.y0.len() + 1 != params.n() {
        return Err(invalid!("centre must lie in R^{}", params.n() - 1));
    }
    let (c, eps) = (cand.clone(), params.eps());
    Ok(FieldFunction::new(Domain::Plane, params.n(), move |y| c.value(y, eps)).with_decay(eps))
}

/// `(x, w)` for `x = s tan θ` over `(0, ∞)` from a unit tanh-sinh node.
fn half_line(nd: &UnitNode, s: f64) -> (f64, f64) {
    let theta_comp = FRAC_PI_2 * nd.x_comp;
    let (st, ct) = (cos(theta_comp), sin(theta_comp));
    (s * st / ct, nd.w * FRAC_PI_2 * s / (ct * ct))
}

/// `‖P_a f‖_{L^{2n/ε}(R^n_+)} / ‖f‖_{L^{2(n-1)/ε}(R^{n-1})}` for `f` radial
/// about `center`. Both norms reduce to integrals over the distance `ρ` to
/// the centre and the height `x_n`, compactified with `x = s tan θ`; the
/// extension is evaluated with kernel rules.
pub fn halfspace_quotient(f: &FieldFunction, center: &[f64], params: &KernelParams, m: usize, scale: f64) -> Result<QuotientReport> {
    params.require_positive_eps()?;
    let n = params.n();
    if f.domain() != Domain::Plane || f.n() != n || center.len() != n - 1 {
        return Err(invalid!("expected plane data on R^{} with a centre there", n - 1));
    }
    let (p, q) = (params.p_boundary()?, params.p_interior()?);
    let area = sphere_area(n - 1);
    let dm = n as f64 - 2.0;
    let point = |rho: f64| {
        let mut y = center.to_vec();
        y[0] += rho;
        y
    };
    let den = two_level(m, |k| {
        Ok(area
            * tanh_sinh_unit(RADIAL_PER_M * k)
                .iter()
                .map(|nd| {
                    let (rho, w) = half_line(nd, scale);
                    if !(w.is_finite() && rho.is_finite()) {
                        return 0.0;
                    }
                    w * pow(rho, dm) * pow(fabs(f.eval(&point(rho))), p)
                })
                .sum::<f64>())
    })?;
    let num = two_level(m, |k| {
        let kr = KernelRule::new(params, k);
        let nodes: Vec<(f64, f64)> = tanh_sinh_unit(RADIAL_PER_M * k)
            .iter()
            .map(|nd| half_line(nd, scale))
            .filter(|(x, w)| x.is_finite() && w.is_finite() && *w > 0.0 && *x > 0.0)
            .collect();
        let mut x = [0.0; MAX_DIM];
        let mut acc = 0.0;
        for &(rho, wr) in &nodes {
            let y = point(rho);
            x[..n - 1].copy_from_slice(&y);
            let wr = wr * pow(rho, dm);
            for &(xn, wx) in &nodes {
                x[n - 1] = xn;
                let u = kr.average(&x[..n], |z| f.eval(z));
                acc += wr * wx * pow(fabs(u), q);
            }
        }
        Ok(area * acc)
    })?;
    QuotientReport::new(root(num, q), root(den, p))
}

/// Radial cutoff of [`el_residual`], in units of the length scale.
const FAR_FIELD: f64 = 1e4;

/// Coefficient of variation over `samples` of
/// `R(Y) = ∫_{R^n_+} x_n^{1-a} |(X-Y, x_n)|^{-(n-a)} (P_a f)^{q-1} / f(Y)^{p-1}`
/// with `p = 2(n-1)/ε`, `q = 2n/ε`. Constant `R` is the Euler–Lagrange
/// equation of the quotient. The integral uses polar coordinates around
/// `(Y, 0)`, where the kernel becomes `ω_n^{1-a} ρ^{-(n-1)}` and cancels
/// the volume element.
pub fn el_residual(f: &FieldFunction, params: &KernelParams, samples: &[Vec<f64>], m: usize, scale: f64) -> Result<f64> {
    params.require_positive_eps()?;
    let n = params.n();
    if f.domain() != Domain::Plane || f.n() != n {
        return Err(invalid!("expected plane data on R^{}", n - 1));
    }
    if samples.len() < 2 {
        return Err(invalid!("need at least two sample points"));
    }
    let (p, q) = (params.p_boundary()?, params.p_interior()?);
    let a = params.a();
    let kr = KernelRule::new(params, m);
    // The integrand decays like ρ^{-(q-1)ε}. Far nodes are dropped: there the
    // kernel rule cannot resolve f, and nodes of the two structured rules
    // can align so that X + x_n U lands on the peak of f.
    let radial: Vec<(f64, f64)> = tanh_sinh_unit(2 * RADIAL_PER_M * m)
        .iter()
        .map(|nd| half_line(nd, scale))
        .filter(|(x, w)| *x < FAR_FIELD * scale && w.is_finite() && *w > 0.0)
        .collect();
    // upper hemisphere: ω = (√(1-t²) σ, t), σ ∈ S^{n-2}
    let sub = Rule::sphere(n - 1, m);
    let alpha = (n as f64 - 3.0) / 2.0;
    let mut hemi: Vec<(Vec<f64>, f64)> = Vec::new();
    for nd in tanh_sinh_unit(RADIAL_PER_M * m) {
        let t = nd.x;
        let w = nd.w * pow(t, 1.0 - a) * pow(nd.x_comp * (1.0 + t), alpha);
        if !(w > 0.0) || !w.is_finite() {
            continue;
        }
        let s = sqrt(nd.x_comp * (1.0 + t));
        for (sig, ws) in sub.iter() {
            let mut om: Vec<f64> = sig.iter().map(|c| s * c).collect();
            om.push(t);
            hemi.push((om, w * ws));
        }
    }
    let mut values = Vec::with_capacity(samples.len());
    let mut z = [0.0; MAX_DIM];
    for y in samples {
        if y.len() != n - 1 {
            return Err(invalid!("sample points lie in R^{}", n - 1));
        }
        let fy = f.eval(y);
        if !(fy > 0.0) {
            return Err(Error::Inadmissible(alloc::format!("f(Y) = {fy} is not positive")));
        }
        let mut acc = 0.0;
        for &(rho, wr) in &radial {
            for (om, wo) in &hemi {
                for i in 0..n - 1 {
                    z[i] = y[i] + rho * om[i];
                }
                z[n - 1] = rho * om[n - 1];
                let u = kr.average(&z[..n], |x| f.eval(x));
                acc += wr * wo * pow(fabs(u), q - 1.0);
            }
        }
        values.push(acc / pow(fy, p - 1.0));
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
    Ok(sqrt(var) / fabs(mean))
}

/// Least-squares fit of the extremal family.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalFit {
    pub candidate: ExtremalCandidate,
    /// `‖f - f_fit‖_p / ‖f‖_p` over the weighted samples.
    pub residual: f64,
}

/// Fits `(c, λ, Y_0)` to samples `(Y, f(Y), w)`: compass search over
/// `(log λ, Y_0)`, with `c` chosen in closed form by weighted least squares
/// at every trial, minimizing the relative weighted `L^p` residual.
pub fn fit_extremal(samples: &[(Vec<f64>, f64, f64)], params: &KernelParams, p: f64) -> Result<ExtremalFit> {
    params.require_positive_eps()?;
    let dim = params.n() - 1;
    if samples.is_empty() || samples.iter().any(|s| s.0.len() != dim) {
        return Err(invalid!("need samples in R^{dim}"));
    }
    let eps = params.eps();
    let norm_f = samples.iter().map(|(_, v, w)| w * pow(fabs(*v), p)).sum::<f64>();
    if !(norm_f > 0.0) {
        return Err(invalid!("samples vanish"));
    }
    let evaluate = |x: &[f64]| -> (f64, f64) {
        let mut cand = ExtremalCandidate {
            c: 1.0,
            lambda: libm::exp(x[0]),
            y0: x[1..].to_vec(),
        };
        let (mut sfg, mut sgg) = (0.0, 0.0);
        for (y, v, w) in samples {
            let g = cand.value(y, eps);
            sfg += w * v * g;
            sgg += w * g * g;
        }
        cand.c = if sgg > 0.0 { sfg / sgg } else { 0.0 };
        let r = samples
            .iter()
            .map(|(y, v, w)| w * pow(fabs(v - cand.value(y, eps)), p))
            .sum::<f64>();
        (pow(r / norm_f, 1.0 / p), cand.c)
    };
    // start at the largest sample, with λ from the half-maximum width
    let (imax, vmax) = samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.1 > acc.1 { (i, s.1) } else { acc });
    let y_peak = samples[imax].0.clone();
    let half = samples
        .iter()
        .filter(|s| s.1 >= vmax * pow(0.5, eps / 2.0))
        .map(|s| sqrt(dist_sq(&s.0, &y_peak)))
        .fold(0.0, f64::max);
    let mut x = vec![log(half.max(1e-3))];
    x.extend_from_slice(&y_peak);
    let (mut best, _) = evaluate(&x);
    let mut step = 0.5;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..x.len() {
            for s in [step, -step] {
                let mut t = x.clone();
                t[i] += s;
                let (r, _) = evaluate(&t);
                if r < best {
                    best = r;
                    x = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let (residual, c) = evaluate(&x);
    Ok(ExtremalFit {
        candidate: ExtremalCandidate::new(c, libm::exp(x[0]), x[1..].to_vec())?,
        residual,
    })
}
