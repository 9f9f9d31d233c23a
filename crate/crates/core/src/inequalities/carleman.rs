//! Carleman's inequality on the disc, its four-dimensional biharmonic
//! analogue, and the uniform bounds on `P̃_a 1` for `a` near `2 - n`.

use alloc::format;
use alloc::vec::Vec;

use core::f64::consts::PI;
use libm::{cos, exp, fabs, pow, sin};

use super::thm2::{compute_in, sharp_constant_thm2};
use super::{ball_integral, root, two_level, QuotientReport, SATURATION_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::field::{Domain, FieldFunction};
use crate::kernels::{iterated_laplacian, normalization, zonal_profile, KernelParams};
use crate::linalg::norm;
use crate::quadrature::{tanh_sinh_unit, Estimate, Rule};
use crate::special::sphere_area;

/// Slack allowed in the sign conditions of the admissibility spot checks,
/// on top of the finite-difference spread.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-8;

const LAPLACIAN_STEP: f64 = 0.02;
const BILAPLACIAN_STEP: f64 = 0.16;
const NORMAL_STEP: f64 = 1e-3;

/// Class of admissible data for [`carleman_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Harmonic,
    Subharmonic,
}

/// `Δ^k u(p)` with two Richardson levels over the steps `h, h/2, h/4`;
/// returns the finer extrapolant and a spread: its distance to the coarser
/// one plus a rounding floor for the finest stencil.
fn richardson_laplacian<U: Fn(&[f64]) -> f64>(u: &U, k: usize, p: &[f64], h: f64) -> (f64, f64) {
    let l: Vec<f64> = (0..3).map(|i| iterated_laplacian(u, k, p, h / (1 << i) as f64)).collect();
    let r1 = (4.0 * l[1] - l[0]) / 3.0;
    let r2 = (4.0 * l[2] - l[1]) / 3.0;
    let stencil = pow(4.0 * p.len() as f64, k as f64) / pow(h / 4.0, 2.0 * k as f64);
    let rounding = f64::EPSILON * fabs(u(p)).max(1.0) * stencil;
    (r2, fabs(r2 - r1) + rounding)
}

/// `Δu(p)` by extrapolated central differences with step `h`, and the spread
/// between extrapolation levels.
pub fn fd_laplacian<U: Fn(&[f64]) -> f64>(u: U, p: &[f64], h: f64) -> (f64, f64) {
    richardson_laplacian(&u, 1, p, h)
}

/// `-∂u/∂γ` at the boundary point `xi` by one-sided differences along the
/// radius, extrapolated over `h` and `h/2`. Returns the value and spread.
pub fn inward_derivative<U: Fn(&[f64]) -> f64>(u: U, xi: &[f64], h: f64) -> (f64, f64) {
    let at = |s: f64| {
        let q: Vec<f64> = xi.iter().map(|x| x * (1.0 - s)).collect();
        u(&q)
    };
    let d = |h: f64| (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
    let (c, f) = (d(h), d(h / 2.0));
    let r = (4.0 * f - c) / 3.0;
    (r, fabs(r - f))
}

/// Interior spot-check points: the centre and three rings out to `r_max`.
fn interior_samples(n: usize, r_max: f64) -> Vec<Vec<f64>> {
    let mut pts = alloc::vec![alloc::vec![0.0; n]];
    for (i, r) in [r_max / 3.0, 2.0 * r_max / 3.0, r_max].into_iter().enumerate() {
        for k in 0..8 {
            let th = 2.0 * PI * (k as f64 + 0.5 * i as f64) / 8.0;
            let mut p = alloc::vec![0.0; n];
            p[0] = r * cos(th);
            p[1] = r * sin(th);
            if n > 2 {
                // tilt off the coordinate plane
                let s = 0.3 * sin(3.0 * th);
                p.iter_mut().for_each(|x| *x *= libm::sqrt(1.0 - s * s));
                p[n - 1] += r * s;
            }
            pts.push(p);
        }
    }
    pts
}

fn check_laplacian(u: &FieldFunction, class: Admissibility) -> Result<()> {
    for p in interior_samples(2, 0.75) {
        let (v, spread) = fd_laplacian(|x| u.eval(x), &p, LAPLACIAN_STEP);
        let slack = ADMISSIBILITY_TOLERANCE + spread;
        let ok = match class {
            Admissibility::Harmonic => fabs(v) <= slack,
            Admissibility::Subharmonic => v >= -slack,
        };
        if !ok {
            return Err(Error::Inadmissible(format!("Δu = {v:e} at {p:?} (spread {spread:e})")));
        }
    }
    Ok(())
}

/// Carleman's quotient `∫_{B_2} e^{2u} / (∫_{∂B_2} e^u dθ)²` with reference
/// `1/(4π)`, after an FD check that `u` is (sub)harmonic.
pub fn carleman_check(u: &FieldFunction, class: Admissibility, m: usize) -> Result<QuotientReport> {
    if u.domain() != Domain::Ball || u.n() != 2 {
        return Err(invalid!("Carleman's inequality needs data on B_2"));
    }
    check_laplacian(u, class)?;
    let num = two_level(m, |k| {
        Ok(ball_integral(2, k, |r, _| r, |r, om| exp(2.0 * u.eval(&[r * om[0], r * om[1]]))))
    })?;
    let b = two_level(m, |k| Ok(Rule::sphere(2, k).sum(|x| exp(u.eval(x)))))?;
    let den = Estimate::new(b.value * b.value, 2.0 * b.value * b.error);
    Ok(QuotientReport::new(num, den)?.with_reference(Estimate::exact(1.0 / (4.0 * PI)), SATURATION_TOLERANCE))
}

/// The sharp constant for `n = 4`, computed from the biharmonic function
/// with zero boundary values and unit inward normal derivative.
pub fn corollary1_reference(m: usize) -> Result<Estimate> {
    sharp_constant_thm2(&compute_in(4, m)?, m)
}

/// The quotient `(∫_{B_4} e^{4u})^{1/4} / (∫_{S^3} e^{3u})^{1/3}` for
/// sub-biharmonic `u` with `-∂u/∂γ ≤ 1`. The inward derivative is taken
/// from `neumann` when given, otherwise by one-sided differences.
pub fn corollary1_check(u: &FieldFunction, neumann: Option<&FieldFunction>, m: usize) -> Result<QuotientReport> {
    if u.domain() != Domain::Ball || u.n() != 4 {
        return Err(invalid!("the biharmonic inequality needs data on B_4"));
    }
    // the stencil reaches 2h = 0.32 from the sample
    for p in interior_samples(4, 0.5) {
        let (v, spread) = richardson_laplacian(&|x: &[f64]| u.eval(x), 2, &p, BILAPLACIAN_STEP);
        if v > ADMISSIBILITY_TOLERANCE + spread {
            return Err(Error::Inadmissible(format!("Δ²u = {v:e} at {p:?} (spread {spread:e})")));
        }
    }
    for xi in interior_samples(4, 0.75).into_iter().skip(1) {
        let r = norm(&xi);
        let xi: Vec<f64> = xi.iter().map(|x| x / r).collect();
        let (v, spread) = match neumann {
            Some(g) => (g.eval(&xi), 0.0),
            None => inward_derivative(|x| u.eval(x), &xi, NORMAL_STEP),
        };
        if v > 1.0 + ADMISSIBILITY_TOLERANCE + spread {
            return Err(Error::Inadmissible(format!("-∂u/∂γ = {v} at {xi:?}")));
        }
    }
    let num = two_level(m, |k| {
        let mut eta = [0.0; 4];
        Ok(ball_integral(
            4,
            k,
            |r, _| r,
            |&r, om| {
                eta.iter_mut().zip(om).for_each(|(e, o)| *e = r * o);
                exp(4.0 * u.eval(&eta))
            },
        ))
    })?;
    let den = two_level(m, |k| Ok(Rule::sphere(4, k).sum(|x| exp(3.0 * u.eval(x)))))?;
    let reference = corollary1_reference(m)?;
    Ok(QuotientReport::new(root(num, 4.0), root(den, 3.0))?.with_reference(reference, SATURATION_TOLERANCE))
}

/// Extremes of `P̃_a 1` over sample points at `a = 2 - n + ε`, with the
/// lower bound `A` and the `ε`-independent upper bound `B = d_{n,2-n}/d_{n,0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationReport {
    pub min_a: f64,
    pub bound_a: f64,
    pub max_b: f64,
    pub bound_b: f64,
}

impl DominationReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_a >= self.bound_a && self.max_b <= self.bound_b + tol
    }
}

pub fn domination_bounds_check(n: usize, eps: f64, samples: &[Vec<f64>]) -> Result<DominationReport> {
    if n < 3 {
        return Err(invalid!("the domination bounds need n ≥ 3"));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid!("ε = {eps} outside (0, 0.5]"));
    }
    let nf = n as f64;
    let params = KernelParams::new(n, 2.0 - nf + eps)?;
    let d0 = normalization(n, 0.0)?;
    let radial: f64 = tanh_sinh_unit(64)
        .iter()
        .map(|nd| nd.w * pow(nd.x, nf - 2.0) * pow(1.0 + nd.x * nd.x, 1.0 - nf))
        .sum();
    let bound_a = 0.5 * d0 * sphere_area(n - 1) * radial;
    let bound_b = normalization(n, 2.0 - nf)? / d0;
    let (mut min_a, mut max_b) = (f64::INFINITY, 0.0f64);
    for p in samples {
        if p.len() != n {
            return Err(invalid!("sample point of the wrong dimension"));
        }
        let r = norm(p);
        if r >= 1.0 {
            return Err(Error::OutOfDomain(format!("|η| = {r}")));
        }
        let h = zonal_profile(&params, 0, r, 1.0 - r);
        min_a = min_a.min(h);
        max_b = max_b.max(pow(h, (nf - 2.0) / eps));
    }
    Ok(DominationReport {
        min_a,
        bound_a,
        max_b,
        bound_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{random_ball_point, Verdict};
    use libm::{atan2, log};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> FieldFunction {
        FieldFunction::new(Domain::Ball, 2, move |x| f(x[0], x[1]))
    }

    #[test]
    fn zero_is_an_equality_case() {
        let r = carleman_check(&disc(|_, _| 0.0), Admissibility::Harmonic, 16).unwrap();
        assert!(fabs(r.numerator - PI) < 1e-12 && fabs(r.denominator - 4.0 * PI * PI) < 1e-10);
        assert_eq!(r.verdict, Some(Verdict::Saturates));
    }

    #[test]
    fn log_pole_outside_the_disc_is_an_equality_case() {
        let u = disc(|x, y| -2.0 * log(libm::hypot(x - 1.5, y)) + 0.3);
        let r = carleman_check(&u, Admissibility::Harmonic, 32).unwrap();
        assert!(fabs(r.quotient * 4.0 * PI - 1.0) < 1e-4, "{r:?}");
    }

    #[test]
    fn harmonic_polynomials_are_strictly_below() {
        let u = disc(|x, y| (x * x - y * y) / 4.0);
        let r = carleman_check(&u, Admissibility::Harmonic, 32).unwrap();
        assert!(r.strictly_below(1.0 / (4.0 * PI)), "{r:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let c: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
            let u = disc(move |x, y| {
                let (rho, th) = (libm::hypot(x, y), atan2(y, x));
                c.iter()
                    .enumerate()
                    .map(|(k, (a, b))| pow(rho, k as f64 + 1.0) * (a * cos((k + 1) as f64 * th) + b * sin((k + 1) as f64 * th)))
                    .sum()
            });
            let r = carleman_check(&u, Admissibility::Harmonic, 32).unwrap();
            assert!(r.strictly_below(1.0 / (4.0 * PI)), "{r:?}");
        }
    }

    #[test]
    fn admissibility_is_enforced() {
        let bowl = disc(|x, y| x * x + y * y);
        assert!(matches!(
            carleman_check(&bowl, Admissibility::Harmonic, 8),
            Err(Error::Inadmissible(_))
        ));
        let r = carleman_check(&bowl, Admissibility::Subharmonic, 16).unwrap();
        assert!(r.strictly_below(1.0 / (4.0 * PI)));
        let cap = disc(|x, y| -(x * x + y * y));
        assert!(carleman_check(&cap, Admissibility::Subharmonic, 8).is_err());
    }

    #[test]
    fn fd_helpers_are_exact_on_quadratics() {
        let (v, s) = fd_laplacian(|x| x[0] * x[0] + 3.0 * x[1] * x[1], &[0.1, 0.2], 0.02);
        assert!(fabs(v - 8.0) < 1e-8 && s < 1e-8);
        let (d, _) = inward_derivative(|x| (1.0 - x[0] * x[0] - x[1] * x[1]) / 2.0, &[0.6, 0.8], 1e-3);
        assert!(fabs(d - 1.0) < 1e-8);
    }

    fn ball4(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> FieldFunction {
        FieldFunction::new(Domain::Ball, 4, move |x| f(norm(x)))
    }

    #[test]
    fn biharmonic_extremal_saturates_and_perturbations_fall_below() {
        let s = corollary1_reference(8).unwrap();
        let star = ball4(|r| (1.0 - r * r) / 2.0);
        let r = corollary1_check(&star, None, 8).unwrap();
        assert_eq!(r.verdict, Some(Verdict::Saturates), "{r:?}");
        assert!(fabs(r.quotient - s.value) < 1e-8);

        let zero = corollary1_check(&ball4(|_| 0.0), None, 8).unwrap();
        let closed = pow(PI * PI / 2.0, 0.25) / pow(2.0 * PI * PI, 1.0 / 3.0);
        assert!(fabs(zero.quotient - closed) < 1e-12);
        assert!(zero.strictly_below(s.value));

        let tilted = ball4(|r| (1.0 - r * r) / 2.0 - 0.1 * (1.0 - r * r));
        let t = corollary1_check(&tilted, None, 8).unwrap();
        assert!(t.strictly_below(s.value), "{t:?}");

        let steep = ball4(|r| 0.8 * (1.0 - r * r));
        assert!(matches!(corollary1_check(&steep, None, 8), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn domination_bounds_hold_uniformly_in_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<Vec<f64>> = (0..20).map(|_| random_ball_point(4, 0.999, &mut rng)).collect();
        let mut b = None;
        for eps in [0.1, 0.25, 0.5] {
            let rep = domination_bounds_check(4, eps, &pts).unwrap();
            assert!(rep.holds(1e-6), "{eps}: {rep:?}");
            assert_eq!(*b.get_or_insert(rep.bound_b), rep.bound_b);
        }
        assert!(fabs(b.unwrap() - 4.0) < 1e-12);
        assert!(domination_bounds_check(4, 0.7, &pts).is_err());
    }
}
