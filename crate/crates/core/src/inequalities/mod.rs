//! Quotient functionals of the sharp inequalities and the checks built on
//! them: the trace-type inequality for `P̃_a` and its sharp constant, the
//! extremal family on the half-space, the limit functional `I_n` and the
//! exponential inequality, Carleman's inequality, the `n = 4` biharmonic
//! corollary and a discrete maximizer search.

mod carleman;
mod extremal;
mod lemma3;
mod search;
mod thm1;
mod thm2;

pub use carleman::{
    carleman_check, corollary1_check, corollary1_reference, domination_bounds_check, fd_laplacian, inward_derivative, Admissibility,
    DominationReport, ADMISSIBILITY_TOLERANCE,
};
pub use extremal::{el_residual, extremal_eval, fit_extremal, halfspace_quotient, ExtremalCandidate, ExtremalFit};
pub use lemma3::{lemma3_classify, Lemma3Result, LEMMA3_RADIAL_THRESHOLD};
pub use search::{maximizer_search, SearchConfig, SearchResult, SearchStart, REARRANGEMENT_SLACK};
pub use thm1::{
    conformal_invariance_check, mobius_weighted, quotient_thm1, quotient_thm1_axial, quotient_thm1_zonal, sharp_constant,
    sharp_constant_closed_form, sphere_lp,
};
pub use thm2::{
    compute_in, log_jacobian_data, quotient_thm2, quotient_thm2_axial, quotient_thm2_zonal, sharp_constant_thm2, LimitFunctionalField,
};

use alloc::vec::Vec;

use libm::{fabs, sqrt};
use rand::Rng;

use crate::error::{invalid, Result};
use crate::field::{Domain, FieldFunction};
use crate::kernels::{zonal_harmonic, zonal_profile, KernelParams};
use crate::linalg::{dot, norm};
use crate::quadrature::{gauss_jacobi_symmetric, tanh_sinh_unit, Estimate, Rule, RADIAL_PER_M};

/// Default for the "saturates" band, `|q - ref| ≤ max(tol, 3 err)`.
pub const SATURATION_TOLERANCE: f64 = 1e-3;

/// Relative rounding floor folded into every quotient error bar.
pub const ROUNDING_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Below,
    Saturates,
    Violates,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Below => "below",
            Verdict::Saturates => "saturates",
            Verdict::Violates => "violates",
        }
    }
}

/// Numerator, denominator and their quotient, with error bars and, once a
/// reference constant is attached, a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientReport {
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    pub numerator_error: f64,
    pub denominator_error: f64,
    pub reference_constant: Option<f64>,
    pub reference_error: f64,
    pub verdict: Option<Verdict>,
}

impl QuotientReport {
    pub fn new(num: Estimate, den: Estimate) -> Result<Self> {
        if !(fabs(den.value) > 0.0) || !den.value.is_finite() {
            return Err(invalid!("denominator is {}", den.value));
        }
        Ok(QuotientReport {
            numerator: num.value,
            denominator: den.value,
            quotient: num.value / den.value,
            numerator_error: num.error,
            denominator_error: den.error,
            reference_constant: None,
            reference_error: 0.0,
            verdict: None,
        })
    }

    /// Propagated error of the quotient, with a rounding floor.
    pub fn quotient_error(&self) -> f64 {
        let q = fabs(self.quotient);
        q * (self.numerator_error / fabs(self.numerator).max(f64::MIN_POSITIVE) + self.denominator_error / fabs(self.denominator))
            + ROUNDING_FLOOR * q
    }

    /// Quotient and reference error bars combined.
    pub fn combined_error(&self) -> f64 {
        self.quotient_error() + self.reference_error
    }

    /// Attaches a reference constant and classifies: `violates` if the
    /// quotient exceeds it by more than three combined error bars,
    /// otherwise `saturates` within `max(tol, 3 err)`, otherwise `below`.
    pub fn with_reference(mut self, reference: Estimate, tol: f64) -> Self {
        self.reference_constant = Some(reference.value);
        self.reference_error = reference.error;
        let err = self.combined_error();
        let gap = self.quotient - reference.value;
        self.verdict = Some(if gap > 3.0 * err {
            Verdict::Violates
        } else if fabs(gap) <= tol.max(3.0 * err) {
            Verdict::Saturates
        } else {
            Verdict::Below
        });
        self
    }

    /// `quotient ≤ bound (1 + rel) + combined error`.
    pub fn respects(&self, bound: f64, rel: f64) -> bool {
        self.quotient <= bound * (1.0 + rel) + self.combined_error()
    }

    /// Strictly below `bound` by more than three combined error bars.
    pub fn strictly_below(&self, bound: f64) -> bool {
        self.quotient < bound - 3.0 * self.combined_error()
    }
}

/// One term `c G_l(⟨ξ, v⟩)` of a [`ZonalSum`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalTerm {
    pub degree: usize,
    pub coeff: f64,
    pub axis: Vec<f64>,
}

/// Sphere data `c_0 + Σ c_j G_{l_j}(⟨ξ, v_j⟩)` built from zonal harmonics.
/// Its extensions are known through the radial profiles of
/// [`zonal_profile`], so ball norms reduce to cheap tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalSum {
    n: usize,
    constant: f64,
    terms: Vec<ZonalTerm>,
}

impl ZonalSum {
    pub fn new(n: usize, constant: f64, terms: Vec<ZonalTerm>) -> Result<Self> {
        for t in &terms {
            if t.axis.len() != n || fabs(norm(&t.axis) - 1.0) > 1e-12 {
                return Err(invalid!("zonal axes must be unit vectors in R^{n}"));
            }
            if t.degree == 0 {
                return Err(invalid!("degree-0 terms belong in the constant"));
            }
        }
        Ok(ZonalSum { n, constant, terms })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ZonalSum {
            n,
            constant: c,
            terms: Vec::new(),
        }
    }

    /// `1 + Σ c_j G_{l_j}` with `1..=max_terms` terms of degree
    /// `1..=max_degree`, random axes and `Σ |c_j| ≤ amplitude`. Since
    /// `|G_l| ≤ 1`, the result is at least `1 - amplitude`.
    pub fn random_perturbation<R: Rng>(n: usize, rng: &mut R, max_terms: usize, max_degree: usize, amplitude: f64) -> Self {
        let k = rng.gen_range(1..=max_terms.max(1));
        let mut raw: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let total: f64 = raw.iter().map(|c| fabs(*c)).sum::<f64>().max(1e-300);
        let scale = amplitude * rng.gen_range(0.1..1.0) / total;
        raw.iter_mut().for_each(|c| *c *= scale);
        let terms = raw
            .into_iter()
            .map(|coeff| ZonalTerm {
                degree: rng.gen_range(1..=max_degree.max(1)),
                coeff,
                axis: random_unit(n, rng),
            })
            .collect();
        ZonalSum { n, constant: 1.0, terms }
    }

    /// Projects data `f(ξ_1)` onto zonal harmonics about `e_1` by
    /// Gauss–Jacobi quadrature, stopping once two consecutive coefficients
    /// fall below `tol` or at `max_degree`. Also returns a bound for the
    /// dropped tail: twice the last retained coefficient magnitude.
    pub fn from_axial<F: Fn(f64) -> f64>(n: usize, f: F, max_degree: usize, tol: f64) -> Result<(Self, f64)> {
        if n < 2 {
            return Err(invalid!("need n ≥ 2"));
        }
        let (t, w) = gauss_jacobi_symmetric(2 * max_degree + 16, (n as f64 - 3.0) / 2.0);
        let fv: Vec<f64> = t.iter().map(|&t| f(t)).collect();
        let coeff = |l: usize| {
            let (mut num, mut den) = (0.0, 0.0);
            for ((&t, &w), &fv) in t.iter().zip(&w).zip(&fv) {
                let g = zonal_harmonic(n, l, t, 1.0 - t);
                num += w * fv * g;
                den += w * g * g;
            }
            num / den
        };
        let mut axis = alloc::vec![0.0; n];
        axis[0] = 1.0;
        let mut terms = Vec::new();
        let mut small = 0;
        let mut last = 0.0f64;
        for l in 1..=max_degree {
            let c = coeff(l);
            last = fabs(c);
            small = if last < tol { small + 1 } else { 0 };
            terms.push(ZonalTerm {
                degree: l,
                coeff: c,
                axis: axis.clone(),
            });
            if small == 2 {
                break;
            }
        }
        Ok((
            ZonalSum {
                n,
                constant: coeff(0),
                terms,
            },
            2.0 * last,
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[ZonalTerm] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.degree).max().unwrap_or(0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.constant *= c;
        s.terms.iter_mut().for_each(|t| t.coeff *= c);
        s
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|t| {
                    let c = dot(xi, &t.axis);
                    t.coeff * zonal_harmonic(self.n, t.degree, c, 1.0 - c)
                })
                .sum::<f64>()
    }

    pub fn field(&self) -> FieldFunction {
        let me = self.clone();
        FieldFunction::new(Domain::Sphere, self.n, move |xi| me.eval(xi))
    }

    /// Radial profiles of each term (constant first) at radius `r`.
    fn profiles(&self, params: &KernelParams, r: f64, one_minus_r: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.terms.len() + 1);
        let mut cache: Vec<(usize, f64)> = Vec::new();
        let mut profile = |l: usize| {
            if let Some(&(_, v)) = cache.iter().find(|(d, _)| *d == l) {
                return v;
            }
            let v = zonal_profile(params, l, r, one_minus_r);
            cache.push((l, v));
            v
        };
        out.push(profile(0));
        for t in &self.terms {
            out.push(profile(t.degree));
        }
        out
    }

    /// The extension at `r ω` from precomputed [`ZonalSum::profiles`].
    fn extension_at(&self, profiles: &[f64], omega: &[f64]) -> f64 {
        self.constant * profiles[0]
            + self
                .terms
                .iter()
                .zip(&profiles[1..])
                .map(|(t, h)| {
                    let c = dot(omega, &t.axis);
                    t.coeff * h * zonal_harmonic(self.n, t.degree, c, 1.0 - c)
                })
                .sum::<f64>()
    }
}

/// Uniform random point of `S^{n-1}` by rejection from the cube.
pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Uniform random point of the ball of radius `radius`.
pub fn random_ball_point<R: Rng>(n: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if norm(&v) < 1.0 {
            return v.into_iter().map(|c| c * radius).collect();
        }
    }
}

/// `∫_{B_n} g(r ω) dx` on the product of a radial tanh-sinh rule
/// (`RADIAL_PER_M · m` per half-line) and `Rule::sphere(n, m)`. `radial`
/// prepares per-radius state from `(r, 1 - r)`, `angular` finishes the
/// integrand on the unit sphere.
pub(crate) fn ball_integral<S, R, A>(n: usize, m: usize, mut radial: R, mut angular: A) -> f64
where
    R: FnMut(f64, f64) -> S,
    A: FnMut(&S, &[f64]) -> f64,
{
    let sph = Rule::sphere(n, m);
    let mut acc = 0.0;
    for nd in tanh_sinh_unit(RADIAL_PER_M * m) {
        let wr = nd.w * libm::pow(nd.x, n as f64 - 1.0);
        if wr == 0.0 {
            continue;
        }
        let state = radial(nd.x, nd.x_comp);
        acc += wr * sph.iter().map(|(om, w)| w * angular(&state, om)).sum::<f64>();
    }
    acc
}

/// `∫_{B_n} g` for `g` depending only on `(r, t = ⟨ω, e_1⟩)`:
/// `|S^{n-2}| ∫ r^{n-1} ∫_{-1}^{1} g(r, t) (1 - t²)^{(n-3)/2} dt dr`, with
/// tanh-sinh in both variables.
pub(crate) fn ball_integral_axial<G: FnMut(f64, f64, f64) -> f64>(n: usize, m: usize, mut g: G) -> f64 {
    let alpha = (n as f64 - 3.0) / 2.0;
    let polar = tanh_sinh_unit(RADIAL_PER_M * m);
    let mut acc = 0.0;
    for nd in tanh_sinh_unit(RADIAL_PER_M * m) {
        let wr = nd.w * libm::pow(nd.x, n as f64 - 1.0);
        if wr == 0.0 {
            continue;
        }
        for pt in &polar {
            let (one_minus, one_plus) = (2.0 * pt.x_comp, 2.0 * pt.x);
            let wt = 2.0 * pt.w * libm::pow(one_minus * one_plus, alpha);
            if wt == 0.0 || !wt.is_finite() {
                continue;
            }
            acc += wr * wt * g(nd.x, nd.x_comp, pt.x - pt.x_comp);
        }
    }
    acc * crate::special::sphere_area(n - 1)
}

/// `∫_{S^{n-1}} g` for `g` depending only on `t = ⟨ξ, e_1⟩`.
pub(crate) fn sphere_integral_axial<G: FnMut(f64, f64) -> f64>(n: usize, m: usize, mut g: G) -> f64 {
    let alpha = (n as f64 - 3.0) / 2.0;
    let mut acc = 0.0;
    for pt in tanh_sinh_unit(RADIAL_PER_M * m) {
        let (one_minus, one_plus) = (2.0 * pt.x_comp, 2.0 * pt.x);
        let wt = 2.0 * pt.w * libm::pow(one_minus * one_plus, alpha);
        if wt == 0.0 || !wt.is_finite() {
            continue;
        }
        acc += wt * g(pt.x - pt.x_comp, one_minus);
    }
    acc * crate::special::sphere_area(n - 1)
}

/// The point `r (t, √(1-t²), 0, …)`.
pub(crate) fn axial_point(n: usize, r: f64, t: f64) -> Vec<f64> {
    let mut p = alloc::vec![0.0; n];
    p[0] = r * t;
    p[1] = r * sqrt((1.0 - t * t).max(0.0));
    p
}

/// Two resolutions combined into an estimate of the finer one.
pub(crate) fn two_level<F: FnMut(usize) -> Result<f64>>(m: usize, mut f: F) -> Result<Estimate> {
    let c = f(m)?;
    let fine = f(2 * m)?;
    Ok(Estimate::new(fine, fabs(fine - c)))
}

/// `E^{1/p}` with the error propagated to first order.
pub(crate) fn root(e: Estimate, p: f64) -> Estimate {
    let v = libm::pow(e.value, 1.0 / p);
    Estimate::new(v, v * e.error / (p * fabs(e.value).max(f64::MIN_POSITIVE)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn axial_projection_recovers_zonal_coefficients() {
        for n in [2usize, 3, 4] {
            let f = |t: f64| 0.5 + 0.3 * zonal_harmonic(n, 2, t, 1.0 - t) - 0.1 * zonal_harmonic(n, 3, t, 1.0 - t);
            let (z, tail) = ZonalSum::from_axial(n, f, 20, 1e-14).unwrap();
            assert!(fabs(z.constant_term() - 0.5) < 1e-13 && tail < 1e-13);
            let c: Vec<f64> = z.terms().iter().map(|t| t.coeff).collect();
            assert!(fabs(c[1] - 0.3) < 1e-13 && fabs(c[2] + 0.1) < 1e-13, "{n}: {c:?}");
            let xi = [0.6, 0.8, 0.0, 0.0];
            assert!(fabs(z.eval(&xi[..n]) - f(0.6)) < 1e-13);
        }
    }

    #[test]
    fn verdicts() {
        let r = QuotientReport::new(Estimate::new(1.0, 1e-9), Estimate::new(2.0, 0.0)).unwrap();
        assert_eq!(r.with_reference(Estimate::exact(0.5), 1e-3).verdict, Some(Verdict::Saturates));
        assert_eq!(r.with_reference(Estimate::exact(0.5005), 1e-3).verdict, Some(Verdict::Saturates));
        assert_eq!(r.with_reference(Estimate::exact(0.6), 1e-3).verdict, Some(Verdict::Below));
        assert_eq!(r.with_reference(Estimate::exact(0.4999), 1e-3).verdict, Some(Verdict::Violates));
        assert!(QuotientReport::new(Estimate::exact(1.0), Estimate::exact(0.0)).is_err());
    }

    #[test]
    fn random_perturbations_stay_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sph = Rule::sphere(3, 8);
        for _ in 0..50 {
            let z = ZonalSum::random_perturbation(3, &mut rng, 4, 4, 0.9);
            assert!(sph.iter().all(|(x, _)| z.eval(x) >= 0.1 - 1e-12));
        }
    }

    #[test]
    fn axial_integrals_match_rules() {
        let g = |t: f64| 1.0 + t + 3.0 * t * t;
        for n in [2, 3, 4] {
            let s1 = sphere_integral_axial(n, 8, |t, _| g(t));
            let s2 = Rule::sphere(n, 8).sum(|x| g(x[0]));
            assert!(fabs(s1 - s2) < 1e-10 * s2, "n={n}");
            let b1 = ball_integral_axial(n, 8, |r, _, t| r * r * g(t));
            let b2 = ball_integral(n, 8, |r, _| r * r, |s, om| s * g(om[0]));
            assert!(fabs(b1 - b2) < 1e-10 * b2, "n={n}");
        }
    }
}
