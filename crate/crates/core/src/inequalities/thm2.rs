//! The limit functional
//! `I_n = (log(|X|² + (x_n + 1/2)²) - P_{2-n}[log(|Y|² + 1/4)]) ∘ φ^{-1}`
//! on `B_n` and the exponential inequality
//! `‖e^{I_n + P̃_{2-n} F}‖_{L^n(B_n)} ≤ S_n ‖e^F‖_{L^{n-1}(S^{n-1})}`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{exp, fabs, log, pow};

use super::{axial_point, ball_integral, root, sphere_integral_axial, two_level, QuotientReport, ZonalSum};
use crate::error::{invalid, Error, Result};
use crate::field::{Domain, FieldFunction};
use crate::geometry::{ConformalMap, MobiusTransform};
use crate::kernels::{extend_ball, KernelParams, KernelRule, MAX_DIM};
use crate::linalg::{norm, norm_sq};
use crate::quadrature::{tanh_sinh_unit, Estimate, Rule, RADIAL_PER_M};
use crate::special::sphere_area;

/// Intervals of the radial interpolation table of [`LimitFunctionalField`].
pub const IN_TABLE_SIZE: usize = 512;

/// `I_n` on the ball. It is radial, so besides direct evaluation a table
/// over `r ∈ [0, 1]` with cubic interpolation serves cheap pointwise use.
#[derive(Clone)]
pub struct LimitFunctionalField {
    n: usize,
    map: ConformalMap,
    coarse: Arc<KernelRule>,
    fine: Arc<KernelRule>,
    table: Arc<Vec<f64>>,
    table_error: f64,
}

impl core::fmt::Debug for LimitFunctionalField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LimitFunctionalField").field("n", &self.n).finish()
    }
}

/// Builds `I_n` with kernel rules at resolutions `m` and `2m`.
pub fn compute_in(n: usize, m: usize) -> Result<LimitFunctionalField> {
    if n <= 2 {
        return Err(invalid!("I_n needs n > 2, got {n}"));
    }
    let params = KernelParams::new(n, 2.0 - n as f64)?;
    let mut field = LimitFunctionalField {
        n,
        map: ConformalMap::new(n)?,
        coarse: Arc::new(KernelRule::new(&params, m)),
        fine: Arc::new(KernelRule::new(&params, 2 * m)),
        table: Arc::new(Vec::new()),
        table_error: 0.0,
    };
    let mut table = Vec::with_capacity(IN_TABLE_SIZE + 1);
    let mut err = 0.0f64;
    for i in 0..=IN_TABLE_SIZE {
        let r = i as f64 / IN_TABLE_SIZE as f64;
        let e = field.radial(r, 1.0 - r)?;
        table.push(e.value);
        err = err.max(e.error);
    }
    field.table = Arc::new(table);
    field.table_error = err;
    Ok(field)
}

impl LimitFunctionalField {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest two-resolution disagreement seen while building the table.
    pub fn table_error(&self) -> f64 {
        self.table_error
    }

    /// `I_n(r e_1)`; `one_minus_r` is `1 - r`.
    pub fn radial(&self, r: f64, one_minus_r: f64) -> Result<Estimate> {
        // I_n vanishes linearly at the boundary
        if one_minus_r < 1e-10 {
            return Ok(Estimate::new(0.0, one_minus_r));
        }
        let mut eta = [0.0; MAX_DIM];
        eta[0] = r;
        let mut x = [0.0; MAX_DIM];
        let w = self.map.phi_inverse_into(&eta[..self.n], &mut x[..self.n])?;
        let g = |y: &[f64]| log(norm_sq(y) + 0.25);
        let c = 2.0 * log(w) - self.coarse.average(&x[..self.n], g);
        let f = 2.0 * log(w) - self.fine.average(&x[..self.n], g);
        Ok(Estimate::new(f, fabs(f - c)))
    }

    /// Direct evaluation at an interior or boundary point.
    pub fn eval_direct(&self, eta: &[f64]) -> Result<Estimate> {
        if eta.len() != self.n {
            return Err(invalid!("expected a point of B_{}", self.n));
        }
        let r = norm(eta);
        if r > 1.0 + 1e-12 {
            return Err(Error::OutOfDomain(alloc::format!("|η| = {r} > 1")));
        }
        self.radial(r, 1.0 - r)
    }

    /// Cubic interpolation in the radial table.
    pub fn eval(&self, eta: &[f64]) -> f64 {
        let r = norm(eta);
        if !(r <= 1.0) {
            return f64::NAN;
        }
        let t = r * IN_TABLE_SIZE as f64;
        let i = (t as usize).clamp(1, IN_TABLE_SIZE - 2);
        let s = t - i as f64;
        let y = &self.table;
        let (y0, y1, y2, y3) = (y[i - 1], y[i], y[i + 1], y[i + 2]);
        // Lagrange weights on the nodes -1, 0, 1, 2
        -s * (s - 1.0) * (s - 2.0) / 6.0 * y0 + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * y1 - (s + 1.0) * s * (s - 2.0) / 2.0 * y2
            + (s + 1.0) * s * (s - 1.0) / 6.0 * y3
    }

    /// The interpolated field as a ball function.
    pub fn field(&self) -> FieldFunction {
        let me = self.clone();
        FieldFunction::new(Domain::Ball, self.n, move |eta| me.eval(eta))
    }
}

fn sphere_exp_norm<F: Fn(&[f64]) -> f64>(f: F, n: usize, m: usize) -> Result<Estimate> {
    let p = n as f64 - 1.0;
    let e = two_level(m, |k| Ok(Rule::sphere(n, k).sum(|x| exp(p * f(x)))))?;
    Ok(root(e, p))
}

/// `S_n`, the quotient at `F = 0`: `(∫_{B_n} e^{n I_n})^{1/n} / |S^{n-1}|^{1/(n-1)}`.
pub fn sharp_constant_thm2(field: &LimitFunctionalField, m: usize) -> Result<Estimate> {
    let n = field.n;
    let nf = n as f64;
    let area = sphere_area(n);
    let num = two_level(m, |k| {
        let mut acc = 0.0;
        for nd in tanh_sinh_unit(RADIAL_PER_M * k) {
            let w = nd.w * pow(nd.x, nf - 1.0);
            if w == 0.0 {
                continue;
            }
            acc += w * exp(nf * field.radial(nd.x, nd.x_comp)?.value);
        }
        Ok(area * acc)
    })?;
    let r = QuotientReport::new(root(num, nf), Estimate::exact(pow(area, 1.0 / (nf - 1.0))))?;
    Ok(Estimate::new(r.quotient, r.quotient_error() + field.table_error * r.quotient * nf))
}

/// The quotient for `F` a sum of zonal harmonics.
pub fn quotient_thm2_zonal(f: &ZonalSum, field: &LimitFunctionalField, m: usize) -> Result<QuotientReport> {
    let n = field.n;
    if f.n() != n {
        return Err(invalid!("data lives on S^{}, I_n has n = {n}", f.n() - 1));
    }
    let params = KernelParams::new(n, 2.0 - n as f64)?;
    let nf = n as f64;
    let den = sphere_exp_norm(|x| f.eval(x), n, m)?;
    let num = two_level(m, |k| {
        let mut failure = None;
        let v = ball_integral(
            n,
            k,
            |r, rc| {
                let i = field.radial(r, rc).unwrap_or_else(|e| {
                    failure = Some(e);
                    Estimate::exact(0.0)
                });
                (i.value, f.profiles(&params, r, rc))
            },
            |(i, h), om| exp(nf * (i + f.extension_at(h, om))),
        );
        failure.map_or(Ok(v), Err)
    })?;
    QuotientReport::new(root(num, nf), den)
}

/// Highest zonal degree used to expand axial data.
pub const AXIAL_MAX_DEGREE: usize = 48;

/// The quotient for `F` depending only on `ξ_1`. The extension comes from a
/// zonal expansion of `F`; its truncation tail enters the error bar through
/// `|P̃_{2-n} G_l| ≤ 1`.
pub fn quotient_thm2_axial(f: &FieldFunction, field: &LimitFunctionalField, m: usize) -> Result<QuotientReport> {
    let n = field.n;
    if f.domain() != Domain::Sphere || f.n() != n {
        return Err(invalid!("expected data on S^{}", n - 1));
    }
    let nf = n as f64;
    let (z, tail) = ZonalSum::from_axial(n, |t| f.eval(&axial_point(n, 1.0, t)), AXIAL_MAX_DEGREE, 1e-14)?;
    let den = two_level(m, |k| {
        Ok(sphere_integral_axial(
            n,
            k,
            |t, _| exp((nf - 1.0) * f.eval(&axial_point(n, 1.0, t))),
        ))
    })?;
    let zonal = quotient_thm2_zonal(&z, field, m)?;
    let num = Estimate::new(zonal.numerator, zonal.numerator_error + tail * zonal.numerator);
    QuotientReport::new(num, root(den, nf - 1.0))
}

/// The quotient for arbitrary sphere data `F`; `P̃_{2-n} F` is evaluated
/// directly at every node of a ball rule.
pub fn quotient_thm2(f: &FieldFunction, field: &LimitFunctionalField, m: usize) -> Result<QuotientReport> {
    let n = field.n;
    if f.domain() != Domain::Sphere || f.n() != n {
        return Err(invalid!("expected data on S^{}", n - 1));
    }
    let params = KernelParams::new(n, 2.0 - n as f64)?;
    let nf = n as f64;
    let den = sphere_exp_norm(|x| f.eval(x), n, m)?;
    let num = two_level(m, |k| {
        let ext = extend_ball(f, &params, k)?;
        let mut failure = None;
        let mut eta = alloc::vec![0.0; n];
        let v = ball_integral(
            n,
            k,
            |r, rc| {
                let i = field.radial(r, rc).unwrap_or_else(|e| {
                    failure = Some(e);
                    Estimate::exact(0.0)
                });
                (r, rc, i.value)
            },
            |&(r, rc, i), om| {
                let pf = if rc < 1e-10 {
                    f.eval(om)
                } else {
                    eta.iter_mut().zip(om).for_each(|(e, o)| *e = r * o);
                    ext.eval(&eta)
                };
                exp(nf * (i + pf))
            },
        );
        failure.map_or(Ok(v), Err)
    })?;
    QuotientReport::new(root(num, nf), den)
}

/// `F = c + log(J)/(n-1)` for the boundary Jacobian `J` of `t`.
pub fn log_jacobian_data(t: &MobiusTransform, c: f64) -> FieldFunction {
    let t = t.clone();
    let n = t.n();
    FieldFunction::new(Domain::Sphere, n, move |xi| c + log(t.jacobian_boundary(xi)) / (n as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{random_ball_point, sharp_constant, Verdict};
    use crate::kernels::{biharmonic_represent, zonal_profile, BiharmonicKernelConstants};
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn i4_is_half_one_minus_r_squared() {
        let f = compute_in(4, 8).unwrap();
        for r in [0.0, 0.3, 0.77, 0.999] {
            let e = f.eval_direct(&[0.0, r, 0.0, 0.0]).unwrap();
            assert!(fabs(e.value - (1.0 - r * r) / 2.0) < 1e-9, "r={r}: {e:?}");
            assert!(fabs(f.eval(&[r, 0.0, 0.0, 0.0]) - (1.0 - r * r) / 2.0) < 1e-9);
        }
        assert!(compute_in(2, 8).is_err());
    }

    #[test]
    fn i4_matches_the_biharmonic_representation() {
        // zero boundary values and unit inward derivative
        let f = compute_in(4, 8).unwrap();
        let zero = FieldFunction::constant(Domain::Sphere, 4, 0.0);
        let one = FieldFunction::constant(Domain::Sphere, 4, 1.0);
        let k = BiharmonicKernelConstants::exact();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let eta = random_ball_point(4, 0.9, &mut rng);
            let rep = biharmonic_represent(&zero, &one, &k, &eta, 8).unwrap();
            let i = f.eval_direct(&eta).unwrap();
            assert!(fabs(rep.value - i.value) < 1e-6, "{rep:?} {i:?}");
        }
    }

    #[test]
    fn boundary_behaviour_of_i4() {
        let f = compute_in(4, 8).unwrap();
        let near = f.eval_direct(&[1.0 - 1e-3, 0.0, 0.0, 0.0]).unwrap().value;
        assert!(fabs(near) < 1e-3);
        let h = 1e-4;
        let a = f.eval_direct(&[1.0 - h, 0.0, 0.0, 0.0]).unwrap().value;
        let b = f.eval_direct(&[1.0 - 2.0 * h, 0.0, 0.0, 0.0]).unwrap().value;
        // one-sided second-order inward derivative at r = 1
        let inward = (4.0 * a - b) / (2.0 * h);
        assert!(fabs(inward - 1.0) < 1e-6, "{inward}");
    }

    #[test]
    fn i_n_is_twice_the_epsilon_derivative() {
        for n in [3usize, 4, 5] {
            let f = compute_in(n, 8).unwrap();
            let a0 = 2.0 - n as f64;
            let d = 1e-4;
            for r in [0.2, 0.6] {
                let up = zonal_profile(&KernelParams::new(n, a0 + 2.0 * d).unwrap(), 0, r, 1.0 - r);
                let mid = zonal_profile(&KernelParams::new(n, a0 + d).unwrap(), 0, r, 1.0 - r);
                // one-sided second-order difference from ε = 0, where P̃1 = 1
                let deriv = (-3.0 + 4.0 * mid - up) / (2.0 * d);
                let i = f.eval_direct(&[r, 0.0, 0.0, 0.0, 0.0][..n]).unwrap().value;
                assert!(fabs(i - 2.0 * deriv) < 1e-6, "n={n} r={r}: {i} vs 2·{deriv}");
            }
        }
    }

    #[test]
    fn s_n_is_the_limit_of_powers_of_s_na() {
        let n = 3;
        let f = compute_in(n, 8).unwrap();
        let s = sharp_constant_thm2(&f, 8).unwrap();
        let pw = |eps: f64| {
            let v = sharp_constant(&KernelParams::new(n, 2.0 - n as f64 + eps).unwrap(), 8)
                .unwrap()
                .value;
            pow(v, 2.0 / eps)
        };
        let (e1, e2) = (2e-3, 1e-3);
        let extrapolated = 2.0 * pw(e2) - pw(e1);
        assert!(fabs(extrapolated - s.value) < 1e-5 * s.value, "{extrapolated} vs {s:?}");
    }

    #[test]
    fn constants_and_jacobian_shifts_saturate() {
        for n in [3usize, 4] {
            let f = compute_in(n, 8).unwrap();
            let s = sharp_constant_thm2(&f, 8).unwrap();
            let c = quotient_thm2_zonal(&ZonalSum::constant(n, 0.7), &f, 8).unwrap();
            assert!(fabs(c.quotient - s.value) < 1e-9, "n={n}");
            let mut b = vec![0.0; n];
            b[0] = 0.3;
            let t = MobiusTransform::translation(&b).unwrap();
            let r = quotient_thm2_axial(&log_jacobian_data(&t, -0.2), &f, 8).unwrap();
            let r = r.with_reference(s, 1e-3);
            assert_eq!(r.verdict, Some(Verdict::Saturates));
            assert!(fabs(r.quotient - s.value) < 1e-6, "n={n}: {r:?} {s:?}");
        }
    }

    #[test]
    fn general_and_zonal_forms_agree() {
        let n = 3;
        let f = compute_in(n, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = ZonalSum::random_perturbation(n, &mut rng, 2, 2, 0.5).scaled(0.6);
        let a = quotient_thm2_zonal(&z, &f, 6).unwrap();
        let b = quotient_thm2(&z.field(), &f, 4).unwrap();
        assert!(fabs(a.quotient - b.quotient) < 1e-6, "{a:?} {b:?}");
    }
}
