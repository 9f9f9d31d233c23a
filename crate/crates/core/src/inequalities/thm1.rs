//! `‖P̃_a f̃‖_{L^{2n/ε}(B_n)} / ‖f̃‖_{L^{2(n-1)/ε}(S^{n-1})}` and its value
//! at `f̃ = 1`, the sharp constant `S_{n,a}`.

use libm::{fabs, pow};

use super::{axial_point, ball_integral, ball_integral_axial, root, sphere_integral_axial, two_level, QuotientReport, ZonalSum};
use crate::error::{invalid, Result};
use crate::field::{Domain, FieldFunction};
use crate::geometry::MobiusTransform;
use crate::kernels::{extend_ball, zonal_profile, BallExtension, KernelParams};
use crate::quadrature::{tanh_sinh_unit, Estimate, Rule, RADIAL_PER_M};
use crate::special::{ball_volume, sphere_area};

/// Radii this close to 1 take the boundary trace instead of the extension.
const TRACE_CUTOFF: f64 = 1e-10;

fn check(ftilde: &FieldFunction, params: &KernelParams) -> Result<()> {
    params.require_positive_eps()?;
    if ftilde.domain() != Domain::Sphere || ftilde.n() != params.n() {
        return Err(invalid!("expected data on S^{}", params.n() - 1));
    }
    Ok(())
}

/// `‖f‖_{L^p(S^{n-1})}` with product rules at `m` and `2m`.
pub fn sphere_lp<F: Fn(&[f64]) -> f64>(f: F, n: usize, p: f64, m: usize) -> Result<Estimate> {
    let e = two_level(m, |k| Ok(Rule::sphere(n, k).sum(|x| pow(fabs(f(x)), p))))?;
    Ok(root(e, p))
}

fn ext_or_trace(ext: &BallExtension, ftilde: &FieldFunction, eta: &[f64], om: &[f64], one_minus_r: f64) -> f64 {
    if one_minus_r < TRACE_CUTOFF {
        ftilde.eval(om)
    } else {
        ext.eval(eta)
    }
}

/// The quotient for arbitrary sphere data: the extension is evaluated by
/// the direct ball kernel at every node of a ball rule. Costly; intended
/// for small `m` and low dimensions.
pub fn quotient_thm1(ftilde: &FieldFunction, params: &KernelParams, m: usize) -> Result<QuotientReport> {
    check(ftilde, params)?;
    let n = params.n();
    let (p, q) = (params.p_boundary()?, params.p_interior()?);
    let den = sphere_lp(|x| ftilde.eval(x), n, p, m)?;
    let num = two_level(m, |k| {
        let ext = extend_ball(ftilde, params, k)?;
        let mut eta = alloc::vec![0.0; n];
        Ok(ball_integral(
            n,
            k,
            |r, rc| (r, rc),
            |&(r, rc), om| {
                eta.iter_mut().zip(om).for_each(|(e, o)| *e = r * o);
                pow(fabs(ext_or_trace(&ext, ftilde, &eta, om, rc)), q)
            },
        ))
    })?;
    QuotientReport::new(root(num, q), den)
}

/// The quotient for data depending only on `ξ_1`. Both norms reduce to
/// integrals over `(r, t)`; the extension is still evaluated directly.
pub fn quotient_thm1_axial(ftilde: &FieldFunction, params: &KernelParams, m: usize) -> Result<QuotientReport> {
    check(ftilde, params)?;
    let n = params.n();
    let (p, q) = (params.p_boundary()?, params.p_interior()?);
    let den = two_level(m, |k| {
        Ok(sphere_integral_axial(n, k, |t, _| {
            pow(fabs(ftilde.eval(&axial_point(n, 1.0, t))), p)
        }))
    })?;
    let num = two_level(m, |k| {
        let ext = extend_ball(ftilde, params, k)?;
        Ok(ball_integral_axial(n, k, |r, rc, t| {
            let om = axial_point(n, 1.0, t);
            let eta = axial_point(n, r, t);
            pow(fabs(ext_or_trace(&ext, ftilde, &eta, &om, rc)), q)
        }))
    })?;
    QuotientReport::new(root(num, q), root(den, p))
}

/// The quotient for sums of zonal harmonics, using the radial profiles of
/// each degree instead of pointwise extensions.
pub fn quotient_thm1_zonal(data: &ZonalSum, params: &KernelParams, m: usize) -> Result<QuotientReport> {
    params.require_positive_eps()?;
    let n = params.n();
    if data.n() != n {
        return Err(invalid!("data lives on S^{}, parameters are for n = {n}", data.n() - 1));
    }
    let (p, q) = (params.p_boundary()?, params.p_interior()?);
    // degree L data raised to the power q needs sphere exactness ~ qL
    let m = m.max((q * data.max_degree() as f64 / 2.0) as usize + 2);
    let den = sphere_lp(|x| data.eval(x), n, p, m)?;
    let num = two_level(m, |k| {
        Ok(ball_integral(
            n,
            k,
            |r, rc| data.profiles(params, r, rc),
            |h, om| pow(fabs(data.extension_at(h, om)), q),
        ))
    })?;
    QuotientReport::new(root(num, q), den)
}

/// `S_{n,a}`, the quotient at `f̃ = 1`. The extension `P̃_a 1` is radial,
/// so only a one-dimensional radial integral is needed.
pub fn sharp_constant(params: &KernelParams, m: usize) -> Result<Estimate> {
    params.require_positive_eps()?;
    let n = params.n();
    let (p, q) = (params.p_boundary()?, params.p_interior()?);
    let area = sphere_area(n);
    let num = two_level(m, |k| {
        let s: f64 = tanh_sinh_unit(RADIAL_PER_M * k)
            .iter()
            .map(|nd| nd.w * pow(nd.x, n as f64 - 1.0) * pow(zonal_profile(params, 0, nd.x, nd.x_comp), q))
            .sum();
        Ok(area * s)
    })?;
    let report = QuotientReport::new(root(num, q), Estimate::exact(pow(area, 1.0 / p)))?;
    Ok(Estimate::new(report.quotient, report.quotient_error()))
}

/// `S_{n,0} = |B_n|^{(n-2)/(2n)} / |S^{n-1}|^{(n-2)/(2(n-1))}`, from
/// `P̃_0 1 = 1`.
pub fn sharp_constant_closed_form(n: usize) -> f64 {
    let e = n as f64 - 2.0;
    pow(ball_volume(n), e / (2.0 * n as f64)) / pow(sphere_area(n), e / (2.0 * (n as f64 - 1.0)))
}

/// `J^{ε/(2(n-1))} f̃ ∘ τ` for the boundary Jacobian `J` of `τ`.
pub fn mobius_weighted(ftilde: &FieldFunction, t: &MobiusTransform, params: &KernelParams) -> Result<FieldFunction> {
    if ftilde.domain() != Domain::Sphere || t.n() != params.n() {
        return Err(invalid!("expected sphere data and a transform of B_{}", params.n()));
    }
    let (f, t) = (ftilde.clone(), t.clone());
    let e = params.eps() / (2.0 * (params.n() as f64 - 1.0));
    Ok(FieldFunction::new(Domain::Sphere, params.n(), move |xi| {
        pow(t.jacobian_boundary(xi), e) * f.eval(&t.apply(xi))
    }))
}

/// Largest `|P̃_a(J^{ε/(2(n-1))} f̃∘τ)(η) - J̃(η)^{ε/(2n)} (P̃_a f̃)(τ η)|`
/// over `points`, with the largest combined error bar of the two sides.
pub fn conformal_invariance_check(
    ftilde: &FieldFunction,
    t: &MobiusTransform,
    params: &KernelParams,
    points: &[alloc::vec::Vec<f64>],
    m: usize,
) -> Result<Estimate> {
    if params.eps() == 0.0 {
        return Err(invalid!("the weighted identity needs ε ≠ 0"));
    }
    let lhs = extend_ball(&mobius_weighted(ftilde, t, params)?, params, m)?;
    let rhs = extend_ball(ftilde, params, m)?;
    let e = params.eps() / (2.0 * params.n() as f64);
    let (mut dev, mut err) = (0.0f64, 0.0f64);
    for eta in points {
        let l = lhs.estimate(eta)?;
        let j = pow(t.jacobian(eta), e);
        let r = rhs.estimate(&t.apply(eta))?;
        dev = dev.max(fabs(l.value - j * r.value));
        err = err.max(l.error + j * r.error);
    }
    Ok(Estimate::new(dev, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{random_ball_point, Verdict, ZonalTerm};
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_at_n3() {
        let oracle = pow(3.0, -0.25) * pow(4.0 * core::f64::consts::PI / 3.0, -1.0 / 12.0);
        assert!(fabs(sharp_constant_closed_form(3) - oracle) < 1e-15);
        assert!(fabs(oracle - 0.6744) < 1e-4);
    }

    #[test]
    fn sharp_constant_reproduces_the_a0_closed_form() {
        for n in [3, 4, 5] {
            let p = KernelParams::new(n, 0.0).unwrap();
            let s = sharp_constant(&p, 8).unwrap();
            assert!(fabs(s.value - sharp_constant_closed_form(n)) < 1e-10, "n={n}: {s:?}");
        }
    }

    #[test]
    fn sharp_constant_baselines() {
        // pinned after the first computation; a = 0 entries double as checks
        let s = sharp_constant(&KernelParams::new(4, -1.0).unwrap(), 8).unwrap();
        assert!(s.error < 1e-10);
        assert!(fabs(s.value - 0.796_764_793_508_5) < 1e-9, "{s:?}");
    }

    #[test]
    fn general_quotient_of_constants() {
        let p = KernelParams::new(3, 0.0).unwrap();
        for c in [1.0, -2.5] {
            let f = FieldFunction::constant(Domain::Sphere, 3, c);
            let r = quotient_thm1(&f, &p, 4).unwrap();
            assert!(fabs(r.quotient - sharp_constant_closed_form(3)) < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn zonal_and_general_quotients_agree() {
        let p = KernelParams::new(3, 0.5).unwrap();
        let z = ZonalSum::new(
            3,
            1.0,
            vec![
                ZonalTerm {
                    degree: 1,
                    coeff: 0.3,
                    axis: vec![0.0, 0.6, 0.8],
                },
                ZonalTerm {
                    degree: 2,
                    coeff: -0.2,
                    axis: vec![1.0, 0.0, 0.0],
                },
            ],
        )
        .unwrap();
        let a = quotient_thm1_zonal(&z, &p, 8).unwrap();
        let b = quotient_thm1(&z.field(), &p, 6).unwrap();
        assert!(fabs(a.quotient - b.quotient) < 1e-7, "{a:?} {b:?}");
        let s = sharp_constant(&p, 8).unwrap();
        let a = a.with_reference(s, 1e-3);
        assert!(a.strictly_below(s.value), "{a:?}");
        assert_ne!(a.verdict, Some(Verdict::Violates));
        // homogeneity
        let c = quotient_thm1_zonal(&z.scaled(-3.0), &p, 8).unwrap();
        assert!(fabs(a.quotient - c.quotient) < 1e-12 * a.quotient);
    }

    #[test]
    fn mobius_orbit_of_one_saturates() {
        let p = KernelParams::new(3, 0.5).unwrap();
        let s = sharp_constant(&p, 8).unwrap();
        let t = MobiusTransform::translation(&[0.4, 0.0, 0.0]).unwrap();
        let f = mobius_weighted(&FieldFunction::constant(Domain::Sphere, 3, 1.0), &t, &p).unwrap();
        let r = quotient_thm1_axial(&f, &p, 6).unwrap();
        assert!(fabs(r.quotient - s.value) < 1e-7, "{r:?} {s:?}");
    }

    #[test]
    fn conformal_invariance_of_the_extension() {
        let p = KernelParams::new(3, 0.5).unwrap();
        let f = FieldFunction::new(Domain::Sphere, 3, |x| 1.0 + 0.5 * x[0] - 0.3 * x[1] * x[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..6).map(|_| random_ball_point(3, 0.8, &mut rng)).collect();
        let id = conformal_invariance_check(&f, &MobiusTransform::identity(3), &p, &pts, 8).unwrap();
        assert!(id.value < 1e-12);
        let rot = MobiusTransform::givens(3, 0, 2, 0.7);
        let d = conformal_invariance_check(&f, &rot, &p, &pts, 8).unwrap();
        assert!(d.value < 1e-6, "{d:?}");
        let b = MobiusTransform::translation(&[0.4, 0.0, 0.0]).unwrap();
        let d = conformal_invariance_check(&f, &b, &p, &pts, 12).unwrap();
        assert!(d.value <= d.error.max(1e-9), "{d:?}");
    }
}
