//! The checks behind each subcommand. Every suite returns its records in a
//! fixed order; random inputs come from per-sample ChaCha streams so the
//! outcome does not depend on the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use confext_core::geometry::MobiusTransform;
use confext_core::inequalities::{
    carleman_check, compute_in, corollary1_check, corollary1_reference, domination_bounds_check, el_residual, extremal_eval,
    halfspace_quotient, inward_derivative, log_jacobian_data, maximizer_search, quotient_thm1_zonal, quotient_thm2_axial,
    quotient_thm2_zonal, random_ball_point, sharp_constant, sharp_constant_closed_form, sharp_constant_thm2, Admissibility,
    ExtremalCandidate, LimitFunctionalField, SearchConfig, Verdict, ZonalSum,
};
use confext_core::kernels::{
    biharmonic_represent, calibrate_biharmonic_constants, extend_halfspace, normalization, normalization_radial, BiharmonicKernelConstants,
};
use confext_core::quadrature::Estimate;
use confext_core::{Domain, Error, FieldFunction, KernelParams, Result};

use crate::config::RunConfig;
use crate::report::{CandidateRecord, CheckRecord, SweepRow};

/// Relative slack on the sharp constant for random data.
pub const RANDOM_SLACK: f64 = 1e-6;
/// Resolution of the Euler–Lagrange residual; its cost grows fast with `m`
/// and the contrast is already two orders wide at 4.
pub const EL_RESOLUTION: usize = 4;
/// Candidates need CoV below this; perturbations at least ten times more.
pub const EL_THRESHOLD: f64 = 1e-2;
pub const EL_CONTRAST: f64 = 10.0;
pub const DOMINATION_SLACK: f64 = 1e-6;
pub const DOMINATION_EPS: [f64; 3] = [0.1, 0.25, 0.5];
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;
pub const CONSTANT_TOLERANCE: f64 = 1e-8;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-4;
pub const REPRESENTATION_TOLERANCE: f64 = 1e-4;
pub const CALIBRATION_TOLERANCE: f64 = 1e-6;
pub const BOUNDARY_TOLERANCE: f64 = 1e-3;
pub const NORMAL_DERIVATIVE_TOLERANCE: f64 = 1e-2;

/// Stream `i` of the run's seed.
pub fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn recorded(name: String, inputs: String, r: Result<CheckRecord>) -> CheckRecord {
    r.unwrap_or_else(|e| CheckRecord::failed(name, inputs, &e))
}

/// Runs `f` for every index in parallel and returns results in index order.
fn par_records<F>(count: usize, f: F) -> Vec<CheckRecord>
where
    F: Fn(usize) -> CheckRecord + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

fn max_zonal_degree(n: usize) -> usize {
    match n {
        2 | 3 => 4,
        _ => 2,
    }
}

/// `max_i |v_i - w_i|` over a list of pairs.
fn max_gap(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(v, w)| (v - w).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- thm1

/// `d_{n,a}` against the radial oracle and `P_a 1 = 1` at random points.
pub fn normalization_records(n: usize, a: f64, points: usize, seed: u64, m: usize) -> Vec<CheckRecord> {
    let inputs = format!("n={n} a={a}");
    let d = recorded(
        "normalization/d".into(),
        inputs.clone(),
        (|| {
            let (g, r) = (normalization(n, a)?, normalization_radial(n, a, 4 * m)?);
            Ok(CheckRecord::new("normalization/d", inputs.clone())
                .value(g, (g - r).abs())
                .reference(r)
                .holds((g - r).abs() <= CONSTANT_TOLERANCE * r))
        })(),
    );
    let one = recorded(
        "normalization/extension_of_one".into(),
        inputs.clone(),
        (|| {
            let params = KernelParams::new(n, a)?;
            let u = extend_halfspace(&FieldFunction::constant(Domain::Plane, n, 1.0), &params, m)?;
            let mut rng = sample_rng(seed, usize::MAX >> 1);
            let mut worst = 0.0f64;
            for _ in 0..points {
                let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
                x[n - 1] = 10f64.powf(rng.gen_range(-3.0..2.0));
                worst = worst.max((u.estimate(&x)?.value - 1.0).abs());
            }
            Ok(
                CheckRecord::new("normalization/extension_of_one", format!("{inputs} points={points}"))
                    .value(worst, 0.0)
                    .reference(0.0)
                    .note("largest |P_a 1 - 1| over the points")
                    .holds(worst <= NORMALIZATION_TOLERANCE),
            )
        })(),
    );
    vec![d, one]
}

fn sharp_constant_record(params: &KernelParams, m: usize) -> (CheckRecord, Option<Estimate>) {
    let (n, a) = (params.n(), params.a());
    let inputs = format!("n={n} a={a} m={m}");
    match sharp_constant(params, m) {
        Ok(s) => {
            let mut rec = CheckRecord::new("sharp_constant", inputs).value(s.value, s.error);
            let ok = if a == 0.0 {
                let c = sharp_constant_closed_form(n);
                rec = rec.reference(c).note("closed form at a = 0");
                (s.value - c).abs() <= CLOSED_FORM_TOLERANCE
            } else {
                s.value.is_finite() && s.error <= CLOSED_FORM_TOLERANCE
            };
            (rec.holds(ok), Some(s))
        }
        Err(e) => (CheckRecord::failed("sharp_constant", inputs, &e), None),
    }
}

fn thm1_random(params: &KernelParams, s: Estimate, cfg: &RunConfig) -> Vec<CheckRecord> {
    let n = params.n();
    let width = cfg.samples.to_string().len().max(4);
    par_records(cfg.samples, |i| {
        let name = format!("random/{i:0width$}");
        let mut rng = sample_rng(cfg.seed, i);
        let data = ZonalSum::random_perturbation(n, &mut rng, 3, max_zonal_degree(n), 0.9).scaled(rng.gen_range(0.2..3.0));
        let inputs = format!("seed={} stream={i} degree≤{}", cfg.seed, data.max_degree());
        recorded(
            name.clone(),
            inputs.clone(),
            (|| {
                let r = quotient_thm1_zonal(&data, params, cfg.resolution)?.with_reference(s, cfg.tolerance);
                let ok = r.respects(s.value, RANDOM_SLACK) && r.verdict != Some(Verdict::Violates);
                Ok(CheckRecord::quotient(name.clone(), inputs.clone(), &r, &[Verdict::Below, Verdict::Saturates]).holds(ok))
            })(),
        )
    })
}

/// The centres used for the candidate family: the origin and one point
/// away from it.
pub fn candidate_centres(n: usize) -> [Vec<f64>; 2] {
    let mut off = vec![0.0; n - 1];
    off[0] = 0.3;
    if n > 2 {
        off[1] = -1.0;
    }
    [vec![0.0; n - 1], off]
}

pub const CANDIDATE_SCALES: [f64; 3] = [0.5, 1.0, 2.0];

fn thm1_candidates(params: &KernelParams, s: Estimate, cfg: &RunConfig) -> Vec<CheckRecord> {
    let n = params.n();
    let m = (cfg.resolution * 3 / 4).max(4);
    let cases: Vec<(f64, Vec<f64>)> = CANDIDATE_SCALES
        .iter()
        .flat_map(|&l| candidate_centres(n).into_iter().map(move |y| (l, y)))
        .collect();
    par_records(cases.len(), |i| {
        let (lambda, y0) = &cases[i];
        let name = format!("candidate/{i}");
        let inputs = format!("c=1.3 lambda={lambda} y0={y0:?} m={m}");
        recorded(
            name.clone(),
            inputs.clone(),
            (|| {
                let f = extremal_eval(&ExtremalCandidate::new(1.3, *lambda, y0.clone())?, params)?;
                let r = halfspace_quotient(&f, y0, params, m, *lambda)?.with_reference(s, cfg.tolerance);
                Ok(CheckRecord::quotient(name.clone(), inputs.clone(), &r, &[Verdict::Saturates]))
            })(),
        )
    })
}

/// Euler–Lagrange residual of a candidate and of a small bump on it; the
/// first must be near zero and the second clearly larger.
pub fn el_contrast(params: &KernelParams) -> Vec<CheckRecord> {
    let n = params.n();
    let eps = params.eps();
    let origin = vec![0.0; n - 1];
    let mut s1 = origin.clone();
    s1[0] = 0.5;
    let mut s2 = origin.clone();
    s2[0] = 1.0;
    if n > 2 {
        s2[1] = 0.5;
    }
    let samples = vec![origin.clone(), s1.clone(), s2];
    let inputs = format!("n={n} a={} lambda=1 y0=0 m={EL_RESOLUTION}", params.a());
    let cand = match ExtremalCandidate::new(1.0, 1.0, origin) {
        Ok(c) => c,
        Err(e) => return vec![CheckRecord::failed("euler_lagrange", inputs, &e)],
    };
    let bump = {
        let (c, s1) = (cand.clone(), s1.clone());
        FieldFunction::new(Domain::Plane, n, move |y| {
            let d: f64 = y.iter().zip(&s1).map(|(a, b)| (a - b) * (a - b)).sum();
            c.value(y, eps) * (1.0 + 0.05 * (-4.0 * d).exp())
        })
    };
    let runs: Vec<Result<f64>> = [0, 1]
        .into_par_iter()
        .map(|k| {
            let f = if k == 0 { extremal_eval(&cand, params)? } else { bump.clone() };
            el_residual(&f, params, &samples, EL_RESOLUTION, 1.0)
        })
        .collect();
    match (&runs[0], &runs[1]) {
        (Ok(c), Ok(p)) => vec![
            CheckRecord::new("euler_lagrange/candidate", inputs.clone())
                .value(*c, 0.0)
                .reference(EL_THRESHOLD)
                .note("coefficient of variation of the residual")
                .holds(*c < EL_THRESHOLD),
            CheckRecord::new("euler_lagrange/perturbed", inputs)
                .value(*p, 0.0)
                .reference(EL_CONTRAST * c)
                .note("5% bump at Y = 0.5 e_1")
                .holds(*p > EL_CONTRAST * c),
        ],
        (Err(e), _) | (_, Err(e)) => vec![CheckRecord::failed("euler_lagrange", inputs, e)],
    }
}

pub fn verify_thm1(cfg: &RunConfig) -> Vec<CheckRecord> {
    let (n, a) = (cfg.n, cfg.a_or_default());
    let params = match KernelParams::new(n, a) {
        Ok(p) => p,
        Err(e) => return vec![CheckRecord::failed("parameters", format!("n={n} a={a}"), &e)],
    };
    let mut out = normalization_records(n, a, 100, cfg.seed, cfg.resolution);
    let (rec, s) = sharp_constant_record(&params, cfg.resolution);
    out.push(rec);
    if let Some(s) = s {
        out.extend(thm1_random(&params, s, cfg));
        out.extend(thm1_candidates(&params, s, cfg));
    }
    out.extend(el_contrast(&params));
    out
}

// ---------------------------------------------------------------- thm2

/// `I_4` against the biharmonic representation with zero trace and unit
/// inward derivative, at `count` random points of `|η| ≤ 0.9`.
pub fn dual_representation(
    field: &LimitFunctionalField,
    consts: &BiharmonicKernelConstants,
    count: usize,
    seed: u64,
    m: usize,
    tol: f64,
) -> CheckRecord {
    let inputs = format!("points={count} |eta|<=0.9 m={m}");
    let zero = FieldFunction::constant(Domain::Sphere, 4, 0.0);
    let one = FieldFunction::constant(Domain::Sphere, 4, 1.0);
    let mut rng = sample_rng(seed, usize::MAX >> 2);
    let pts: Vec<Vec<f64>> = (0..count).map(|_| random_ball_point(4, 0.9, &mut rng)).collect();
    let gaps: Result<Vec<f64>> = pts
        .par_iter()
        .map(|eta| {
            let rep = biharmonic_represent(&zero, &one, consts, eta, m)?;
            let i = field.eval_direct(eta)?;
            Ok((rep.value - i.value).abs())
        })
        .collect();
    match gaps {
        Ok(g) => {
            let worst = g.into_iter().fold(0.0, f64::max);
            CheckRecord::new("dual_representation", inputs)
                .value(worst, 0.0)
                .reference(0.0)
                .note("largest |I_4 - representation|")
                .holds(worst <= tol)
        }
        Err(e) => CheckRecord::failed("dual_representation", inputs, &e),
    }
}

/// The two-sided bounds on `P̃_a 1` for `a = 2 - n + ε` at 100 random
/// points of the ball.
pub fn domination_records(n: usize, seed: u64) -> Vec<CheckRecord> {
    let mut rng = sample_rng(seed, usize::MAX >> 3);
    let pts: Vec<Vec<f64>> = (0..100).map(|_| random_ball_point(n, 0.999, &mut rng)).collect();
    DOMINATION_EPS
        .iter()
        .map(|&eps| {
            let name = format!("domination/eps={eps:.2}");
            let inputs = format!("n={n} points=100");
            match domination_bounds_check(n, eps, &pts) {
                Ok(r) => CheckRecord::new(name, inputs)
                    .value(r.max_b, 0.0)
                    .reference(r.bound_b)
                    .note(format!("min P1 = {} ≥ A = {}", r.min_a, r.bound_a))
                    .holds(r.holds(DOMINATION_SLACK)),
                Err(e) => CheckRecord::failed(name, inputs, &e),
            }
        })
        .collect()
}

pub fn verify_thm2(cfg: &RunConfig) -> Vec<CheckRecord> {
    let (n, m) = (cfg.n, cfg.resolution);
    let field = match compute_in(n, m) {
        Ok(f) => f,
        Err(e) => return vec![CheckRecord::failed("limit_function", format!("n={n} m={m}"), &e)],
    };
    let s = match sharp_constant_thm2(&field, m) {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::failed("sharp_constant", format!("n={n} m={m}"), &e)],
    };
    let mut out = vec![CheckRecord::new("sharp_constant", format!("n={n} m={m}"))
        .value(s.value, s.error)
        .holds(s.value.is_finite() && s.error <= cfg.tolerance)];
    let saturating = [Verdict::Saturates];
    for c in [0.0, 0.7] {
        let name = format!("constant/c={c}");
        let inputs = format!("F = {c}");
        out.push(recorded(
            name.clone(),
            inputs.clone(),
            (|| {
                let r = quotient_thm2_zonal(&ZonalSum::constant(n, c), &field, m)?.with_reference(s, cfg.tolerance);
                Ok(CheckRecord::quotient(name.clone(), inputs.clone(), &r, &saturating))
            })(),
        ));
    }
    for (b, c) in [(0.3, -0.2), (0.5, 0.4)] {
        let name = format!("log_jacobian/b={b}");
        let inputs = format!("F = {c} + log J/(n-1), translation b e_1");
        out.push(recorded(
            name.clone(),
            inputs.clone(),
            (|| {
                let mut v = vec![0.0; n];
                v[0] = b;
                let data = log_jacobian_data(&MobiusTransform::translation(&v)?, c);
                let r = quotient_thm2_axial(&data, &field, m)?.with_reference(s, cfg.tolerance);
                Ok(CheckRecord::quotient(name.clone(), inputs.clone(), &r, &saturating))
            })(),
        ));
    }
    let width = cfg.samples.to_string().len().max(4);
    out.extend(par_records(cfg.samples, |i| {
        let name = format!("random/{i:0width$}");
        let mut rng = sample_rng(cfg.seed, i);
        let data = ZonalSum::random_perturbation(n, &mut rng, 3, max_zonal_degree(n), 0.9).scaled(rng.gen_range(-1.5..1.5));
        let inputs = format!("seed={} stream={i} degree≤{}", cfg.seed, data.max_degree());
        recorded(
            name.clone(),
            inputs.clone(),
            (|| {
                let r = quotient_thm2_zonal(&data, &field, m)?.with_reference(s, cfg.tolerance);
                Ok(CheckRecord::quotient(
                    name.clone(),
                    inputs.clone(),
                    &r,
                    &[Verdict::Below, Verdict::Saturates],
                ))
            })(),
        )
    }));
    if n == 4 {
        out.push(dual_representation(
            &field,
            &BiharmonicKernelConstants::exact(),
            50,
            cfg.seed,
            m,
            cfg.tolerance,
        ));
    }
    out.extend(domination_records(n, cfg.seed));
    out
}

// ---------------------------------------------------------------- carleman

fn disc(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> FieldFunction {
    FieldFunction::new(Domain::Ball, 2, move |x| f(x[0], x[1]))
}

/// `Σ_k r^k (a_k cos kθ + b_k sin kθ)` for `k = 1..=4`.
pub fn random_harmonic_polynomial<R: Rng>(rng: &mut R) -> FieldFunction {
    let c: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
    disc(move |x, y| {
        let (rho, th) = (x.hypot(y), y.atan2(x));
        c.iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let k = (k + 1) as f64;
                rho.powf(k) * (a * (k * th).cos() + b * (k * th).sin())
            })
            .sum()
    })
}

pub fn verify_carleman(cfg: &RunConfig) -> Vec<CheckRecord> {
    let m = 4 * cfg.resolution;
    let bound = 1.0 / (4.0 * PI);
    let equality = |name: &str, inputs: &str, u: FieldFunction, tol: f64| {
        recorded(
            name.into(),
            inputs.into(),
            (|| {
                let r = carleman_check(&u, Admissibility::Harmonic, m)?;
                let gap = (r.quotient - bound).abs();
                Ok(CheckRecord::quotient(name, inputs, &r, &[Verdict::Saturates]).holds(gap <= tol.max(3.0 * r.combined_error())))
            })(),
        )
    };
    let mut out = vec![
        equality("equality/zero", "u = 0", disc(|_, _| 0.0), CONSTANT_TOLERANCE),
        equality(
            "equality/log_pole",
            "u = -2 log|x - (1.5, 0)| + 0.3",
            disc(|x, y| -2.0 * (x - 1.5).hypot(y).ln() + 0.3),
            CLOSED_FORM_TOLERANCE,
        ),
    ];
    let below = |name: String, inputs: String, u: FieldFunction, class: Admissibility| {
        recorded(
            name.clone(),
            inputs.clone(),
            (|| {
                let r = carleman_check(&u, class, m)?;
                Ok(CheckRecord::quotient(name.clone(), inputs.clone(), &r, &[Verdict::Below]).holds(r.strictly_below(bound)))
            })(),
        )
    };
    out.push(below(
        "subharmonic/bowl".into(),
        "u = |x|²".into(),
        disc(|x, y| x * x + y * y),
        Admissibility::Subharmonic,
    ));
    out.push(
        match carleman_check(&disc(|x, y| -(x * x + y * y)), Admissibility::Subharmonic, m) {
            Err(Error::Inadmissible(msg)) => CheckRecord::new("admissibility/cap", "u = -|x|²").note(msg).holds(true),
            Err(e) => CheckRecord::failed("admissibility/cap", "u = -|x|²", &e),
            Ok(_) => CheckRecord::new("admissibility/cap", "u = -|x|²")
                .note("superharmonic data accepted")
                .holds(false),
        },
    );
    let width = cfg.samples.to_string().len().max(4);
    out.extend(par_records(cfg.samples, |i| {
        let u = random_harmonic_polynomial(&mut sample_rng(cfg.seed, i));
        below(
            format!("harmonic/{i:0width$}"),
            format!("seed={} stream={i}", cfg.seed),
            u,
            Admissibility::Harmonic,
        )
    }));
    out
}

// ---------------------------------------------------------------- biharmonic

fn ball4(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> FieldFunction {
    FieldFunction::new(Domain::Ball, 4, move |x| f(x.iter().map(|v| v * v).sum::<f64>().sqrt()))
}

/// The representation formula with calibrated constants, reproducing
/// `1 - |η|²` and `η_1(1 - |η|²)` on points of `|η| ≤ 0.9`.
pub fn representation_records(m: usize) -> Vec<CheckRecord> {
    let consts = match calibrate_biharmonic_constants() {
        Ok(c) => c,
        Err(e) => return vec![CheckRecord::failed("calibration", "radii 0, 0.3, 0.7", &e)],
    };
    let exact = BiharmonicKernelConstants::exact();
    let drift = ((consts.c - exact.c) / exact.c).abs().max(((consts.d - exact.d) / exact.d).abs());
    let mut out = vec![CheckRecord::new("calibration", "radii 0, 0.3, 0.7")
        .value(drift, 0.0)
        .reference(0.0)
        .note(format!("C = {}, D = {}; relative distance to 1/(2π²), 1/(4π²)", consts.c, consts.d))
        .holds(drift <= CALIBRATION_TOLERANCE)];
    let zero = FieldFunction::constant(Domain::Sphere, 4, 0.0);
    let two = FieldFunction::constant(Domain::Sphere, 4, 2.0);
    let lin = FieldFunction::new(Domain::Sphere, 4, |xi| 2.0 * xi[0]);
    let pts: Vec<[f64; 4]> = [0.0, 0.3, 0.6, 0.9]
        .iter()
        .flat_map(|&r| {
            [
                [r, 0.0, 0.0, 0.0],
                [r * 0.5, -r * 0.5, r * 0.5, r * 0.5],
                [0.0, 0.0, -r * 0.6, r * 0.8],
            ]
        })
        .collect();
    type Truth = fn(&[f64; 4]) -> f64;
    let cases: [(&str, &FieldFunction, Truth); 2] = [
        ("representation/one_minus_r2", &two, |e| 1.0 - e.iter().map(|v| v * v).sum::<f64>()),
        ("representation/eta1_one_minus_r2", &lin, |e| {
            e[0] * (1.0 - e.iter().map(|v| v * v).sum::<f64>())
        }),
    ];
    for (name, neumann, truth) in cases {
        let inputs = format!("{} points, |eta| ≤ 0.9, m={}", pts.len(), 3 * m);
        out.push(recorded(
            name.into(),
            inputs.clone(),
            (|| {
                let mut pairs = Vec::new();
                for eta in &pts {
                    pairs.push((biharmonic_represent(&zero, neumann, &consts, eta, 3 * m)?.value, truth(eta)));
                }
                let worst = max_gap(pairs);
                Ok(CheckRecord::new(name, inputs.clone())
                    .value(worst, 0.0)
                    .reference(0.0)
                    .holds(worst <= REPRESENTATION_TOLERANCE))
            })(),
        ));
    }
    out
}

pub fn verify_corollary1(cfg: &RunConfig) -> Vec<CheckRecord> {
    let m = cfg.resolution;
    let reference = match corollary1_reference(m) {
        Ok(s) => s,
        Err(e) => return vec![CheckRecord::failed("sharp_constant", format!("m={m}"), &e)],
    };
    let mut out = vec![CheckRecord::new("sharp_constant", format!("n=4 m={m}"))
        .value(reference.value, reference.error)
        .holds(reference.value.is_finite() && reference.error <= cfg.tolerance)];
    let check = |name: &str, inputs: &str, u: FieldFunction, accept: &[Verdict], extra: &dyn Fn(f64) -> bool| {
        recorded(
            name.into(),
            inputs.into(),
            (|| {
                let r = corollary1_check(&u, None, m)?;
                let ok = r.verdict.is_some_and(|v| accept.contains(&v)) && extra(r.quotient);
                Ok(CheckRecord::quotient(name, inputs, &r, accept).holds(ok))
            })(),
        )
    };
    out.push(check(
        "extremal",
        "u = (1 - |η|²)/2",
        ball4(|r| (1.0 - r * r) / 2.0),
        &[Verdict::Saturates],
        &|_| true,
    ));
    let closed = (PI * PI / 2.0).powf(0.25) / (2.0 * PI * PI).powf(1.0 / 3.0);
    let zero = check("zero", "u = 0", ball4(|_| 0.0), &[Verdict::Below], &|q| (q - closed).abs() <= 1e-12);
    out.push(zero.note(format!("closed form (π²/2)^(1/4)/(2π²)^(1/3) = {closed}")));
    out.push(check(
        "tilted",
        "u = 0.4 (1 - |η|²)",
        ball4(|r| 0.4 * (1.0 - r * r)),
        &[Verdict::Below],
        &|_| true,
    ));
    out.push(match corollary1_check(&ball4(|r| 0.8 * (1.0 - r * r)), None, m) {
        Err(Error::Inadmissible(msg)) => CheckRecord::new("admissibility/steep", "u = 0.8 (1 - |η|²)").note(msg).holds(true),
        Err(e) => CheckRecord::failed("admissibility/steep", "u = 0.8 (1 - |η|²)", &e),
        Ok(_) => CheckRecord::new("admissibility/steep", "u = 0.8 (1 - |η|²)")
            .note("inward derivative 1.6 accepted")
            .holds(false),
    });
    out.extend(limit_function_boundary(m));
    out.extend(representation_records(m));
    out
}

/// Boundary conditions of `I_4`: near-zero trace one step inside the
/// sphere and inward derivative 1 (outward normal derivative −1).
pub fn limit_function_boundary(m: usize) -> Vec<CheckRecord> {
    let field = match compute_in(4, m) {
        Ok(f) => f,
        Err(e) => return vec![CheckRecord::failed("limit_function", format!("n=4 m={m}"), &e)],
    };
    let dirs: [[f64; 4]; 3] = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.6, 0.0, -0.8], [0.5, 0.5, 0.5, 0.5]];
    let inputs = "|eta| = 1 - 1e-3, three directions".to_string();
    let trace = recorded(
        "limit_function/trace".into(),
        inputs.clone(),
        (|| {
            let mut worst = 0.0f64;
            for d in &dirs {
                let eta: Vec<f64> = d.iter().map(|v| v * (1.0 - 1e-3)).collect();
                worst = worst.max(field.eval_direct(&eta)?.value.abs());
            }
            Ok(CheckRecord::new("limit_function/trace", inputs.clone())
                .value(worst, 0.0)
                .reference(0.0)
                .holds(worst < BOUNDARY_TOLERANCE))
        })(),
    );
    let inputs = "one-sided FD, h = 1e-3".to_string();
    let normal = {
        let mut worst = 0.0f64;
        for d in &dirs {
            let (v, _) = inward_derivative(|x| field.eval_direct(x).map_or(f64::NAN, |e| e.value), d, 1e-3);
            worst = if v.is_nan() { f64::NAN } else { worst.max((v - 1.0).abs()) };
        }
        CheckRecord::new("limit_function/normal_derivative", inputs)
            .value(worst, 0.0)
            .reference(0.0)
            .note("largest |-∂I/∂γ - 1|")
            .holds(worst <= NORMAL_DERIVATIVE_TOLERANCE)
    };
    vec![trace, normal]
}

// ---------------------------------------------------------------- sweep

pub fn sweep(cfg: &RunConfig) -> (Vec<CheckRecord>, Vec<SweepRow>) {
    let n = cfg.n;
    let values = cfg.a_range.map(|r| r.values()).unwrap_or_default();
    let results: Vec<(CheckRecord, SweepRow)> = values
        .par_iter()
        .map(|&a| {
            let name = format!("S/a={a:+.6}");
            let row = |s: Option<Estimate>| SweepRow {
                n,
                a,
                s: s.map(|e| e.value),
                error: s.map(|e| e.error),
            };
            match KernelParams::new(n, a) {
                Ok(params) => {
                    let (mut rec, s) = sharp_constant_record(&params, cfg.resolution);
                    rec.name = name;
                    (rec, row(s))
                }
                Err(e) => (CheckRecord::failed(name, format!("n={n} a={a}"), &e), row(None)),
            }
        })
        .collect();
    results.into_iter().unzip()
}

// ---------------------------------------------------------------- search

pub fn search_max(cfg: &RunConfig) -> (Vec<CheckRecord>, Option<CandidateRecord>) {
    let (n, a) = (cfg.n, cfg.a_or_default());
    let inputs = format!("n={n} a={a} cells={} seed={}", cfg.resolution, cfg.seed);
    let params = match KernelParams::new(n, a) {
        Ok(p) => p,
        Err(e) => return (vec![CheckRecord::failed("search", inputs, &e)], None),
    };
    let s = match sharp_constant(&params, 8) {
        Ok(s) => s,
        Err(e) => return (vec![CheckRecord::failed("sharp_constant", inputs, &e)], None),
    };
    let res = match maximizer_search(&params, &SearchConfig::new(cfg.resolution, cfg.seed)) {
        Ok(r) => r,
        Err(e) => return (vec![CheckRecord::failed("search", inputs, &e)], None),
    };
    let gap = s.value - res.quotient;
    let fit = &res.fit;
    let records = vec![
        CheckRecord::new("search/bound", inputs.clone())
            .value(res.quotient, 0.0)
            .reference(s.value)
            .note("the discrete quotient never exceeds the sharp constant")
            .holds(res.quotient <= s.value + 3.0 * s.error + 1e-12 * s.value),
        CheckRecord::new("search/gap", inputs.clone())
            .value(gap, s.error)
            .reference(0.0)
            .note(format!("{} steps, converged = {}", res.steps, res.converged))
            .holds(gap.abs() <= cfg.tolerance),
        CheckRecord::new("search/fit", inputs)
            .value(fit.residual, 0.0)
            .note("relative residual of the fitted candidate")
            .holds(fit.residual <= 5e-2),
    ];
    let candidate = CandidateRecord {
        c: fit.candidate.c,
        lambda: fit.candidate.lambda,
        y0: fit.candidate.y0.clone(),
        fit_residual: fit.residual,
        quotient: res.quotient,
        sharp_constant: s.value,
        gap,
        steps: res.steps,
        converged: res.converged,
        trace: res.trace,
    };
    (records, Some(candidate))
}
