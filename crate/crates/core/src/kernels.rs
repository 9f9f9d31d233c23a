//! The extension operator `P_a` on the half-space,
//!
//! `(P_a f)(X, x_n) = d_{n,a} ∫ x_n^{1-a} / (|X-Y|² + x_n²)^{(n-a)/2} f(Y) dY`,
//!
//! its ball counterpart `P̃_a`, finite-difference PDE residuals, and the
//! `n = 4` biharmonic representation formula.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{expm1, fabs, log, log1p, pow};

use crate::error::{invalid, Error, Result};
use crate::field::{Domain, FieldFunction};
use crate::geometry::ConformalMap;
use crate::linalg::{dist_sq, norm, norm_sq};
use crate::quadrature::{tanh_sinh, tanh_sinh_unit, Estimate, Rule, RADIAL_PER_M};
use crate::special::{gamma, sphere_area};

/// Largest supported dimension; evaluation uses fixed-size stack buffers.
pub const MAX_DIM: usize = 16;

/// `(n, a)` together with `ε = n - 2 + a` and `d_{n,a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    n: usize,
    a: f64,
    eps: f64,
    d: f64,
}

impl KernelParams {
    /// Requires `2 ≤ n ≤ 16` and `2 - n ≤ a < 1`.
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(invalid!("dimension n = {n} outside 2..={MAX_DIM}"));
        }
        if !a.is_finite() || a >= 1.0 {
            return Err(invalid!("a = {a} must be < 1; the normalizing integral diverges"));
        }
        let floor = 2.0 - n as f64;
        if a < floor - 1e-12 {
            return Err(invalid!("a = {a} is below the endpoint 2 - n = {floor}"));
        }
        let a = a.max(floor);
        Ok(KernelParams {
            n,
            a,
            eps: n as f64 - 2.0 + a,
            d: normalization(n, a)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Boundary exponent `2(n-1)/ε`.
    pub fn p_boundary(&self) -> Result<f64> {
        self.require_positive_eps()?;
        Ok(2.0 * (self.n as f64 - 1.0) / self.eps)
    }

    /// Interior exponent `2n/ε`.
    pub fn p_interior(&self) -> Result<f64> {
        self.require_positive_eps()?;
        Ok(2.0 * self.n as f64 / self.eps)
    }

    pub fn require_positive_eps(&self) -> Result<()> {
        if self.eps <= 0.0 {
            return Err(invalid!("ε = n - 2 + a must be positive, got {}", self.eps));
        }
        Ok(())
    }

    /// Kernel value `x_n^{1-a} / (|Z|² + x_n²)^{(n-a)/2}` without `d`.
    pub fn kernel(&self, z_sq: f64, xn: f64) -> f64 {
        pow(xn, 1.0 - self.a) * pow(z_sq + xn * xn, -(self.n as f64 - self.a) / 2.0)
    }
}

/// `d_{n,a} = Γ((n-a)/2) / (π^{(n-1)/2} Γ((1-a)/2))`.
pub fn normalization(n: usize, a: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid!("dimension n = {n} must be at least 2"));
    }
    if !(a < 1.0) {
        return Err(invalid!("a = {a} must be < 1"));
    }
    let n = n as f64;
    Ok(gamma((n - a) / 2.0) / (pow(PI, (n - 1.0) / 2.0) * gamma((1.0 - a) / 2.0)))
}

/// `1 / ∫_{R^{n-1}} (1+|U|²)^{-(n-a)/2} dU` from a one-dimensional radial
/// quadrature. With `t = (1 + r²)^{-(1-a)/2}` the radial integral is
/// `|S^{n-2}| / (1-a) ∫_0^1 (1 - t^{2/(1-a)})^{(n-3)/2} dt`, which stays
/// bounded as `a → 1`.
pub fn normalization_radial(n: usize, a: f64, m: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid!("dimension n = {n} must be at least 2"));
    }
    if !(a < 1.0) {
        return Err(invalid!("a = {a} must be < 1"));
    }
    let q = 2.0 / (1.0 - a);
    let alpha = (n as f64 - 3.0) / 2.0;
    let radial = tanh_sinh(
        |t, rest| {
            let ln_t = if rest < 0.5 { log1p(-rest) } else { log(t) };
            pow(-expm1(q * ln_t), alpha)
        },
        0.0,
        1.0,
        m,
    ) / (1.0 - a);
    Ok(1.0 / (sphere_area(n - 1) * radial))
}

/// Fixed rule for `d_{n,a} ∫ (1+|U|²)^{-(n-a)/2} g(U) dU`; the density is
/// folded into the weights so only `g` is sampled.
#[derive(Debug, Clone)]
pub struct KernelRule {
    params: KernelParams,
    rule: Arc<Rule>,
}

impl KernelRule {
    pub fn new(params: &KernelParams, m: usize) -> Self {
        let mut rule = Rule::plane_kernel_weighted(params.n, params.a, m);
        rule.scale_weights(params.d);
        KernelRule {
            params: *params,
            rule: Arc::new(rule),
        }
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Discrete total mass; equals 1 up to quadrature error.
    pub fn mass(&self) -> f64 {
        self.rule.total_weight()
    }

    /// `d ∫ (1+|U|²)^{-(n-a)/2} g(X + x_n U) dU` at `p = (X, x_n)`.
    pub fn average<G: FnMut(&[f64]) -> f64>(&self, p: &[f64], mut g: G) -> f64 {
        let d = self.params.n - 1;
        let xn = p[d];
        let mut y = [0.0; MAX_DIM];
        let mut acc = 0.0;
        for (u, w) in self.rule.iter() {
            for i in 0..d {
                y[i] = p[i] + xn * u[i];
            }
            acc += w * g(&y[..d]);
        }
        acc
    }
}

fn check_source(f: &FieldFunction, params: &KernelParams, domain: Domain) -> Result<()> {
    if f.domain() != domain {
        return Err(invalid!("expected a {} function, got {}", domain.name(), f.domain().name()));
    }
    if f.n() != params.n {
        return Err(invalid!("function dimension {} differs from n = {}", f.n(), params.n));
    }
    Ok(())
}

/// Relative target used when comparing the two resolutions of an extension.
pub const EXTENSION_TARGET: f64 = 1e-6;

/// `u = P_a f` evaluated on demand; `m` and `2m` kernel rules give the
/// error estimate.
#[derive(Debug, Clone)]
pub struct HalfspaceExtension {
    params: KernelParams,
    source: FieldFunction,
    coarse: KernelRule,
    fine: KernelRule,
}

pub fn extend_halfspace(f: &FieldFunction, params: &KernelParams, m: usize) -> Result<HalfspaceExtension> {
    check_source(f, params, Domain::Plane)?;
    Ok(HalfspaceExtension {
        params: *params,
        source: f.clone(),
        coarse: KernelRule::new(params, m),
        fine: KernelRule::new(params, 2 * m),
    })
}

impl HalfspaceExtension {
    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Value from the fine rule.
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.fine.average(p, |y| self.source.eval(y))
    }

    pub fn estimate(&self, p: &[f64]) -> Result<Estimate> {
        if !(p[self.params.n - 1] > 0.0) {
            return Err(Error::OutOfDomain("extension needs x_n > 0".into()));
        }
        let c = self.coarse.average(p, |y| self.source.eval(y));
        let f = self.fine.average(p, |y| self.source.eval(y));
        accept(c, f)
    }

    /// The extension as a half-space function (fine rule). Its decay is
    /// `min(β, n - 1)` for data decaying like `|Y|^{-β}`.
    pub fn field(&self) -> FieldFunction {
        let me = self.clone();
        let n = self.params.n;
        let f = FieldFunction::new(Domain::HalfSpace, n, move |p| me.eval(p));
        match self.source.decay() {
            Some(b) => f.with_decay(b.min(n as f64 - 1.0)),
            None => f,
        }
    }
}

fn accept(coarse: f64, fine: f64) -> Result<Estimate> {
    let err = fabs(fine - coarse);
    if err > EXTENSION_TARGET * fabs(fine) + 1e-14 {
        return Err(Error::NonConvergent {
            value: fine,
            error: err,
            target: EXTENSION_TARGET,
        });
    }
    Ok(Estimate::new(fine, err))
}

/// `P_a f` straight from the kernel, integrating in `Y` with a plane rule of
/// scale `scale` centred at the origin. Only meant as an independent check
/// at moderate `x_n`.
pub fn extend_halfspace_raw(f: &FieldFunction, params: &KernelParams, p: &[f64], m: usize, scale: f64) -> Result<f64> {
    check_source(f, params, Domain::Plane)?;
    let d = params.n - 1;
    let rule = Rule::plane(params.n, m, scale);
    Ok(params.d * rule.sum(|y| params.kernel(dist_sq(y, &p[..d]), p[d]) * f.eval(y)))
}

/// `f^λ(Y) = λ^{-(n-1)/p} f(Y/λ)`, which preserves the `L^p(R^{n-1})` norm.
pub fn scale_function(f: &FieldFunction, lambda: f64, p: f64) -> Result<FieldFunction> {
    if !(lambda > 0.0) {
        return Err(invalid!("scale λ = {lambda} must be positive"));
    }
    if f.domain() != Domain::Plane {
        return Err(invalid!("scaling acts on plane functions"));
    }
    let d = f.n() - 1;
    let c = pow(lambda, -(d as f64) / p);
    let src = f.clone();
    let g = FieldFunction::new(Domain::Plane, f.n(), move |y| {
        let mut z = [0.0; MAX_DIM];
        for i in 0..d {
            z[i] = y[i] / lambda;
        }
        c * src.eval(&z[..d])
    })
    .with_smoothness(f.smoothness());
    Ok(match f.decay() {
        Some(b) => g.with_decay(b),
        None => g,
    })
}

/// `P̃_a f̃` on the ball.
///
/// Pulling the half-space kernel back through `φ` gives the explicit ball
/// kernel `d_{n,a} 2^{a-1} (1-|η|²)^{1-a} / |η-ξ|^{n-a}`, which is what
/// [`BallExtension`] integrates, with a sphere rule aligned to `η` whose
/// polar factor clusters at the kernel peak. The literal route through the
/// half-space, [`extend_ball_via_halfspace`], gives the same values but needs
/// far more nodes once the data vary on scales comparable to `x_n`.
#[derive(Debug, Clone)]
pub struct BallExtension {
    params: KernelParams,
    source: FieldFunction,
    m: usize,
}

pub fn extend_ball(ftilde: &FieldFunction, params: &KernelParams, m: usize) -> Result<BallExtension> {
    check_source(ftilde, params, Domain::Sphere)?;
    Ok(BallExtension {
        params: *params,
        source: ftilde.clone(),
        m: m.max(2),
    })
}

impl BallExtension {
    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    fn prefactor(&self, eta: &[f64]) -> f64 {
        self.params.d * pow(2.0, self.params.a - 1.0) * pow(1.0 - norm_sq(eta), 1.0 - self.params.a)
    }

    /// Single evaluation at the finer of the two resolutions used by
    /// [`BallExtension::estimate`]; NaN outside the open ball.
    pub fn eval(&self, eta: &[f64]) -> f64 {
        let n = self.params.n;
        let r = norm(eta);
        if !(r < 1.0) {
            return f64::NAN;
        }
        let axis = axis_of(eta, r);
        let s = -(n as f64 - self.params.a) / 2.0;
        let rule = Rule::sphere_aligned(n, 2 * RADIAL_PER_M * self.m, 2 * self.m, &axis);
        self.prefactor(eta) * rule.sum(|xi| pow(dist_sq(eta, xi), s) * self.source.eval(xi))
    }

    pub fn estimate(&self, eta: &[f64]) -> Result<Estimate> {
        let s = -(self.params.n as f64 - self.params.a) / 2.0;
        let est = sphere_kernel_integral(self.params.n, eta, RADIAL_PER_M * self.m, self.m, EXTENSION_TARGET, |d2, xi| {
            pow(d2, s) * self.source.eval(xi)
        })?;
        let c = self.prefactor(eta);
        Ok(Estimate::new(c * est.value, c * est.error))
    }

    pub fn field(&self) -> FieldFunction {
        let me = self.clone();
        FieldFunction::new(Domain::Ball, self.params.n, move |eta| me.eval(eta))
    }
}

fn axis_of(eta: &[f64], r: f64) -> Vec<f64> {
    let mut axis = vec![0.0; eta.len()];
    if r > 0.0 {
        axis.iter_mut().zip(eta).for_each(|(a, e)| *a = e / r);
    } else {
        axis[eta.len() - 1] = 1.0;
    }
    axis
}

/// `P̃_a f̃(η)` computed literally as `|w|^ε · P_a g(φ^{-1}η)` with
/// `g(Y) = |(Y, 1/2)|^{-ε} f̃(φ(Y, 0))`, using kernel rules at `m` and `2m`.
pub fn extend_ball_via_halfspace(ftilde: &FieldFunction, params: &KernelParams, eta: &[f64], m: usize) -> Result<Estimate> {
    check_source(ftilde, params, Domain::Sphere)?;
    let n = params.n;
    let map = ConformalMap::new(n)?;
    let mut p = [0.0; MAX_DIM];
    let w = map.phi_inverse_into(eta, &mut p[..n])?;
    let g = |y: &[f64]| {
        let mut xi = [0.0; MAX_DIM];
        map.phi_boundary_into(y, &mut xi[..n]);
        pow(norm_sq(y) + 0.25, -params.eps / 2.0) * ftilde.eval(&xi[..n])
    };
    let scale = pow(w, params.eps);
    let c = scale * KernelRule::new(params, m).average(&p[..n], g);
    let f = scale * KernelRule::new(params, 2 * m).average(&p[..n], g);
    accept(c, f)
}

/// Zonal harmonic of degree `l` on `S^{n-1}`, normalized to `G_l(1) = 1`:
/// Chebyshev for `n = 2`, Legendre for `n = 3`, Gegenbauer `C_l^{(n-2)/2}`
/// otherwise. `one_minus_t` is `1 - t`, used where it is more accurate.
pub fn zonal_harmonic(n: usize, l: usize, t: f64, one_minus_t: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    if n == 2 {
        let theta = 2.0 * libm::asin(libm::sqrt((one_minus_t / 2.0).clamp(0.0, 1.0)));
        return libm::cos(l as f64 * theta);
    }
    let lam = (n as f64 - 2.0) / 2.0;
    let (mut c0, mut c1) = (1.0, 2.0 * lam * t);
    let (mut n0, mut n1) = (1.0, 2.0 * lam);
    for k in 1..l {
        let k = k as f64;
        let c2 = (2.0 * (k + lam) * t * c1 - (k + 2.0 * lam - 1.0) * c0) / (k + 1.0);
        let n2 = (2.0 * (k + lam) * n1 - (k + 2.0 * lam - 1.0) * n0) / (k + 1.0);
        c0 = c1;
        c1 = c2;
        n0 = n1;
        n1 = n2;
    }
    c1 / n1
}

/// Tanh-sinh nodes per half-line in each panel of [`zonal_profile`].
pub const ZONAL_NODES: usize = 24;

/// Radial profile `h_l(r)` with `P̃_a[G_l(⟨·, v⟩)](r ω) = h_l(r) G_l(⟨ω, v⟩)`
/// (Funk–Hecke). Every degree-`l` spherical harmonic extends the same way.
///
/// `h_l(r) = d 2^{a-1} |S^{n-2}| ∫_0^2 (1-r²)^{1-a} ((1-r)² + 2rs)^{-(n-a)/2}
/// G_l(1-s) (s(2-s))^{(n-3)/2} ds` with `s = 1 - t`. The kernel peak has
/// width `σ = (1-r)²/(2r)`, so `(0, 2)` is split into panels
/// `(0, σ), (σ, 4σ), …` up to `1`, then `(1, 2)`; each panel gets a
/// tanh-sinh rule. The integrand is formed in log space so radii with
/// `1 - r` down to `1e-23` stay finite. `one_minus_r` is `1 - r`.
pub fn zonal_profile(params: &KernelParams, l: usize, r: f64, one_minus_r: f64) -> f64 {
    let n = params.n;
    let a = params.a;
    let alpha = (n as f64 - 3.0) / 2.0;
    let q0 = one_minus_r * one_minus_r;
    let ln_pref = (1.0 - a) * log(one_minus_r * (1.0 + r));
    let half = -(n as f64 - a) / 2.0;
    let c = params.d * pow(2.0, a - 1.0) * sphere_area(n - 1);
    let integrand = |s: f64, two_minus_s: f64| {
        if s <= 0.0 || two_minus_s <= 0.0 {
            return 0.0;
        }
        let e = ln_pref + half * log(q0 + 2.0 * r * s) + alpha * (log(s) + log(two_minus_s));
        libm::exp(e) * zonal_harmonic(n, l, 1.0 - s, s)
    };
    let units = tanh_sinh_unit(ZONAL_NODES);
    let panel = |lo: f64, hi: f64, to_two: bool| -> f64 {
        let len = hi - lo;
        units
            .iter()
            .map(|nd| {
                let s = lo + len * nd.x;
                let rest = if to_two { len * nd.x_comp } else { 2.0 - s };
                nd.w * len * integrand(s, rest)
            })
            .sum()
    };
    let sigma = if r > 0.0 { q0 / (2.0 * r) } else { 1.0 };
    let mut acc = 0.0;
    let mut lo = 0.0;
    let mut hi = sigma;
    while hi < 1.0 {
        acc += panel(lo, hi, false);
        lo = hi;
        hi *= 4.0;
    }
    acc += panel(lo, 2.0, true);
    c * acc
}

/// Radius beyond which ball-kernel quadratures escalate once.
pub const NEAR_BOUNDARY: f64 = 0.95;

/// `∫_{S^{n-1}} k(|η-ξ|², ξ) dξ` with rules aligned to `η`, compared at
/// resolutions `(m_polar, m_sub)` and `(2 m_polar, 2 m_sub)` for the polar
/// and remaining angles. Past [`NEAR_BOUNDARY`] the comparison is retried
/// once at the doubled polar resolution before giving up.
pub fn sphere_kernel_integral<K: Fn(f64, &[f64]) -> f64>(
    n: usize,
    eta: &[f64],
    m_polar: usize,
    m_sub: usize,
    target: f64,
    kernel: K,
) -> Result<Estimate> {
    let r = norm(eta);
    if !(r < 1.0) {
        return Err(Error::OutOfDomain(alloc::format!("|η| = {r} is not < 1")));
    }
    let axis = axis_of(eta, r);
    let run = |mp: usize, ms: usize| {
        let rule = Rule::sphere_aligned(n, mp, ms, &axis);
        rule.sum(|xi| kernel(dist_sq(eta, xi), xi))
    };
    let tries = if r > NEAR_BOUNDARY { 2 } else { 1 };
    let mut mp = m_polar;
    let mut last = Err(Error::Unsupported("no attempt".into()));
    for _ in 0..tries {
        let c = run(mp, m_sub);
        let f = run(2 * mp, 2 * m_sub);
        let err = fabs(f - c);
        if err <= target * fabs(f) + 1e-14 {
            return Ok(Estimate::new(f, err));
        }
        last = Err(Error::NonConvergent {
            value: f,
            error: err,
            target,
        });
        mp *= 2;
    }
    last
}

/// Second-order finite-difference value of `div(x_n^a ∇u)` at `p`, in
/// conservative form. Requires `x_n > 2h`.
pub fn cs_residual<U: Fn(&[f64]) -> f64>(u: U, a: f64, p: &[f64], h: f64) -> Result<f64> {
    let n = p.len();
    let xn = p[n - 1];
    if !(xn > 2.0 * h) {
        return Err(invalid!("need x_n > 2h, got x_n = {xn}, h = {h}"));
    }
    let mut q = p.to_vec();
    let u0 = u(p);
    let mut tangential = 0.0;
    for i in 0..n - 1 {
        q[i] = p[i] + h;
        let up = u(&q);
        q[i] = p[i] - h;
        let um = u(&q);
        q[i] = p[i];
        tangential += up - 2.0 * u0 + um;
    }
    q[n - 1] = xn + h;
    let up = u(&q);
    q[n - 1] = xn - h;
    let um = u(&q);
    let normal = pow(xn + h / 2.0, a) * (up - u0) - pow(xn - h / 2.0, a) * (u0 - um);
    Ok((pow(xn, a) * tangential + normal) / (h * h))
}

/// Standard `(2n+1)`-point Laplacian applied `k` times at `p`.
pub fn iterated_laplacian<U: Fn(&[f64]) -> f64>(u: &U, k: usize, p: &[f64], h: f64) -> f64 {
    if k == 0 {
        return u(p);
    }
    let n = p.len();
    let mut q = p.to_vec();
    let mut s = -2.0 * n as f64 * iterated_laplacian(u, k - 1, p, h);
    for i in 0..n {
        q[i] = p[i] + h;
        s += iterated_laplacian(u, k - 1, &q, h);
        q[i] = p[i] - h;
        s += iterated_laplacian(u, k - 1, &q, h);
        q[i] = p[i];
    }
    s / (h * h)
}

/// `Δ^k u(p)` by finite differences for a ball function; the stencil must
/// stay inside the ball (`|p| + k h < 1`).
pub fn polyharmonic_residual<U: Fn(&[f64]) -> f64>(u: U, k: usize, p: &[f64], h: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid!("order k must be positive"));
    }
    if !(norm(p) + 2.0 * k as f64 * h < 1.0) {
        return Err(invalid!("stencil of radius {} leaves the ball", k as f64 * h));
    }
    Ok(iterated_laplacian(&u, k, p, h))
}

/// Constants of the `n = 4` biharmonic representation
/// `u(η) = C∫(1-|η|²)³/|η-ξ|⁶ u dξ + D∫(1-|η|²)²/|η-ξ|⁴ (-∂u/∂γ) dξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiharmonicKernelConstants {
    pub c: f64,
    pub d: f64,
}

impl BiharmonicKernelConstants {
    /// Closed forms `C = 1/|S³| = 1/(2π²)`, `D = 1/(4π²)`.
    pub fn exact() -> Self {
        BiharmonicKernelConstants {
            c: 1.0 / (2.0 * PI * PI),
            d: 1.0 / (4.0 * PI * PI),
        }
    }
}

/// Calibration points `0, 0.3 e_1, 0.7 e_1`.
pub const CALIBRATION_RADII: [f64; 3] = [0.0, 0.3, 0.7];

fn dirichlet_mass(eta: &[f64], m: usize) -> Result<f64> {
    let k = pow(1.0 - norm_sq(eta), 3.0);
    Ok(k * sphere_kernel_integral(4, eta, m, 2, 1e-12, |d2, _| 1.0 / (d2 * d2 * d2))?.value)
}

fn neumann_mass(eta: &[f64], m: usize) -> Result<f64> {
    let k = pow(1.0 - norm_sq(eta), 2.0);
    Ok(k * sphere_kernel_integral(4, eta, m, 2, 1e-12, |d2, _| 1.0 / (d2 * d2))?.value)
}

/// `C` from `C∫ (1-|η|²)³/|η-ξ|⁶ = 1` and `D` from reproducing
/// `g = 1 - |η|²` (boundary value 0, inward derivative 2), at each of the
/// [`CALIBRATION_RADII`]. Spreads above `1e-8` (C) or `1e-6` (D) are errors.
pub fn calibrate_biharmonic_constants() -> Result<BiharmonicKernelConstants> {
    let mut cs = Vec::new();
    let mut ds = Vec::new();
    for &r in &CALIBRATION_RADII {
        let eta = [r, 0.0, 0.0, 0.0];
        cs.push(1.0 / dirichlet_mass(&eta, 64)?);
        ds.push((1.0 - r * r) / (2.0 * neumann_mass(&eta, 64)?));
    }
    let spread = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / fabs(hi)
    };
    let (sc, sd) = (spread(&cs), spread(&ds));
    if sc > 1e-8 {
        return Err(Error::InconsistentCalibration {
            spread: sc,
            tolerance: 1e-8,
        });
    }
    if sd > 1e-6 {
        return Err(Error::InconsistentCalibration {
            spread: sd,
            tolerance: 1e-6,
        });
    }
    Ok(BiharmonicKernelConstants {
        c: cs.iter().sum::<f64>() / cs.len() as f64,
        d: ds.iter().sum::<f64>() / ds.len() as f64,
    })
}

/// The representation formula at interior `η ∈ B_4`. `neumann` is the
/// inward derivative `-∂g/∂γ` on the sphere.
pub fn biharmonic_represent(
    g: &FieldFunction,
    neumann: &FieldFunction,
    consts: &BiharmonicKernelConstants,
    eta: &[f64],
    m: usize,
) -> Result<Estimate> {
    for f in [g, neumann] {
        if f.domain() != Domain::Sphere || f.n() != 4 {
            return Err(invalid!("biharmonic data must live on S³"));
        }
    }
    let q = 1.0 - norm_sq(eta);
    let (k3, k2) = (consts.c * q * q * q, consts.d * q * q);
    sphere_kernel_integral(4, eta, RADIAL_PER_M * m, m, 1e-8, |d2, xi| {
        k3 / (d2 * d2 * d2) * g.eval(xi) + k2 / (d2 * d2) * neumann.eval(xi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_area;
    use libm::exp;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        fabs(a - b) / fabs(b)
    }

    fn bump(n: usize) -> FieldFunction {
        FieldFunction::new(Domain::Plane, n, |y| exp(-norm_sq(y)) * (1.0 + 0.5 * y[0])).with_decay(8.0)
    }

    #[test]
    fn classical_normalizations() {
        assert!(rel(normalization(2, 0.0).unwrap(), 1.0 / PI) < 1e-14);
        assert!(rel(normalization(3, 0.0).unwrap(), 0.5 / PI) < 1e-14);
        assert!(rel(normalization(4, -2.0).unwrap(), 4.0 / (PI * PI)) < 1e-14);
        assert!(rel(normalization(4, 0.0).unwrap(), 1.0 / (PI * PI)) < 1e-14);
        assert!(normalization(3, 1.0).is_err());
        assert!(KernelParams::new(3, -1.5).is_err());
        assert!(KernelParams::new(3, 1.2).is_err());
        assert_eq!(KernelParams::new(3, -1.0).unwrap().eps(), 0.0);
    }

    #[test]
    fn gamma_form_matches_radial_oracle() {
        for n in 2..7 {
            for &a in &[2.0 - n as f64, -0.5, 0.0, 0.5, 0.9] {
                if a < 2.0 - n as f64 {
                    continue;
                }
                let g = normalization(n, a).unwrap();
                let r = normalization_radial(n, a, 80).unwrap();
                assert!(rel(g, r) < 1e-10, "n={n} a={a}: {g} vs {r}");
            }
        }
    }

    #[test]
    fn kernel_rule_has_unit_mass() {
        for (n, a) in [(2, 0.0), (3, 0.0), (3, 0.5), (4, -2.0), (5, -1.0), (3, 0.9)] {
            let p = KernelParams::new(n, a).unwrap();
            let m = KernelRule::new(&p, 8).mass();
            assert!(fabs(m - 1.0) < 1e-8, "n={n} a={a}: {m}");
        }
    }

    #[test]
    fn extension_of_one_is_one() {
        let p = KernelParams::new(4, -2.0).unwrap();
        let one = FieldFunction::constant(Domain::Plane, 4, 1.0);
        let u = extend_halfspace(&one, &p, 6).unwrap();
        for x in [[0.0, 0.0, 0.0, 1e-6], [3.0, -1.0, 2.0, 50.0], [0.1, 0.2, 0.3, 0.4]] {
            let e = u.estimate(&x).unwrap();
            assert!(fabs(e.value - 1.0) < 1e-8);
        }
        assert!(u.estimate(&[0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn agrees_with_raw_kernel_form() {
        for (n, a) in [(2, 0.0), (3, 0.5), (3, -0.5)] {
            let p = KernelParams::new(n, a).unwrap();
            let f = bump(n);
            let u = extend_halfspace(&f, &p, 12).unwrap();
            let mut x = vec![0.2; n];
            x[n - 1] = 0.7;
            let via = u.estimate(&x).unwrap().value;
            let raw = extend_halfspace_raw(&f, &p, &x, 48, 1.0).unwrap();
            assert!(rel(raw, via) < 1e-7, "n={n} a={a}: {via} vs {raw}");
        }
    }

    #[test]
    fn pointwise_l1_bound() {
        let p = KernelParams::new(3, 0.0).unwrap();
        // ‖f‖₁ = 1
        let f = FieldFunction::new(Domain::Plane, 3, |y| exp(-norm_sq(y)) / PI).with_decay(8.0);
        let u = extend_halfspace(&f, &p, 8).unwrap();
        for xn in [0.05, 0.3, 1.0, 4.0] {
            for x0 in [0.0, 0.5, 3.0] {
                let v = u.eval(&[x0, -x0, xn]);
                assert!(v > 0.0 && v <= p.d() * pow(xn, -2.0) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn scaling_commutes_with_extension() {
        let p = KernelParams::new(3, 0.5).unwrap();
        let f = bump(3);
        let lp = p.p_boundary().unwrap();
        let lambda = 1.7;
        let fl = scale_function(&f, lambda, lp).unwrap();
        let u = extend_halfspace(&f, &p, 8).unwrap();
        let ul = extend_halfspace(&fl, &p, 8).unwrap();
        let c = pow(lambda, -2.0 / lp);
        for x in [[0.3, -0.2, 0.5], [1.0, 2.0, 3.0]] {
            let lhs = ul.eval(&x);
            let rhs = c * u.eval(&[x[0] / lambda, x[1] / lambda, x[2] / lambda]);
            assert!(rel(lhs, rhs) < 1e-6);
        }
        let id = scale_function(&f, 1.0, lp).unwrap();
        assert_eq!(id.eval(&[0.3, 0.4]), f.eval(&[0.3, 0.4]));
        assert!(scale_function(&f, 0.0, lp).is_err());
    }

    #[test]
    fn ball_extension_of_one_at_the_endpoint() {
        for n in [3, 4] {
            let p = KernelParams::new(n, 2.0 - n as f64).unwrap();
            let one = FieldFunction::constant(Domain::Sphere, n, 1.0);
            let u = extend_ball(&one, &p, 8).unwrap();
            let mut e = vec![0.0; n];
            for r in [0.0, 0.5, 0.95] {
                e[0] = r;
                assert!(fabs(u.estimate(&e).unwrap().value - 1.0) < 1e-8);
            }
        }
        let p = KernelParams::new(3, 0.0).unwrap();
        let one = FieldFunction::constant(Domain::Sphere, 3, 1.0);
        let u = extend_ball(&one, &p, 8).unwrap();
        assert!(fabs(u.eval(&[0.0, 0.0, 0.0]) - 1.0) < 1e-9);
    }

    fn smooth_sphere(n: usize) -> FieldFunction {
        FieldFunction::new(Domain::Sphere, n, |e| exp(0.5 * e[0]) + e[e.len() - 1] * e[1])
    }

    #[test]
    fn ball_extension_matches_classical_poisson() {
        for n in [2, 3] {
            let p = KernelParams::new(n, 0.0).unwrap();
            let f = smooth_sphere(n);
            let u = extend_ball(&f, &p, 8).unwrap();
            let rule = Rule::sphere(n, 40);
            for eta in [[0.3, -0.4, 0.1], [0.0, 0.6, -0.2], [-0.5, -0.5, 0.0]] {
                let eta = &eta[..n];
                let q = 1.0 - norm_sq(eta);
                let classical = rule.sum(|xi| q / pow(dist_sq(eta, xi), n as f64 / 2.0) * f.eval(xi)) / sphere_area(n);
                assert!(fabs(u.eval(eta) - classical) < 1e-5, "n={n}");
            }
        }
    }

    #[test]
    fn ball_extension_matches_direct_kernel() {
        for (n, a) in [(3, 0.5), (4, -2.0), (4, -1.0), (3, -0.5)] {
            let p = KernelParams::new(n, a).unwrap();
            let f = smooth_sphere(n);
            let u = extend_ball(&f, &p, 16).unwrap();
            for r in [0.2, 0.7, 0.9] {
                let mut eta = vec![0.0; n];
                eta[0] = r * 0.6;
                eta[n - 1] = -r * 0.8;
                let direct = u.estimate(&eta).unwrap();
                let via = extend_ball_via_halfspace(&f, &p, &eta, 24).unwrap();
                assert!(fabs(direct.value - via.value) < 1e-7, "n={n} a={a} r={r}: {direct:?} {via:?}");
            }
        }
    }

    #[test]
    fn cs_residual_of_constant_is_zero() {
        let r = cs_residual(|_| 1.0, 0.5, &[0.1, 0.2, 1.0], 0.1).unwrap();
        assert_eq!(r, 0.0);
        assert!(cs_residual(|_| 1.0, 0.5, &[0.1, 0.2, 0.1], 0.1).is_err());
    }

    #[test]
    fn cs_residual_is_second_order() {
        for a in [-0.5, 0.0, 0.5] {
            let p = KernelParams::new(3, a).unwrap();
            let u = extend_halfspace(&bump(3), &p, 12).unwrap();
            let x = [0.3, -0.1, 0.8];
            let r1 = cs_residual(|q| u.eval(q), a, &x, 0.1).unwrap();
            let r2 = cs_residual(|q| u.eval(q), a, &x, 0.05).unwrap();
            let order = libm::log2(fabs(r1 / r2));
            assert!(order > 1.8, "a={a}: {r1} {r2}");
        }
    }

    #[test]
    fn quadratic_is_biharmonic() {
        let r = polyharmonic_residual(norm_sq, 2, &[0.1, 0.2, 0.0, -0.1], 0.05).unwrap();
        assert!(fabs(r) < 1e-6);
        assert!(polyharmonic_residual(norm_sq, 2, &[0.9, 0.0, 0.0, 0.0], 0.05).is_err());
    }

    #[test]
    fn ball_extensions_are_polyharmonic() {
        for (n, k) in [(2usize, 1usize), (4, 2)] {
            let p = KernelParams::new(n, 2.0 - 2.0 * k as f64).unwrap();
            let u = extend_ball(&smooth_sphere(n), &p, 12).unwrap();
            let mut e = vec![0.0; n];
            e[0] = 0.2;
            e[n - 1] = -0.1;
            let r1 = polyharmonic_residual(|q| u.eval(q), k, &e, 0.1).unwrap();
            let r2 = polyharmonic_residual(|q| u.eval(q), k, &e, 0.05).unwrap();
            let order = libm::log2(fabs(r1 / r2));
            assert!(order > 1.8, "n={n}: {r1} {r2}");
        }
    }

    #[test]
    fn p_minus_two_has_vanishing_normal_derivative() {
        let f = bump(4);
        let slope = |a: f64, h: f64| {
            let p = KernelParams::new(4, a).unwrap();
            let u = extend_halfspace(&f, &p, 8).unwrap();
            let x = [0.2, -0.1, 0.3];
            (u.eval(&[x[0], x[1], x[2], 2.0 * h]) - u.eval(&[x[0], x[1], x[2], h])) / h
        };
        let (s1, s2) = (slope(-2.0, 1e-2), slope(-2.0, 5e-3));
        assert!(fabs(s2) < 0.6 * fabs(s1) && fabs(s2) < 0.05, "{s1} {s2}");
        // the harmonic extension has a genuine normal derivative
        assert!(fabs(slope(0.0, 5e-3)) > 0.3);
    }

    #[test]
    fn biharmonic_calibration() {
        let c = calibrate_biharmonic_constants().unwrap();
        let exact = BiharmonicKernelConstants::exact();
        assert!(rel(c.c, exact.c) < 1e-10);
        assert!(rel(c.d, exact.d) < 1e-8);
    }

    #[test]
    fn biharmonic_representation_examples() {
        let consts = calibrate_biharmonic_constants().unwrap();
        let one = FieldFunction::constant(Domain::Sphere, 4, 1.0);
        let zero = FieldFunction::constant(Domain::Sphere, 4, 0.0);
        let two = FieldFunction::constant(Domain::Sphere, 4, 2.0);
        let lin = FieldFunction::new(Domain::Sphere, 4, |xi| 2.0 * xi[0]);
        for r in [0.0, 0.4, 0.9] {
            let eta = [r * 0.5, -r * 0.5, r * 0.5, r * 0.5];
            let q = 1.0 - r * r;
            let v1 = biharmonic_represent(&one, &zero, &consts, &eta, 24).unwrap().value;
            assert!(fabs(v1 - 1.0) < 1e-8);
            let v2 = biharmonic_represent(&zero, &two, &consts, &eta, 24).unwrap().value;
            assert!(fabs(v2 - q) < 1e-4);
            let v3 = biharmonic_represent(&zero, &lin, &consts, &eta, 24).unwrap().value;
            assert!(fabs(v3 - eta[0] * q) < 1e-4, "r={r}: {v3}");
        }
        let edge = [0.97, 0.0, 0.0, 0.0];
        assert!(biharmonic_represent(&one, &zero, &consts, &edge, 24).is_ok());
    }

    #[test]
    fn zonal_harmonics_are_normalized_and_orthogonal() {
        for n in 2..6 {
            let rule = Rule::sphere(n, 12);
            let e = {
                let mut v = vec![0.0; n];
                v[0] = 1.0;
                v
            };
            for l in 0..5 {
                assert!(fabs(zonal_harmonic(n, l, 1.0, 0.0) - 1.0) < 1e-14);
                let gl = |xi: &[f64]| zonal_harmonic(n, l, xi[0], 1.0 - xi[0]);
                let other = |xi: &[f64]| zonal_harmonic(n, l + 1, xi[0], 1.0 - xi[0]);
                let cross = rule.sum(|xi| gl(xi) * other(xi));
                assert!(fabs(cross) < 1e-12, "n={n} l={l}");
                // harmonic: the degree-l zonal function has zero mean for l ≥ 1
                if l > 0 {
                    assert!(fabs(rule.sum(gl)) < 1e-12);
                }
                let _ = &e;
            }
        }
    }

    #[test]
    fn zonal_profiles_match_direct_extension() {
        for (n, a) in [(2, 0.3), (3, 0.5), (4, -2.0), (3, -1.0), (5, -2.5)] {
            let p = KernelParams::new(n, a).unwrap();
            let mut v = vec![0.0; n];
            v[0] = 0.6;
            v[n - 1] = 0.8;
            for l in [0usize, 1, 3] {
                let vv = v.clone();
                let f = FieldFunction::new(Domain::Sphere, n, move |xi| {
                    let t: f64 = xi.iter().zip(&vv).map(|(a, b)| a * b).sum();
                    zonal_harmonic(n, l, t, 1.0 - t)
                });
                let u = extend_ball(&f, &p, 12).unwrap();
                for r in [0.0, 0.3, 0.8, 0.97] {
                    let mut w = vec![0.0; n];
                    w[0] = r * 0.8;
                    w[1] = -r * 0.6;
                    let t: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / r.max(1e-300);
                    let g = if r == 0.0 {
                        if l == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        zonal_harmonic(n, l, t, 1.0 - t)
                    };
                    let via = zonal_profile(&p, l, r, 1.0 - r) * g;
                    let direct = u.eval(&w);
                    assert!(fabs(via - direct) < 1e-9, "n={n} a={a} l={l} r={r}: {via} {direct}");
                }
            }
        }
    }

    #[test]
    fn zonal_profile_tends_to_the_trace() {
        for (n, a) in [(3, 0.5), (4, -2.0), (16, -13.0)] {
            let p = KernelParams::new(n, a).unwrap();
            for l in [0usize, 2] {
                let h = zonal_profile(&p, l, 1.0 - 1e-22, 1e-22);
                assert!(fabs(h - 1.0) < 1e-6, "n={n} l={l}: {h}");
            }
        }
        let p = KernelParams::new(4, -2.0).unwrap();
        assert!(fabs(zonal_profile(&p, 0, 0.0, 1.0) - 1.0) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn maximum_principle_and_positivity(
            c in prop::array::uniform4(-1.0f64..1.0),
            x in -3.0f64..3.0,
            xn in 0.01f64..5.0,
        ) {
            let p = KernelParams::new(2, 0.3).unwrap();
            let f = FieldFunction::new(Domain::Plane, 2, move |y| {
                c[0] + c[1] * libm::sin(3.0 * y[0]) + c[2] * libm::cos(y[0] * c[3])
            }).with_decay(0.0);
            let sup = fabs(c[0]) + fabs(c[1]) + fabs(c[2]);
            let abs_f = f.map(fabs);
            let u = extend_halfspace(&f, &p, 8).unwrap();
            let ua = extend_halfspace(&abs_f, &p, 8).unwrap();
            let v = u.eval(&[x, xn]);
            prop_assert!(fabs(v) <= sup * (1.0 + 1e-8));
            prop_assert!(fabs(v) <= ua.eval(&[x, xn]) * (1.0 + 1e-10) + 1e-14);
            prop_assert!(p.kernel(x * x, xn) > 0.0);
        }
    }
}
