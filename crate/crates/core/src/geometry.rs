//! The conformal map `φ` from the upper half-space onto the unit ball, its
//! inverse and Jacobians, the weighted pullbacks that make it an `L^p`
//! isometry, inversion conjugation on the boundary plane, and Möbius
//! automorphisms of the ball.
//!
//! All maps work in global coordinates. `φ(X, x_n) = w/|w|² - e_n` with
//! `w = (X, x_n + 1/2)`, so `φ(0, 1/2) = 0` and `φ(0, 0) = e_n`; the point
//! at infinity goes to the south pole `-e_n`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, pow, sqrt};

use crate::error::{invalid, Error, Result};
use crate::field::{Domain, FieldFunction};
use crate::kernels::KernelParams;
use crate::linalg::{self, dot, norm, norm_sq};

/// Boundary points must be within this distance of the unit sphere.
pub const BOUNDARY_SNAP: f64 = 1e-12;

/// A point `(X, x_n)` of the upper half-space.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspacePoint {
    coords: Vec<f64>,
}

impl HalfspacePoint {
    pub fn new(x: &[f64], xn: f64) -> Result<Self> {
        if !(xn > 0.0) || !xn.is_finite() {
            return Err(Error::OutOfDomain(alloc::format!("height x_n = {xn} must be positive")));
        }
        let mut coords = x.to_vec();
        coords.push(xn);
        Ok(HalfspacePoint { coords })
    }

    /// `(X, 0)` on the boundary plane; only valid as an argument of `φ`.
    pub fn on_boundary(x: &[f64]) -> Self {
        let mut coords = x.to_vec();
        coords.push(0.0);
        HalfspacePoint { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }

    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

/// A point of the closed unit ball; boundary points are tagged and kept
/// exactly on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    eta: Vec<f64>,
    on_boundary: bool,
}

impl BallPoint {
    pub fn interior(eta: &[f64]) -> Result<Self> {
        if !(norm_sq(eta) < 1.0) {
            return Err(Error::OutOfDomain(alloc::format!("|η| = {} is not < 1", norm(eta))));
        }
        Ok(BallPoint {
            eta: eta.to_vec(),
            on_boundary: false,
        })
    }

    /// Renormalizes onto the sphere when `||η| - 1| ≤ 1e-12`.
    pub fn boundary(eta: &[f64]) -> Result<Self> {
        let r = norm(eta);
        if fabs(r - 1.0) > BOUNDARY_SNAP {
            return Err(Error::OutOfDomain(alloc::format!("|ξ| = {r} is not on the unit sphere")));
        }
        Ok(BallPoint {
            eta: eta.iter().map(|c| c / r).collect(),
            on_boundary: true,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.eta
    }

    pub fn is_boundary(&self) -> bool {
        self.on_boundary
    }
}

/// `φ` and its companions in dimension `n ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConformalMap {
    n: usize,
}

impl ConformalMap {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid!("dimension n = {n} must be at least 2"));
        }
        Ok(ConformalMap { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `φ(p)` for `p = (X, x_n)` with `x_n ≥ 0`, written into `out`.
    #[inline]
    pub fn phi_into(&self, p: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut s: f64 = p[..n - 1].iter().map(|x| x * x).sum();
        let wn = p[n - 1] + 0.5;
        s += wn * wn;
        for i in 0..n - 1 {
            out[i] = p[i] / s;
        }
        out[n - 1] = wn / s - 1.0;
    }

    /// `φ(Y, 0)` for a boundary-plane point `Y ∈ R^{n-1}`.
    #[inline]
    pub fn phi_boundary_into(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let s = norm_sq(y) + 0.25;
        for i in 0..n - 1 {
            out[i] = y[i] / s;
        }
        out[n - 1] = 0.5 / s - 1.0;
    }

    pub fn phi(&self, p: &HalfspacePoint) -> BallPoint {
        let mut out = vec![0.0; self.n];
        self.phi_into(p.coords(), &mut out);
        if p.height() == 0.0 {
            BallPoint::boundary(&out).expect("φ maps the boundary plane to the sphere")
        } else {
            BallPoint {
                eta: out,
                on_boundary: false,
            }
        }
    }

    /// `φ^{-1}(q)` for interior `q`; also returns the conformal factor
    /// `|w| = |(X, x_n + 1/2)|` at the preimage.
    ///
    /// The height is computed as `(1 - |q|²) |w|² / 2`, which keeps full
    /// relative accuracy as `q` approaches the sphere.
    #[inline]
    pub fn phi_inverse_into(&self, q: &[f64], out: &mut [f64]) -> Result<f64> {
        let n = self.n;
        let q2 = norm_sq(q);
        if !(q2 < 1.0) {
            return Err(Error::OutOfDomain(alloc::format!("φ^{{-1}} needs |q| < 1, got {}", sqrt(q2))));
        }
        // v = q + e_n, w = v/|v|^2
        let vn = q[n - 1] + 1.0;
        let v2 = q2 - q[n - 1] * q[n - 1] + vn * vn;
        let w2 = 1.0 / v2;
        for i in 0..n - 1 {
            out[i] = q[i] * w2;
        }
        out[n - 1] = 0.5 * (1.0 - q2) * w2;
        Ok(sqrt(w2))
    }

    pub fn phi_inverse(&self, q: &BallPoint) -> Result<HalfspacePoint> {
        let mut out = vec![0.0; self.n];
        self.phi_inverse_into(q.coords(), &mut out)?;
        Ok(HalfspacePoint { coords: out })
    }

    /// Boundary-plane preimage of a sphere point other than the south pole.
    pub fn phi_inverse_boundary_into(&self, xi: &[f64], out: &mut [f64]) -> Result<f64> {
        let n = self.n;
        let v2 = 2.0 * (1.0 + xi[n - 1]);
        if !(v2 > 0.0) {
            return Err(Error::OutOfDomain("the south pole has no finite preimage".into()));
        }
        let w2 = 1.0 / v2;
        for i in 0..n - 1 {
            out[i] = xi[i] * w2;
        }
        Ok(sqrt(w2))
    }

    /// `J(φ) = |(X, x_n + 1/2)|^{-2n}`.
    pub fn jacobian(&self, p: &[f64]) -> f64 {
        pow(conformal_w_sq(p), -(self.n as f64))
    }

    /// `J(φ|_∂) = |(Y, 1/2)|^{-2(n-1)}`.
    pub fn jacobian_boundary(&self, y: &[f64]) -> f64 {
        pow(norm_sq(y) + 0.25, -(self.n as f64 - 1.0))
    }
}

/// `|(X, x_n + 1/2)|²`.
#[inline]
pub fn conformal_w_sq(p: &[f64]) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for c in &p[..n - 1] {
        s += c * c;
    }
    let wn = p[n - 1] + 0.5;
    s + wn * wn
}

fn check_pullback_source(f: &FieldFunction, params: &KernelParams) -> Result<()> {
    if f.n() != params.n() {
        return Err(invalid!("function dimension {} differs from n = {}", f.n(), params.n()));
    }
    Ok(())
}

/// Weighted pullback `f = |w|^{2-n-a} f̃ ∘ φ` from the ball to the
/// half-space, or from the sphere to the boundary plane. With
/// `ε = n - 2 + a > 0` it is an isometry `L^{2n/ε}(B_n) → L^{2n/ε}(R^n_+)`
/// (resp. `L^{2(n-1)/ε}`).
pub fn pullback_to_halfspace(ftilde: &FieldFunction, params: &KernelParams) -> Result<FieldFunction> {
    check_pullback_source(ftilde, params)?;
    let n = params.n();
    let eps = params.eps();
    let map = ConformalMap::new(n)?;
    let src = ftilde.clone();
    match ftilde.domain() {
        Domain::Ball => Ok(FieldFunction::new(Domain::HalfSpace, n, move |p| {
            let mut q = [0.0; 16];
            map.phi_into(p, &mut q[..n]);
            pow(conformal_w_sq(p), -eps / 2.0) * src.eval(&q[..n])
        })
        .with_decay(eps)),
        Domain::Sphere => Ok(FieldFunction::new(Domain::Plane, n, move |y| {
            let mut q = [0.0; 16];
            map.phi_boundary_into(y, &mut q[..n]);
            pow(norm_sq(y) + 0.25, -eps / 2.0) * src.eval(&q[..n])
        })
        .with_decay(eps)),
        d => Err(invalid!("pullback expects a ball or sphere function, got {}", d.name())),
    }
}

/// Inverse of [`pullback_to_halfspace`]: `f̃(η) = |η + e_n|^{-ε} f(φ^{-1}(η))`.
///
/// The south pole of the sphere has no preimage; the pushed-forward sphere
/// function is undefined (NaN) there.
pub fn pushforward_to_ball(f: &FieldFunction, params: &KernelParams) -> Result<FieldFunction> {
    check_pullback_source(f, params)?;
    let n = params.n();
    let eps = params.eps();
    let map = ConformalMap::new(n)?;
    let src = f.clone();
    match f.domain() {
        Domain::HalfSpace => Ok(FieldFunction::new(Domain::Ball, n, move |q| {
            let mut p = [0.0; 16];
            match map.phi_inverse_into(q, &mut p[..n]) {
                Ok(w) => pow(w, eps) * src.eval(&p[..n]),
                Err(_) => f64::NAN,
            }
        })),
        Domain::Plane => Ok(FieldFunction::new(Domain::Sphere, n, move |xi| {
            let mut y = [0.0; 16];
            match map.phi_inverse_boundary_into(xi, &mut y[..n - 1]) {
                Ok(w) => pow(w, eps) * src.eval(&y[..n - 1]),
                Err(_) => f64::NAN,
            }
        })),
        d => Err(invalid!("pushforward expects a half-space or plane function, got {}", d.name())),
    }
}

/// Inversion conjugation on the boundary plane,
/// `f̃(Y) = |Y|^{-ε} f(Y/|Y|²)`. It is an involution and preserves the
/// `L^{2(n-1)/ε}` norm. The value at the origin is left undefined (NaN).
pub fn invert_conjugate(f: &FieldFunction, params: &KernelParams) -> Result<FieldFunction> {
    if f.domain() != Domain::Plane {
        return Err(invalid!("inversion conjugation acts on plane functions"));
    }
    check_pullback_source(f, params)?;
    let d = params.n() - 1;
    let eps = params.eps();
    let src = f.clone();
    Ok(FieldFunction::new(Domain::Plane, params.n(), move |y| {
        let r2 = norm_sq(y);
        if r2 == 0.0 {
            return f64::NAN;
        }
        let mut z = [0.0; 16];
        for i in 0..d {
            z[i] = y[i] / r2;
        }
        pow(r2, -eps / 2.0) * src.eval(&z[..d])
    })
    .with_decay(eps))
}

/// A ball automorphism `x ↦ T_b(R x)`: an orthogonal map `R` followed by the
/// hyperbolic translation `T_b` that sends `0` to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusTransform {
    n: usize,
    rotation: Vec<f64>,
    b: Vec<f64>,
}

impl MobiusTransform {
    pub fn identity(n: usize) -> Self {
        let mut rotation = vec![0.0; n * n];
        for i in 0..n {
            rotation[i * n + i] = 1.0;
        }
        MobiusTransform {
            n,
            rotation,
            b: vec![0.0; n],
        }
    }

    /// `rotation` is row-major `n × n` and must be orthogonal to 1e-10.
    pub fn new(rotation: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if rotation.len() != n * n {
            return Err(invalid!("rotation must be {n}×{n}"));
        }
        if !(norm_sq(&b) < 1.0) {
            return Err(invalid!("translation point must satisfy |b| < 1"));
        }
        for i in 0..n {
            for j in 0..n {
                let g = dot(&rotation[i * n..(i + 1) * n], &rotation[j * n..(j + 1) * n]);
                let target = if i == j { 1.0 } else { 0.0 };
                if fabs(g - target) > 1e-10 {
                    return Err(invalid!("rotation matrix is not orthogonal"));
                }
            }
        }
        Ok(MobiusTransform { n, rotation, b })
    }

    pub fn translation(b: &[f64]) -> Result<Self> {
        MobiusTransform::new(MobiusTransform::identity(b.len()).rotation, b.to_vec())
    }

    /// Rotation by `angle` in the `(i, j)` coordinate plane.
    pub fn givens(n: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut t = MobiusTransform::identity(n);
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        t.rotation[i * n + i] = c;
        t.rotation[j * n + j] = c;
        t.rotation[i * n + j] = -s;
        t.rotation[j * n + i] = s;
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> &[f64] {
        &self.b
    }

    fn denominator(&self, y: &[f64]) -> f64 {
        let bb = norm_sq(&self.b);
        1.0 + 2.0 * dot(y, &self.b) + bb * norm_sq(y)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut y = [0.0; 16];
        linalg::mat_vec(&self.rotation, x, &mut y[..n]);
        let y = &y[..n];
        let bb = norm_sq(&self.b);
        let yb = dot(y, &self.b);
        let yy = norm_sq(y);
        let den = 1.0 + 2.0 * yb + bb * yy;
        let cb = 1.0 + 2.0 * yb + yy;
        for i in 0..n {
            out[i] = (cb * self.b[i] + (1.0 - bb) * y[i]) / den;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(x, &mut out);
        out
    }

    /// Linear stretch factor `|τ̃'(x)| = (1 - |b|²)/(1 + 2⟨Rx, b⟩ + |b|²|x|²)`.
    pub fn stretch(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut y = [0.0; 16];
        linalg::mat_vec(&self.rotation, x, &mut y[..n]);
        (1.0 - norm_sq(&self.b)) / self.denominator(&y[..n])
    }

    /// Interior Jacobian `J̃ = |τ̃'|^n`.
    pub fn jacobian(&self, x: &[f64]) -> f64 {
        pow(self.stretch(x), self.n as f64)
    }

    /// Jacobian `J = |τ'|^{n-1}` of the restriction to the sphere.
    pub fn jacobian_boundary(&self, xi: &[f64]) -> f64 {
        pow(self.stretch(xi), self.n as f64 - 1.0)
    }

    /// `self ∘ other`, again of the form `T_b ∘ R`.
    pub fn compose(&self, other: &MobiusTransform) -> MobiusTransform {
        let n = self.n;
        let chain = |x: &[f64]| self.apply(&other.apply(x));
        let b = chain(&vec![0.0; n]);
        let back = MobiusTransform {
            n,
            rotation: MobiusTransform::identity(n).rotation,
            b: b.iter().map(|c| -c).collect(),
        };
        // T_{-b} ∘ self ∘ other fixes 0, hence is the orthogonal part.
        let mut rotation = vec![0.0; n * n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 0.5;
            let col = back.apply(&chain(&e));
            for i in 0..n {
                rotation[i * n + j] = 2.0 * col[i];
            }
        }
        MobiusTransform { n, rotation, b }
    }

    pub fn inverse(&self) -> MobiusTransform {
        let n = self.n;
        // (T_b R)^{-1} = R^T T_{-b} = T_{-R^T b} R^T
        let mut rt = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                rt[i * n + j] = self.rotation[j * n + i];
            }
        }
        let mut nb = vec![0.0; n];
        let minus_b: Vec<f64> = self.b.iter().map(|c| -c).collect();
        linalg::mat_vec(&rt, &minus_b, &mut nb);
        MobiusTransform { n, rotation: rt, b: nb }
    }
}

/// `|det Dg(x)|` by central differences with step `h`.
pub fn fd_jacobian<G: Fn(&[f64], &mut [f64])>(g: G, x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let mut m = vec![0.0; n * n];
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        xp[j] = x[j] + h;
        g(&xp, &mut fp);
        xp[j] = x[j] - h;
        g(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..n {
            m[i * n + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    fabs(linalg::determinant(m, n))
}

/// Jacobian of `g` restricted to the unit sphere at `xi`, by central
/// differences along an orthonormal tangent frame (Gram determinant).
pub fn fd_jacobian_sphere<G: Fn(&[f64], &mut [f64])>(g: G, xi: &[f64], h: f64) -> f64 {
    let n = xi.len();
    // Tangent frame: Householder reflection sending e_1 to xi; its other
    // columns span the tangent space.
    let refl = linalg::reflection_to_axis(xi);
    let k = n - 1;
    let mut cols = vec![0.0; k * n];
    let mut xp = vec![0.0; n];
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for t in 0..k {
        let dir: Vec<f64> = (0..n).map(|i| refl[i * n + t + 1]).collect();
        for i in 0..n {
            xp[i] = xi[i] + h * dir[i];
        }
        g(&xp, &mut fp);
        for i in 0..n {
            xp[i] = xi[i] - h * dir[i];
        }
        g(&xp, &mut fm);
        for i in 0..n {
            cols[t * n + i] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = dot(&cols[a * n..(a + 1) * n], &cols[b * n..(b + 1) * n]);
        }
    }
    sqrt(fabs(linalg::determinant(gram, k)))
}
