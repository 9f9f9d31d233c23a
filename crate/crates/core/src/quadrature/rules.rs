//! Fixed quadrature rules. Every rule is a flat list of nodes with positive
//! weights; `m` is the resolution parameter and doubling it refines every
//! one-dimensional factor.
//!
//! Unbounded directions are compactified with `r = s·tan θ` and integrated
//! in `θ` with a tanh-sinh rule, which tolerates the algebraic endpoint
//! behaviour of every kernel used in this crate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use libm::{cos, cosh, exp, expm1, fabs, log, log1p, pow, sin, sinh, sqrt};

use crate::field::Domain;
use crate::linalg;
use crate::special::beta;

/// Truncation of the tanh-sinh abscissa; `1 - x` at the last node is ~1e-23.
const TANH_SINH_T_MAX: f64 = 3.5;

/// Tanh-sinh nodes per half-line for each unit of `m` in composite rules;
/// keeps the step at or below `0.11` for `m ≥ 8`.
pub const RADIAL_PER_M: usize = 4;

/// A node of a rule on `(0, 1)`: position, distance to the right endpoint,
/// and weight. Carrying `1 - x` separately keeps endpoint singularities
/// evaluable without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct UnitNode {
    pub x: f64,
    pub x_comp: f64,
    pub w: f64,
}

/// Tanh-sinh rule on `(0, 1)` with `2m + 1` nodes.
pub fn tanh_sinh_unit(m: usize) -> Vec<UnitNode> {
    tanh_sinh_unit_range(m, TANH_SINH_T_MAX)
}

/// Tanh-sinh rule truncated at `|t| ≤ t_max`. `t_max = 6` reaches endpoint
/// distances of about `1e-270`, for integrands peaked at scales far below
/// the default range.
pub fn tanh_sinh_unit_range(m: usize, t_max: f64) -> Vec<UnitNode> {
    let m = m.max(1);
    let h = t_max / m as f64;
    (-(m as i64)..=m as i64)
        .map(|k| {
            let t = k as f64 * h;
            let s = PI * sinh(t);
            // logistic form: x = 1/(1+e^{-s}), 1-x = 1/(1+e^{s})
            let x = 1.0 / (1.0 + exp(-s));
            let x_comp = 1.0 / (1.0 + exp(s));
            let w = h * PI * cosh(t) * x * x_comp;
            UnitNode { x, x_comp, w }
        })
        .collect()
}

/// Integrates `f(x, 1-x)` over `(a, b)` with the tanh-sinh rule. The second
/// argument is the distance to `b`.
pub fn tanh_sinh<F: FnMut(f64, f64) -> f64>(mut f: F, a: f64, b: f64, m: usize) -> f64 {
    let len = b - a;
    tanh_sinh_unit(m)
        .iter()
        .map(|nd| nd.w * len * f(a + len * nd.x, len * nd.x_comp))
        .sum()
}

/// Gauss–Jacobi rule on `[-1, 1]` for the symmetric weight `(1 - t²)^α`,
/// `α > -1`, via Golub–Welsch.
pub fn gauss_jacobi_symmetric(m: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; m];
    let off: Vec<f64> = (1..m)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + 2.0 * alpha;
            if fabs(s - 1.0) < 1e-14 {
                // Chebyshev limit at k = 1, α = -1/2
                return sqrt(0.5);
            }
            sqrt(k * (k + 2.0 * alpha) / ((s + 1.0) * (s - 1.0)))
        })
        .collect();
    let (nodes, z) = linalg::tridiagonal_eigen(&diag, &off);
    let mu0 = beta(0.5, alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = nodes.into_iter().zip(z).map(|(t, v)| (t, mu0 * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_symmetric(m, 0.0)
}

/// A quadrature rule: nodes (flattened, `dim` coordinates each) and weights.
#[derive(Debug, Clone)]
pub struct Rule {
    domain: Domain,
    n: usize,
    m: usize,
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn from_parts(domain: Domain, n: usize, m: usize, dim: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(nodes.len(), dim * weights.len());
        Rule {
            domain,
            n,
            m,
            dim,
            nodes,
            weights,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim.max(1)).zip(self.weights.iter().copied())
    }

    pub fn sum<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Multiplies every weight by `c`, e.g. to fold in a normalization.
    pub fn scale_weights(&mut self, c: f64) {
        self.weights.iter_mut().for_each(|w| *w *= c);
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Characteristic node spacing of the underlying one-dimensional rules.
    pub fn spacing(&self) -> f64 {
        PI / (2.0 * self.m.max(1) as f64)
    }

    /// Counting rule on `S^0 = {-1, 1}`.
    fn sphere0() -> Self {
        Rule::from_parts(Domain::Sphere, 1, 1, 1, vec![-1.0, 1.0], vec![1.0, 1.0])
    }

    /// Product rule on `S^{n-1} ⊂ R^n`, exact for polynomials of degree
    /// `≤ 2m - 1`. The first coordinate uses a Gauss–Jacobi rule in
    /// `t = x_1`, the remaining ones recurse onto `S^{n-2}`.
    pub fn sphere(n: usize, m: usize) -> Self {
        Rule::sphere_graded(n, m, m)
    }

    /// Sphere rule with `m_polar` nodes in the first coordinate and `m` for
    /// the lower-dimensional factors.
    pub fn sphere_graded(n: usize, m_polar: usize, m: usize) -> Self {
        assert!(n >= 1);
        match n {
            1 => Rule::sphere0(),
            2 => {
                let k = 2 * m_polar.max(1);
                let mut nodes = Vec::with_capacity(2 * k);
                // The quarter offset keeps every node off the coordinate
                // axes, in particular off the south pole.
                for j in 0..k {
                    let phi = 2.0 * PI * (j as f64 + 0.25) / k as f64;
                    nodes.push(cos(phi));
                    nodes.push(sin(phi));
                }
                Rule::from_parts(Domain::Sphere, 2, m_polar, 2, nodes, vec![2.0 * PI / k as f64; k])
            }
            _ => {
                let (ts, ws) = gauss_jacobi_symmetric(m_polar.max(1), (n as f64 - 3.0) / 2.0);
                let sub = Rule::sphere_graded(n - 1, m, m);
                let mut nodes = Vec::with_capacity(n * ts.len() * sub.len());
                let mut weights = Vec::with_capacity(ts.len() * sub.len());
                for (&t, &w) in ts.iter().zip(&ws) {
                    let s = sqrt((1.0 - t * t).max(0.0));
                    for (y, wy) in sub.iter() {
                        nodes.push(t);
                        nodes.extend(y.iter().map(|c| s * c));
                        weights.push(w * wy);
                    }
                }
                Rule::from_parts(Domain::Sphere, n, m_polar, n, nodes, weights)
            }
        }
    }

    /// Sphere rule whose polar axis is `axis` (unit vector), with a
    /// tanh-sinh rule in `t = ⟨ξ, axis⟩`. Integrands that concentrate around
    /// `axis`, such as Poisson-type kernels at interior points close to the
    /// boundary, are resolved by the endpoint clustering of the polar rule.
    pub fn sphere_aligned(n: usize, m_polar: usize, m: usize, axis: &[f64]) -> Self {
        assert!(n >= 2);
        let alpha = (n as f64 - 3.0) / 2.0;
        let sub = if n == 2 {
            Rule::sphere0()
        } else {
            Rule::sphere_graded(n - 1, m, m)
        };
        let h = linalg::reflection_to_axis(axis);
        let polar = tanh_sinh_unit(m_polar);
        let mut nodes = Vec::with_capacity(n * polar.len() * sub.len());
        let mut weights = Vec::with_capacity(polar.len() * sub.len());
        let mut local = vec![0.0; n];
        let mut dst = vec![0.0; n];
        for nd in &polar {
            // t = 1 - 2 x_comp = 2x - 1, with 1 ± t carried exactly.
            let one_minus = 2.0 * nd.x_comp;
            let one_plus = 2.0 * nd.x;
            let t = nd.x - nd.x_comp;
            let s2 = one_minus * one_plus;
            let wt = 2.0 * nd.w * pow(s2, alpha);
            if !wt.is_finite() || wt == 0.0 {
                continue;
            }
            let s = sqrt(s2);
            for (y, wy) in sub.iter() {
                local[0] = t;
                for (l, c) in local[1..].iter_mut().zip(y) {
                    *l = s * c;
                }
                linalg::mat_vec(&h, &local, &mut dst);
                let r = linalg::norm(&dst);
                nodes.extend(dst.iter().map(|c| c / r));
                weights.push(wt * wy);
            }
        }
        Rule::from_parts(Domain::Sphere, n, m_polar, n, nodes, weights)
    }

    /// Ball rule: tanh-sinh in the radius (weight `r^{n-1}`) times the sphere
    /// rule. The radial factor handles the `(1 - r)^γ` boundary behaviour of
    /// extended functions.
    pub fn ball(n: usize, m: usize) -> Self {
        let sph = Rule::sphere(n, m);
        let radial = tanh_sinh_unit(RADIAL_PER_M * m);
        let mut nodes = Vec::with_capacity(n * radial.len() * sph.len());
        let mut weights = Vec::with_capacity(radial.len() * sph.len());
        for nd in &radial {
            let r = nd.x;
            let wr = nd.w * pow(r, n as f64 - 1.0);
            for (y, wy) in sph.iter() {
                nodes.extend(y.iter().map(|c| r * c));
                weights.push(wr * wy);
            }
        }
        Rule::from_parts(Domain::Ball, n, m, n, nodes, weights)
    }

    /// Rule on the plane `R^{n-1}` with radial compactification `r = s·tan θ`.
    pub fn plane(n: usize, m: usize, scale: f64) -> Self {
        let d = n as f64 - 1.0;
        Rule::plane_with(n, RADIAL_PER_M * m, m, |nd| {
            let theta_comp = FRAC_PI_2 * nd.x_comp;
            let (sin_t, cos_t) = (cos(theta_comp), sin(theta_comp));
            // dr · r^{d-1} = s^d sin^{d-1}θ / cos^{d+1}θ dθ
            let w = nd.w * FRAC_PI_2 * pow(scale, d) * pow(sin_t, d - 1.0) / pow(cos_t, d + 1.0);
            (scale * sin_t / cos_t, w)
        })
    }

    /// Plane rule whose weights already include the density
    /// `(1 + |U|²)^{-(n-a)/2}` (unnormalized).
    ///
    /// The radius is parametrized by `t = (1 + r²)^{-(1-a)/2} ∈ (0, 1)`, in
    /// which the radial density becomes `(1 - t^{2/(1-a)})^{(n-3)/2}/(1-a)`.
    /// The heavy `r^{a-2}` tail as `a → 1` is thereby mapped onto a bounded
    /// interval instead of being truncated.
    pub fn plane_kernel_weighted(n: usize, a: f64, m: usize) -> Self {
        Rule::plane_kernel_weighted_with(n, a, RADIAL_PER_M * m, m)
    }

    /// [`Rule::plane_kernel_weighted`] with `radial` tanh-sinh nodes per half
    /// and angular resolution `m_angular`.
    pub fn plane_kernel_weighted_with(n: usize, a: f64, radial: usize, m_angular: usize) -> Self {
        let q = 2.0 / (1.0 - a);
        let alpha = (n as f64 - 3.0) / 2.0;
        Rule::plane_with(n, radial, m_angular, |nd| {
            let ln_t = if nd.x_comp < 0.5 { log1p(-nd.x_comp) } else { log(nd.x) };
            let r2 = expm1(-q * ln_t);
            let one_minus = -expm1(q * ln_t);
            (sqrt(r2), nd.w * pow(one_minus, alpha) / (1.0 - a))
        })
    }

    /// Shared plane construction; `radial(node)` gives the radius and the
    /// radial weight (excluding the angular measure) of a unit node.
    /// Nodes whose radius or weight is not finite and positive are dropped.
    fn plane_with<R: Fn(&UnitNode) -> (f64, f64)>(n: usize, radial_nodes: usize, m: usize, radial: R) -> Self {
        assert!(n >= 2);
        let d = n - 1;
        let sph = Rule::sphere(d, m);
        let units = tanh_sinh_unit(radial_nodes);
        let mut nodes = Vec::with_capacity(d * units.len() * sph.len());
        let mut weights = Vec::with_capacity(units.len() * sph.len());
        for nd in &units {
            let (r, wr) = radial(nd);
            if !r.is_finite() || !wr.is_finite() || wr <= 0.0 {
                continue;
            }
            for (y, wy) in sph.iter() {
                nodes.extend(y.iter().map(|c| r * c));
                weights.push(wr * wy);
            }
        }
        Rule::from_parts(Domain::Plane, n, m, d, nodes, weights)
    }

    /// Rule on `R^n_+`: `x_n = s·tan θ` (tanh-sinh, graded at both ends of
    /// `θ`) times the plane rule in `X`.
    pub fn halfspace(n: usize, m: usize, scale: f64) -> Self {
        let plane = Rule::plane(n, m, scale);
        let heights = tanh_sinh_unit(RADIAL_PER_M * m);
        let mut nodes = Vec::with_capacity(n * heights.len() * plane.len());
        let mut weights = Vec::with_capacity(heights.len() * plane.len());
        for nd in &heights {
            let theta_comp = FRAC_PI_2 * nd.x_comp;
            let sin_t = cos(theta_comp);
            let cos_t = sin(theta_comp);
            let xn = scale * sin_t / cos_t;
            let wh = nd.w * FRAC_PI_2 * scale / (cos_t * cos_t);
            if !wh.is_finite() || xn <= 0.0 {
                continue;
            }
            for (y, wy) in plane.iter() {
                nodes.extend_from_slice(y);
                nodes.push(xn);
                weights.push(wh * wy);
            }
        }
        Rule::from_parts(Domain::HalfSpace, n, m, n, nodes, weights)
    }

    /// The standard rule for `domain` at resolution `m`.
    pub fn for_domain(domain: Domain, n: usize, m: usize, scale: f64) -> Self {
        match domain {
            Domain::Plane => Rule::plane(n, m, scale),
            Domain::HalfSpace => Rule::halfspace(n, m, scale),
            Domain::Sphere => Rule::sphere(n, m),
            Domain::Ball => Rule::ball(n, m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{ball_volume, sphere_area};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (t, w) = gauss_legendre(6);
        let s: f64 = t.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_jacobi_weights_sum_to_moment() {
        for &alpha in &[0.5, 1.0, 1.5] {
            let (_, w) = gauss_jacobi_symmetric(9, alpha);
            let total: f64 = w.iter().sum();
            assert!((total - beta(0.5, alpha + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = tanh_sinh(|x, _| 1.0 / sqrt(x), 0.0, 1.0, 40);
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn sphere_and_ball_total_weight() {
        for n in 2..=5 {
            let s = Rule::sphere(n, 6);
            assert!((s.total_weight() - sphere_area(n)).abs() < 1e-10);
            let b = Rule::ball(n, 6);
            assert!((b.total_weight() - ball_volume(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_nodes_lie_on_sphere() {
        let s = Rule::sphere_aligned(4, 5, 3, &[0.0, 0.6, 0.0, 0.8]);
        for (x, _) in s.iter() {
            assert!((linalg::norm(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_rule_integrates_gaussian() {
        // ∫_{R^2} e^{-|x|^2} = π
        let r = Rule::plane(3, 16, 1.0);
        let v = r.sum(|x| exp(-linalg::norm_sq(x)));
        assert!((v - PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn halfspace_rule_integrates_decaying_function() {
        // ∫_{R^3_+} (1+|x|^2)^{-3} = (1/2) 4π ∫ r^2 (1+r^2)^{-3} dr = π²/8
        let r = Rule::halfspace(3, 12, 1.0);
        let v = r.sum(|x| pow(1.0 + linalg::norm_sq(x), -3.0));
        assert!((v - PI * PI / 8.0).abs() < 1e-8, "{v}");
    }
}
