//! Discrete search for maximizers of the `P̃_a` quotient on the disc
//! (`n = 2`), with a fit of the result to the extremal family on the line.
//!
//! Boundary data are step functions on `K` equal arcs of the circle. The
//! extension of one arc indicator is tabulated on a polar grid once; by
//! rotation symmetry every other arc is a shift of it, so extensions are
//! circular convolutions. The plane picture is the weighted pullback, which
//! preserves the quotient.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;
use libm::{cos, fabs, pow, sin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::extremal::{fit_extremal, ExtremalCandidate, ExtremalFit};
use crate::error::{invalid, Error, Result};
use crate::geometry::ConformalMap;
use crate::kernels::KernelParams;
use crate::quadrature::{tanh_sinh, tanh_sinh_unit};

/// Largest decrease of the quotient tolerated across a rearrangement step.
pub const REARRANGEMENT_SLACK: f64 = 1e-10;

/// Initial data of the search.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchStart {
    /// Independent uniform values in `[0.05, 1.05)` on each arc.
    Noise,
    /// The push-forward of a member of the extremal family, sampled at arc
    /// midpoints.
    Candidate(ExtremalCandidate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Number of arcs `K`.
    pub cells: usize,
    /// Angular quadrature nodes per arc.
    pub oversample: usize,
    /// Radial tanh-sinh level; the rule has `8 radial + 1` nodes.
    pub radial: usize,
    pub max_steps: usize,
    pub rearrange_every: usize,
    /// Relative improvement below which an accepted step counts as stalled.
    pub tolerance: f64,
    pub seed: u64,
    pub start: SearchStart,
}

impl SearchConfig {
    pub fn new(cells: usize, seed: u64) -> Self {
        SearchConfig {
            cells,
            oversample: 4,
            radial: 12,
            max_steps: 400,
            rearrange_every: 10,
            tolerance: 1e-12,
            seed,
            start: SearchStart::Noise,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Arc values, normalized to unit boundary norm.
    pub cells: Vec<f64>,
    pub quotient: f64,
    /// Quotient after every accepted step; nondecreasing up to
    /// [`REARRANGEMENT_SLACK`].
    pub trace: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
    pub fit: ExtremalFit,
    /// The pulled-back data on the line as `(Y, f(Y), weight)`.
    pub samples: Vec<(Vec<f64>, f64, f64)>,
}

/// Angle of the `i`-th quadrature node, measured from the north pole.
fn node_angle(i: usize, m: usize) -> f64 {
    2.0 * PI * (i as f64 + 0.5) / m as f64
}

struct Problem {
    k: usize,
    s: usize,
    p: f64,
    q: f64,
    /// Radial weights `r dr` times the angular step.
    weights: Vec<f64>,
    /// `table[row * M + i]`: extension of the first arc's indicator at
    /// radial node `row`, angle `node_angle(i)`.
    table: Vec<f64>,
}

/// `P̃_a χ_{[0, len]}` at polar point `(r, θ)`. The integral runs over the
/// offset `δ = φ - θ*` from the image `θ*` of `θ` nearest to the arc, so
/// peaks far narrower than the spacing of floats near `θ` stay resolved;
/// panels of width `(1 - r) 4^j` around `δ = 0` follow the peak.
fn arc_extension(params: &KernelParams, r: f64, rc: f64, theta: f64, len: f64) -> f64 {
    let a = params.a();
    let pre = params.d() * pow(2.0, a - 1.0) * pow(rc * (1.0 + r), 1.0 - a);
    let kernel = |delta: f64| {
        let h = sin(delta / 2.0);
        pre * pow(rc * rc + 4.0 * r * h * h, -(2.0 - a) / 2.0)
    };
    let dist = |p: f64| {
        if p < 0.0 {
            -p
        } else if p > len {
            p - len
        } else {
            0.0
        }
    };
    let peak = [theta - 2.0 * PI, theta, theta + 2.0 * PI]
        .into_iter()
        .min_by(|x, y| dist(*x).total_cmp(&dist(*y)))
        .expect("three images");
    let (lo, hi) = (-peak, len - peak);
    let mut breaks = vec![lo, hi];
    let mut w = rc.max(1e-300);
    if lo < 0.0 && hi > 0.0 {
        breaks.push(0.0);
    }
    while w < 2.0 * PI {
        for b in [-w, w] {
            if b > lo && b < hi {
                breaks.push(b);
            }
        }
        w *= 4.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks.windows(2).map(|w| tanh_sinh(|d, _| kernel(d), w[0], w[1], ARC_NODES)).sum()
}

/// Tanh-sinh level per panel in [`arc_extension`].
const ARC_NODES: usize = 20;

impl Problem {
    fn new(params: &KernelParams, cfg: &SearchConfig) -> Result<Self> {
        let (k, s) = (cfg.cells, cfg.oversample);
        let m = k * s;
        let len = 2.0 * PI / k as f64;
        let nodes = tanh_sinh_unit(2 * crate::quadrature::RADIAL_PER_M * cfg.radial);
        let mut weights = Vec::new();
        let mut table = Vec::new();
        for nd in nodes {
            if nd.w == 0.0 {
                continue;
            }
            weights.push(nd.w * nd.x * 2.0 * PI / m as f64);
            for i in 0..m {
                table.push(arc_extension(params, nd.x, nd.x_comp, node_angle(i, m), len));
            }
        }
        Ok(Problem {
            k,
            s,
            p: params.p_boundary()?,
            q: params.p_interior()?,
            weights,
            table,
        })
    }

    fn m(&self) -> usize {
        self.k * self.s
    }

    fn extension(&self, g: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut u = vec![0.0; self.table.len()];
        for (row, urow) in u.chunks_mut(m).enumerate() {
            let t = &self.table[row * m..(row + 1) * m];
            for (j, &gj) in g.iter().enumerate() {
                if gj == 0.0 {
                    continue;
                }
                let shift = self.s * j;
                for (i, ui) in urow.iter_mut().enumerate() {
                    *ui += gj * t[(i + m - shift) % m];
                }
            }
        }
        u
    }

    fn numerator(&self, u: &[f64]) -> f64 {
        let m = self.m();
        let s: f64 = u
            .chunks(m)
            .zip(&self.weights)
            .map(|(row, w)| w * row.iter().map(|v| pow(fabs(*v), self.q)).sum::<f64>())
            .sum();
        pow(s, 1.0 / self.q)
    }

    fn boundary_norm(&self, g: &[f64]) -> f64 {
        let len = 2.0 * PI / self.k as f64;
        pow(len * g.iter().map(|v| pow(*v, self.p)).sum::<f64>(), 1.0 / self.p)
    }

    fn normalize(&self, g: &mut [f64]) -> Result<()> {
        let b = self.boundary_norm(g);
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Diverged(format!("boundary norm {b}")));
        }
        g.iter_mut().for_each(|v| *v /= b);
        Ok(())
    }

    fn quotient(&self, g: &[f64]) -> f64 {
        self.numerator(&self.extension(g)) / self.boundary_norm(g)
    }

    fn numerator_gradient(&self, g: &[f64]) -> Vec<f64> {
        let m = self.m();
        let u = self.extension(g);
        let n = self.numerator(&u);
        let mut grad = vec![0.0; self.k];
        for (row, (urow, w)) in u.chunks(m).zip(&self.weights).enumerate() {
            let t = &self.table[row * m..(row + 1) * m];
            for (j, gr) in grad.iter_mut().enumerate() {
                let shift = self.s * j;
                let mut acc = 0.0;
                for (i, ui) in urow.iter().enumerate() {
                    acc += pow(fabs(*ui), self.q - 1.0) * t[(i + m - shift) % m];
                }
                *gr += w * acc;
            }
        }
        let scale = pow(n, 1.0 - self.q);
        grad.iter_mut().for_each(|v| *v *= scale);
        grad
    }

    /// Gradient of `N(g) / ‖g‖_p`.
    fn quotient_gradient(&self, g: &[f64]) -> Vec<f64> {
        let mut grad = self.numerator_gradient(g);
        let d = self.boundary_norm(g);
        let q = self.quotient(g);
        let len = 2.0 * PI / self.k as f64;
        let scale = len * pow(d, 1.0 - self.p);
        for (gr, v) in grad.iter_mut().zip(g) {
            *gr = (*gr - q * scale * pow(*v, self.p - 1.0)) / d;
        }
        grad
    }

    /// Symmetric decreasing rearrangement about the north pole: the largest
    /// values go to the arcs nearest to it.
    fn rearrange(&self, g: &[f64]) -> Vec<f64> {
        let mut sorted = g.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut arcs: Vec<usize> = (0..self.k).collect();
        // twice the arc-centre distance to the pole, in units of half arcs
        let key = |j: usize| {
            let c = 2 * j + 1;
            c.min(2 * self.k - c)
        };
        arcs.sort_by_key(|&j| (key(j), j));
        let mut out = vec![0.0; self.k];
        for (j, v) in arcs.into_iter().zip(sorted) {
            out[j] = v;
        }
        out
    }

    /// Pulled-back samples `(Y, f(Y), dY)` at the angular nodes.
    fn samples(&self, params: &KernelParams, g: &[f64]) -> Vec<(Vec<f64>, f64, f64)> {
        let map = ConformalMap::new(2).expect("n = 2");
        let m = self.m();
        let eps = params.eps();
        (0..m)
            .map(|i| {
                let th = node_angle(i, m);
                let xi = [sin(th), cos(th)];
                let mut y = [0.0; 2];
                map.phi_inverse_boundary_into(&xi, &mut y).expect("nodes avoid the south pole");
                let s = y[0] * y[0] + 0.25;
                let f = pow(s, -eps / 2.0) * g[i / self.s];
                (vec![y[0]], f, 2.0 * PI / m as f64 * s)
            })
            .collect()
    }
}

/// Projected gradient ascent of the discrete quotient on the disc. Each
/// step moves along the gradient, clips at zero and renormalizes; a step is
/// taken only if the quotient does not decrease, with the step length
/// halved on rejection and grown on acceptance. Every `rearrange_every`
/// steps the symmetric decreasing rearrangement is tried and kept when it
/// does not lose more than [`REARRANGEMENT_SLACK`].
pub fn maximizer_search(params: &KernelParams, cfg: &SearchConfig) -> Result<SearchResult> {
    params.require_positive_eps()?;
    if params.n() != 2 {
        return Err(Error::Unsupported(format!(
            "the maximizer search runs on the disc, got n = {}",
            params.n()
        )));
    }
    if cfg.cells < 4 || cfg.oversample == 0 || cfg.radial == 0 {
        return Err(invalid!("need at least 4 cells and nonzero resolutions"));
    }
    let pb = Problem::new(params, cfg)?;
    let k = cfg.cells;
    let mut g: Vec<f64> = match &cfg.start {
        SearchStart::Noise => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..k).map(|_| rng.gen_range(0.05..1.05)).collect()
        }
        SearchStart::Candidate(c) => {
            let eps = params.eps();
            let map = ConformalMap::new(2)?;
            (0..k)
                .map(|j| {
                    let th = 2.0 * PI * (j as f64 + 0.5) / k as f64;
                    let mut y = [0.0; 1];
                    let w = map.phi_inverse_boundary_into(&[sin(th), cos(th)], &mut y)?;
                    // f̃(ξ) = |ξ + e_n|^{-ε} f(Y) with |ξ + e_n| = 1/|w|
                    Ok(pow(w, eps) * c.value(&y, eps))
                })
                .collect::<Result<_>>()?
        }
    };
    pb.normalize(&mut g)?;
    let mut q = pb.quotient(&g);
    let mut trace = vec![q];
    let mut step = 0.5;
    let mut stalled = 0;
    let mut converged = false;
    let mut steps = 0;
    while steps < cfg.max_steps {
        steps += 1;
        let grad = pb.quotient_gradient(&g);
        let gmax = g.iter().cloned().fold(0.0, f64::max);
        let dmax = grad.iter().map(|v| fabs(*v)).fold(0.0, f64::max);
        if !(dmax > 0.0 && dmax.is_finite()) {
            return Err(Error::Diverged(format!("gradient size {dmax}")));
        }
        let mut accepted = None;
        while step > 1e-16 {
            let mut c: Vec<f64> = g.iter().zip(&grad).map(|(v, d)| (v + step * gmax / dmax * d).max(0.0)).collect();
            pb.normalize(&mut c)?;
            if c == g {
                break;
            }
            let qc = pb.quotient(&c);
            if !qc.is_finite() {
                return Err(Error::Diverged(format!("quotient {qc}")));
            }
            if qc >= q {
                accepted = Some((c, qc));
                step *= 1.5;
                break;
            }
            step /= 2.0;
        }
        let Some((c, qc)) = accepted else {
            converged = true;
            break;
        };
        stalled = if qc - q <= cfg.tolerance * q { stalled + 1 } else { 0 };
        g = c;
        q = qc;
        if cfg.rearrange_every > 0 && steps % cfg.rearrange_every == 0 {
            let r = pb.rearrange(&g);
            let qr = pb.quotient(&r);
            if qr >= q - REARRANGEMENT_SLACK {
                g = r;
                q = qr;
            }
        }
        if trace.last().is_some_and(|&last| q < last - REARRANGEMENT_SLACK) {
            return Err(Error::Diverged(format!("quotient fell from {} to {q}", trace[trace.len() - 1])));
        }
        trace.push(q);
        if stalled >= 3 {
            converged = true;
            break;
        }
    }
    let samples = pb.samples(params, &g);
    let fit = fit_extremal(&samples, params, pb.p)?;
    Ok(SearchResult {
        cells: g,
        quotient: q,
        trace,
        steps,
        converged,
        fit,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::sharp_constant;
    use crate::kernels::zonal_profile;

    fn params() -> KernelParams {
        KernelParams::new(2, 0.5).unwrap()
    }

    #[test]
    fn arc_extensions_sum_to_the_extension_of_one() {
        let p = params();
        let k = 8;
        let len = 2.0 * PI / k as f64;
        for (r, rc) in [(0.0, 1.0), (0.5, 0.5), (1.0 - 1e-9, 1e-9)] {
            for th in [0.1, 2.0] {
                let total: f64 = (0..k).map(|j| arc_extension(&p, r, rc, th - j as f64 * len, len)).sum();
                let total_wrapped: f64 = (0..k)
                    .map(|j| arc_extension(&p, r, rc, (th - j as f64 * len).rem_euclid(2.0 * PI), len))
                    .sum();
                let h = zonal_profile(&p, 0, r, rc);
                assert!(fabs(total_wrapped - h) < 1e-10, "r={r}: {total_wrapped} vs {h}");
                assert!(fabs(total - h) < 1e-10);
            }
        }
    }

    #[test]
    fn constant_data_reproduce_the_sharp_constant() {
        let p = params();
        let cfg = SearchConfig::new(16, 0);
        let pb = Problem::new(&p, &cfg).unwrap();
        let mut g = vec![1.0; 16];
        pb.normalize(&mut g).unwrap();
        let s = sharp_constant(&p, 12).unwrap();
        assert!(fabs(pb.quotient(&g) - s.value) < 1e-9, "{} vs {s:?}", pb.quotient(&g));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = params();
        let pb = Problem::new(
            &p,
            &SearchConfig {
                radial: 6,
                ..SearchConfig::new(8, 0)
            },
        )
        .unwrap();
        let g: Vec<f64> = (0..8).map(|j| 1.0 + 0.3 * sin(j as f64)).collect();
        let grad = pb.numerator_gradient(&g);
        let qgrad = pb.quotient_gradient(&g);
        let num = |g: &[f64]| pb.numerator(&pb.extension(g));
        for j in [0, 3] {
            let h = 1e-6;
            let mut gp = g.clone();
            gp[j] += h;
            let mut gm = g.clone();
            gm[j] -= h;
            let fd = (num(&gp) - num(&gm)) / (2.0 * h);
            assert!(fabs(fd - grad[j]) < 1e-7 * fabs(grad[j]).max(1.0), "{fd} vs {}", grad[j]);
            let fq = (pb.quotient(&gp) - pb.quotient(&gm)) / (2.0 * h);
            assert!(fabs(fq - qgrad[j]) < 1e-7 * fabs(qgrad[j]).max(1.0), "{fq} vs {}", qgrad[j]);
        }
    }

    #[test]
    fn noise_climbs_to_the_sharp_constant_and_fits_the_family() {
        let p = params();
        let s = sharp_constant(&p, 12).unwrap().value;
        let r = maximizer_search(&p, &SearchConfig::new(16, 7)).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - REARRANGEMENT_SLACK));
        assert!(fabs(r.quotient - s) < 1e-3 * s, "{} vs {s}", r.quotient);
        assert!(r.fit.residual < 5e-2, "{:?}", r.fit);
    }

    #[test]
    fn the_extremal_start_is_stationary() {
        let p = params();
        let cand = ExtremalCandidate::new(1.0, 0.5, vec![0.0]).unwrap();
        let cfg = SearchConfig {
            start: SearchStart::Candidate(cand),
            ..SearchConfig::new(16, 0)
        };
        let r = maximizer_search(&p, &cfg).unwrap();
        assert!(r.converged && r.steps <= 5, "{} steps", r.steps);
        assert!(fabs(r.trace[r.trace.len() - 1] - r.trace[0]) < 1e-12);
        assert!(
            fabs(r.fit.candidate.lambda - 0.5) < 1e-6 && fabs(r.fit.candidate.y0[0]) < 1e-6,
            "{:?}",
            r.fit
        );
    }

    #[test]
    fn only_the_disc_is_supported() {
        let p = KernelParams::new(3, 0.0).unwrap();
        assert!(matches!(maximizer_search(&p, &SearchConfig::new(8, 0)), Err(Error::Unsupported(_))));
    }
}
