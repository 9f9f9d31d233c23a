//! Symmetric decreasing rearrangement of grid functions on `R^1` and `R^2`
//! and a small-scale check of the Riesz rearrangement inequality for the
//! slices `P_{a,x_n}(Y) = d_{n,a} x_n^{1-a} / (|Y|² + x_n²)^{(n-a)/2}` of
//! the extension kernel.
//!
//! Cells all have the same measure, so the rearrangement is exact: sort the
//! values and hand them out to cells in order of distance from the origin.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, pow};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelParams;
use crate::quadrature::tanh_sinh_unit;

/// Largest grid side accepted by the convolution checks.
pub const MAX_SIDE: usize = 64;

/// Nonnegative values on a centred uniform grid with `side^dim` cells of
/// width `h`. Cell `k` has multi-index `(k mod side, k / side)` and centre
/// `(i - (side-1)/2) h` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedFunction {
    dim: usize,
    side: usize,
    h: f64,
    values: Vec<f64>,
}

impl DiscretizedFunction {
    pub fn new(dim: usize, side: usize, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid!("grids are one- or two-dimensional, got {dim}"));
        }
        if side == 0 || !(h > 0.0) {
            return Err(invalid!("grid needs at least one cell of positive width"));
        }
        if values.len() != side.pow(dim as u32) {
            return Err(invalid!("expected {} values, got {}", side.pow(dim as u32), values.len()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid!("values must be finite and nonnegative, found {v}"));
        }
        Ok(DiscretizedFunction { dim, side, h, values })
    }

    /// Samples `f` at the cell centres.
    pub fn sample<F: Fn(&[f64]) -> f64>(dim: usize, side: usize, h: f64, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(side.pow(dim as u32));
        let mut c = [0.0; 2];
        for k in 0..side.pow(dim as u32) {
            centre(dim, side, h, k, &mut c);
            values.push(f(&c[..dim]));
        }
        DiscretizedFunction::new(dim, side, h, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_measure(&self) -> f64 {
        pow(self.h, self.dim as f64)
    }

    pub fn centre(&self, k: usize) -> [f64; 2] {
        let mut c = [0.0; 2];
        centre(self.dim, self.side, self.h, k, &mut c);
        c
    }

    /// `|{f > t}|`.
    pub fn level_measure(&self, t: f64) -> f64 {
        self.values.iter().filter(|v| **v > t).count() as f64 * self.cell_measure()
    }

    pub fn lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().cloned().fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().map(|v| pow(*v, p)).sum();
        pow(s * self.cell_measure(), 1.0 / p)
    }

    /// Whether values are nonincreasing along the canonical radial order.
    pub fn is_radially_decreasing(&self) -> bool {
        let order = radial_order(self.dim, self.side);
        order.windows(2).all(|w| self.values[w[0]] >= self.values[w[1]])
    }
}

fn centre(dim: usize, side: usize, h: f64, k: usize, out: &mut [f64; 2]) {
    let off = (side as f64 - 1.0) / 2.0;
    out[0] = ((k % side) as f64 - off) * h;
    if dim == 2 {
        out[1] = ((k / side) as f64 - off) * h;
    }
}

/// Cells sorted by distance from the origin, ties broken by cell index.
/// Distances are compared as exact integers (twice the offset, squared).
fn radial_order(dim: usize, side: usize) -> Vec<usize> {
    let twice = |i: usize| 2 * i as i64 - (side as i64 - 1);
    let key = |k: usize| {
        let x = twice(k % side);
        let y = if dim == 2 { twice(k / side) } else { 0 };
        x * x + y * y
    };
    let mut order: Vec<usize> = (0..side.pow(dim as u32)).collect();
    order.sort_by_key(|&k| (key(k), k));
    order
}

/// Symmetric decreasing rearrangement: the largest value goes to the most
/// central cell, and so on. Equimeasurable with `f` exactly.
pub fn rearrange(f: &DiscretizedFunction) -> DiscretizedFunction {
    let mut sorted = f.values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; sorted.len()];
    for (v, k) in sorted.into_iter().zip(radial_order(f.dim, f.side)) {
        values[k] = v;
    }
    DiscretizedFunction { values, ..f.clone() }
}

/// Output window, in multiples of the input side, for the discrete
/// convolution. Wide enough that the kernel tail outside it is negligible
/// for the comparisons made here.
fn window_factor(dim: usize) -> usize {
    if dim == 1 {
        64
    } else {
        3
    }
}

/// `‖P_{a,x_n} * f‖_p` on the discrete model: a direct sum over input
/// cells, evaluated on a centred output window of the same spacing.
pub fn convolution_norm(f: &DiscretizedFunction, xn: f64, params: &KernelParams, p: f64) -> Result<f64> {
    if params.n() != f.dim + 1 {
        return Err(invalid!("grid dimension {} needs n = {}, got {}", f.dim, f.dim + 1, params.n()));
    }
    if f.side > MAX_SIDE {
        return Err(Error::TooLarge {
            requested: f.side.pow(f.dim as u32),
            limit: MAX_SIDE.pow(f.dim as u32),
        });
    }
    if !(xn > 0.0) || !(p >= 1.0) {
        return Err(invalid!("need x_n > 0 and p ≥ 1"));
    }
    let side = f.side as i64;
    let wide = side * window_factor(f.dim) as i64;
    let shift = (wide - side) / 2;
    let h = f.h;
    let dv = f.cell_measure();
    let support: Vec<(i64, i64, f64)> = f
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| ((k as i64 % side) + shift, if f.dim == 2 { k as i64 / side + shift } else { 0 }, *v))
        .collect();
    let c = params.d() * dv;
    let rows = if f.dim == 2 { wide } else { 1 };
    let mut acc = 0.0;
    for oy in 0..rows {
        for ox in 0..wide {
            let mut u = 0.0;
            for &(ix, iy, v) in &support {
                let dx = (ox - ix) as f64 * h;
                let dy = (oy - iy) as f64 * h;
                u += v * params.kernel(dx * dx + dy * dy, xn);
            }
            acc += pow(c * u, p);
        }
    }
    Ok(pow(acc * dv, 1.0 / p))
}

/// `(‖P_{a,x_n} * f‖_p, ‖P_{a,x_n} * f*‖_p)`; the Riesz rearrangement
/// inequality says `lhs ≤ rhs`.
pub fn riesz_convolution_check(f: &DiscretizedFunction, xn: f64, params: &KernelParams, p: f64) -> Result<(f64, f64)> {
    let lhs = convolution_norm(f, xn, params, p)?;
    let rhs = convolution_norm(&rearrange(f), xn, params, p)?;
    Ok((lhs, rhs))
}

/// The same comparison after integrating over the height:
/// `(∫ ‖P_{a,x_n} * f‖_p^p dx_n)^{1/p}` for `f` and `f*`, with `x_n = s tan θ`
/// and a tanh-sinh rule of `2m + 1` nodes in `θ`.
pub fn chain_check(f: &DiscretizedFunction, params: &KernelParams, p: f64, m: usize, scale: f64) -> Result<(f64, f64)> {
    let star = rearrange(f);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for nd in tanh_sinh_unit(m) {
        let theta_comp = core::f64::consts::FRAC_PI_2 * nd.x_comp;
        let (sin_t, cos_t) = (libm::cos(theta_comp), libm::sin(theta_comp));
        let xn = scale * sin_t / cos_t;
        let w = nd.w * core::f64::consts::FRAC_PI_2 * scale / (cos_t * cos_t);
        if !(xn > 1e-8) || !w.is_finite() || xn > 1e8 {
            continue;
        }
        lhs += w * pow(convolution_norm(f, xn, params, p)?, p);
        rhs += w * pow(convolution_norm(&star, xn, params, p)?, p);
    }
    Ok((pow(lhs, 1.0 / p), pow(rhs, 1.0 / p)))
}

/// Relative slack allowed in `lhs ≤ rhs` for floating-point reassociation.
pub const RIESZ_SLACK: f64 = 1e-12;

pub fn riesz_holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + RIESZ_SLACK) + RIESZ_SLACK * fabs(rhs).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params1() -> KernelParams {
        KernelParams::new(2, 0.0).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DiscretizedFunction::new(1, 3, 0.1, vec![1.0, -1.0, 0.0]).is_err());
        assert!(DiscretizedFunction::new(3, 2, 0.1, vec![0.0; 8]).is_err());
        assert!(DiscretizedFunction::new(1, 3, 0.1, vec![0.0; 2]).is_err());
        let big = DiscretizedFunction::new(1, 65, 0.1, vec![1.0; 65]).unwrap();
        assert!(matches!(convolution_norm(&big, 1.0, &params1(), 2.0), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn radial_decreasing_input_is_fixed() {
        let f = DiscretizedFunction::sample(2, 9, 0.5, |x| libm::exp(-(x[0] * x[0] + x[1] * x[1]))).unwrap();
        let g = rearrange(&f);
        // equal-distance cells may swap values only if those values are equal
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!(fabs(a - b) < 1e-15);
        }
        assert!(g.is_radially_decreasing());
    }

    #[test]
    fn off_centre_indicator_becomes_centred() {
        let f = DiscretizedFunction::sample(1, 11, 1.0, |x| if x[0] >= 2.0 && x[0] <= 4.0 { 1.0 } else { 0.0 }).unwrap();
        let g = rearrange(&f);
        let expected: Vec<f64> = (0..11).map(|i| if (4..=6).contains(&i) { 1.0 } else { 0.0 }).collect();
        assert_eq!(g.values(), &expected[..]);
    }

    #[test]
    fn translation_and_symmetry_cases() {
        let p = params1();
        let centred = DiscretizedFunction::sample(1, 32, 0.25, |x| libm::exp(-4.0 * x[0] * x[0])).unwrap();
        let (l, r) = riesz_convolution_check(&centred, 0.5, &p, 2.0).unwrap();
        let moved_vals: Vec<f64> = (0..32).map(|i| if i >= 5 { centred.values()[i - 5] } else { 0.0 }).collect();
        let moved = DiscretizedFunction::new(1, 32, 0.25, moved_vals).unwrap();
        let lm = convolution_norm(&moved, 0.5, &p, 2.0).unwrap();
        // the centred bump is symmetric but lives on an even grid, so its
        // rearrangement differs by at most a mirror image
        assert!(fabs(l - r) < 1e-10 * r);
        assert!(fabs(lm - l) < 1e-10 * l, "{lm} {l}");
    }

    #[test]
    fn two_dimensional_check_runs() {
        let p = KernelParams::new(3, 0.5).unwrap();
        let f = DiscretizedFunction::sample(2, 12, 0.3, |x| {
            libm::exp(-(x[0] - 0.6).powi(2) - 3.0 * (x[1] + 0.3).powi(2)) + 0.3 * libm::exp(-(x[0] + 1.0).powi(2))
        })
        .unwrap();
        let (l, r) = riesz_convolution_check(&f, 0.4, &p, 3.0).unwrap();
        assert!(riesz_holds(l, r), "{l} {r}");
    }

    #[test]
    fn chain_after_height_integration() {
        let p = params1();
        let f = DiscretizedFunction::sample(1, 24, 0.2, |x| {
            libm::exp(-(x[0] - 1.0).powi(2) * 4.0) + 0.5 * libm::exp(-(x[0] + 1.2).powi(2) * 9.0)
        })
        .unwrap();
        let (l, r) = chain_check(&f, &p, 4.0, 6, 1.0).unwrap();
        assert!(l < r, "{l} {r}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rearrangement_is_exact(vals in prop::collection::vec(0.0f64..10.0, 1..80), two in any::<bool>()) {
            let (dim, side) = if two && vals.len() >= 4 {
                let s = (vals.len() as f64).sqrt() as usize;
                (2, s)
            } else {
                (1, vals.len())
            };
            let v: Vec<f64> = vals[..side.pow(dim as u32)].to_vec();
            let f = DiscretizedFunction::new(dim, side, 0.3, v).unwrap();
            let g = rearrange(&f);
            for t in [0.0, 1.0, 2.5, 5.0, 9.9] {
                prop_assert_eq!(f.level_measure(t), g.level_measure(t));
            }
            for p in [1.0, 2.0, 5.0] {
                prop_assert!(fabs(f.lp(p) - g.lp(p)) <= 1e-12 * f.lp(p).max(1e-300));
            }
            prop_assert!(g.is_radially_decreasing());
            prop_assert_eq!(rearrange(&g), g);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn riesz_on_random_1d_grids(vals in prop::collection::vec(0.0f64..1.0, 4..48), xn in 0.05f64..3.0, p in 1.0f64..6.0) {
            let n = vals.len();
            let f = DiscretizedFunction::new(1, n, 0.1, vals).unwrap();
            let (l, r) = riesz_convolution_check(&f, xn, &KernelParams::new(2, 0.5).unwrap(), p).unwrap();
            prop_assert!(riesz_holds(l, r), "{} {}", l, r);
        }
    }
}
