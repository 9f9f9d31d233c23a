//! Small dense linear algebra on slices: enough for Jacobian determinants,
//! Golub–Welsch node computation and sphere-rule rotations.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, hypot, sqrt};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(norm_sq(a))
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Determinant of a row-major `n × n` matrix by partial-pivot elimination.
pub fn determinant(mut m: Vec<f64>, n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| fabs(m[i * n + col]).total_cmp(&fabs(m[j * n + col])))
            .unwrap();
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = m[row * n + col] / p;
            if factor != 0.0 {
                for k in col..n {
                    m[row * n + k] -= factor * m[col * n + k];
                }
            }
        }
    }
    det
}

/// Row-major matrix–vector product.
pub fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(&m[i * n..(i + 1) * n], v);
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector (implicit QL with Wilkinson
/// shifts). `diag` has length `n`, `off` has length `n - 1`.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(off);
    // Only the first row of the eigenvector matrix is tracked.
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fabs(d[m]) + fabs(d[m + 1]);
                if fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 60, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    (d, z)
}

/// Householder reflection (row-major `n × n`) that maps `e_1` to the unit
/// vector `axis`.
pub fn reflection_to_axis(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    // v = e1 - axis; H = I - 2 v v^T / |v|^2
    let mut v = axis.iter().map(|x| -x).collect::<Vec<_>>();
    v[0] += 1.0;
    let vv = norm_sq(&v);
    if vv < 1e-30 {
        return h;
    }
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] -= 2.0 * v[i] * v[j] / vv;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_known_matrices() {
        assert!((determinant(vec![2.0, 1.0, 1.0, 3.0], 2) - 5.0).abs() < 1e-14);
        let m = vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 4.0];
        assert!((determinant(m, 3) + 4.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_eigen_recovers_spectrum() {
        // Path-graph Laplacian-like matrix with known eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 7;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let (mut ev, z) = tridiagonal_eigen(&diag, &off);
        ev.sort_by(f64::total_cmp);
        for (k, lam) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((lam - exact).abs() < 1e-13);
        }
        let total: f64 = z.iter().map(|x| x * x).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn reflection_maps_e1_to_axis() {
        let axis = [0.6, 0.0, 0.8];
        let h = reflection_to_axis(&axis);
        let mut out = [0.0; 3];
        mat_vec(&h, &[1.0, 0.0, 0.0], &mut out);
        for i in 0..3 {
            assert!((out[i] - axis[i]).abs() < 1e-15);
        }
    }
}
