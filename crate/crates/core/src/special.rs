//! Gamma-function helpers and the measures of balls and spheres.

use core::f64::consts::PI;

use libm::{exp, lgamma, pow, tgamma};

pub fn gamma(x: f64) -> f64 {
    tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// Euler beta function, evaluated through `ln Γ` to avoid overflow.
pub fn beta(x: f64, y: f64) -> f64 {
    exp(lgamma(x) + lgamma(y) - lgamma(x + y))
}

/// Surface measure of the unit sphere `S^{n-1}` in `R^n`, `2π^{n/2}/Γ(n/2)`.
///
/// `n = 1` gives the counting measure of `{-1, 1}`.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * pow(PI, h) / gamma(h)
}

/// Volume of the unit ball `B_n`, `π^{n/2}/Γ(n/2 + 1)`.
pub fn ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    pow(PI, h) / gamma(h + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_match_known_values() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
        for n in 2..8 {
            assert!((sphere_area(n) - n as f64 * ball_volume(n)).abs() < 1e-11);
        }
    }

    #[test]
    fn beta_symmetric_and_exact_at_integers() {
        assert!((beta(2.0, 3.0) - 1.0 / 12.0).abs() < 1e-15);
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-13);
    }
}
