//! Orthonormal spherical harmonics with the Condon-Shortley phase.
//!
//! Associated Legendre values are built from the fully normalized three-term
//! recurrence; no factorial ratios ever appear in floating point, so the
//! functions stay accurate up to the degrees needed here (K ~ 21).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spin::Direction;

/// Normalized associated Legendre functions `Plm(cos theta)` for fixed `m`
/// and all `l = m ..= l_max`, such that `Ylm = Plm e^{i m phi}`.
pub fn norm_assoc_legendre_column(l_max: u32, m: u32, theta: f64) -> Vec<f64> {
    debug_assert!(m <= l_max);
    let x = theta.cos();
    let s = theta.sin();
    let mut out = Vec::with_capacity((l_max - m + 1) as usize);
    // P_m^m with Condon-Shortley phase
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=m {
        pmm *= -(((2 * i + 1) as f64) / ((2 * i) as f64)).sqrt() * s;
    }
    out.push(pmm);
    if l_max == m {
        return out;
    }
    let mut prev = pmm;
    let mut curr = x * ((2 * m + 3) as f64).sqrt() * pmm;
    out.push(curr);
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
            .sqrt();
        let next = a * (x * curr - b * prev);
        prev = curr;
        curr = next;
        out.push(curr);
    }
    out
}

/// `Y_KQ(theta, phi)`, orthonormal over the sphere.
pub fn spherical_harmonic(k: u32, q: i32, dir: Direction) -> Result<Complex64> {
    if q.abs() > k as i32 {
        return Err(Error::InvalidAngularMomentum(format!(
            "|Q| = {} exceeds K = {k}",
            q.abs()
        )));
    }
    let m = q.unsigned_abs();
    let p = *norm_assoc_legendre_column(k, m, dir.theta())
        .last()
        .expect("column is nonempty");
    let y = Complex64::from_polar(1.0, m as f64 * dir.phi()) * p;
    if q >= 0 {
        Ok(y)
    } else {
        // Y_{K,-m} = (-1)^m conj(Y_{K,m})
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        Ok(y.conj() * sign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_product_rule;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_harmonic() {
        for dir in [Direction::new(0.3, 1.0), Direction::new(2.0, 5.0)] {
            let y = spherical_harmonic(0, 0, dir).unwrap();
            assert_abs_diff_eq!(y.re, 0.5 / PI.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(y.im, 0.0);
        }
    }

    #[test]
    fn closed_forms_degree_one() {
        let dir = Direction::new(0.7, 1.9);
        let y10 = spherical_harmonic(1, 0, dir).unwrap();
        assert_abs_diff_eq!(
            y10.re,
            (3.0 / (4.0 * PI)).sqrt() * dir.theta().cos(),
            epsilon = 1e-14
        );
        let y11 = spherical_harmonic(1, 1, dir).unwrap();
        let expect = -(3.0 / (8.0 * PI)).sqrt() * dir.theta().sin();
        assert_abs_diff_eq!(y11.re, expect * dir.phi().cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(y11.im, expect * dir.phi().sin(), epsilon = 1e-14);
        // north pole
        let y = spherical_harmonic(1, 0, Direction::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(y.re, (3.0 / (4.0 * PI)).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn conjugation_symmetry() {
        let dir = Direction::new(1.234, 4.321);
        for k in 1..=8u32 {
            for q in 1..=k as i32 {
                let yp = spherical_harmonic(k, q, dir).unwrap();
                let ym = spherical_harmonic(k, -q, dir).unwrap();
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                assert!((ym - yp.conj() * sign).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn addition_theorem() {
        // sum_Q |Y_KQ|^2 = (2K+1)/(4pi), independent of the point
        for dir in [
            Direction::new(0.1, 0.2),
            Direction::new(1.3, 2.9),
            Direction::new(2.8, 5.5),
        ] {
            for k in 0..=21u32 {
                let sum: f64 = (-(k as i32)..=k as i32)
                    .map(|q| spherical_harmonic(k, q, dir).unwrap().norm_sqr())
                    .sum();
                assert_abs_diff_eq!(sum, (2 * k + 1) as f64 / (4.0 * PI), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let nodes = sphere_product_rule(14, 27);
        for (k1, q1, k2, q2) in [
            (0u32, 0i32, 0u32, 0i32),
            (3, 2, 3, 2),
            (5, -4, 5, -4),
            (3, 2, 5, 2),
            (4, 1, 4, -1),
            (6, 0, 4, 0),
            (13, 7, 13, 7),
        ] {
            let mut acc = num_complex::Complex64::default();
            for &(dir, w) in &nodes {
                let a = spherical_harmonic(k1, q1, dir).unwrap();
                let b = spherical_harmonic(k2, q2, dir).unwrap();
                acc += a * b.conj() * w;
            }
            let expect = if k1 == k2 && q1 == q2 { 1.0 } else { 0.0 };
            assert!(
                (acc - num_complex::Complex64::new(expect, 0.0)).norm() < 1e-12,
                "({k1},{q1}) x ({k2},{q2}) -> {acc}"
            );
        }
    }

    #[test]
    fn invalid_indices() {
        assert!(spherical_harmonic(2, 3, Direction::new(1.0, 1.0)).is_err());
    }
}
