//! Closed-form radii and the absolute-separability test.
//!
//! The central integer is `N(j) = (4j+2)[(4j+1) C(4j,2j) - (j+1)]`, evaluated
//! with big-integer binomials: at `2j = 21` the product overflows 64-bit
//! arithmetic well before the final square root.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use std::f64::consts::PI;

use crate::cg::big_ratio_to_f64;
use crate::error::{Error, Result};
use crate::spin::{Direction, SpinJ};
use crate::tensor::{f_factor, tensor_basis};
use crate::harmonics::spherical_harmonic;

#[derive(Clone, Copy, Debug)]
pub struct BoundRecord {
    pub j: SpinJ,
    pub p_tilde_max: f64,
    pub r_hat_max: f64,
    pub gurvits_radius: f64,
}

fn big_binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    let k = k.min(n - k);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `(4j+2)[(4j+1) C(4j,2j) - (j+1)]` as an exact integer.
///
/// In doubled units the bracket has denominator 2, so the product with
/// `4j+2 = 2(2j+1)` is integral: `(2t+2)(2t+1)C(2t,t) - (t+2)(t+1)` with
/// `t = 2j`.
fn ball_integer(j: SpinJ) -> BigInt {
    let t = j.twice() as u64;
    let c = big_binomial(2 * t, t);
    BigInt::from((2 * t + 2) * (2 * t + 1)) * c - BigInt::from((t + 2) * (t + 1))
}

/// Uniform bound on the truncated P-function of unit-norm traceless
/// directions: `sqrt((2j+1)/(8 pi^2) [(4j+1) C(4j,2j) - (j+1)])`.
pub fn p_tilde_max(j: SpinJ) -> f64 {
    let n = BigRational::from_integer(ball_integer(j));
    big_ratio_to_f64(&n).sqrt() / (4.0 * PI)
}

/// Analytic lower bound on the classical-ball radius,
/// `{(4j+2)[(4j+1) C(4j,2j) - (j+1)]}^(-1/2) = 1/(4 pi p_tilde_max)`.
pub fn r_hat_max(j: SpinJ) -> f64 {
    let n = BigRational::from_integer(ball_integer(j));
    1.0 / big_ratio_to_f64(&n).sqrt()
}

/// Largest separable-ball radius `1/(2^j sqrt(4^j - 1))` for `d = 2^(2j)`
/// qubits, the comparison curve from the absolute-separability literature.
pub fn gurvits_radius(j: SpinJ) -> f64 {
    let d = 2f64.powi(j.twice() as i32);
    1.0 / (d * (d - 1.0)).sqrt()
}

pub fn bound_record(j: SpinJ) -> BoundRecord {
    BoundRecord {
        j,
        p_tilde_max: p_tilde_max(j),
        r_hat_max: r_hat_max(j),
        gurvits_radius: gurvits_radius(j),
    }
}

/// Two-qubit absolute-separability test on the spectrum: with eigenvalues
/// sorted descending, `sqrt((l1-l3)^2 + (l2-l4)^2) <= l2 + l4`.
pub fn verstraete_abs_separable(eigs: &[f64]) -> Result<bool> {
    if eigs.len() != 4 {
        return Err(Error::BadEigenvalues(format!(
            "expected 4 eigenvalues, got {}",
            eigs.len()
        )));
    }
    if let Some(bad) = eigs.iter().find(|&&e| e < -1e-12) {
        return Err(Error::BadEigenvalues(format!("negative eigenvalue {bad}")));
    }
    let sum: f64 = eigs.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::BadEigenvalues(format!("eigenvalues sum to {sum}")));
    }
    let mut l = [eigs[0], eigs[1], eigs[2], eigs[3]];
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lhs = ((l[0] - l[2]).powi(2) + (l[1] - l[3]).powi(2)).sqrt();
    Ok(lhs <= l[1] + l[3])
}

/// Traceless unit-norm Hermitian direction that saturates the Cauchy-Schwarz
/// bound at `dir`: tensor coefficients proportional to `-f_KQ Y_KQ(dir)` for
/// `K >= 1`. The truncated P-function of this direction attains
/// `-p_tilde_max(j)` exactly at `dir`.
pub fn saturating_direction(j: SpinJ, dir: Direction) -> DMatrix<Complex64> {
    let basis = tensor_basis(j);
    let d = j.dim();
    let mut m = DMatrix::zeros(d, d);
    let mut norm_sq = 0.0;
    let mut terms: Vec<(u32, i32, Complex64)> = Vec::new();
    for k in 1..=j.max_rank() {
        for q in -(k as i32)..=(k as i32) {
            let f = f_factor(j, k, q).expect("valid index");
            let y = spherical_harmonic(k, q, dir).expect("valid index");
            let c = -Complex64::new(f, 0.0) * y;
            norm_sq += c.norm_sqr();
            terms.push((k, q, c));
        }
    }
    let scale = 1.0 / norm_sq.sqrt();
    for (k, q, c) in terms {
        m += basis.get(k, q).map(|t| t * (c * scale));
    }
    m
}
