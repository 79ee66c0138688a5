//! Exact Clebsch-Gordan coefficients.
//!
//! All angular momentum labels are passed doubled (`2j`, `2m`) so that
//! half-integers stay exact. The Racah formula is evaluated with big-integer
//! factorials; the only floating-point operation is the final square root.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::from(1);
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Converts a nonnegative big rational to f64 without overflowing on huge
/// numerators or denominators: shift so the integer quotient carries ~80 bits,
/// then scale back by the corresponding power of two.
pub(crate) fn big_ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    let shift: i64 = 80 - (num.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mut out = 0.0;
    let (sign, digits) = q.to_u64_digits();
    for (i, d) in digits.iter().enumerate() {
        out += *d as f64 * 2f64.powi(64 * i as i32);
    }
    if sign == num_bigint::Sign::Minus {
        out = -out;
    }
    out * 2f64.powi(-shift as i32)
}

fn check_pair(tj: u32, tm: i32, what: &str) -> Result<()> {
    if tm.abs() > tj as i32 || (tj as i32 - tm).rem_euclid(2) != 0 {
        return Err(Error::InvalidAngularMomentum(format!(
            "{what}: 2m = {tm} incompatible with 2j = {tj}"
        )));
    }
    Ok(())
}

/// `<j1 m1; j2 m2 | J M>` with all labels doubled.
///
/// Returns zero when `M != m1 + m2` or the triangle condition fails; errors on
/// inadmissible `(j, m)` pairs. Exact up to the final square root.
pub fn clebsch_gordan(
    tj1: u32,
    tm1: i32,
    tj2: u32,
    tm2: i32,
    tbig_j: u32,
    tbig_m: i32,
) -> Result<f64> {
    check_pair(tj1, tm1, "j1")?;
    check_pair(tj2, tm2, "j2")?;
    check_pair(tbig_j, tbig_m, "J")?;
    if tm1 + tm2 != tbig_m {
        return Ok(0.0);
    }
    let (tj1, tj2, tj) = (tj1 as i64, tj2 as i64, tbig_j as i64);
    let (tm1, tm2, tm) = (tm1 as i64, tm2 as i64, tbig_m as i64);
    // triangle condition, including integer-coupling parity
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return Ok(0.0);
    }

    // All of these are nonnegative integers for admissible labels.
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let jm_pairs = [
        (tj + tm) / 2,
        (tj - tm) / 2,
        (tj1 - tm1) / 2,
        (tj1 + tm1) / 2,
        (tj2 - tm2) / 2,
        (tj2 + tm2) / 2,
    ];

    let mut numer = BigInt::from(tj + 1);
    for f in [a, b, c] {
        numer *= factorial(f);
    }
    for f in jm_pairs {
        numer *= factorial(f);
    }
    let denom = factorial((tj1 + tj2 + tj) / 2 + 1);
    let prefactor = BigRational::new(numer, denom);

    let k_lo = 0i64
        .max((tj2 - tj - tm1) / 2)
        .max((tj1 - tj + tm2) / 2);
    let k_hi = a.min((tj1 - tm1) / 2).min((tj2 + tm2) / 2);
    let mut sum = BigRational::zero();
    for k in k_lo..=k_hi {
        let mut den = factorial(k);
        den *= factorial(a - k);
        den *= factorial((tj1 - tm1) / 2 - k);
        den *= factorial((tj2 + tm2) / 2 - k);
        den *= factorial((tj - tj2 + tm1) / 2 + k);
        den *= factorial((tj - tj1 - tm2) / 2 + k);
        let term = BigRational::new(BigInt::from(1), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }
    let square = prefactor * &sum * &sum;
    let value = big_ratio_to_f64(&square).sqrt();
    Ok(if sum.is_negative() { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stretched_state() {
        assert_abs_diff_eq!(clebsch_gordan(1, 1, 1, 1, 2, 2).unwrap(), 1.0);
        assert_abs_diff_eq!(clebsch_gordan(4, 4, 6, 6, 10, 10).unwrap(), 1.0);
    }

    #[test]
    fn half_half_coupling() {
        assert_abs_diff_eq!(
            clebsch_gordan(1, 1, 1, -1, 2, 0).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(1, 1, 1, -1, 0, 0).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(1, -1, 1, 1, 0, 0).unwrap(),
            -1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn table_values_one_cross_one() {
        // standard 1 x 1 coupling table
        assert_abs_diff_eq!(
            clebsch_gordan(2, 0, 2, 0, 4, 0).unwrap(),
            (2f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(clebsch_gordan(2, 0, 2, 0, 2, 0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            clebsch_gordan(2, 2, 2, -2, 0, 0).unwrap(),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(2, 0, 2, 0, 0, 0).unwrap(),
            -1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(2, 2, 2, 0, 2, 2).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn half_cross_one_used_by_tensor_operators() {
        // <1/2 m; 1 0 | 1/2 m> = +-1/sqrt(3)
        assert_abs_diff_eq!(
            clebsch_gordan(1, 1, 2, 0, 1, 1).unwrap(),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(1, -1, 2, 0, 1, -1).unwrap(),
            -1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn selection_rules() {
        assert_eq!(clebsch_gordan(2, 2, 2, 2, 4, 0).unwrap(), 0.0); // M mismatch
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 8, 0).unwrap(), 0.0); // triangle
    }

    #[test]
    fn inadmissible_labels_error() {
        assert!(clebsch_gordan(1, 3, 1, -1, 2, 2).is_err()); // |m| > j
        assert!(clebsch_gordan(2, 1, 2, 0, 2, 1).is_err()); // 2m parity
    }

    #[test]
    fn unitarity() {
        // sum over (J, M) of CG^2 equals 1 for every (m1, m2)
        for (tj1, tj2) in [(1u32, 1u32), (2, 3), (5, 4), (13, 8)] {
            for tm1 in (-(tj1 as i32)..=tj1 as i32).step_by(2) {
                for tm2 in (-(tj2 as i32)..=tj2 as i32).step_by(2) {
                    let tm = tm1 + tm2;
                    let mut sum = 0.0;
                    let mut tj = (tj1 as i32 - tj2 as i32).unsigned_abs();
                    while tj <= tj1 + tj2 {
                        if tm.abs() <= tj as i32 {
                            let c = clebsch_gordan(tj1, tm1, tj2, tm2, tj, tm).unwrap();
                            sum += c * c;
                        }
                        tj += 2;
                    }
                    assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn orthogonality_in_m1_m2() {
        // fixed (J, M) vs (J', M): rows are orthonormal
        let (tj1, tj2) = (4u32, 6u32);
        for tja in (2..=10u32).step_by(2) {
            for tjb in (2..=10u32).step_by(2) {
                let tm = 0;
                let mut sum = 0.0;
                for tm1 in (-(tj1 as i32)..=tj1 as i32).step_by(2) {
                    let tm2 = tm - tm1;
                    if tm2.abs() > tj2 as i32 {
                        continue;
                    }
                    sum += clebsch_gordan(tj1, tm1, tj2, tm2, tja, tm).unwrap()
                        * clebsch_gordan(tj1, tm1, tj2, tm2, tjb, tm).unwrap();
                }
                let expect = if tja == tjb { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(sum, expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn large_labels_stay_finite() {
        // the K ~ 21 regime that motivates exact arithmetic
        let v = clebsch_gordan(21, 1, 42, 0, 21, 1).unwrap();
        assert!(v.is_finite() && v.abs() < 1.0 && v != 0.0);
    }

    #[test]
    fn big_ratio_conversion() {
        use num_bigint::BigInt;
        let r = BigRational::new(BigInt::from(1) << 400, BigInt::from(3) << 150);
        let expect = 2f64.powi(250) / 3.0;
        assert!((big_ratio_to_f64(&r) - expect).abs() / expect < 1e-14);
    }
}
