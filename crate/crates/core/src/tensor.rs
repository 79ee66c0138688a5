//! Irreducible tensor-operator expansion and truncated P-functions.
//!
//! The operator basis is `T_KQ` with `(T_KQ)_{m,m'} = sqrt((2K+1)/(2j+1))
//! <j m'; K Q | j m>`, orthonormal under `tr(T_KQ T_K'Q'^dag)`. A density
//! matrix expands as `rho = sum rho_KQ T_KQ`; its truncated P-function
//! expands over spherical harmonics with `P_KQ = f_KQ rho_KQ`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::cg::{big_ratio_to_f64, clebsch_gordan};
use crate::error::{Error, Result};
use crate::harmonics::norm_assoc_legendre_column;
use crate::spin::{DensityMatrix, Direction, SpinJ};

fn check_kq(j: SpinJ, k: u32, q: i32) -> Result<()> {
    if k > j.max_rank() || q.abs() > k as i32 {
        return Err(Error::InvalidTensorIndex {
            k,
            q,
            twice_j: j.twice(),
        });
    }
    Ok(())
}

/// Flat index for `(K, Q)` with `0 <= K`, `-K <= Q <= K`.
fn kq_index(k: u32, q: i32) -> usize {
    (k * k) as usize + (k as i32 + q) as usize
}

fn n_coeffs(j: SpinJ) -> usize {
    let d = j.dim();
    d * d
}

/// Irreducible tensor operator `T_KQ` for spin `j`.
pub fn tensor_operator(j: SpinJ, k: u32, q: i32) -> Result<DMatrix<Complex64>> {
    check_kq(j, k, q)?;
    let d = j.dim();
    let scale = ((2 * k + 1) as f64 / d as f64).sqrt();
    let mut m = DMatrix::zeros(d, d);
    let tms: Vec<i32> = j.twice_m_iter().collect();
    for (row, &tm) in tms.iter().enumerate() {
        for (col, &tmp) in tms.iter().enumerate() {
            if tmp + 2 * q != tm {
                continue;
            }
            let cg = clebsch_gordan(j.twice(), tmp, 2 * k, 2 * q, j.twice(), tm)?;
            m[(row, col)] = Complex64::new(scale * cg, 0.0);
        }
    }
    Ok(m)
}

/// Read-only cache of all `T_KQ` for one spin, built once and shared.
pub struct TensorBasis {
    j: SpinJ,
    ops: Vec<DMatrix<Complex64>>,
}

impl TensorBasis {
    pub fn new(j: SpinJ) -> Result<Self> {
        let mut ops = Vec::with_capacity(n_coeffs(j));
        for k in 0..=j.max_rank() {
            for q in -(k as i32)..=(k as i32) {
                ops.push(tensor_operator(j, k, q)?);
            }
        }
        Ok(TensorBasis { j, ops })
    }

    pub fn j(&self) -> SpinJ {
        self.j
    }

    pub fn get(&self, k: u32, q: i32) -> &DMatrix<Complex64> {
        &self.ops[kq_index(k, q)]
    }
}

static BASIS_CACHE: Lazy<Mutex<HashMap<u32, Arc<TensorBasis>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Shared per-spin basis cache.
pub fn tensor_basis(j: SpinJ) -> Arc<TensorBasis> {
    let mut cache = BASIS_CACHE.lock().expect("basis cache poisoned");
    cache
        .entry(j.twice())
        .or_insert_with(|| Arc::new(TensorBasis::new(j).expect("valid indices by construction")))
        .clone()
}

/// Expansion coefficients `rho_KQ` of a Hermitian matrix over the `T_KQ`.
#[derive(Clone, Debug)]
pub struct TensorCoeffs {
    j: SpinJ,
    coeffs: Vec<Complex64>,
}

impl TensorCoeffs {
    pub fn from_values(j: SpinJ, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != n_coeffs(j) {
            return Err(Error::DimensionMismatch(coeffs.len(), n_coeffs(j)));
        }
        Ok(TensorCoeffs { j, coeffs })
    }

    /// `coeff(K,Q) = tr(m T_KQ^dag)` for an arbitrary square matrix.
    pub fn from_matrix(j: SpinJ, m: &DMatrix<Complex64>) -> Result<Self> {
        let d = j.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(m.nrows(), d));
        }
        let basis = tensor_basis(j);
        let mut coeffs = Vec::with_capacity(n_coeffs(j));
        for k in 0..=j.max_rank() {
            for q in -(k as i32)..=(k as i32) {
                let t = basis.get(k, q);
                // tr(m T^dag) = sum_{a,b} m[a,b] conj(T[a,b])
                let mut acc = Complex64::default();
                for a in 0..d {
                    for b in 0..d {
                        acc += m[(a, b)] * t[(a, b)].conj();
                    }
                }
                coeffs.push(acc);
            }
        }
        Ok(TensorCoeffs { j, coeffs })
    }

    pub fn j(&self) -> SpinJ {
        self.j
    }

    pub fn get(&self, k: u32, q: i32) -> Complex64 {
        self.coeffs[kq_index(k, q)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Max residual of `coeff(K,-Q) - (-1)^Q conj(coeff(K,Q))`; zero for
    /// coefficients sourced from a Hermitian matrix.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut res: f64 = 0.0;
        for k in 0..=self.j.max_rank() {
            for q in 0..=(k as i32) {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let diff = self.get(k, -q) - self.get(k, q).conj() * sign;
                res = res.max(diff.norm());
            }
        }
        res
    }

    /// `rho = sum coeff(K,Q) T_KQ`; errors if the coefficient set cannot come
    /// from a Hermitian matrix.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let res = self.hermiticity_residual();
        if res > 1e-10 {
            return Err(Error::HermiticityImage(res));
        }
        let basis = tensor_basis(self.j);
        let d = self.j.dim();
        let mut m = DMatrix::zeros(d, d);
        for k in 0..=self.j.max_rank() {
            for q in -(k as i32)..=(k as i32) {
                let c = self.get(k, q);
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                m += basis.get(k, q).map(|t| t * c);
            }
        }
        Ok(m)
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct CoeffEntry {
    #[serde(rename = "K")]
    k: u32,
    #[serde(rename = "Q")]
    q: i32,
    re: f64,
    im: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct CoeffFile {
    twice_j: u32,
    coeffs: Vec<CoeffEntry>,
}

impl TensorCoeffs {
    /// JSON debug dump, one `{K, Q, re, im}` entry per coefficient.
    pub fn to_json(&self) -> String {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for k in 0..=self.j.max_rank() {
            for q in -(k as i32)..=(k as i32) {
                let c = self.get(k, q);
                coeffs.push(CoeffEntry { k, q, re: c.re, im: c.im });
            }
        }
        serde_json::to_string_pretty(&CoeffFile {
            twice_j: self.j.twice(),
            coeffs,
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        let file: CoeffFile = serde_json::from_str(text)?;
        let j = SpinJ::from_twice(file.twice_j)?;
        let mut coeffs = vec![Complex64::default(); n_coeffs(j)];
        if file.coeffs.len() != coeffs.len() {
            return Err(Error::DimensionMismatch(file.coeffs.len(), coeffs.len()));
        }
        for e in file.coeffs {
            if e.k > j.max_rank() || e.q.abs() > e.k as i32 {
                return Err(Error::InvalidTensorIndex { k: e.k, q: e.q, twice_j: j.twice() });
            }
            coeffs[kq_index(e.k, e.q)] = Complex64::new(e.re, e.im);
        }
        TensorCoeffs::from_values(j, coeffs)
    }
}

/// `rho_KQ` of a density matrix.
pub fn rho_to_coeffs(rho: &DensityMatrix) -> TensorCoeffs {
    TensorCoeffs::from_matrix(rho.j(), rho.entries()).expect("dimensions match by construction")
}

/// Inverse of [`rho_to_coeffs`]; validates the reconstructed density matrix.
pub fn coeffs_to_rho(c: &TensorCoeffs) -> Result<DensityMatrix> {
    let m = c.to_matrix()?;
    DensityMatrix::new(c.j(), m)
}

/// Conversion factor between `rho_KQ` and P-function coefficients:
/// `f_KQ = sqrt((2j-K)! (2j+K+1)!) / (2 sqrt(pi) (2j)!)`.
///
/// In this operator convention `<n|T_KQ|n> = Y_KQ(n) / f_KQ` with a positive,
/// Q-independent factor, so no extra phase appears. Conventions that build
/// `T_KQ` with the opposite coupling order carry an additional `(-1)^(K-Q)`.
pub fn f_factor(j: SpinJ, k: u32, q: i32) -> Result<f64> {
    check_kq(j, k, q)?;
    let tj = j.twice() as i64;
    let fact = |n: i64| -> BigInt {
        let mut acc = BigInt::from(1);
        for i in 2..=n {
            acc *= i;
        }
        acc
    };
    // (2j-K)! (2j+K+1)! / ((2j)!)^2, exact before the square root
    let num = fact(tj - k as i64) * fact(tj + k as i64 + 1);
    let den = fact(tj) * fact(tj);
    let ratio = big_ratio_to_f64(&BigRational::new(num, den));
    Ok(ratio.sqrt() / (2.0 * PI.sqrt()))
}

/// Spherical-harmonic coefficients of the truncated P-function.
#[derive(Clone, Debug)]
pub struct PFunctionCoeffs {
    j: SpinJ,
    coeffs: Vec<Complex64>,
}

impl PFunctionCoeffs {
    pub fn from_values(j: SpinJ, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != n_coeffs(j) {
            return Err(Error::DimensionMismatch(coeffs.len(), n_coeffs(j)));
        }
        Ok(PFunctionCoeffs { j, coeffs })
    }

    pub fn j(&self) -> SpinJ {
        self.j
    }

    pub fn get(&self, k: u32, q: i32) -> Complex64 {
        self.coeffs[kq_index(k, q)]
    }

    /// Back-conversion to tensor coefficients, `rho_KQ = conj(P_KQ) / f_KQ`.
    pub fn to_tensor_coeffs(&self) -> TensorCoeffs {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for k in 0..=self.j.max_rank() {
            for q in -(k as i32)..=(k as i32) {
                let f = f_factor(self.j, k, q).expect("indices valid by construction");
                coeffs.push(self.get(k, q).conj() / f);
            }
        }
        TensorCoeffs {
            j: self.j,
            coeffs,
        }
    }
}

/// `P_KQ = f_KQ conj(rho_KQ)`, entrywise.
///
/// The conjugation comes from `tr(|n><n| T_KQ^dag) = conj(Y_KQ(n)) / f_KQ`:
/// projecting `rho = integral P(n) |n><n|` onto `T_KQ` picks up the harmonic
/// conjugate, so matching `P = sum P_KQ Y_KQ` conjugates the coefficient.
pub fn p_coeffs(c: &TensorCoeffs) -> PFunctionCoeffs {
    let mut coeffs = Vec::with_capacity(c.coeffs.len());
    for k in 0..=c.j.max_rank() {
        for q in -(k as i32)..=(k as i32) {
            let f = f_factor(c.j, k, q).expect("indices valid by construction");
            coeffs.push(c.get(k, q).conj() * f);
        }
    }
    PFunctionCoeffs {
        j: c.j,
        coeffs,
    }
}

/// Complex value of the harmonic sum at one direction. The imaginary part is
/// pure roundoff when the Hermiticity image holds.
fn p_eval_complex(p: &PFunctionCoeffs, dir: Direction) -> Complex64 {
    let k_max = p.j.max_rank();
    let mut acc = Complex64::default();
    for m in 0..=k_max {
        let col = norm_assoc_legendre_column(k_max, m, dir.theta());
        let phase = Complex64::from_polar(1.0, m as f64 * dir.phi());
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for (off, plm) in col.iter().enumerate() {
            let k = m + off as u32;
            let y_pos = phase * *plm;
            acc += p.get(k, m as i32) * y_pos;
            if m > 0 {
                acc += p.get(k, -(m as i32)) * y_pos.conj() * sign;
            }
        }
    }
    acc
}

/// Truncated P-function value at `dir`.
pub fn p_eval(p: &PFunctionCoeffs, dir: Direction) -> Result<f64> {
    let v = p_eval_complex(p, dir);
    if v.im.abs() > 1e-10 {
        return Err(Error::ImaginaryResidue(v.im.abs()));
    }
    Ok(v.re)
}

/// Minimum of the truncated P-function over the sphere: dense product grid
/// with at least `grid_density * K^2` points, then 20 rounds of shrinking
/// pattern descent. The returned value never exceeds any grid-node value.
pub fn p_min_on_sphere(p: &PFunctionCoeffs, grid_density: usize) -> (Direction, f64) {
    let k = p.j.max_rank().max(1) as usize;
    let points = grid_density * k * k;
    let n_theta = ((points as f64 / 2.0).sqrt().ceil() as usize).max(8);
    let n_phi = 2 * n_theta;
    let eval = |theta: f64, phi: f64| p_eval_complex(p, Direction::new(theta, phi)).re;

    let mut best = (Direction::new(0.0, 0.0), eval(0.0, 0.0));
    for it in 0..n_theta {
        let theta = PI * (it as f64 + 0.5) / n_theta as f64;
        for ip in 0..n_phi {
            let phi = 2.0 * PI * ip as f64 / n_phi as f64;
            let v = eval(theta, phi);
            if v < best.1 {
                best = (Direction::new(theta, phi), v);
            }
        }
    }
    // local refinement; pattern search with halving steps
    let mut step = PI / n_theta as f64;
    let (mut theta, mut phi) = (best.0.theta(), best.0.phi());
    let mut val = best.1;
    for _ in 0..20 {
        let mut improved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = eval(theta + dt, phi + dp);
            if v < val {
                theta += dt;
                phi += dp;
                val = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (Direction::new(theta, phi), val)
}


#[cfg(test)]
mod json_tests {
    use super::*;
    use crate::ensemble::{hs_random_state, RandomStream};

    #[test]
    fn coefficient_json_round_trip() {
        let j = SpinJ::from_twice(3).unwrap();
        let rho = hs_random_state(j, &RandomStream::new(41, 0));
        let coeffs = rho_to_coeffs(&rho);
        let text = coeffs.to_json();
        assert!(text.contains("\"twice_j\": 3"));
        let back = TensorCoeffs::from_json(&text).unwrap();
        for (a, b) in coeffs.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-15);
        }
        // repeated serialization is byte-stable
        assert_eq!(back.to_json(), TensorCoeffs::from_json(&text).unwrap().to_json());
        assert!(TensorCoeffs::from_json("{\"twice_j\":1,\"coeffs\":[]}").is_err());
    }
}
