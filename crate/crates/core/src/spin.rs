//! Spin bookkeeping, coherent states, and density matrices.
//!
//! The spin label is stored as the integer `2j`, so half-integer spins never
//! touch floating point. The `|j,m>` basis is ordered `m = j, j-1, ..., -j`
//! everywhere in the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to this value are accepted as zero (roundoff in randomly
/// generated states).
pub const PSD_TOL: f64 = -1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// Half-integer spin quantum number, stored exactly as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinJ {
    twice_j: u32,
}

impl SpinJ {
    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::InvalidSpin("2j must be at least 1".into()));
        }
        Ok(SpinJ { twice_j })
    }

    pub fn twice(self) -> u32 {
        self.twice_j
    }

    /// Hilbert-space dimension `2j + 1`.
    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn value(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    /// Largest tensor rank carried by a spin-j state, `K = 2j`.
    pub fn max_rank(self) -> u32 {
        self.twice_j
    }

    /// Doubled magnetic quantum numbers `2m = 2j, 2j-2, ..., -2j` in basis order.
    pub fn twice_m_iter(self) -> impl Iterator<Item = i32> {
        let tj = self.twice_j as i32;
        (0..=self.twice_j).map(move |a| tj - 2 * a as i32)
    }
}

impl fmt::Display for SpinJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice_j % 2 == 0 {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Point on the sphere: polar angle in `[0, pi]`, azimuth in `[0, 2pi)`.
///
/// Angles are canonicalized at construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Direction { theta, phi }
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn phi(self) -> f64 {
        self.phi
    }

    pub fn unit_vector(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Great-circle angle to another direction. Uses the chord length rather
    /// than `acos` of the dot product, which loses half the significant digits
    /// near zero and breaks tight dedup tolerances.
    pub fn angle_to(self, other: Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let chord: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        2.0 * (chord / 2.0).clamp(0.0, 1.0).asin()
    }
}

/// Pure spin-j state, amplitudes ordered `m = j ... -j`.
#[derive(Clone, Debug)]
pub struct StateVector {
    j: SpinJ,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(j: SpinJ, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != j.dim() {
            return Err(Error::DimensionMismatch(amplitudes.len(), j.dim()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { j, amplitudes })
    }

    pub fn j(&self) -> SpinJ {
        self.j
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }
}

/// `|j,m>` basis state (Dicke state); `twice_m` is the doubled magnetic number.
pub fn dicke_state(j: SpinJ, twice_m: i32) -> Result<StateVector> {
    let tj = j.twice() as i32;
    if twice_m.abs() > tj || (tj - twice_m) % 2 != 0 {
        return Err(Error::InvalidAngularMomentum(format!(
            "2m = {twice_m} invalid for 2j = {tj}"
        )));
    }
    let mut amps = DVector::zeros(j.dim());
    let idx = ((tj - twice_m) / 2) as usize;
    amps[idx] = Complex64::new(1.0, 0.0);
    StateVector::new(j, amps)
}

fn binomial_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Spin coherent state pointing along `dir`.
///
/// Amplitude at `m` is `sqrt(C(2j, j+m)) cos(t/2)^(j+m) (sin(t/2) e^{-i phi})^(j-m)`.
pub fn coherent_state(j: SpinJ, dir: Direction) -> StateVector {
    let tj = j.twice();
    let half = dir.theta() / 2.0;
    let (s, c) = half.sin_cos();
    let mut amps = DVector::zeros(j.dim());
    for (a, tm) in j.twice_m_iter().enumerate() {
        // j + m and j - m as plain integers
        let jp = ((tj as i32 + tm) / 2) as u32;
        let jm = ((tj as i32 - tm) / 2) as u32;
        let mag = (binomial_u128(tj, jp) as f64).sqrt() * c.powi(jp as i32) * s.powi(jm as i32);
        let phase = Complex64::from_polar(1.0, -(jm as f64) * dir.phi());
        amps[a] = phase * mag;
    }
    StateVector {
        j,
        amplitudes: amps,
    }
}

/// Complex Hermitian, unit-trace, PSD matrix of dimension `2j + 1`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    j: SpinJ,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace, and positive semidefiniteness.
    pub fn new(j: SpinJ, entries: DMatrix<Complex64>) -> Result<Self> {
        let d = j.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch(entries.nrows(), d));
        }
        let mut asym: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                asym = asym.max((entries[(r, c)] - entries[(c, r)].conj()).norm());
            }
        }
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian(asym));
        }
        let trace: Complex64 = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace(trace.re));
        }
        let eigs = entries.clone().symmetric_eigen().eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::NotPositiveSemidefinite(min_eig));
        }
        Ok(DensityMatrix { j, entries })
    }

    /// Skips validation; for internal constructions that are valid up to roundoff.
    pub(crate) fn from_parts_unchecked(j: SpinJ, entries: DMatrix<Complex64>) -> Self {
        DensityMatrix { j, entries }
    }

    pub fn j(&self) -> SpinJ {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut eigs: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eigs
    }

    pub fn to_json(&self) -> String {
        let d = self.dim();
        let file = DensityMatrixFile {
            twice_j: self.j.twice(),
            re: (0..d)
                .map(|r| (0..d).map(|c| self.entries[(r, c)].re).collect())
                .collect(),
            im: (0..d)
                .map(|r| (0..d).map(|c| self.entries[(r, c)].im).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serialization cannot fail")
    }

    /// Parses the shared density-matrix file format and validates all
    /// type invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DensityMatrixFile = serde_json::from_str(text)?;
        let j = SpinJ::from_twice(file.twice_j)?;
        let d = j.dim();
        if file.re.len() != d || file.im.len() != d {
            return Err(Error::DimensionMismatch(file.re.len(), d));
        }
        let mut entries = DMatrix::zeros(d, d);
        for r in 0..d {
            if file.re[r].len() != d || file.im[r].len() != d {
                return Err(Error::DimensionMismatch(file.re[r].len(), d));
            }
            for c in 0..d {
                entries[(r, c)] = Complex64::new(file.re[r][c], file.im[r][c]);
            }
        }
        DensityMatrix::new(j, entries)
    }
}

/// Density-matrix file format shared by all tools: row-major real and
/// imaginary parts, basis order `m = j ... -j`.
#[derive(Serialize, Deserialize)]
struct DensityMatrixFile {
    twice_j: u32,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Outer product `|psi><psi|`.
pub fn projector(psi: &StateVector) -> Result<DensityMatrix> {
    let norm = psi.amplitudes.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let m = &psi.amplitudes * psi.amplitudes.adjoint();
    Ok(DensityMatrix {
        j: psi.j,
        entries: m,
    })
}

/// `rho_0 = I / (2j+1)`.
pub fn maximally_mixed(j: SpinJ) -> DensityMatrix {
    let d = j.dim();
    let entries = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
    DensityMatrix { j, entries }
}

/// Hilbert-Schmidt (Frobenius) distance `sqrt(tr[(a-b)^2])`.
pub fn frobenius_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok((&a.entries - &b.entries).norm())
}
