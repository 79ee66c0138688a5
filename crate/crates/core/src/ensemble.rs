//! Hilbert-Schmidt random states and the interpolation family.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{frobenius_distance, maximally_mixed, DensityMatrix, SpinJ};

/// Version tag recorded next to published numbers; bump on any change to the
/// generator algorithm so runs stay replayable.
pub const GENERATOR_VERSION: &str = "hs-chacha8/1";

/// Seeded, splittable random stream. Identical `(seed, stream_index)` pairs
/// reproduce identical output bit-exactly on one build; workers draw
/// non-overlapping streams by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        RandomStream { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Draw from the Hilbert-Schmidt ensemble: `rho = A A^dag / tr(A A^dag)` with
/// `A` square and independent complex Gaussian entries.
pub fn hs_random_state(j: SpinJ, stream: &RandomStream) -> DensityMatrix {
    let mut rng = stream.rng();
    let d = j.dim();
    let a = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut w = &a * a.adjoint();
    // remove the roundoff asymmetry before validating
    w = (&w + w.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = w.trace().re;
    let rho = w / Complex64::new(trace, 0.0);
    DensityMatrix::new(j, rho).expect("Wishart construction yields a valid state")
}

/// Unit direction in traceless-Hermitian space together with the distance of
/// the source state from the maximally mixed state.
#[derive(Clone, Debug)]
pub struct DirectionState {
    pub rho_tilde: DMatrix<Complex64>,
    pub r: f64,
}

/// `rho = rho_0 + r rho_tilde` with `tr rho_tilde = 0`, `||rho_tilde|| = 1`.
pub fn direction_of(rho: &DensityMatrix) -> Result<DirectionState> {
    let rho0 = maximally_mixed(rho.j());
    let diff = rho.entries() - rho0.entries();
    let r = diff.norm();
    if r < 1e-12 {
        return Err(Error::ZeroDirection);
    }
    Ok(DirectionState {
        rho_tilde: diff / Complex64::new(r, 0.0),
        r,
    })
}

/// `rho_k = (1-k) rho_0 + k rho`.
pub fn interpolate(rho: &DensityMatrix, k: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::BadInterpolation(k));
    }
    let rho0 = maximally_mixed(rho.j());
    let m = rho0.entries() * Complex64::new(1.0 - k, 0.0)
        + rho.entries() * Complex64::new(k, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(rho.j(), m))
}

/// Distance `||rho - rho_0||`.
pub fn distance_to_mixed(rho: &DensityMatrix) -> f64 {
    frobenius_distance(rho, &maximally_mixed(rho.j())).expect("dimensions match")
}
