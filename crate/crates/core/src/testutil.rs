//! Shared helpers for the unit-test suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Random Hermitian matrix with unit trace; optionally PSD (Wishart-like).
pub fn random_hermitian_trace_one<R: Rng>(
    d: usize,
    rng: &mut R,
    psd: bool,
) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut h = if psd {
        &g * g.adjoint()
    } else {
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    };
    h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let t = h.trace().re;
    if t.abs() > 1e-9 {
        h /= Complex64::new(t, 0.0);
    } else {
        // nearly traceless draw: shift onto the trace-one plane instead
        let shift = (1.0 - t) / d as f64;
        for i in 0..d {
            h[(i, i)] += Complex64::new(shift, 0.0);
        }
    }
    h
}

/// Haar-distributed unitary via QR of a Ginibre matrix.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix the phase convention so the distribution is Haar
    for i in 0..d {
        let rii = r[(i, i)];
        let phase = if rii.norm() > 0.0 {
            rii / rii.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..d {
            q[(row, i)] *= phase;
        }
    }
    q
}
