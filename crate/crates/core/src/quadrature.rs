//! Exact product quadrature on the sphere.
//!
//! Gauss-Legendre in `cos theta` crossed with equispaced nodes in `phi`.
//! With `2j + 2` polar and `4j + 2` azimuthal nodes the rule integrates
//! spherical harmonics exactly up to degree `4j + 1`, which covers every
//! integrand built from `(2j+1)`-dimensional projectors.

use std::f64::consts::PI;

use crate::spin::{Direction, SpinJ};

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and solid-angle weights; weights sum to `4 pi`.
pub fn sphere_quadrature(j: SpinJ) -> Vec<(Direction, f64)> {
    let n_theta = j.twice() as usize + 2;
    let n_phi = 2 * j.twice() as usize + 2;
    sphere_product_rule(n_theta, n_phi)
}

/// Product rule with explicit node counts; exact for spherical harmonics of
/// degree below `min(2 n_theta, n_phi)`.
pub fn sphere_product_rule(n_theta: usize, n_phi: usize) -> Vec<(Direction, f64)> {
    let gl = gauss_legendre(n_theta);
    let wphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for &(x, w) in &gl {
        let theta = x.acos();
        for k in 0..n_phi {
            let phi = wphi * k as f64;
            nodes.push((Direction::new(theta, phi), w * wphi));
        }
    }
    nodes
}
