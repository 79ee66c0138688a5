//! Classicality of spin-j states.
//!
//! A spin-j state is classical when it is a convex mixture of spin coherent
//! states, i.e. when it admits a nonnegative P-function. This crate provides
//!
//! * exact spin bookkeeping, coherent states, and density-matrix metrics
//!   ([`spin`]);
//! * the irreducible tensor-operator expansion and truncated P-functions,
//!   backed by exact Clebsch-Gordan coefficients ([`tensor`], [`cg`]);
//! * closed-form radii of the ball of absolutely classical states around the
//!   maximally mixed state ([`bounds`]);
//! * Hilbert-Schmidt random states and the interpolation family ([`ensemble`]);
//! * the classicality linear program over coherent-state dictionaries with
//!   duality certificates and column generation ([`lp`], [`ipm`]).

pub mod bounds;
pub mod cg;
pub mod ensemble;
pub mod error;
pub mod harmonics;
pub mod ipm;
pub mod lp;
pub mod quadrature;
pub mod spin;
pub mod tensor;
#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
pub use spin::{
    coherent_state, dicke_state, frobenius_distance, maximally_mixed, projector, DensityMatrix,
    Direction, SpinJ, StateVector,
};
