//! Core numerics for the decoherence of a one-dimensional nonrelativistic
//! bosonic quantum field under a translation-covariant phase-space-kick
//! master equation.
//!
//! The crate is organized around the dimensionless model convention
//! `hbar = omega = L = 1` (any consistent unit system works; constructors
//! only check signs and finiteness):
//!
//! * [`model`] — physical parameters, mode grid, spread coefficients,
//!   kick distribution, and the cat-state characteristic function.
//! * [`specfun`] — Jacobi theta, Bessel J0, the Gaussian Hankel transform,
//!   and the inverse normal CDF.
//! * [`qmc`] — generalized Faure sequences and a deterministic block-reduced
//!   quasi-Monte Carlo integrator over the Gaussian-weighted phase space.
//! * [`decoherence`] — the mode-space decoherence rate, its broad-spread
//!   approximation, and time-integrated exposures.
//! * [`purity`] — purity decay and initial decay rates: QMC estimates,
//!   closed forms, and low-dimensional quadrature oracles.
//! * [`energy`] — the state-independent heating rate (mode sum and
//!   large-size closed form).
//! * [`semiclassical`] — interaction-picture kernels, diffusion
//!   coefficients, and the compound-Poisson trajectory sampler.
//!
//! Everything is `no_std + alloc`; IO, CLI plumbing, and thread-parallel
//! drivers live in the companion `decofield-cli` crate. All operations are
//! deterministic: identical inputs (including seeds) give bit-identical
//! outputs regardless of how work is scheduled.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod decoherence;
pub mod energy;
pub(crate) mod math;
pub mod model;
pub mod purity;
pub mod qmc;
pub mod semiclassical;
pub mod specfun;

pub use num_complex::Complex64;
