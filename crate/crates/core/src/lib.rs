//! Multi-collinear exchange-correlation machinery.
//!
//! A collinear functional sees only a density `n` and a scalar spin density
//! `s`. This crate generalizes such functionals to full vector magnetization
//! `m(r)`: the magnetization is projected onto a set of global directions,
//! an *effective* collinear integrand (the collinear one plus its response
//! to spin squeezing) is evaluated on each projection, and the results are
//! averaged over the sphere. The construction keeps the exact collinear
//! limit, stays rotation invariant, has well-defined derivatives at m = 0,
//! and yields a nonvanishing local torque m × Bxc with zero net torque.
//!
//! Module map:
//! - [`angular`]: direction/weight sets for the spherical average
//!   (Lebedev–Laikov, Gauss–Legendre × uniform azimuth, Fibonacci lattice);
//! - [`fields`]: analytic density/magnetization scenes, spatial sampling,
//!   projection onto directions, global spin rotations;
//! - [`functionals`]: the registry of collinear integrands with analytic
//!   partial derivatives;
//! - [`effective`]: the collinear → effective transform and its derivative
//!   propagation;
//! - [`engine`]: assembled multi-collinear energies, potential channels,
//!   the exchange-correlation magnetic field, torque, and reference oracles.

// indexed loops over the spatial/spin axes mirror the tensor notation
#![allow(clippy::needless_range_loop)]

pub mod angular;
pub mod effective;
pub mod engine;
pub mod fields;
pub mod functionals;
pub mod gauss;
pub mod linalg;
pub mod rng;
