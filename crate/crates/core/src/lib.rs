//! Numerical laboratory for classical isospin-carrying particles in static
//! SU(2) gauge fields.
//!
//! The crate integrates the coupled position/isospin equations of motion in
//! hedgehog monopole and diatomic gauge backgrounds, evaluates the conserved
//! quantities these systems admit (radial charge, angular momentum with its
//! spin-from-isospin term, Runge-Lenz vector), checks candidate constants of
//! the motion against the covariant constraint ladder, verifies the geometry
//! of the resulting orbits (cones, planes, conic sections), and reproduces
//! the Lorentz force by projecting five-dimensional Kaluza-Klein geodesics.
//!
//! The heavy inner loops (drift scans, sample grids, batch runs) fan out
//! over rayon when the default `parallel` feature is enabled and degrade to
//! sequential maps without it.

// tensor index arithmetic reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod conservation;
pub mod dynamics;
pub mod fields;
pub mod kaluza_klein;
pub mod par;
pub mod su2;
pub mod vec3;

pub use dynamics::{
    integrate, IntegratorConfig, Method, ParticleState, Termination, Trajectory,
};
pub use fields::{FieldError, GaugeFieldConfig, GaugeFunction, ScalarPotentialConfig};
pub use su2::{AlgebraElement, GroupElement};
pub use vec3::Vec3;
