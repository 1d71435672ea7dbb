//! Executable versions of the constructive steps behind lower bounds for
//! nodal sets of harmonic functions and flat-torus Laplace eigenfunctions.
//!
//! The crate is organised bottom-up:
//!
//! - [`field`]: exactly evaluatable fields (solid harmonics, torus eigenfunctions,
//!   harmonic lifts) behind one oracle type.
//! - [`growth`]: spherical `H(x, r)`, the frequency `beta(x, r)`, sup norms and
//!   doubling indices of balls and cubes.
//! - [`windows`]: plateaus of monotone functions and frequency windows.
//! - [`subdivision`]: cube censuses, exact binomial tails and the iterated
//!   subdivision process.
//! - [`tunnels`]: the tunnel construction producing disjoint balls centred at zeros.
//! - [`nodal`]: marching-squares/tetrahedra measures of nodal sets and the
//!   experiments built on them.
//! - [`cli`]: the `nodal-lab` command line.

pub mod cli;
pub mod error;
pub mod field;
pub mod geometry;
pub mod growth;
pub mod nodal;
pub mod subdivision;
pub mod tunnels;
pub mod windows;

pub use error::{LabError, Result};
pub use field::{FieldKind, FieldOracle, FieldSpec};
pub use geometry::{BallSpec, CubeSpec, Point};
