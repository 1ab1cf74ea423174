//! Numerical geometry of spacelike hypersurfaces in three-dimensional de
//! Sitter space: σ₂ cones and Gårding's inequality, graph surfaces over the
//! sphere, and quadrature checks of integral identities for isometric pairs.

#![allow(clippy::needless_range_loop)]

pub mod ambient;
pub mod hypersurface;
pub mod integrals;
pub mod jet;
pub mod quadrature;
pub mod symfun;

/// Library version, echoed in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
