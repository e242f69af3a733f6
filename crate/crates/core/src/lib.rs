//! Apparent elastic properties of short fiber-reinforced composites:
//! analytical micromechanics, random planar microstructure generation,
//! finite-element homogenization on moving windows, and spatial
//! correlation analysis of the resulting elasticity coefficient fields.

// Small fixed-size tensor and band-matrix kernels read better with
// explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod corr;
pub mod error;
pub mod fem;
pub mod homogenize;
pub mod material;
pub mod microgen;
pub mod presets;
pub mod stochastic;
pub mod sweeps;
pub mod verify;

pub use error::{Error, Result};
pub use material::{
    ElasticityMatrix2D, EngineeringConstants, IsotropicMaterial, PlaneState,
};
pub use microgen::{Fiber, GenerationConfig, Microstructure, PhaseGrid, PropertyMode};
