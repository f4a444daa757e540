//! Heat transfer in a medium packed with many small impedance particles,
//! its homogenized limit, and inverse-spectral design of heat waveguides.
//!
//! The crate is organized around one pipeline:
//!
//! * [`particles`] generates clouds of small bodies following a prescribed
//!   density law,
//! * [`manybody`] solves the full order-M and reduced order-P linear systems
//!   for the Laplace-transformed temperature,
//! * [`homogenize`] solves the limiting integral equation and the stationary
//!   average,
//! * [`laplace`] recovers time-domain information (Tauberian limit,
//!   Gaver-Stehfest inversion),
//! * [`gelfand_levitan`] reconstructs a 1-D potential from prescribed
//!   spectral data, validated by [`sturm_liouville`], and
//! * [`waveguide`] assembles the separable 3-D spectrum and evolves heat
//!   signals along the axis of a cylinder.

pub mod error;
pub mod gelfand_levitan;
pub mod geometry;
pub mod homogenize;
pub mod kernels;
pub mod laplace;
pub mod linalg;
pub mod manybody;
pub mod particles;
pub mod quadrature;
pub mod sturm_liouville;
pub mod waveguide;

pub use error::{Error, Result};
pub use geometry::{Box3, Point3};
