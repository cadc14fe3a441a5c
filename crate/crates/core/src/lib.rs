//! Certification of local polynomial convexity for CR-singular surface germs
//! `w = C_0 z^k + Σ C_j z^{k-j} z̄^j + G(z)` in `C²`, together with numerical
//! checks of every construction behind it: the sheets of the pullback under
//! `(z, w) ↦ (z, w^Δ)`, the sector condition on `(z - ζ)(F(z) - F(ζ))`, the
//! Kallin separation, minimax density fits in the algebra `[z, F]`, and a
//! polynomial-hull probe.
//!
//! ```
//! use crsing::complex::CircleGrid;
//! use crsing::surface::{certify, CRSurface};
//! use num_complex::Complex64;
//!
//! // w = z̄⁴ + 0.3 z z̄³
//! let s = CRSurface::from_leading(
//!     4,
//!     &[(4, Complex64::new(1.0, 0.0)), (3, Complex64::new(0.3, 0.0))],
//!     1.0,
//! )
//! .unwrap();
//! let cert = certify(&s, &CircleGrid::new(4096).unwrap());
//! assert!(cert.passed);
//! assert_eq!(cert.m(), Some(4));
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod complex;
pub mod demo;
pub mod error;
pub mod hull;
pub mod kallin;
pub mod minimax;
pub mod pipeline;
pub mod poly;
pub mod sheets;
pub mod surface;

pub use error::{Error, Result};
