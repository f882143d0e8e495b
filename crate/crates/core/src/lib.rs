//! Dense (sub-wavelength) planar antenna arrays with mutual coupling, and the
//! achievable rates of zero-forcing links built on 1-bit ADCs and DACs.
//!
//! The crate is organized bottom-up:
//!
//! - [`array`]: steering vectors, the coupling matrix `B` (closed form and
//!   spherical-integral oracle), passivity checks and the approximate
//!   null-space projector used for non-radiating dithering.
//! - [`channel`]: isotropic Rayleigh channels `h = B^{1/2} s` and finite
//!   multipath channels.
//! - [`quantization`]: the rescaled complex sign quantizer, the arcsine law and
//!   the Bussgang split.
//! - [`uplink`] / [`downlink`]: ideal and 1-bit zero-forcing rate bounds.
//! - [`harness`]: fixed-aperture sweeps, CSV output and the model self-check.
//!
//! All powers are expressed relative to the noise density `N0`; every quantity
//! depends on the element spacing only through the ratio `a/λ`.

pub mod array;
pub mod bessel;
pub mod channel;
pub mod downlink;
mod error;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod quantization;
pub mod uplink;

pub use error::{Error, Result};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

pub use num_complex::Complex64 as C64;
