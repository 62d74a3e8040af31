//! Norms, numerical ranges and numerical radii of homogeneous polynomials
//! between finite-dimensional `ℓ_p` spaces, measured relative to a fixed
//! norm-one polynomial `Q`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spaces`]: `ℓ_p^n` over ℝ or ℂ, dual pairings, norming functionals.
//! * [`poly`]: sparse monomial polynomials and their algebra.
//! * [`optim`]: global maximisation over unit spheres.
//! * [`range`]: numerical radius estimators and range clouds.
//! * [`index`]: upper bounds on the polynomial numerical index.
//! * [`cases`]: a catalogue of worked examples with known answers.

pub mod cases;
pub mod error;
pub mod index;
pub mod optim;
pub mod poly;
pub mod range;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
