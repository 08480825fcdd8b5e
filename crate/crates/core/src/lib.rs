//! Exact Hilbert-Schmidt determinantal moments of 2×2 quantum systems,
//! Legendre reconstruction of the densities they determine, and the
//! separability-probability series.
//!
//! The exact path works with [`ExactRational`] and [`HalfIntegerAlpha`]
//! throughout; densities are evaluated in MPFR floats ([`BigReal`]) at a
//! caller-chosen number of decimal digits.

pub mod bigreal;
pub mod cache;
pub mod error;
pub mod exact;
pub mod mc;
pub mod moments;
pub mod pfq;
pub mod quadrature;
pub mod rebit;
pub mod reconstruct;
pub mod series;

pub use bigreal::BigReal;
pub use error::{Error, Result};
pub use exact::{ExactRational, GammaHalfValue, HalfIntegerAlpha};
pub use moments::{MomentFamily, MomentSequence, Support};
