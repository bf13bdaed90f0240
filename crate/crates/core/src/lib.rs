//! Weyl spreading sequences and chip-synchronous CDMA analysis.
//!
//! * [`sequences`]: Weyl sequences, m-sequences, Gold codes.
//! * [`correlation`]: cross-correlation `C(l)`, despreading correlation
//!   `W(l)` and the signed shift operators behind it.
//! * [`spectral`]: closed-form eigensystems of those operators.
//! * [`decomposition`]: coordinates of a sequence in the two Weyl bases.
//! * [`simulator`]: Monte Carlo BER and the SNR lower bound.
//! * [`formats`]: CSV/JSON/TOML readers and writers.

pub mod correlation;
pub mod decomposition;
pub mod error;
pub mod formats;
pub mod sequences;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
