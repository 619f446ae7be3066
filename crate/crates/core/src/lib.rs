//! Separability certification for two- and three-qubit density matrices.
//!
//! States are analyzed through their Pauli-basis coefficients. When a state
//! is shown to be separable, an explicit ensemble of product states is built
//! and checked by reconstruction.

pub mod decomposition;
pub mod density;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod sep2_correlation;
pub mod sep2_general;
pub mod sep3_correlation;
mod verdict;

pub use error::{Error, Result};
pub use verdict::Verdict;

/// Cheap, well-mixed seed derivation for independent sub-streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
