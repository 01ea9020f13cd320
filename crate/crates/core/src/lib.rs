//! Free components of quantum states and channels, and the error and cost
//! bounds they imply for purification, distillation, error correction,
//! communication and noisy gate synthesis.

pub mod error;
pub mod linalg;
pub mod sdp;
pub mod states;
pub mod channels;
pub mod free_sets;
pub mod bounds;
pub mod figures;

pub use error::{Error, Result};
