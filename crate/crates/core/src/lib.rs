//! Controlled continuous *-g-frames over finite-dimensional Hilbert C*-modules.

pub mod controlled_frames;
pub mod dense;
pub mod error;
pub mod hilbert_module;
pub mod measure;
pub mod report;
pub mod stability;
pub mod star_algebra;

pub use error::{GFrameError, Result};
