//! Controlled continuous *-g-frames: systems, frame operators and bounds,
//! the analysis/synthesis pair, duals, multipliers, instance generators and
//! the executable theorem suite.

pub mod duals;
pub mod generate;
pub mod multiplier;
pub mod system;
pub mod transform;

pub use duals::*;
pub use generate::*;
pub use multiplier::*;
pub use system::*;
pub use theorems::*;
pub use transform::*;
pub mod theorems;
