pub mod analysis;
pub mod elimination;
pub mod error;
pub mod identifiability;
pub mod iop;
pub mod matrix;
pub mod model;
pub mod stacking;
pub mod verifier;

pub use error::{CoreError, Result};
