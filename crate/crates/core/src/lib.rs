//! Passivity-preserving balanced truncation for second-order mechanical
//! systems, with recovery of a second-order realization from the reduced
//! first-order model.

pub mod analysis;
pub mod error;
pub mod fo_realization;
pub mod io;
pub mod kyp;
pub mod linalg;
pub mod pipeline;
pub mod prbt;
pub mod recovery;
pub mod so_model;
pub mod tolerances;

pub use error::{Error, Result};
