pub mod error;
pub mod fields;
pub mod harmonics;
pub mod linops;
pub mod profiles;
pub mod spectra;

pub use error::{Error, Result};
