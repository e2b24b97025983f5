pub mod atmosphere;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod forward;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
