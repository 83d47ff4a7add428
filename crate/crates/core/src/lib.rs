pub mod basis;
pub mod error;
pub mod linalg;
pub mod manybody;
pub mod mbspectrum;
pub mod simplex;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
