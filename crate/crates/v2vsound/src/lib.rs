pub mod config;
pub mod error;
pub mod gps;
pub mod presets;
pub mod process;
pub mod run;
pub mod session;
pub mod simulate;
pub mod validate;

pub use error::{Error, Result};
