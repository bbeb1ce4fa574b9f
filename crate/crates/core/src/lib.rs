pub mod association;
pub mod attention;
pub mod audio;
pub mod cli;
pub mod config;
pub mod doa;
pub mod engine;
pub mod error;
pub mod eval;
pub mod machine;
pub mod model;
pub mod par;
pub mod sim;

pub use error::{Error, Result};
