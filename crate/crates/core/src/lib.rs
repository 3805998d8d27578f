pub mod bench;
pub mod cli;
pub mod degrade;
pub mod error;
pub mod imagecore;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use imagecore::Image;
