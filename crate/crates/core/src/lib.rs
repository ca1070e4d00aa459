pub mod baseline;
pub mod bench;
pub mod circuit;
pub mod compiled;
pub mod device;
pub mod elaborate;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod sweep;
pub mod rng;
pub mod routing;
pub mod stratify;
pub mod unitary;
pub mod verify;

pub use error::{Error, Result};
