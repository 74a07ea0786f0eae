pub mod bootstrap;
pub mod error;
pub mod events;
pub mod jumps;
pub mod jwc;
pub mod market_data;
pub mod modwt;
pub mod pipeline;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
