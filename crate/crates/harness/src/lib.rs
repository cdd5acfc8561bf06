//! Simulation runs, convergence metrics, artifacts and the acceptance driver
//! for the `hierobs` observer.

pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod sim;
pub mod verify;

pub use config::{FeedMode, OmegaDotSource, RunConfig};
pub use error::{Error, Result};
pub use sim::{run_simulation, Row, RunRecord};
