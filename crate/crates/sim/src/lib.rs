//! Scenario harness for the USV autonomy stack: configuration, truth
//! plant, sensors, multi-rate loop, logging, metrics and the built-in suite.

pub mod config;
pub mod error;
pub mod estimator;
pub mod log;
pub mod metrics;
pub mod mission;
pub mod offline;
pub mod plant;
pub mod runner;
pub mod sensors;
pub mod suite;

pub use config::ScenarioConfig;
pub use error::{SimError, SimResult};
pub use log::{Outcome, Record, RunLog, RunSummary};
pub use runner::run_scenario;
