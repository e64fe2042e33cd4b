//! Moving-horizon estimation of the state and an additive disturbance bias.

mod mhe;
mod stats;

pub use mhe::{
    mhe_solve, prior_update, ClosedLoopWindow, MheConfig, MheError, MheSolution, PriorUpdate,
    WindowDynamics,
};
pub use stats::{disturbance_stats, DisturbanceEstimate, DriftConfig};
