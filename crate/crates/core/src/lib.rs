//! Core building blocks of a USV autonomy stack: decoupled speed and
//! sway/yaw-rate models, parametric fault and proximity disturbances,
//! outer-loop guidance behaviors, LQR-PI and model reference adaptive
//! inner-loop control, moving-horizon disturbance estimation, and
//! reachable-set certification over a computational graph of the closed
//! loop.
//!
//! Conventions used throughout: positions are NED metres (`x` north, `y`
//! east), heading is measured clockwise from true north and wrapped to
//! `(-pi, pi]`, body velocities are surge `u`, sway `v` and yaw rate `r`.
//! Thruster, thrust and rudder commands are in dimensionless command units.

pub mod control;
pub mod disturbance;
pub mod error;
pub mod estimation;
pub mod guidance;
pub mod reach;
pub mod vehicle;

pub use error::{Error, Result};
