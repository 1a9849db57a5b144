//! Multi-microgrid energy management with time-of-use pricing, EV
//! scheduling and alliance trading.

pub mod alliance;
pub mod case;
pub mod error;
pub mod ev;
pub mod pricing;
pub mod renewables;
pub mod rng;
pub mod solver;
pub mod table;

pub use error::{Error, Result, ValidationError};

/// Scheduling horizon, hours.
pub const HOURS: usize = 24;
