//! Alliance dispatch between microgrids and the distribution grid, and
//! Shapley allocation of the alliance operating cost.

mod dispatch;
mod shapley;

pub use dispatch::{alliance_dispatch, AllianceParams, DispatchSolution, MicrogridPosition};
pub use shapley::{allocate, coalition_value, shapley_allocate, CoalitionAllocation, MAX_PLAYERS};
