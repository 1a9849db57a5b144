//! EV fleets: travel-pattern sampling, battery dynamics, wear cost and the
//! owner satisfaction measures.

mod battery;
mod behavior;
mod schedule;

pub use battery::{soc_transition, Battery, EvProfile, SocLattice};
pub use behavior::{read_fleet, sample_fleet, write_fleet, EvBehaviorModel, SampledEv};
pub use schedule::{
    battery_degradation_cost, comprehensive_satisfaction, ev_expense, immediate_levels,
    latest_levels, price_satisfaction, reference_schedules, travel_contribution,
    travel_satisfaction, Degradation, EvSchedule, Mode, SatisfactionBounds,
};
