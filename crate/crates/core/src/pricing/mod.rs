//! Two-stage pricing: user time-of-use tariffs with the follower's load
//! response, then EV tariffs from the renewable surplus and satisfaction-
//! maximising EV schedules.

mod ev_dp;
mod ev_tariff;
mod follower;
mod leader;
mod tariff;

pub use ev_dp::{
    evaluate_levels, immediate_plan, min_cost_schedule, optimize_ev_schedule, satisfaction_bounds,
    EvPlan, EvPrices, Satisfaction,
};
pub use ev_tariff::{ev_dynamic_tariff, EvTariff, MicrogridHourState};
pub use follower::{follower_load_response, user_cost, LoadProfile};
pub use leader::{ev_energy_payment, leader_fitness};
pub use tariff::{PriceBand, TariffSchedule, EV_PRICE_CEILING, EV_PRICE_FLOOR};
