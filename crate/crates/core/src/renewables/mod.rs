//! Wind and PV output models, forecast-error scenario generation and
//! probability-distance scenario reduction.

mod dist;
mod forecast;
mod lhs;
mod pv;
mod scenario;
mod wind;

pub use dist::{beta_quantile, normal_quantile, standard_normal_quantile};
pub use forecast::{generate_forecast_scenarios, ErrorDistribution, ForecastErrorModel};
pub use lhs::lhs_sample;
pub use pv::{pv_max_power, pv_max_power_with, PvCurve, PvParams, PvSearch};
pub use scenario::{
    generate_joint_scenarios, reduce_scenarios, reduce_scenarios_traced, Deletion, ErrorModels,
    MicrogridTrajectory, Scenario, ScenarioSet, PROBABILITY_TOLERANCE,
};
pub use wind::{wind_power_from_speed, WindParams};
