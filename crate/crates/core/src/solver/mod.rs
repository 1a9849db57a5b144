//! Genetic leader search and the iterative bi-level procedure coupling
//! pricing, EV scheduling, alliance dispatch and cost allocation.

mod bilevel;
mod expected;
mod ga;
mod system;

pub use bilevel::{replay_matches, tpm_alliance_loop, LoopResult, LoopState, TraceRow};
pub use expected::expected_scenario_case;
pub use ga::{ga_optimize, GaConfig, GaResult, Population};
pub use system::{
    evaluate_microgrid, evaluate_system, merge_standalone, microgrid_profit, settle, EvPolicy,
    MicrogridModel, MicrogridOutcome, SchemeOptions, Settlement, SystemModel, SystemOutcome,
};
