//! Case files, scheme and method orchestration, and result export.

mod build;
mod export;
mod file;
mod methods;
mod schemes;

pub use build::{
    build_fleet, day_ahead_forecasts, error_models, generate_scenarios, prepare, system_model,
    Overrides, PreparedCase,
};
pub use export::*;
pub use file::*;
pub use methods::*;
pub use schemes::*;
