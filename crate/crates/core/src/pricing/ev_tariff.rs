use crate::error::{Error, Result};
use crate::HOURS;

use super::tariff::{EV_PRICE_CEILING, EV_PRICE_FLOOR};

/// Hourly renewable output and user load of one microgrid, kW.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridHourState {
    pub wt: Vec<f64>,
    pub pv: Vec<f64>,
    pub load: Vec<f64>,
}

impl MicrogridHourState {
    /// Renewable output minus load.
    pub fn unbalanced(&self, h: usize) -> f64 {
        self.wt[h] + self.pv[h] - self.load[h]
    }

    /// Surplus ratio used to discount EV charging; zero where there is no load.
    pub fn impact_factor(&self, h: usize) -> Option<f64> {
        (self.load[h] > 0.0).then(|| self.unbalanced(h) / self.load[h])
    }
}

/// EV prices derived from the user price and the renewable surplus.
#[derive(Debug, Clone, PartialEq)]
pub struct EvTariff {
    pub price: Vec<f64>,
    /// Hours with zero load, where the surplus signal was taken as zero.
    pub no_load_hours: Vec<usize>,
}

/// `C - R` per hour, clamped to 0.7..1.3 times the user price. The ratio
/// `R` is applied directly in yuan/kWh.
pub fn ev_dynamic_tariff(user_price: &[f64], state: &MicrogridHourState) -> Result<EvTariff> {
    if user_price.len() != HOURS
        || state.wt.len() != HOURS
        || state.pv.len() != HOURS
        || state.load.len() != HOURS
    {
        return Err(Error::param(format!(
            "EV tariff inputs must have {HOURS} entries"
        )));
    }
    let mut no_load_hours = Vec::new();
    let price = (0..HOURS)
        .map(|h| {
            let c = user_price[h];
            let r = state.impact_factor(h).unwrap_or_else(|| {
                no_load_hours.push(h);
                0.0
            });
            (c - r).clamp(EV_PRICE_FLOOR * c, EV_PRICE_CEILING * c)
        })
        .collect();
    Ok(EvTariff {
        price,
        no_load_hours,
    })
}
