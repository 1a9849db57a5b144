use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::HOURS;

/// Lowest and highest EV price as multiples of the user price.
pub const EV_PRICE_FLOOR: f64 = 0.7;
pub const EV_PRICE_CEILING: f64 = 1.3;

/// Regulated interval for one hour's user price, yuan/kWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBand {
    pub min: f64,
    pub max: f64,
}

impl PriceBand {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && 0.0 <= min && min <= max) {
            return Err(Error::param(format!(
                "price band [{min}, {max}] must satisfy 0 <= min <= max"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn clamp(&self, price: f64) -> f64 {
        price.clamp(self.min, self.max)
    }

    pub fn contains(&self, price: f64) -> bool {
        price >= self.min - 1e-12 && price <= self.max + 1e-12
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// One microgrid's user and EV price vectors with the user-price bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    pub user_price: Vec<f64>,
    pub ev_price: Vec<f64>,
    pub band: Vec<PriceBand>,
}

impl TariffSchedule {
    /// EV price equal to the user price.
    pub fn uniform(user_price: Vec<f64>, band: Vec<PriceBand>) -> Result<Self> {
        let t = Self {
            ev_price: user_price.clone(),
            user_price,
            band,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.user_price.len() != HOURS
            || self.ev_price.len() != HOURS
            || self.band.len() != HOURS
        {
            return Err(Error::param(format!(
                "tariff vectors must have {HOURS} entries"
            )));
        }
        for h in 0..HOURS {
            let c = self.user_price[h];
            if !self.band[h].contains(c) {
                return Err(Error::param(format!(
                    "hour {h}: user price {c} outside band [{}, {}]",
                    self.band[h].min, self.band[h].max
                )));
            }
            let ev = self.ev_price[h];
            if ev < EV_PRICE_FLOOR * c - 1e-12 || ev > EV_PRICE_CEILING * c + 1e-12 {
                return Err(Error::param(format!(
                    "hour {h}: EV price {ev} outside [0.7, 1.3] x user price {c}"
                )));
            }
        }
        Ok(())
    }

    /// Highest EV price the tariff rules allow, per hour.
    pub fn ev_ceiling(&self) -> Vec<f64> {
        self.user_price
            .iter()
            .map(|c| EV_PRICE_CEILING * c)
            .collect()
    }
}
