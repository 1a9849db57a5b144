use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::HOURS;

/// Battery and charger parameters shared by a fleet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Battery {
    /// Rated capacity, kWh.
    pub capacity_kwh: f64,
    /// Charger limit in either direction, kW.
    pub max_power_kw: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    pub soc_min: f64,
    pub soc_max: f64,
}

impl Default for Battery {
    fn default() -> Self {
        Self {
            capacity_kwh: 30.0,
            max_power_kw: 3.0,
            charge_eff: 0.95,
            discharge_eff: 0.95,
            soc_min: 0.1,
            soc_max: 1.0,
        }
    }
}

impl Battery {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_kwh > 0.0) || !(self.max_power_kw > 0.0) {
            return Err(Error::param(
                "battery capacity and charger power must be positive",
            ));
        }
        for eff in [self.charge_eff, self.discharge_eff] {
            if !(eff > 0.0 && eff <= 1.0) {
                return Err(Error::param("battery efficiencies must lie in (0, 1]"));
            }
        }
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return Err(Error::param(
                "battery SOC bounds must satisfy 0 <= min < max <= 1",
            ));
        }
        Ok(())
    }
}

/// One vehicle: its connection window, energy need and battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvProfile {
    pub id: usize,
    pub microgrid: usize,
    pub controllable: bool,
    /// First connected hour slot, 0..24.
    pub arrive_hour: usize,
    /// Slot at which the vehicle leaves, 0..24. Equal to `arrive_hour`
    /// means connected around the clock.
    pub depart_hour: usize,
    pub soc_arrival: f64,
    pub soc_required: f64,
    pub battery: Battery,
}

impl EvProfile {
    pub fn validate(&self) -> Result<()> {
        self.battery.validate()?;
        if self.arrive_hour >= HOURS || self.depart_hour >= HOURS {
            return Err(Error::param(format!(
                "ev {}: window hours must be in 0..24",
                self.id
            )));
        }
        let b = &self.battery;
        for (name, soc) in [
            ("arrival", self.soc_arrival),
            ("required", self.soc_required),
        ] {
            if !(soc >= b.soc_min - 1e-12 && soc <= b.soc_max + 1e-12) {
                return Err(Error::param(format!(
                    "ev {}: {name} SOC {soc} outside [{}, {}]",
                    self.id, b.soc_min, b.soc_max
                )));
            }
        }
        Ok(())
    }

    /// Number of connected slots.
    pub fn window_len(&self) -> usize {
        match (self.depart_hour + HOURS - self.arrive_hour) % HOURS {
            0 => HOURS,
            n => n,
        }
    }

    /// Hour of day of the `i`-th connected slot.
    pub fn slot_hour(&self, i: usize) -> usize {
        (self.arrive_hour + i) % HOURS
    }

    pub fn is_connected(&self, hour: usize) -> bool {
        (hour + HOURS - self.arrive_hour) % HOURS < self.window_len()
    }
}

/// SOC after one interval. `p` is the charger-side magnitude in kW.
///
/// Charging stores `p * eta_c * dt`; discharging delivers `p * dt` and
/// drains `p * dt / eta_d` from the cells.
pub fn soc_transition(
    soc: f64,
    p: f64,
    charging: bool,
    discharging: bool,
    battery: &Battery,
    dt: f64,
) -> Result<f64> {
    if charging && discharging {
        return Err(Error::param(
            "a battery cannot charge and discharge in the same interval",
        ));
    }
    if !(p >= 0.0) || p > battery.max_power_kw + 1e-9 {
        return Err(Error::param(format!(
            "charger power {p} kW outside [0, {}]",
            battery.max_power_kw
        )));
    }
    let e = battery.capacity_kwh;
    let next = if charging {
        soc + p * battery.charge_eff * dt / e
    } else if discharging {
        soc - p * dt / (battery.discharge_eff * e)
    } else {
        soc
    };
    let tol = 1e-9;
    if next < battery.soc_min - tol || next > battery.soc_max + tol {
        return Err(Error::SocBound {
            soc: next,
            min: battery.soc_min,
            max: battery.soc_max,
        });
    }
    Ok(next)
}

/// Discrete SOC grid anchored at the arrival SOC.
///
/// Level `q` is `soc_arrival + q * step`. The step divides one full-power
/// charging hour exactly, so charging moves `charge_steps` levels; a
/// discharge hour moves the largest whole number of levels the charger
/// allows. Moves are clipped at the lowest and highest admissible level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocLattice {
    pub step: f64,
    pub charge_steps: i32,
    pub discharge_steps: i32,
    pub lowest: i32,
    pub highest: i32,
    /// Minimum final level meeting the departure requirement.
    pub required: i32,
    pub slots: usize,
}

const LEVEL_EPS: f64 = 1e-9;

impl SocLattice {
    pub fn new(profile: &EvProfile, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution < 1.0) {
            return Err(Error::param("SOC resolution must lie in (0, 1)"));
        }
        profile.validate()?;
        let b = &profile.battery;
        let charge_delta = b.max_power_kw * b.charge_eff / b.capacity_kwh;
        let charge_steps = (charge_delta / resolution - LEVEL_EPS).ceil().max(1.0) as i32;
        let step = charge_delta / charge_steps as f64;
        let discharge_delta = b.max_power_kw / (b.discharge_eff * b.capacity_kwh);
        let discharge_steps = (discharge_delta / step + LEVEL_EPS).floor() as i32;
        let lowest = ((b.soc_min - profile.soc_arrival) / step - LEVEL_EPS)
            .ceil()
            .min(0.0) as i32;
        let highest = ((b.soc_max - profile.soc_arrival) / step + LEVEL_EPS)
            .floor()
            .max(0.0) as i32;
        // A requirement between the top level and soc_max counts as met at
        // the top level. The looser tolerance absorbs six-decimal table
        // rounding of the required SOC.
        let required = ((profile.soc_required - profile.soc_arrival) / step - 1e-4)
            .ceil()
            .max(0.0)
            .min(highest as f64) as i32;
        let slots = profile.window_len();
        let reachable = highest.min(charge_steps.saturating_mul(slots as i32));
        if required > reachable {
            return Err(Error::DepartureUnreachable {
                ev: profile.id,
                required: profile.soc_required,
                reachable: profile.soc_arrival + reachable as f64 * step,
            });
        }
        Ok(Self {
            step,
            charge_steps,
            discharge_steps,
            lowest,
            highest,
            required,
            slots,
        })
    }

    pub fn soc(&self, profile: &EvProfile, q: i32) -> f64 {
        profile.soc_arrival + q as f64 * self.step
    }

    pub fn after_charge(&self, q: i32) -> i32 {
        (q + self.charge_steps).min(self.highest)
    }

    pub fn after_discharge(&self, q: i32) -> i32 {
        (q - self.discharge_steps).max(self.lowest)
    }

    /// Grid-side power of moving from level `from` to `to` in one hour:
    /// positive draws from the grid, negative feeds it.
    pub fn grid_power(&self, battery: &Battery, from: i32, to: i32) -> f64 {
        let stored = (to - from) as f64 * self.step * battery.capacity_kwh;
        if stored >= 0.0 {
            stored / battery.charge_eff
        } else {
            stored * battery.discharge_eff
        }
    }
}
