use serde::{Deserialize, Serialize};

use super::battery::{soc_transition, EvProfile, SocLattice};
use crate::error::{Error, Result};
use crate::HOURS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Idle,
    Charge,
    Discharge,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Idle => "idle",
            Mode::Charge => "charge",
            Mode::Discharge => "discharge",
        }
    }
}

/// Hourly plan of one vehicle, indexed by hour of day.
///
/// `soc[h]` is the SOC at the end of hour `h` while connected and the
/// arrival SOC while away.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvSchedule {
    pub ev_id: usize,
    pub microgrid: usize,
    pub charge_kw: Vec<f64>,
    pub discharge_kw: Vec<f64>,
    pub soc: Vec<f64>,
}

impl EvSchedule {
    pub fn idle(profile: &EvProfile) -> Self {
        Self {
            ev_id: profile.id,
            microgrid: profile.microgrid,
            charge_kw: vec![0.0; HOURS],
            discharge_kw: vec![0.0; HOURS],
            soc: vec![profile.soc_arrival; HOURS],
        }
    }

    /// Builds the plan from lattice levels visited at each slot boundary
    /// (`levels[0]` is the arrival level 0, one entry per slot after it).
    pub fn from_levels(profile: &EvProfile, lattice: &SocLattice, levels: &[i32]) -> Self {
        debug_assert_eq!(levels.len(), lattice.slots + 1);
        let mut s = Self::idle(profile);
        for (i, pair) in levels.windows(2).enumerate() {
            let h = profile.slot_hour(i);
            let p = lattice.grid_power(&profile.battery, pair[0], pair[1]);
            if p > 0.0 {
                s.charge_kw[h] = p;
            } else if p < 0.0 {
                s.discharge_kw[h] = -p;
            }
            s.soc[h] = lattice.soc(profile, pair[1]);
        }
        s
    }

    /// Net grid draw per hour: charging positive, discharging negative.
    pub fn grid_power(&self) -> Vec<f64> {
        self.charge_kw
            .iter()
            .zip(&self.discharge_kw)
            .map(|(c, d)| c - d)
            .collect()
    }

    pub fn mode(&self, hour: usize) -> Mode {
        if self.charge_kw[hour] > 0.0 {
            Mode::Charge
        } else if self.discharge_kw[hour] > 0.0 {
            Mode::Discharge
        } else {
            Mode::Idle
        }
    }

    /// Energy through the charger over the day, kWh.
    pub fn throughput_kwh(&self) -> f64 {
        self.charge_kw.iter().chain(&self.discharge_kw).sum()
    }

    /// Checks charger limits, mutual exclusion, SOC bounds and dynamics,
    /// window confinement and the departure requirement.
    pub fn validate(&self, profile: &EvProfile) -> Result<()> {
        let b = &profile.battery;
        let tol = 1e-7;
        let fail =
            |h: usize, what: &str| Err(Error::param(format!("ev {} hour {h}: {what}", profile.id)));
        if self.charge_kw.len() != HOURS
            || self.discharge_kw.len() != HOURS
            || self.soc.len() != HOURS
        {
            return Err(Error::param(format!(
                "ev {}: schedule must cover {HOURS} hours",
                profile.id
            )));
        }
        for h in 0..HOURS {
            if !profile.is_connected(h) && (self.charge_kw[h] != 0.0 || self.discharge_kw[h] != 0.0)
            {
                return fail(h, "power scheduled outside the connection window");
            }
        }
        let mut soc = profile.soc_arrival;
        for i in 0..profile.window_len() {
            let h = profile.slot_hour(i);
            let (c, d) = (self.charge_kw[h], self.discharge_kw[h]);
            if c < 0.0 || d < 0.0 {
                return fail(h, "negative power magnitude");
            }
            if c > 0.0 && d > 0.0 {
                return fail(h, "simultaneous charge and discharge");
            }
            let next = if c > 0.0 {
                soc_transition(soc, c, true, false, b, 1.0)
            } else {
                soc_transition(soc, d, false, d > 0.0, b, 1.0)
            };
            soc = next.map_err(|e| Error::param(format!("ev {} hour {h}: {e}", profile.id)))?;
            if (soc - self.soc[h]).abs() > tol {
                return fail(h, "SOC trajectory inconsistent with power");
            }
        }
        // Requirements inside the last charging hour below soc_max are met by
        // the top reachable level.
        let top_slack = b.max_power_kw * b.charge_eff / b.capacity_kwh;
        if soc < profile.soc_required - 1e-6 && soc < b.soc_max - top_slack {
            return Err(Error::param(format!(
                "ev {}: departs with SOC {soc:.6} below requirement {:.6}",
                profile.id, profile.soc_required
            )));
        }
        Ok(())
    }
}

/// Linear battery wear cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Degradation {
    /// Battery replacement cost, yuan.
    pub replacement_cost: f64,
    /// Charger throughput over the battery life, kWh.
    pub lifetime_throughput_kwh: f64,
}

impl Default for Degradation {
    fn default() -> Self {
        Self {
            replacement_cost: 18_000.0,
            lifetime_throughput_kwh: 100_000.0,
        }
    }
}

impl Degradation {
    pub fn validate(&self) -> Result<()> {
        if !(self.replacement_cost > 0.0 && self.lifetime_throughput_kwh > 0.0) {
            return Err(Error::param("degradation cost parameters must be positive"));
        }
        Ok(())
    }

    pub fn per_kwh(&self) -> f64 {
        self.replacement_cost / self.lifetime_throughput_kwh
    }
}

/// Affordability range of one owner plus the wear model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatisfactionBounds {
    pub f_max: f64,
    pub f_min: f64,
    pub degradation: Degradation,
}

pub fn battery_degradation_cost(schedule: &EvSchedule, bounds: &SatisfactionBounds) -> f64 {
    schedule.throughput_kwh() * bounds.degradation.per_kwh()
}

/// Owner expense: charging bought at `charge_price`, discharge paid back at
/// `discharge_price`, plus wear.
pub fn ev_expense(
    schedule: &EvSchedule,
    charge_price: &[f64],
    discharge_price: &[f64],
    wear: &Degradation,
) -> f64 {
    let energy: f64 = (0..HOURS)
        .map(|h| {
            schedule.charge_kw[h] * charge_price[h] - schedule.discharge_kw[h] * discharge_price[h]
        })
        .sum();
    energy + schedule.throughput_kwh() * wear.per_kwh()
}

pub fn price_satisfaction(f_ev: f64, bounds: &SatisfactionBounds) -> Result<f64> {
    let span = (bounds.f_max - bounds.f_min).abs();
    if !(span > 0.0) {
        return Err(Error::param("price satisfaction needs F_max != F_min"));
    }
    Ok((1.0 - (f_ev - bounds.f_min) / span).clamp(0.0, 1.0))
}

/// One vehicle's travel satisfaction from signed hourly grid power.
pub fn travel_contribution(power: &[f64], outmax: &[f64], outmin: &[f64]) -> f64 {
    let span: f64 = outmax.iter().zip(outmin).map(|(a, b)| (a - b).abs()).sum();
    if span <= 1e-12 {
        return 1.0;
    }
    let dev: f64 = outmax.iter().zip(power).map(|(a, p)| (a - p).abs()).sum();
    1.0 - dev / span
}

/// Sum of per-vehicle travel contributions over a fleet.
pub fn travel_satisfaction(
    schedules: &[EvSchedule],
    refs: &[(EvSchedule, EvSchedule)],
) -> Result<f64> {
    if schedules.len() != refs.len() {
        return Err(Error::param("one reference pair per schedule required"));
    }
    Ok(schedules
        .iter()
        .zip(refs)
        .map(|(s, (hi, lo))| {
            travel_contribution(&s.grid_power(), &hi.grid_power(), &lo.grid_power())
        })
        .sum())
}

/// Mean of `theta + delta` over entities.
pub fn comprehensive_satisfaction(thetas: &[f64], deltas: &[f64]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::param("comprehensive satisfaction of an empty set"));
    }
    if thetas.len() != deltas.len() {
        return Err(Error::param("theta and delta counts differ"));
    }
    Ok(thetas.iter().zip(deltas).map(|(t, d)| t + d).sum::<f64>() / thetas.len() as f64)
}

/// Immediate full-power charging until the top SOC level.
pub fn immediate_levels(lattice: &SocLattice) -> Vec<i32> {
    let mut levels = Vec::with_capacity(lattice.slots + 1);
    let mut q = 0;
    levels.push(q);
    for _ in 0..lattice.slots {
        q = lattice.after_charge(q);
        levels.push(q);
    }
    levels
}

/// Latest-start charging that just meets the departure requirement.
pub fn latest_levels(lattice: &SocLattice) -> Vec<i32> {
    let kc = lattice.charge_steps;
    let need = lattice.required;
    let n = ((need + kc - 1) / kc) as usize;
    let mut levels = vec![0; lattice.slots + 1];
    let start = lattice.slots - n;
    let mut q = 0;
    for i in start..lattice.slots {
        let remaining = (lattice.slots - i - 1) as i32;
        q = need - remaining * kc;
        levels[i + 1] = q;
    }
    debug_assert!(n == 0 || q == need);
    levels
}

/// Maximum- and minimum-readiness reference plans.
pub fn reference_schedules(profile: &EvProfile, lattice: &SocLattice) -> (EvSchedule, EvSchedule) {
    (
        EvSchedule::from_levels(profile, lattice, &immediate_levels(lattice)),
        EvSchedule::from_levels(profile, lattice, &latest_levels(lattice)),
    )
}
