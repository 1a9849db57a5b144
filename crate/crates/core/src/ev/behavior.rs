use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::battery::{Battery, EvProfile};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::table::{csv_err, f6, field, writer};
use crate::HOURS;

/// Travel-pattern distributions of a fleet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvBehaviorModel {
    /// Return (grid-connection) time, normal wrapped onto the day, h.
    pub return_mean: f64,
    pub return_std: f64,
    /// First departure of the next day, h.
    pub travel_mean: f64,
    pub travel_std: f64,
    /// Daily mileage, log-normal parameters of ln(km).
    pub mileage_log_mean: f64,
    pub mileage_log_std: f64,
    pub kwh_per_km: f64,
    /// SOC owners want at departure.
    pub soc_required: f64,
}

impl Default for EvBehaviorModel {
    fn default() -> Self {
        Self {
            return_mean: 17.47,
            return_std: 3.41,
            travel_mean: 8.92,
            travel_std: 3.24,
            mileage_log_mean: 2.98,
            mileage_log_std: 1.14,
            kwh_per_km: 0.15,
            soc_required: 0.9,
        }
    }
}

impl EvBehaviorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.return_std > 0.0 && self.travel_std > 0.0 && self.mileage_log_std > 0.0) {
            return Err(Error::param(
                "EV behaviour standard deviations must be positive",
            ));
        }
        if !(self.kwh_per_km > 0.0) {
            return Err(Error::param("kwh_per_km must be positive"));
        }
        if !(self.return_mean.is_finite()
            && self.travel_mean.is_finite()
            && self.mileage_log_mean.is_finite())
        {
            return Err(Error::param("EV behaviour means must be finite"));
        }
        if !(0.0..=1.0).contains(&self.soc_required) {
            return Err(Error::param("required departure SOC must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// A sampled vehicle together with the continuous draws behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEv {
    pub profile: EvProfile,
    /// Return time in [0, 24), h.
    pub return_time: f64,
    /// Next first-travel time in [0, 24), h.
    pub first_travel_time: f64,
    pub mileage_km: f64,
}

/// Normal truncated to `mean ± 12` h and wrapped onto [0, 24).
fn wrapped_time<R: Rng + ?Sized>(mean: f64, std_dev: f64, rng: &mut R) -> f64 {
    let half = HOURS as f64 / 2.0;
    let normal = Normal::new(mean, std_dev).expect("validated std dev");
    let x = loop {
        let x = normal.sample(rng);
        if x > mean - half && x <= mean + half {
            break x;
        }
    };
    x.rem_euclid(HOURS as f64)
}

/// Monte-Carlo fleet for one microgrid.
///
/// The first `round(n * controllable_fraction)` vehicles are controllable.
/// Each vehicle draws from its own random stream, so a fleet does not depend
/// on the order vehicles are generated or processed in.
pub fn sample_fleet(
    n: usize,
    model: &EvBehaviorModel,
    battery: &Battery,
    controllable_fraction: f64,
    microgrid: usize,
    seed: u64,
) -> Result<Vec<SampledEv>> {
    model.validate()?;
    battery.validate()?;
    if !(0.0..=1.0).contains(&controllable_fraction) {
        return Err(Error::param("controllable fraction must lie in [0, 1]"));
    }
    if microgrid as u64 >= streams::FLEET_STRIDE || n as u64 >= streams::FLEET_STRIDE {
        return Err(Error::param(
            "fleet or microgrid index too large for stream layout",
        ));
    }
    let n_ctrl = (n as f64 * controllable_fraction).round() as usize;
    let mileage = LogNormal::new(model.mileage_log_mean, model.mileage_log_std)
        .map_err(|e| Error::param(format!("mileage distribution: {e}")))?;
    let per_hour = battery.max_power_kw * battery.charge_eff / battery.capacity_kwh;

    let mut fleet = Vec::with_capacity(n);
    for i in 0..n {
        let stream = streams::FLEET_BASE + microgrid as u64 * streams::FLEET_STRIDE + i as u64;
        let mut rng = stream_rng(seed, stream);
        let return_time = wrapped_time(model.return_mean, model.return_std, &mut rng);
        let first_travel_time = wrapped_time(model.travel_mean, model.travel_std, &mut rng);
        let km = mileage.sample(&mut rng);

        let arrive_hour = (return_time.ceil() as usize) % HOURS;
        let depart_hour = (first_travel_time.floor() as usize) % HOURS;
        let mut profile = EvProfile {
            id: i,
            microgrid,
            controllable: i < n_ctrl,
            arrive_hour,
            depart_hour,
            soc_arrival: 0.0,
            soc_required: model.soc_required.clamp(battery.soc_min, battery.soc_max),
            battery: *battery,
        };
        let used = km * model.kwh_per_km / battery.capacity_kwh;
        profile.soc_arrival = (profile.soc_required - used).clamp(battery.soc_min, battery.soc_max);
        // Short windows cannot always restore the full requirement; owners
        // then leave with whatever full-power charging delivers.
        let reachable = profile.soc_arrival + profile.window_len() as f64 * per_hour;
        profile.soc_required = profile.soc_required.min(reachable).min(battery.soc_max);

        fleet.push(SampledEv {
            profile,
            return_time,
            first_travel_time,
            mileage_km: km,
        });
    }
    Ok(fleet)
}

const FLEET_HEADER: [&str; 9] = [
    "ev_id",
    "microgrid",
    "controllable",
    "arrive",
    "depart",
    "soc_arrival",
    "soc_required",
    "capacity_kwh",
    "max_power_kw",
];

/// Writes the fleet table.
pub fn write_fleet<W: Write>(profiles: &[EvProfile], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(FLEET_HEADER)
        .map_err(|e| csv_err("fleet", e))?;
    for p in profiles {
        w.write_record([
            p.id.to_string(),
            p.microgrid.to_string(),
            u8::from(p.controllable).to_string(),
            p.arrive_hour.to_string(),
            p.depart_hour.to_string(),
            f6(p.soc_arrival),
            f6(p.soc_required),
            f6(p.battery.capacity_kwh),
            f6(p.battery.max_power_kw),
        ])
        .map_err(|e| csv_err("fleet", e))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a fleet table; efficiencies and SOC limits come from `template`.
pub fn read_fleet<R: Read>(input: R, template: &Battery) -> Result<Vec<EvProfile>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let headers = rdr.headers().map_err(|e| csv_err("fleet", e))?.clone();
    if headers.iter().ne(FLEET_HEADER) {
        return Err(Error::Table {
            table: "fleet".into(),
            message: format!("unexpected header {headers:?}"),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err("fleet", e))?;
        let controllable: u8 = field("fleet", &rec, 2)?;
        let p = EvProfile {
            id: field("fleet", &rec, 0)?,
            microgrid: field("fleet", &rec, 1)?,
            controllable: controllable != 0,
            arrive_hour: field("fleet", &rec, 3)?,
            depart_hour: field("fleet", &rec, 4)?,
            soc_arrival: field("fleet", &rec, 5)?,
            soc_required: field("fleet", &rec, 6)?,
            battery: Battery {
                capacity_kwh: field("fleet", &rec, 7)?,
                max_power_kw: field("fleet", &rec, 8)?,
                ..*template
            },
        };
        p.validate()?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_spread_pins_return_time() {
        let model = EvBehaviorModel {
            return_std: 1e-9,
            ..Default::default()
        };
        let fleet = sample_fleet(50, &model, &Battery::default(), 0.5, 0, 3).unwrap();
        for ev in &fleet {
            assert!((ev.return_time - 17.47).abs() < 1e-6);
            assert_eq!(ev.profile.arrive_hour, 18);
        }
    }

    #[test]
    fn controllable_prefix_count() {
        let fleet = sample_fleet(
            130,
            &EvBehaviorModel::default(),
            &Battery::default(),
            70.0 / 130.0,
            1,
            9,
        )
        .unwrap();
        assert_eq!(fleet.iter().filter(|e| e.profile.controllable).count(), 70);
        assert!(fleet[..70].iter().all(|e| e.profile.controllable));
    }

    #[test]
    fn vehicles_do_not_depend_on_fleet_size() {
        let m = EvBehaviorModel::default();
        let b = Battery::default();
        let small = sample_fleet(5, &m, &b, 0.0, 2, 11).unwrap();
        let large = sample_fleet(40, &m, &b, 0.0, 2, 11).unwrap();
        assert_eq!(small[..], large[..5]);
    }

    #[test]
    fn fleet_table_round_trips() {
        let fleet: Vec<EvProfile> = sample_fleet(
            20,
            &EvBehaviorModel::default(),
            &Battery::default(),
            0.5,
            0,
            1,
        )
        .unwrap()
        .into_iter()
        .map(|e| e.profile)
        .collect();
        let mut buf = Vec::new();
        write_fleet(&fleet, &mut buf).unwrap();
        let back = read_fleet(buf.as_slice(), &Battery::default()).unwrap();
        assert_eq!(back.len(), fleet.len());
        for (a, b) in fleet.iter().zip(&back) {
            assert_eq!(
                (a.id, a.arrive_hour, a.depart_hour, a.controllable),
                (b.id, b.arrive_hour, b.depart_hour, b.controllable)
            );
            assert!((a.soc_arrival - b.soc_arrival).abs() <= 5e-7);
            assert!((a.soc_required - b.soc_required).abs() <= 5e-7);
        }
    }
}
