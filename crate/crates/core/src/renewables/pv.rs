use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-diode-style engineering model of a PV module.
///
/// Voltages in V, currents in A, irradiance in W/m², temperatures in °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvParams {
    pub short_circuit_current: f64,
    pub open_circuit_voltage: f64,
    pub mpp_voltage: f64,
    pub mpp_current: f64,
    pub reference_irradiance: f64,
    pub series_resistance: f64,
    pub reference_temp: f64,
    /// Panel temperature coefficient, °C·m²/W. Cell temperature is
    /// `ambient - temp_coefficient * irradiance`.
    pub temp_coefficient: f64,
    /// Current temperature compensation, A/°C.
    pub current_temp_coeff: f64,
    /// Voltage temperature compensation, V/°C.
    pub voltage_temp_coeff: f64,
}

/// Voltage search used to locate the maximum power point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PvSearch {
    pub grid_points: usize,
    pub refinements: usize,
}

impl Default for PvSearch {
    fn default() -> Self {
        Self {
            grid_points: 1000,
            refinements: 3,
        }
    }
}

/// Curve coefficients of the module at one irradiance/temperature condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCurve {
    pub c1: f64,
    pub c2: f64,
    pub delta_i: f64,
    pub delta_u: f64,
    isc: f64,
    uoc: f64,
}

impl PvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mpp_voltage > 0.0 && self.mpp_voltage < self.open_circuit_voltage) {
            return Err(Error::param("PV requires 0 < U_m < U_oc"));
        }
        if !(self.mpp_current > 0.0 && self.mpp_current < self.short_circuit_current) {
            return Err(Error::param("PV requires 0 < I_m < I_sc"));
        }
        if !(self.reference_irradiance > 0.0) {
            return Err(Error::param("PV reference irradiance must be positive"));
        }
        Ok(())
    }

    /// Nameplate maximum power, kW.
    pub fn nameplate_kw(&self) -> f64 {
        self.mpp_voltage * self.mpp_current / 1000.0
    }

    pub fn curve(&self, irradiance: f64, ambient_temp: f64) -> PvCurve {
        let isc = self.short_circuit_current;
        let uoc = self.open_circuit_voltage;
        let c2 = (self.mpp_voltage / uoc - 1.0) / (1.0 - self.mpp_current / isc).ln();
        let c1 = (1.0 - self.mpp_current / isc) * (-self.mpp_voltage / (c2 * uoc)).exp();
        let cell_temp = ambient_temp - self.temp_coefficient * irradiance;
        let delta_t = cell_temp - self.reference_temp;
        let ratio = irradiance / self.reference_irradiance;
        let delta_i = self.current_temp_coeff * delta_t * ratio + (ratio - 1.0) * isc;
        let delta_u = -self.voltage_temp_coeff * delta_t - self.series_resistance * delta_i;
        PvCurve {
            c1,
            c2,
            delta_i,
            delta_u,
            isc,
            uoc,
        }
    }
}

impl PvCurve {
    /// Module current at terminal voltage `u`.
    pub fn current(&self, u: f64) -> f64 {
        self.isc * (1.0 - self.c1 * (((u - self.delta_u) / (self.c2 * self.uoc)).exp() - 1.0))
            + self.delta_i
    }

    /// Voltage at which the current crosses zero, or `None` if the module
    /// delivers no current at all.
    pub fn zero_current_voltage(&self) -> Option<f64> {
        if self.current(0.0) <= 0.0 {
            return None;
        }
        let mut hi = (self.uoc + self.delta_u.abs()).max(1.0);
        while self.current(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.current(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

/// Maximum module output in kW at irradiance `irradiance` and ambient
/// temperature `ambient_temp`, using the default voltage search.
pub fn pv_max_power(irradiance: f64, ambient_temp: f64, params: &PvParams) -> Result<f64> {
    pv_max_power_with(irradiance, ambient_temp, params, PvSearch::default())
}

pub fn pv_max_power_with(
    irradiance: f64,
    ambient_temp: f64,
    params: &PvParams,
    search: PvSearch,
) -> Result<f64> {
    params.validate()?;
    if !(irradiance >= 0.0) {
        return Err(Error::param(format!(
            "irradiance must be non-negative, got {irradiance}"
        )));
    }
    if search.grid_points < 3 {
        return Err(Error::param(
            "PV voltage search needs at least 3 grid points",
        ));
    }
    let curve = params.curve(irradiance, ambient_temp);
    let Some(u_open) = curve.zero_current_voltage() else {
        return Ok(0.0);
    };
    let power = |u: f64| u * curve.current(u);

    let n = search.grid_points;
    let (mut lo, mut hi) = (0.0, u_open);
    let mut best = 0.0_f64;
    for _ in 0..=search.refinements {
        let step = (hi - lo) / (n - 1) as f64;
        let mut best_idx = 0;
        let mut best_here = f64::NEG_INFINITY;
        for i in 0..n {
            let p = power(lo + step * i as f64);
            if p > best_here {
                best_here = p;
                best_idx = i;
            }
        }
        best = best.max(best_here);
        let centre = lo + step * best_idx as f64;
        lo = (centre - step).max(0.0);
        hi = (centre + step).min(u_open);
    }
    Ok(best.max(0.0) / 1000.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn module() -> PvParams {
        PvParams {
            short_circuit_current: 8.7,
            open_circuit_voltage: 37.4,
            mpp_voltage: 30.3,
            mpp_current: 8.25,
            reference_irradiance: 1000.0,
            series_resistance: 0.3,
            reference_temp: 25.0,
            temp_coefficient: -0.03,
            current_temp_coeff: 0.0025,
            voltage_temp_coeff: 0.12,
        }
    }

    #[test]
    fn dark_module_produces_nothing() {
        let p = module();
        let out = pv_max_power(0.0, 20.0, &p).unwrap();
        assert!(out.abs() <= 1e-6 * p.nameplate_kw(), "{out}");
    }

    #[test]
    fn reference_conditions_recover_nameplate() {
        let p = module();
        // cell temperature equals the reference when ambient = T_ref + K_c * A_ref
        let ambient = p.reference_temp + p.temp_coefficient * p.reference_irradiance;
        let out = pv_max_power(p.reference_irradiance, ambient, &p).unwrap();
        let rel = (out - p.nameplate_kw()).abs() / p.nameplate_kw();
        assert!(rel < 0.005, "rel error {rel}");
    }

    #[test]
    fn output_never_negative() {
        let p = module();
        for a in [0.0, 1.0, 50.0, 400.0, 1200.0] {
            for t in [-20.0, 0.0, 25.0, 45.0] {
                assert!(pv_max_power(a, t, &p).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn rejects_inverted_mpp() {
        let mut p = module();
        p.mpp_voltage = 40.0;
        assert!(pv_max_power(500.0, 20.0, &p).is_err());
    }
}
