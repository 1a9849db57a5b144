use rand::Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Turbine power curve and site wind climate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindParams {
    /// Cut-in speed, m/s.
    pub cut_in: f64,
    /// Rated speed, m/s.
    pub rated_speed: f64,
    /// Cut-out speed, m/s.
    pub cut_out: f64,
    /// Rated output, kW.
    pub rated_power: f64,
    /// Weibull shape of the wind speed distribution.
    pub shape: f64,
    /// Weibull scale of the wind speed distribution, m/s.
    pub scale: f64,
}

impl WindParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cut_in > 0.0 && self.cut_in < self.rated_speed && self.rated_speed < self.cut_out)
        {
            return Err(Error::param(format!(
                "wind speeds must satisfy 0 < cut_in < rated < cut_out (got {}, {}, {})",
                self.cut_in, self.rated_speed, self.cut_out
            )));
        }
        if !(self.rated_power > 0.0) {
            return Err(Error::param("rated wind power must be positive"));
        }
        if !(self.shape > 0.0 && self.scale > 0.0) {
            return Err(Error::param("Weibull shape and scale must be positive"));
        }
        Ok(())
    }

    /// Cubic-rise coefficients `(k_w1, k_w2)` of the partial-load segment.
    pub fn rise_coefficients(&self) -> (f64, f64) {
        let span = self.rated_speed.powi(3) - self.cut_in.powi(3);
        (self.rated_power / span, self.cut_in.powi(3) / span)
    }

    /// Weibull density of wind speed `v`.
    pub fn speed_pdf(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        let m = self.shape;
        let g = self.scale;
        (m / g) * (v / g).powf(m - 1.0) * (-(v / g).powf(m)).exp()
    }

    pub fn sample_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Weibull::new(self.scale, self.shape)
            .expect("validated Weibull parameters")
            .sample(rng)
    }
}

/// Turbine output in kW at hub-height wind speed `v` (m/s).
pub fn wind_power_from_speed(v: f64, params: &WindParams) -> Result<f64> {
    params.validate()?;
    if !(v >= 0.0) {
        return Err(Error::param(format!(
            "wind speed must be non-negative, got {v}"
        )));
    }
    let power = if v <= params.cut_in || v > params.cut_out {
        0.0
    } else if v <= params.rated_speed {
        let (k1, k2) = params.rise_coefficients();
        k1 * v.powi(3) - k2 * params.rated_power
    } else {
        params.rated_power
    };
    Ok(power.clamp(0.0, params.rated_power))
}
