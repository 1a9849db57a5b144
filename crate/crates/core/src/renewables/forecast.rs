use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::{beta_quantile, normal_quantile};
use super::lhs::lhs_sample;
use crate::error::{Error, Result};

/// Distribution of the standardized forecast error variable `T_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorDistribution {
    Normal { mean: f64, std_dev: f64 },
    Beta { alpha: f64, beta: f64 },
}

impl ErrorDistribution {
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            ErrorDistribution::Normal { mean, std_dev } => normal_quantile(u, mean, std_dev),
            ErrorDistribution::Beta { alpha, beta } => beta_quantile(u, alpha, beta),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ErrorDistribution::Normal { mean, .. } => mean,
            ErrorDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
        }
    }
}

/// Multiplicative forecast error: `P = P_DA * (1 + tau * (T - lambda))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastErrorModel {
    pub distribution: ErrorDistribution,
    pub tau: f64,
    pub lambda: f64,
}

impl ForecastErrorModel {
    /// Wind errors: Beta(2.5, 2.5) centred at 0.5.
    pub fn wind(tau: f64) -> Self {
        Self {
            distribution: ErrorDistribution::Beta {
                alpha: 2.5,
                beta: 2.5,
            },
            tau,
            lambda: 0.5,
        }
    }

    /// PV and load errors: N(0.5, 0.33) centred at 0.5.
    pub fn pv_or_load(tau: f64) -> Self {
        Self {
            distribution: ErrorDistribution::Normal {
                mean: 0.5,
                std_dev: 0.33,
            },
            tau,
            lambda: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.distribution {
            ErrorDistribution::Normal { std_dev, .. } if !(std_dev > 0.0) => {
                return Err(Error::param("normal forecast error needs std_dev > 0"))
            }
            ErrorDistribution::Beta { alpha, beta } if !(alpha > 0.0 && beta > 0.0) => {
                return Err(Error::param("beta forecast error needs alpha, beta > 0"))
            }
            _ => {}
        }
        if !(self.tau >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::param(
                "forecast error needs tau >= 0 and finite lambda",
            ));
        }
        Ok(())
    }

    /// Perturbed value for one hour given the drawn error variable.
    /// Negative results are clamped to zero.
    pub fn apply(&self, day_ahead: f64, t: f64) -> f64 {
        (day_ahead * (1.0 + self.tau * (t - self.lambda))).max(0.0)
    }
}

/// `n_sc` perturbed copies of a day-ahead trajectory. Each hour is one LHS
/// dimension, mapped through the inverse CDF of the error distribution.
pub fn generate_forecast_scenarios<R: Rng + ?Sized>(
    day_ahead: &[f64],
    model: &ForecastErrorModel,
    n_sc: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    model.validate()?;
    if day_ahead.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::param("day-ahead forecast must be non-negative"));
    }
    if day_ahead.is_empty() {
        return Err(Error::param("day-ahead forecast is empty"));
    }
    let uniforms = lhs_sample(n_sc, day_ahead.len(), rng)?;
    Ok(uniforms
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(day_ahead)
                .map(|(&u, &p)| model.apply(p, model.distribution.quantile(u)))
                .collect()
        })
        .collect())
}
