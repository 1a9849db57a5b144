use rand::Rng;
use serde::{Deserialize, Serialize};

use super::forecast::{generate_forecast_scenarios, ForecastErrorModel};
use crate::error::{Error, Result};
use crate::HOURS;

/// Hourly wind, PV and load power of one microgrid, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrogridTrajectory {
    pub wt: Vec<f64>,
    pub pv: Vec<f64>,
    pub load: Vec<f64>,
}

impl MicrogridTrajectory {
    pub fn flat(wt: f64, pv: f64, load: f64) -> Self {
        Self {
            wt: vec![wt; HOURS],
            pv: vec![pv; HOURS],
            load: vec![load; HOURS],
        }
    }

    fn check(&self, ctx: &str) -> Result<()> {
        for (name, series) in [("wt", &self.wt), ("pv", &self.pv), ("load", &self.load)] {
            if series.len() != HOURS {
                return Err(Error::param(format!(
                    "{ctx}.{name}: expected {HOURS} hours, got {}",
                    series.len()
                )));
            }
            if series.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::param(format!(
                    "{ctx}.{name}: power values must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }

    fn squared_distance(&self, other: &Self) -> f64 {
        let sq =
            |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        sq(&self.wt, &other.wt) + sq(&self.pv, &other.pv) + sq(&self.load, &other.load)
    }
}

/// One joint realisation across all microgrids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub microgrids: Vec<MicrogridTrajectory>,
}

impl Scenario {
    /// Euclidean distance of the stacked (wt, pv, load) vectors, summed over
    /// microgrids.
    pub fn distance(&self, other: &Scenario) -> f64 {
        self.microgrids
            .iter()
            .zip(&other.microgrids)
            .map(|(a, b)| a.squared_distance(b).sqrt())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
    probabilities: Vec<f64>,
}

pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>, probabilities: Vec<f64>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::param("scenario set is empty"));
        }
        if scenarios.len() != probabilities.len() {
            return Err(Error::param("one probability per scenario required"));
        }
        let n_mg = scenarios[0].microgrids.len();
        if n_mg == 0 {
            return Err(Error::param("scenarios must cover at least one microgrid"));
        }
        for (s, scen) in scenarios.iter().enumerate() {
            if scen.microgrids.len() != n_mg {
                return Err(Error::param(format!(
                    "scenario {s} has a different microgrid count"
                )));
            }
            for (k, mg) in scen.microgrids.iter().enumerate() {
                mg.check(&format!("scenario[{s}].microgrid[{k}]"))?;
            }
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::param("scenario probabilities must be non-negative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::param(format!(
                "scenario probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            scenarios,
            probabilities,
        })
    }

    /// Equiprobable set.
    pub fn uniform(scenarios: Vec<Scenario>) -> Result<Self> {
        let n = scenarios.len().max(1);
        let p = 1.0 / n as f64;
        let mut probs = vec![p; scenarios.len()];
        // absorb rounding in the last weight so the sum is 1 to machine precision
        if let Some(last) = probs.last_mut() {
            *last = 1.0 - p * (n - 1) as f64;
        }
        Self::new(scenarios, probs)
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn microgrid_count(&self) -> usize {
        self.scenarios[0].microgrids.len()
    }
}

/// Error models for the three uncertain quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModels {
    pub wind: ForecastErrorModel,
    pub pv: ForecastErrorModel,
    pub load: ForecastErrorModel,
}

impl ErrorModels {
    pub fn standard(tau: f64) -> Self {
        Self {
            wind: ForecastErrorModel::wind(tau),
            pv: ForecastErrorModel::pv_or_load(tau),
            load: ForecastErrorModel::pv_or_load(tau),
        }
    }
}

/// Equiprobable joint scenarios: the s-th draw of every quantity of every
/// microgrid forms scenario s.
pub fn generate_joint_scenarios<R: Rng + ?Sized>(
    forecasts: &[MicrogridTrajectory],
    models: &ErrorModels,
    n_sc: usize,
    rng: &mut R,
) -> Result<ScenarioSet> {
    if n_sc == 0 {
        return Err(Error::param("scenario count must be at least 1"));
    }
    let mut scenarios: Vec<Scenario> = (0..n_sc)
        .map(|_| Scenario {
            microgrids: Vec::with_capacity(forecasts.len()),
        })
        .collect();
    for (k, fc) in forecasts.iter().enumerate() {
        fc.check(&format!("forecast[{k}]"))?;
        let wt = generate_forecast_scenarios(&fc.wt, &models.wind, n_sc, rng)?;
        let pv = generate_forecast_scenarios(&fc.pv, &models.pv, n_sc, rng)?;
        let load = generate_forecast_scenarios(&fc.load, &models.load, n_sc, rng)?;
        for (((scen, wt), pv), load) in scenarios.iter_mut().zip(wt).zip(pv).zip(load) {
            scen.microgrids.push(MicrogridTrajectory { wt, pv, load });
        }
    }
    ScenarioSet::uniform(scenarios)
}

/// One step of the backward reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deletion {
    /// Index (in the input set) of the deleted scenario.
    pub removed: usize,
    /// Index of the surviving nearest neighbour that absorbed its weight.
    pub merged_into: usize,
    /// Probability moved.
    pub probability: f64,
    /// Euclidean distance between the two.
    pub distance: f64,
}

/// Backward probability-distance reduction down to `target` scenarios.
pub fn reduce_scenarios(set: &ScenarioSet, target: usize) -> Result<ScenarioSet> {
    reduce_scenarios_traced(set, target).map(|(s, _)| s)
}

/// As [`reduce_scenarios`], also returning the deletion sequence.
///
/// At every step each live scenario `i` has `D_i = p_i * min_j d(i, j)`;
/// the scenario minimising `p_i * D_i` is deleted and its probability is
/// added to its nearest live neighbour. Ties go to the lowest index.
pub fn reduce_scenarios_traced(
    set: &ScenarioSet,
    target: usize,
) -> Result<(ScenarioSet, Vec<Deletion>)> {
    let n = set.len();
    if n == 0 {
        return Err(Error::param("cannot reduce an empty scenario set"));
    }
    if target == 0 || target > n {
        return Err(Error::param(format!(
            "reduction target {target} must be in 1..={n}"
        )));
    }

    let scen = set.scenarios();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = scen[i].distance(&scen[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let mut prob = set.probabilities().to_vec();
    let mut alive = vec![true; n];
    let nearest_of = |i: usize, alive: &[bool]| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || !alive[j] {
                continue;
            }
            let d = dist[i * n + j];
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        best
    };
    let mut nearest: Vec<Option<(usize, f64)>> = (0..n).map(|i| nearest_of(i, &alive)).collect();

    let mut deletions = Vec::with_capacity(n - target);
    let mut remaining = n;
    while remaining > target {
        let mut pick: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| alive[i]) {
            let (_, d) = nearest[i].expect("at least two live scenarios");
            let key = prob[i] * (prob[i] * d);
            if pick.is_none_or(|(_, k)| key < k) {
                pick = Some((i, key));
            }
        }
        let (i, _) = pick.expect("live scenario");
        let (j, d) = nearest[i].expect("neighbour");
        alive[i] = false;
        remaining -= 1;
        deletions.push(Deletion {
            removed: i,
            merged_into: j,
            probability: prob[i],
            distance: d,
        });
        prob[j] += prob[i];
        prob[i] = 0.0;
        for m in 0..n {
            if alive[m] && nearest[m].is_some_and(|(nm, _)| nm == i) {
                nearest[m] = nearest_of(m, &alive);
            }
        }
    }

    let (kept, probs): (Vec<Scenario>, Vec<f64>) = (0..n)
        .filter(|&i| alive[i])
        .map(|i| (scen[i].clone(), prob[i]))
        .unzip();
    Ok((ScenarioSet::new(kept, probs)?, deletions))
}
