use serde::{Deserialize, Serialize};

use crate::alliance::AllianceParams;
use crate::error::{Error, Result, ValidationError};
use crate::ev::{Battery, Degradation, EvBehaviorModel};
use crate::pricing::PriceBand;
use crate::renewables::{PvParams, WindParams};
use crate::solver::GaConfig;
use crate::HOURS;

/// Text of the bundled three-microgrid case.
pub const DESK_CASE: &str = include_str!("../../cases/desk.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub meta: Meta,
    pub scenarios: ScenarioConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub prices: Prices,
    pub alliance: AllianceConfig,
    pub fleet: FleetConfig,
    pub turbine: Option<WindParams>,
    pub pv_module: Option<PvParams>,
    #[serde(rename = "microgrid")]
    pub microgrids: Vec<MicrogridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_scenarios: usize,
    pub reduce_to: usize,
    pub tau: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_shape")]
    pub wind_alpha: f64,
    #[serde(default = "default_shape")]
    pub wind_beta: f64,
    #[serde(default = "default_lambda")]
    pub normal_mean: f64,
    #[serde(default = "default_std")]
    pub normal_std: f64,
}

fn default_lambda() -> f64 {
    0.5
}
fn default_shape() -> f64 {
    2.5
}
fn default_std() -> f64 {
    0.33
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_prob: f64,
    pub mutation_scale: f64,
    pub convergence_eps: f64,
    /// EV state-of-charge grid step, fraction of capacity.
    pub soc_resolution: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let ga = GaConfig::default();
        Self {
            population: ga.population,
            generations: ga.generations,
            mutation_rate: ga.mutation_rate,
            crossover_prob: ga.crossover_prob,
            mutation_scale: ga.mutation_scale,
            convergence_eps: ga.convergence_eps,
            soc_resolution: 0.01,
        }
    }
}

impl SolverConfig {
    pub fn ga(&self) -> GaConfig {
        GaConfig {
            population: self.population,
            generations: self.generations,
            mutation_rate: self.mutation_rate,
            crossover_prob: self.crossover_prob,
            mutation_scale: self.mutation_scale,
            convergence_eps: self.convergence_eps,
        }
    }
}

/// One tariff period over clock hours `start..=end` (1..=24; hour `h`
/// is the interval ending at h:00).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Period {
    pub start: usize,
    pub end: usize,
    pub user_min: f64,
    pub user_max: f64,
    pub inter: f64,
    pub grid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prices {
    pub grid_sell_ratio: f64,
    #[serde(rename = "period")]
    pub periods: Vec<Period>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllianceConfig {
    pub wt_cost: f64,
    pub pv_cost: f64,
    pub line_om_cost: f64,
    pub line_min: f64,
    pub line_max: f64,
    pub transfer_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub per_microgrid: usize,
    pub controllable: usize,
    #[serde(default)]
    pub battery: Battery,
    #[serde(default)]
    pub behavior: EvBehaviorModel,
    #[serde(default)]
    pub degradation: Degradation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSite {
    pub turbines: f64,
    /// Hourly forecast wind speed, m/s.
    pub speed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolarSite {
    pub modules: f64,
    /// Hourly forecast irradiance, W/m².
    pub irradiance: Vec<f64>,
    /// Hourly forecast ambient temperature, °C.
    pub ambient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrogridConfig {
    pub name: String,
    /// Share of the load that responds to prices.
    pub responsive_share: f64,
    /// Allowed responsive deviation from baseline, as a fraction.
    #[serde(default = "default_band")]
    pub responsive_band: f64,
    /// Day-ahead load forecast, kW.
    pub load: Vec<f64>,
    /// Day-ahead wind output, kW (alternative to `wind`).
    pub wt_kw: Option<Vec<f64>>,
    pub wind: Option<WindSite>,
    /// Day-ahead PV output, kW (alternative to `solar`).
    pub pv_kw: Option<Vec<f64>>,
    pub solar: Option<SolarSite>,
    /// Hours (1..=24) in which the responsive load is switched off.
    #[serde(default)]
    pub inactive_hours: Vec<usize>,
}

fn default_band() -> f64 {
    0.2
}

fn check_series(v: &mut ValidationError, path: &str, series: &[f64], nonneg: bool) {
    if series.len() != HOURS {
        v.push(
            path,
            format!("expected {HOURS} hourly values, got {}", series.len()),
        );
    }
    for (i, x) in series.iter().enumerate() {
        if !x.is_finite() || (nonneg && *x < 0.0) {
            v.push(format!("{path}[{i}]"), format!("invalid value {x}"));
        }
    }
}

fn check_range(v: &mut ValidationError, path: &str, x: f64, lo: f64, hi: f64) {
    if !(x >= lo && x <= hi) {
        v.push(path, format!("{x} outside [{lo}, {hi}]"));
    }
}

impl CaseFile {
    pub fn parse(text: &str) -> Result<Self> {
        let case: CaseFile = toml::from_str(text).map_err(|e| Error::CaseParse(e.to_string()))?;
        case.validate()?;
        Ok(case)
    }

    pub fn desk() -> Self {
        Self::parse(DESK_CASE).expect("bundled case is valid")
    }

    /// Structured check of the whole document; every problem is reported
    /// with its field path.
    pub fn validate(&self) -> Result<()> {
        let mut v = ValidationError::default();

        let s = &self.scenarios;
        if s.n_scenarios == 0 {
            v.push("scenarios.n_scenarios", "must be at least 1");
        }
        if s.reduce_to == 0 || s.reduce_to > s.n_scenarios {
            v.push(
                "scenarios.reduce_to",
                format!("must lie in 1..={}", s.n_scenarios),
            );
        }
        check_range(&mut v, "scenarios.tau", s.tau, 0.0, 10.0);
        if !(s.wind_alpha > 0.0 && s.wind_beta > 0.0) {
            v.push(
                "scenarios.wind_alpha",
                "beta shape parameters must be positive",
            );
        }
        if !(s.normal_std > 0.0) {
            v.push("scenarios.normal_std", "must be positive");
        }

        if let Err(e) = self.solver.ga().validate() {
            v.push("solver", e.to_string());
        }
        check_range(
            &mut v,
            "solver.soc_resolution",
            self.solver.soc_resolution,
            1e-6,
            0.5,
        );

        self.validate_periods(&mut v);
        check_range(
            &mut v,
            "prices.grid_sell_ratio",
            self.prices.grid_sell_ratio,
            0.0,
            1.0,
        );

        let a = &self.alliance;
        for (name, x) in [
            ("wt_cost", a.wt_cost),
            ("pv_cost", a.pv_cost),
            ("line_om_cost", a.line_om_cost),
            ("line_min", a.line_min),
            ("line_max", a.line_max),
            ("transfer_max", a.transfer_max),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                v.push(
                    format!("alliance.{name}"),
                    format!("must be finite and non-negative, got {x}"),
                );
            }
        }
        if a.line_min > a.line_max {
            v.push("alliance.line_min", "exceeds alliance.line_max");
        }

        let f = &self.fleet;
        if f.controllable > f.per_microgrid {
            v.push("fleet.controllable", "exceeds fleet.per_microgrid");
        }
        if let Err(e) = f.battery.validate() {
            v.push("fleet.battery", e.to_string());
        }
        if let Err(e) = f.behavior.validate() {
            v.push("fleet.behavior", e.to_string());
        }
        if let Err(e) = f.degradation.validate() {
            v.push("fleet.degradation", e.to_string());
        }
        if let Some(t) = &self.turbine {
            if let Err(e) = t.validate() {
                v.push("turbine", e.to_string());
            }
        }
        if let Some(m) = &self.pv_module {
            if let Err(e) = m.validate() {
                v.push("pv_module", e.to_string());
            }
        }

        if self.microgrids.is_empty() {
            v.push("microgrid", "at least one microgrid is required");
        }
        if self.microgrids.len() > crate::alliance::MAX_PLAYERS {
            v.push(
                "microgrid",
                format!(
                    "at most {} microgrids supported",
                    crate::alliance::MAX_PLAYERS
                ),
            );
        }
        for (k, mg) in self.microgrids.iter().enumerate() {
            let p = format!("microgrid[{k}]");
            check_range(
                &mut v,
                &format!("{p}.responsive_share"),
                mg.responsive_share,
                0.0,
                1.0,
            );
            check_range(
                &mut v,
                &format!("{p}.responsive_band"),
                mg.responsive_band,
                0.0,
                1.0,
            );
            check_series(&mut v, &format!("{p}.load"), &mg.load, true);
            match (&mg.wt_kw, &mg.wind) {
                (Some(w), None) => check_series(&mut v, &format!("{p}.wt_kw"), w, true),
                (None, Some(site)) => {
                    check_series(&mut v, &format!("{p}.wind.speed"), &site.speed, true);
                    if !(site.turbines >= 0.0) {
                        v.push(format!("{p}.wind.turbines"), "must be non-negative");
                    }
                    if self.turbine.is_none() {
                        v.push(format!("{p}.wind"), "wind speeds need a [turbine] section");
                    }
                }
                (None, None) => v.push(format!("{p}.wt_kw"), "give either wt_kw or a wind site"),
                (Some(_), Some(_)) => {
                    v.push(format!("{p}.wind"), "give only one of wt_kw and wind")
                }
            }
            match (&mg.pv_kw, &mg.solar) {
                (Some(x), None) => check_series(&mut v, &format!("{p}.pv_kw"), x, true),
                (None, Some(site)) => {
                    check_series(
                        &mut v,
                        &format!("{p}.solar.irradiance"),
                        &site.irradiance,
                        true,
                    );
                    check_series(&mut v, &format!("{p}.solar.ambient"), &site.ambient, false);
                    if !(site.modules >= 0.0) {
                        v.push(format!("{p}.solar.modules"), "must be non-negative");
                    }
                    if self.pv_module.is_none() {
                        v.push(
                            format!("{p}.solar"),
                            "irradiance needs a [pv_module] section",
                        );
                    }
                }
                (None, None) => v.push(format!("{p}.pv_kw"), "give either pv_kw or a solar site"),
                (Some(_), Some(_)) => {
                    v.push(format!("{p}.solar"), "give only one of pv_kw and solar")
                }
            }
            for (i, &h) in mg.inactive_hours.iter().enumerate() {
                if !(1..=HOURS).contains(&h) {
                    v.push(
                        format!("{p}.inactive_hours[{i}]"),
                        format!("hour {h} outside 1..=24"),
                    );
                }
            }
        }
        v.into_result()
    }

    fn validate_periods(&self, v: &mut ValidationError) {
        let mut owner: [Option<usize>; HOURS] = [None; HOURS];
        for (i, p) in self.prices.periods.iter().enumerate() {
            let path = format!("prices.period[{i}]");
            if !(1 <= p.start && p.start <= p.end && p.end <= HOURS) {
                v.push(
                    format!("{path}.start"),
                    format!(
                        "hours {}..={} must satisfy 1 <= start <= end <= 24",
                        p.start, p.end
                    ),
                );
                continue;
            }
            if !(p.user_min >= 0.0 && p.user_min <= p.user_max) {
                v.push(
                    format!("{path}.user_min"),
                    format!("band [{}, {}] out of order", p.user_min, p.user_max),
                );
            }
            let sell = p.grid * self.prices.grid_sell_ratio;
            if !(sell < p.inter && p.inter < p.grid) {
                v.push(
                    format!("{path}.inter"),
                    format!(
                        "need grid sale price {sell} < internal price {} < grid price {}",
                        p.inter, p.grid
                    ),
                );
            }
            for h in p.start..=p.end {
                if let Some(j) = owner[h - 1] {
                    v.push(
                        format!("{path}.start"),
                        format!("hour {h} already covered by prices.period[{j}]"),
                    );
                } else {
                    owner[h - 1] = Some(i);
                }
            }
        }
        for (slot, o) in owner.iter().enumerate() {
            if o.is_none() {
                v.push(
                    "prices.period",
                    format!("hour {} not covered by any period", slot + 1),
                );
            }
        }
    }

    /// Per-slot period (slot `i` is clock hour `i + 1`).
    fn period_of(&self, slot: usize) -> &Period {
        self.prices
            .periods
            .iter()
            .find(|p| p.start <= slot + 1 && slot < p.end)
            .expect("validated coverage")
    }

    pub fn bands(&self) -> Vec<PriceBand> {
        (0..HOURS)
            .map(|h| {
                let p = self.period_of(h);
                PriceBand {
                    min: p.user_min,
                    max: p.user_max,
                }
            })
            .collect()
    }

    pub fn alliance_params(&self) -> AllianceParams {
        let a = &self.alliance;
        let grid: Vec<f64> = (0..HOURS).map(|h| self.period_of(h).grid).collect();
        AllianceParams {
            grid_sell_price: grid
                .iter()
                .map(|g| g * self.prices.grid_sell_ratio)
                .collect(),
            inter_price: (0..HOURS).map(|h| self.period_of(h).inter).collect(),
            grid_buy_price: grid,
            wt_cost: a.wt_cost,
            pv_cost: a.pv_cost,
            line_om_cost: a.line_om_cost,
            line_min: a.line_min,
            line_max: a.line_max,
            transfer_max: a.transfer_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_case_parses() {
        let case = CaseFile::desk();
        assert_eq!(case.microgrids.len(), 3);
        assert_eq!(case.fleet.per_microgrid, 130);
        let bands = case.bands();
        assert_eq!((bands[0].min, bands[0].max), (0.8, 1.0));
        assert_eq!((bands[23].min, bands[23].max), (1.0, 1.3));
        let a = case.alliance_params();
        assert!((a.grid_sell_price[12] - 0.7 * 1.65).abs() < 1e-12);
    }

    #[test]
    fn gap_in_periods_names_the_hour() {
        let text = DESK_CASE.replace("start = 12", "start = 14");
        match CaseFile::parse(&text) {
            Err(Error::Validation(v)) => {
                let msgs: Vec<String> = v
                    .issues
                    .iter()
                    .map(|i| format!("{}: {}", i.path, i.message))
                    .collect();
                assert!(
                    msgs.iter().any(|m| m.contains("hour 13 not covered")),
                    "{msgs:?}"
                );
                assert!(msgs.iter().any(|m| m.contains("hour 12 not covered")));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = DESK_CASE.replace("[meta]", "[meta]\nbogus = 1");
        assert!(matches!(CaseFile::parse(&text), Err(Error::CaseParse(_))));
    }
}
