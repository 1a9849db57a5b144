use super::file::{CaseFile, MicrogridConfig, ScenarioConfig};
use crate::error::{Error, Result};
use crate::ev::{sample_fleet, EvProfile};
use crate::pricing::LoadProfile;
use crate::renewables::{
    generate_joint_scenarios, pv_max_power, reduce_scenarios, wind_power_from_speed,
    ErrorDistribution, ErrorModels, ForecastErrorModel, MicrogridTrajectory, ScenarioSet,
};
use crate::rng::{stream_rng, streams};
use crate::solver::{expected_scenario_case, MicrogridModel, SystemModel};
use crate::HOURS;

/// Command-line style overrides of the case file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_scenarios: Option<usize>,
    pub reduce_to: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, file: &CaseFile) -> Result<CaseFile> {
        let mut out = file.clone();
        if let Some(s) = self.seed {
            out.meta.seed = s;
        }
        if let Some(n) = self.n_scenarios {
            out.scenarios.n_scenarios = n;
        }
        if let Some(r) = self.reduce_to {
            out.scenarios.reduce_to = r;
        }
        out.validate()?;
        Ok(out)
    }
}

/// A case file turned into the deterministic model the solver works on.
#[derive(Debug, Clone)]
pub struct PreparedCase {
    pub file: CaseFile,
    pub forecasts: Vec<MicrogridTrajectory>,
    pub reduced: ScenarioSet,
    pub expected: Vec<MicrogridTrajectory>,
    pub model: SystemModel,
}

impl PreparedCase {
    pub fn seed(&self) -> u64 {
        self.file.meta.seed
    }

    pub fn names(&self) -> Vec<String> {
        self.file
            .microgrids
            .iter()
            .map(|m| m.name.clone())
            .collect()
    }
}

pub fn error_models(cfg: &ScenarioConfig) -> ErrorModels {
    let normal = ForecastErrorModel {
        distribution: ErrorDistribution::Normal {
            mean: cfg.normal_mean,
            std_dev: cfg.normal_std,
        },
        tau: cfg.tau,
        lambda: cfg.lambda,
    };
    ErrorModels {
        wind: ForecastErrorModel {
            distribution: ErrorDistribution::Beta {
                alpha: cfg.wind_alpha,
                beta: cfg.wind_beta,
            },
            tau: cfg.tau,
            lambda: cfg.lambda,
        },
        pv: normal,
        load: normal,
    }
}

fn day_ahead(file: &CaseFile, mg: &MicrogridConfig) -> Result<MicrogridTrajectory> {
    let wt = match (&mg.wt_kw, &mg.wind, &file.turbine) {
        (Some(w), _, _) => w.clone(),
        (None, Some(site), Some(turbine)) => site
            .speed
            .iter()
            .map(|&v| wind_power_from_speed(v, turbine).map(|p| p * site.turbines))
            .collect::<Result<_>>()?,
        _ => return Err(Error::param(format!("{}: no wind forecast", mg.name))),
    };
    let pv = match (&mg.pv_kw, &mg.solar, &file.pv_module) {
        (Some(p), _, _) => p.clone(),
        (None, Some(site), Some(module)) => site
            .irradiance
            .iter()
            .zip(&site.ambient)
            .map(|(&a, &t)| pv_max_power(a, t, module).map(|p| p * site.modules))
            .collect::<Result<_>>()?,
        _ => return Err(Error::param(format!("{}: no PV forecast", mg.name))),
    };
    Ok(MicrogridTrajectory {
        wt,
        pv,
        load: mg.load.clone(),
    })
}

/// Day-ahead (WT, PV, load) forecasts of every microgrid.
pub fn day_ahead_forecasts(file: &CaseFile) -> Result<Vec<MicrogridTrajectory>> {
    file.microgrids
        .iter()
        .map(|mg| day_ahead(file, mg))
        .collect()
}

/// Generated joint scenarios before reduction.
pub fn generate_scenarios(
    file: &CaseFile,
    forecasts: &[MicrogridTrajectory],
) -> Result<ScenarioSet> {
    let mut rng = stream_rng(file.meta.seed, streams::SCENARIOS);
    generate_joint_scenarios(
        forecasts,
        &error_models(&file.scenarios),
        file.scenarios.n_scenarios,
        &mut rng,
    )
}

pub fn build_fleet(file: &CaseFile, microgrid: usize) -> Result<Vec<EvProfile>> {
    let f = &file.fleet;
    if f.per_microgrid == 0 {
        return Ok(Vec::new());
    }
    let fraction = f.controllable as f64 / f.per_microgrid as f64;
    Ok(sample_fleet(
        f.per_microgrid,
        &f.behavior,
        &f.battery,
        fraction,
        microgrid,
        file.meta.seed,
    )?
    .into_iter()
    .map(|s| s.profile)
    .collect())
}

/// Solver model for given expected trajectories.
pub fn system_model(file: &CaseFile, expected: &[MicrogridTrajectory]) -> Result<SystemModel> {
    let bands = file.bands();
    let microgrids = file
        .microgrids
        .iter()
        .zip(expected)
        .enumerate()
        .map(|(k, (mg, traj))| {
            let nl = traj
                .load
                .iter()
                .map(|l| l * (1.0 - mg.responsive_share))
                .collect();
            let al = traj.load.iter().map(|l| l * mg.responsive_share).collect();
            let mut load = LoadProfile::new(nl, al, mg.responsive_band)?;
            for &h in &mg.inactive_hours {
                load.participates[h - 1] = false;
            }
            Ok(MicrogridModel {
                name: mg.name.clone(),
                wt: traj.wt.clone(),
                pv: traj.pv.clone(),
                load,
                fleet: build_fleet(file, k)?,
                bands: bands.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model = SystemModel {
        microgrids,
        alliance: file.alliance_params(),
        wear: file.fleet.degradation,
        soc_resolution: file.solver.soc_resolution,
    };
    model.validate()?;
    Ok(model)
}

pub fn prepare(file: &CaseFile) -> Result<PreparedCase> {
    file.validate()?;
    let forecasts = day_ahead_forecasts(file)?;
    let all = generate_scenarios(file, &forecasts)?;
    let reduced = reduce_scenarios(&all, file.scenarios.reduce_to)?;
    let expected = expected_scenario_case(&reduced)?;
    debug_assert!(expected.iter().all(|t| t.load.len() == HOURS));
    let model = system_model(file, &expected)?;
    Ok(PreparedCase {
        file: file.clone(),
        forecasts,
        reduced,
        expected,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_forecasts_are_complementary() {
        let file = CaseFile::desk();
        let fc = day_ahead_forecasts(&file).unwrap();
        let net = |k: usize, h: usize| fc[k].wt[h] + fc[k].pv[h] - fc[k].load[h];
        // night wind surplus in MG1, midday PV surplus in MG2, MG3 short
        assert!(net(0, 2) > 0.0);
        assert!(net(1, 12) > 0.0);
        assert!(net(2, 12) < 0.0);
    }

    #[test]
    fn overrides_are_validated() {
        let file = CaseFile::desk();
        let bad = Overrides {
            reduce_to: Some(5000),
            ..Default::default()
        };
        assert!(matches!(bad.apply(&file), Err(Error::Validation(_))));
    }

    #[test]
    fn inactive_hours_drop_out_of_the_response() {
        let mut file = CaseFile::desk();
        file.microgrids[0].inactive_hours = vec![1, 24];
        file.fleet.per_microgrid = 0;
        file.fleet.controllable = 0;
        let fc = day_ahead_forecasts(&file).unwrap();
        let model = system_model(&file, &fc).unwrap();
        let p = &model.microgrids[0].load.participates;
        assert!(!p[0] && !p[23] && p[1]);
        assert!(model.microgrids[0].fleet.is_empty());
    }
}
