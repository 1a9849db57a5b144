use serde::{Deserialize, Serialize};

use super::build::PreparedCase;
use super::schemes::{
    build_report, outcome_demand_side, run_scheme, DemandSide, RunReport, Scheme, SchemeRun,
};
use crate::alliance::MicrogridPosition;
use crate::error::{Error, Result};
use crate::ev::EvSchedule;
use crate::pricing::{
    ev_dynamic_tariff, ev_energy_payment, follower_load_response, immediate_plan,
    min_cost_schedule, optimize_ev_schedule, user_cost, EvPlan, EvPrices, LoadProfile,
    MicrogridHourState, EV_PRICE_CEILING,
};
use crate::solver::{settle, SystemModel};
use crate::HOURS;

/// Scheduling methods compared on one case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// The full two-stage scheme in the alliance.
    Proposed,
    /// Users and EVs as one aggregate load minimising cost and load spread.
    Aggregate,
    /// One microgrid alone; EVs minimise expense and grid-exchange spread
    /// under the surplus-based EV tariff.
    SingleGridTracking,
    /// One microgrid alone; EVs maximise satisfaction at the user tariff.
    SingleUserTariff,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Proposed,
        Method::Aggregate,
        Method::SingleGridTracking,
        Method::SingleUserTariff,
    ];

    pub fn id(self) -> u8 {
        match self {
            Method::Proposed => 1,
            Method::Aggregate => 2,
            Method::SingleGridTracking => 3,
            Method::SingleUserTariff => 4,
        }
    }

    fn label(self) -> String {
        format!("method-{}", self.id())
    }
}

/// Microgrid studied by the single-microgrid methods.
pub const SINGLE_MICROGRID: usize = 0;

const WEIGHT_EPS: f64 = 1e-9;

/// Energy-conserving block schedule minimising
/// `a * sum(c_t x_t) + b * mean((fixed_t + x_t - mean_load)^2)` within
/// per-hour bounds. The optimum is `x_t = clamp(s_t - mu)`; `mu` is found
/// by bisection on the conserved total.
fn quadratic_block(
    fixed: &[f64],
    price: &[f64],
    lo: &[f64],
    hi: &[f64],
    total: f64,
    a: f64,
    b: f64,
) -> Vec<f64> {
    let n = fixed.len() as f64;
    let mean = (fixed.iter().sum::<f64>() + total) / n;
    let s: Vec<f64> = (0..fixed.len())
        .map(|t| mean - fixed[t] - a * price[t] * n / (2.0 * b))
        .collect();
    let x_at = |mu: f64| -> Vec<f64> {
        (0..s.len())
            .map(|t| (s[t] - mu).clamp(lo[t], hi[t]))
            .collect()
    };
    let sum_at = |mu: f64| x_at(mu).iter().sum::<f64>();
    let spread = s
        .iter()
        .chain(lo)
        .chain(hi)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        + 1.0;
    let (mut left, mut right) = (-2.0 * spread, 2.0 * spread);
    for _ in 0..200 {
        let mid = 0.5 * (left + right);
        if sum_at(mid) > total {
            left = mid;
        } else {
            right = mid;
        }
    }
    x_at(0.5 * (left + right))
}

fn mean_square_deviation(load: &[f64]) -> f64 {
    let mean = load.iter().sum::<f64>() / load.len() as f64;
    load.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / load.len() as f64
}

/// Aggregate demand-side plan of one microgrid for method 2.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePlan {
    pub fixed: Vec<f64>,
    pub block_base: Vec<f64>,
    pub block: Vec<f64>,
    /// EV part of the block baseline.
    pub ev_base: Vec<f64>,
}

impl AggregatePlan {
    pub fn load(&self) -> Vec<f64> {
        (0..HOURS).map(|h| self.fixed[h] + self.block[h]).collect()
    }
}

/// Cost and spread of the aggregate load balanced with equal weight after
/// min-max normalisation over the two single-objective optima.
pub fn aggregate_response(
    price: &[f64],
    load: &LoadProfile,
    ev_base: &[f64],
    band: f64,
) -> Result<AggregatePlan> {
    let fixed = load.nl.clone();
    let block_base: Vec<f64> = (0..HOURS)
        .map(|h| if load.participates[h] { load.al_base[h] } else { 0.0 } + ev_base[h])
        .collect();
    let lo: Vec<f64> = block_base.iter().map(|b| b * (1.0 - band)).collect();
    let hi: Vec<f64> = block_base.iter().map(|b| b * (1.0 + band)).collect();
    let total: f64 = block_base.iter().sum();
    let cost = |x: &[f64]| {
        (0..HOURS)
            .map(|h| price[h] * (fixed[h] + x[h]))
            .sum::<f64>()
    };
    let msd =
        |x: &[f64]| mean_square_deviation(&(0..HOURS).map(|h| fixed[h] + x[h]).collect::<Vec<_>>());

    let as_profile = LoadProfile {
        nl: fixed.clone(),
        al_base: block_base.clone(),
        al: block_base.clone(),
        al_min: lo.clone(),
        al_max: hi.clone(),
        participates: vec![true; HOURS],
    };
    let by_cost = follower_load_response(price, &as_profile)?.al;
    let by_spread = quadratic_block(&fixed, price, &lo, &hi, total, 0.0, 1.0);
    let cost_range = cost(&by_spread) - cost(&by_cost);
    let msd_range = msd(&by_cost) - msd(&by_spread);
    let block = if cost_range <= WEIGHT_EPS {
        by_spread
    } else if msd_range <= WEIGHT_EPS {
        by_cost
    } else {
        quadratic_block(
            &fixed,
            price,
            &lo,
            &hi,
            total,
            1.0 / cost_range,
            1.0 / msd_range,
        )
    };
    Ok(AggregatePlan {
        fixed,
        block_base,
        block,
        ev_base: ev_base.to_vec(),
    })
}

fn immediate_fleet(model: &SystemModel, k: usize, price: &[f64]) -> Result<Vec<EvPlan>> {
    let ceiling: Vec<f64> = price.iter().map(|c| EV_PRICE_CEILING * c).collect();
    let prices = EvPrices {
        charge: price,
        discharge: price,
        ceiling: &ceiling,
    };
    model.microgrids[k]
        .fleet
        .iter()
        .map(|ev| immediate_plan(ev, prices, &model.wear, model.soc_resolution))
        .collect()
}

fn ev_load(plans: &[EvPlan]) -> Vec<f64> {
    let mut load = vec![0.0; HOURS];
    for p in plans {
        for (h, l) in load.iter_mut().enumerate() {
            *l += p.schedule.charge_kw[h] - p.schedule.discharge_kw[h];
        }
    }
    load
}

fn method_aggregate(case: &PreparedCase, tariffs: &[Vec<f64>]) -> Result<RunReport> {
    let model = &case.model;
    let names = case.names();
    let mut demand = Vec::new();
    let mut positions = Vec::new();
    for (k, mg) in model.microgrids.iter().enumerate() {
        let price = &tariffs[k];
        let plans = immediate_fleet(model, k, price)?;
        let band = case.file.microgrids[k].responsive_band;
        let plan = aggregate_response(price, &mg.load, &ev_load(&plans), band)?;
        let load = plan.load();
        let paid: f64 = (0..HOURS).map(|h| price[h] * load[h]).sum();
        let ev_cost: f64 = (0..HOURS)
            .filter(|&h| plan.block_base[h] > 0.0)
            .map(|h| price[h] * plan.block[h] * plan.ev_base[h] / plan.block_base[h])
            .sum();
        let wear: f64 = plans
            .iter()
            .map(|p| p.schedule.throughput_kwh())
            .sum::<f64>()
            * model.wear.per_kwh();
        demand.push(DemandSide {
            name: names[k].clone(),
            user_cost: paid - ev_cost,
            ev_cost,
            ev_expense: ev_cost + wear,
            satisfaction: None,
        });
        positions.push(MicrogridPosition {
            wt: mg.wt.clone(),
            pv: mg.pv.clone(),
            demand: load,
        });
    }
    let settlement = settle(&positions, &model.alliance, true)?;
    Ok(build_report(
        &case.file.meta.name,
        &Method::Aggregate.label(),
        case.seed(),
        &demand,
        &positions,
        &settlement,
    ))
}

/// Sequential EV scheduling for method 3: each controllable vehicle, in id
/// order, minimises its normalised expense plus the normalised growth of
/// the squared grid exchange left by the vehicles before it.
pub fn grid_tracking_plans(
    model: &SystemModel,
    k: usize,
    ev_price: &[f64],
    base_exchange: &[f64],
) -> Result<Vec<EvPlan>> {
    let mg = &model.microgrids[k];
    let wear = model.wear.per_kwh();
    let ceiling: Vec<f64> = ev_price.iter().map(|c| EV_PRICE_CEILING * c).collect();
    let prices = EvPrices {
        charge: ev_price,
        discharge: ev_price,
        ceiling: &ceiling,
    };
    let res = model.soc_resolution;
    let mut plans: Vec<Option<EvPlan>> = vec![None; mg.fleet.len()];
    let mut g = base_exchange.to_vec();
    for (i, ev) in mg.fleet.iter().enumerate() {
        if !ev.controllable {
            let plan = immediate_plan(ev, prices, &model.wear, res)?;
            for h in 0..HOURS {
                g[h] += plan.schedule.charge_kw[h] - plan.schedule.discharge_kw[h];
            }
            plans[i] = Some(plan);
        }
    }
    for (i, ev) in mg.fleet.iter().enumerate() {
        if !ev.controllable {
            continue;
        }
        let expense = |h: usize, p: f64| p * ev_price[h] + p.abs() * wear;
        let spread = |h: usize, p: f64| (g[h] + p).powi(2) - g[h].powi(2);
        let total_spread = |s: &EvSchedule| {
            (0..HOURS)
                .map(|h| spread(h, s.charge_kw[h] - s.discharge_kw[h]))
                .sum::<f64>()
        };
        let cheapest = min_cost_schedule(ev, prices, &model.wear, res, expense)?;
        let flattest = min_cost_schedule(ev, prices, &model.wear, res, spread)?;
        let cost_range = flattest.expense - cheapest.expense;
        let spread_range = total_spread(&cheapest.schedule) - total_spread(&flattest.schedule);
        let plan = if cost_range <= WEIGHT_EPS {
            flattest
        } else if spread_range <= WEIGHT_EPS {
            cheapest
        } else {
            min_cost_schedule(ev, prices, &model.wear, res, |h, p| {
                expense(h, p) / cost_range + spread(h, p) / spread_range
            })?
        };
        for h in 0..HOURS {
            g[h] += plan.schedule.charge_kw[h] - plan.schedule.discharge_kw[h];
        }
        plans[i] = Some(plan);
    }
    Ok(plans
        .into_iter()
        .map(|p| p.expect("every vehicle planned"))
        .collect())
}

fn method_single(case: &PreparedCase, tariffs: &[Vec<f64>], method: Method) -> Result<RunReport> {
    let model = &case.model;
    let k = SINGLE_MICROGRID;
    let mg = &model.microgrids[k];
    let price = &tariffs[k];
    let response = follower_load_response(price, &mg.load)?;
    let users = response.totals();
    let (ev_price, plans) = match method {
        Method::SingleGridTracking => {
            let state = MicrogridHourState {
                wt: mg.wt.clone(),
                pv: mg.pv.clone(),
                load: users.clone(),
            };
            let ev_price = ev_dynamic_tariff(price, &state)?.price;
            let exchange: Vec<f64> = (0..HOURS).map(|h| users[h] - mg.wt[h] - mg.pv[h]).collect();
            let plans = grid_tracking_plans(model, k, &ev_price, &exchange)?;
            (ev_price, plans)
        }
        Method::SingleUserTariff => {
            let ceiling: Vec<f64> = price.iter().map(|c| EV_PRICE_CEILING * c).collect();
            let prices = EvPrices {
                charge: price,
                discharge: price,
                ceiling: &ceiling,
            };
            let plans = mg
                .fleet
                .iter()
                .map(|ev| {
                    if ev.controllable {
                        optimize_ev_schedule(ev, prices, &model.wear, model.soc_resolution)
                    } else {
                        immediate_plan(ev, prices, &model.wear, model.soc_resolution)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            (price.clone(), plans)
        }
        _ => return Err(Error::param("not a single-microgrid method")),
    };
    let schedules: Vec<EvSchedule> = plans.iter().map(|p| p.schedule.clone()).collect();
    let evs = ev_load(&plans);
    let position = MicrogridPosition {
        wt: mg.wt.clone(),
        pv: mg.pv.clone(),
        demand: (0..HOURS).map(|h| users[h] + evs[h]).collect(),
    };
    let sats: Vec<f64> = plans
        .iter()
        .filter_map(|p| p.satisfaction.map(|s| s.total()))
        .collect();
    let demand = DemandSide {
        name: case.names()[k].clone(),
        user_cost: user_cost(price, &response),
        ev_cost: ev_energy_payment(&schedules, &ev_price, &ev_price),
        ev_expense: plans.iter().map(|p| p.expense).sum(),
        satisfaction: (!sats.is_empty()).then(|| sats.iter().sum::<f64>() / sats.len() as f64),
    };
    let positions = [position];
    let settlement = settle(&positions, &model.alliance, false)?;
    Ok(build_report(
        &case.file.meta.name,
        &method.label(),
        case.seed(),
        &[demand],
        &positions,
        &settlement,
    ))
}

/// Reports of methods 1 to 4. Methods 2 to 4 keep the proposed method's
/// final tariffs; pass its run in `proposed` to avoid solving it again.
pub fn compare_methods(
    case: &PreparedCase,
    proposed: Option<&SchemeRun>,
) -> Result<Vec<RunReport>> {
    let owned;
    let full = match proposed {
        Some(r) => r,
        None => {
            owned = run_scheme(case, Scheme::Full, None)?;
            &owned
        }
    };
    let mut first = build_report(
        &case.file.meta.name,
        &Method::Proposed.label(),
        case.seed(),
        &outcome_demand_side(case, &full.outcome),
        &full.positions(),
        &full.outcome.settlement,
    );
    first.iterations = full.report.iterations;
    first.converged = full.report.converged;
    Ok(vec![
        first,
        method_aggregate(case, &full.tariffs)?,
        method_single(case, &full.tariffs, Method::SingleGridTracking)?,
        method_single(case, &full.tariffs, Method::SingleUserTariff)?,
    ])
}
