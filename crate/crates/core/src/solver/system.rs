use serde::{Deserialize, Serialize};

use crate::alliance::{
    alliance_dispatch, allocate, AllianceParams, CoalitionAllocation, DispatchSolution,
    MicrogridPosition,
};
use crate::error::{Error, Result};
use crate::ev::{Degradation, EvProfile};
use crate::pricing::{
    ev_dynamic_tariff, ev_energy_payment, follower_load_response, immediate_plan,
    optimize_ev_schedule, user_cost, EvPlan, EvPrices, LoadProfile, MicrogridHourState, PriceBand,
    TariffSchedule, EV_PRICE_CEILING,
};
use crate::HOURS;

/// Everything about one microgrid that does not depend on prices.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridModel {
    pub name: String,
    pub wt: Vec<f64>,
    pub pv: Vec<f64>,
    /// Baseline user load with responsive bounds.
    pub load: LoadProfile,
    pub fleet: Vec<EvProfile>,
    pub bands: Vec<PriceBand>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub microgrids: Vec<MicrogridModel>,
    pub alliance: AllianceParams,
    pub wear: Degradation,
    pub soc_resolution: f64,
}

impl SystemModel {
    pub fn validate(&self) -> Result<()> {
        if self.microgrids.is_empty() {
            return Err(Error::param("system needs at least one microgrid"));
        }
        self.alliance.validate()?;
        self.wear.validate()?;
        for (k, mg) in self.microgrids.iter().enumerate() {
            if mg.wt.len() != HOURS || mg.pv.len() != HOURS || mg.bands.len() != HOURS {
                return Err(Error::param(format!(
                    "microgrid {k}: hourly vectors must have {HOURS} entries"
                )));
            }
            mg.load.validate()?;
            for ev in &mg.fleet {
                ev.validate()?;
            }
        }
        Ok(())
    }

    /// Copy restricted to the listed microgrids.
    pub fn subset(&self, members: &[usize]) -> Self {
        Self {
            microgrids: members
                .iter()
                .map(|&k| self.microgrids[k].clone())
                .collect(),
            ..self.clone()
        }
    }

    pub fn ceiling_tariffs(&self) -> Vec<Vec<f64>> {
        self.microgrids
            .iter()
            .map(|m| m.bands.iter().map(|b| b.max).collect())
            .collect()
    }
}

/// How EVs are priced and scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvPolicy {
    /// Surplus-discounted EV tariff; controllable vehicles maximise
    /// satisfaction, the others charge on arrival.
    Dynamic,
    /// Every vehicle pays the user tariff and charges on arrival.
    UserTariff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeOptions {
    pub demand_response: bool,
    pub ev_policy: EvPolicy,
    /// Trade inside the alliance; otherwise every microgrid settles with
    /// the grid on its own.
    pub cooperative: bool,
}

/// Demand-side result of one microgrid under one user tariff.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridOutcome {
    pub tariff: TariffSchedule,
    pub response: LoadProfile,
    pub ev_plans: Vec<EvPlan>,
    pub no_load_hours: Vec<usize>,
    pub position: MicrogridPosition,
    /// Bill of the ordinary users.
    pub user_cost: f64,
    /// Net EV energy payment to the operator.
    pub ev_payment: f64,
    /// EV owners' expense including battery wear.
    pub ev_expense: f64,
}

impl MicrogridOutcome {
    /// Net EV grid draw per hour, kW.
    pub fn ev_load(&self) -> Vec<f64> {
        let mut load = vec![0.0; HOURS];
        for plan in &self.ev_plans {
            for (h, l) in load.iter_mut().enumerate() {
                *l += plan.schedule.charge_kw[h] - plan.schedule.discharge_kw[h];
            }
        }
        load
    }

    /// Mean of price plus travel satisfaction over the vehicles that
    /// optimise it; `None` without such vehicles.
    pub fn mean_satisfaction(&self) -> Option<f64> {
        let sats: Vec<f64> = self
            .ev_plans
            .iter()
            .filter_map(|p| p.satisfaction.map(|s| s.total()))
            .collect();
        (!sats.is_empty()).then(|| sats.iter().sum::<f64>() / sats.len() as f64)
    }
}

/// Runs the follower and the EV stage of microgrid `k` under `user_price`.
pub fn evaluate_microgrid(
    model: &SystemModel,
    k: usize,
    user_price: &[f64],
    opts: SchemeOptions,
) -> Result<MicrogridOutcome> {
    let mg = &model.microgrids[k];
    if user_price.len() != HOURS {
        return Err(Error::param(format!("tariff must have {HOURS} entries")));
    }
    let response = if opts.demand_response {
        follower_load_response(user_price, &mg.load)?
    } else {
        mg.load.clone()
    };
    let user_load = response.totals();
    let (ev_price, no_load_hours) = match opts.ev_policy {
        EvPolicy::Dynamic => {
            let state = MicrogridHourState {
                wt: mg.wt.clone(),
                pv: mg.pv.clone(),
                load: user_load.clone(),
            };
            let t = ev_dynamic_tariff(user_price, &state)?;
            (t.price, t.no_load_hours)
        }
        EvPolicy::UserTariff => (user_price.to_vec(), Vec::new()),
    };
    let tariff = TariffSchedule {
        user_price: user_price.to_vec(),
        ev_price,
        band: mg.bands.clone(),
    };
    tariff.validate()?;
    let ceiling: Vec<f64> = user_price.iter().map(|c| EV_PRICE_CEILING * c).collect();
    let prices = EvPrices {
        charge: &tariff.ev_price,
        discharge: &tariff.ev_price,
        ceiling: &ceiling,
    };
    let ev_plans = mg
        .fleet
        .iter()
        .map(|ev| {
            if ev.controllable && opts.ev_policy == EvPolicy::Dynamic {
                optimize_ev_schedule(ev, prices, &model.wear, model.soc_resolution)
            } else {
                immediate_plan(ev, prices, &model.wear, model.soc_resolution)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let schedules: Vec<_> = ev_plans.iter().map(|p| p.schedule.clone()).collect();
    let ev_payment = ev_energy_payment(&schedules, &tariff.ev_price, &tariff.ev_price);
    let ev_expense = ev_plans.iter().map(|p| p.expense).sum();
    let mut demand = user_load;
    for s in &schedules {
        for (h, d) in demand.iter_mut().enumerate() {
            *d += s.charge_kw[h] - s.discharge_kw[h];
        }
    }
    Ok(MicrogridOutcome {
        user_cost: user_cost(user_price, &response),
        tariff,
        response,
        ev_plans,
        no_load_hours,
        position: MicrogridPosition {
            wt: mg.wt.clone(),
            pv: mg.pv.clone(),
            demand,
        },
        ev_payment,
        ev_expense,
    })
}

/// Supply-side settlement of a set of demand-side outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Settlement {
    /// Alliance dispatch, or the stacked standalone dispatches.
    pub dispatch: DispatchSolution,
    /// Operating cost borne by each microgrid.
    pub cost_shares: Vec<f64>,
    pub allocation: Option<CoalitionAllocation>,
}

/// Stacks independent single-microgrid dispatches into one solution.
pub fn merge_standalone(parts: &[DispatchSolution]) -> DispatchSolution {
    let mut out = DispatchSolution {
        internal_buy: Vec::new(),
        internal_sell: Vec::new(),
        grid_buy_mg: Vec::new(),
        grid_sell_mg: Vec::new(),
        curtailed_mg: Vec::new(),
        grid_buy: vec![0.0; HOURS],
        grid_sell: vec![0.0; HOURS],
        f1: 0.0,
        f2: 0.0,
        f3: 0.0,
        f4: 0.0,
        total: 0.0,
    };
    for p in parts {
        out.internal_buy.extend(p.internal_buy.iter().cloned());
        out.internal_sell.extend(p.internal_sell.iter().cloned());
        out.grid_buy_mg.extend(p.grid_buy_mg.iter().cloned());
        out.grid_sell_mg.extend(p.grid_sell_mg.iter().cloned());
        out.curtailed_mg.extend(p.curtailed_mg.iter().cloned());
        for h in 0..HOURS {
            out.grid_buy[h] += p.grid_buy[h];
            out.grid_sell[h] += p.grid_sell[h];
        }
        out.f1 += p.f1;
        out.f2 += p.f2;
        out.f3 += p.f3;
        out.f4 += p.f4;
    }
    out.total = out.f1 + out.f2 + out.f3 + out.f4;
    out
}

pub fn settle(
    positions: &[MicrogridPosition],
    params: &AllianceParams,
    cooperative: bool,
) -> Result<Settlement> {
    if cooperative {
        let dispatch = alliance_dispatch(positions, params)?;
        let allocation = allocate(positions, params)?;
        Ok(Settlement {
            dispatch,
            cost_shares: allocation.cost_shares(),
            allocation: Some(allocation),
        })
    } else {
        let parts = positions
            .iter()
            .map(|p| alliance_dispatch(std::slice::from_ref(p), params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Settlement {
            cost_shares: parts.iter().map(|d| d.total).collect(),
            dispatch: merge_standalone(&parts),
            allocation: None,
        })
    }
}

/// Operator profit and user bill of microgrid `k` when it posts
/// `outcome` while the others post `others`.
pub fn microgrid_profit(
    k: usize,
    outcome: &MicrogridOutcome,
    others: &[MicrogridOutcome],
    params: &AllianceParams,
    cooperative: bool,
) -> Result<f64> {
    let revenue = outcome.user_cost + outcome.ev_payment;
    let share = if cooperative {
        let positions: Vec<MicrogridPosition> = others
            .iter()
            .enumerate()
            .map(|(j, o)| {
                if j == k {
                    outcome.position.clone()
                } else {
                    o.position.clone()
                }
            })
            .collect();
        allocate(&positions, params)?.cost_shares()[k]
    } else {
        alliance_dispatch(std::slice::from_ref(&outcome.position), params)?.total
    };
    Ok(revenue - share)
}

/// Demand-side outcomes and settlement for a full set of tariffs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemOutcome {
    pub outcomes: Vec<MicrogridOutcome>,
    pub settlement: Settlement,
    /// Operator profit per microgrid.
    pub profits: Vec<f64>,
}

impl SystemOutcome {
    pub fn user_costs(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.user_cost).collect()
    }
}

pub fn evaluate_system(
    model: &SystemModel,
    tariffs: &[Vec<f64>],
    opts: SchemeOptions,
) -> Result<SystemOutcome> {
    if tariffs.len() != model.microgrids.len() {
        return Err(Error::param("one tariff per microgrid required"));
    }
    let outcomes = tariffs
        .iter()
        .enumerate()
        .map(|(k, t)| evaluate_microgrid(model, k, t, opts))
        .collect::<Result<Vec<_>>>()?;
    let positions: Vec<MicrogridPosition> = outcomes.iter().map(|o| o.position.clone()).collect();
    let settlement = settle(&positions, &model.alliance, opts.cooperative)?;
    let profits = outcomes
        .iter()
        .zip(&settlement.cost_shares)
        .map(|(o, share)| o.user_cost + o.ev_payment - share)
        .collect();
    Ok(SystemOutcome {
        outcomes,
        settlement,
        profits,
    })
}
