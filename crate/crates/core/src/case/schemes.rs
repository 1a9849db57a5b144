use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::build::PreparedCase;
use crate::alliance::{DispatchSolution, MicrogridPosition};
use crate::error::{Error, Result};
use crate::solver::{
    evaluate_system, tpm_alliance_loop, EvPolicy, LoopState, SchemeOptions, Settlement,
    SystemOutcome, TraceRow,
};
use crate::HOURS;

/// The four comparison schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Two-stage pricing inside the cooperative alliance.
    Full,
    /// Alliance with demand response, EVs billed at the user tariff and
    /// charging on arrival.
    NoEvPricing,
    /// Two-stage pricing with every microgrid trading only with the grid.
    Standalone,
    /// No alliance, no demand response, the full scheme's final tariffs.
    Baseline,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Full,
        Scheme::NoEvPricing,
        Scheme::Standalone,
        Scheme::Baseline,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Scheme::Full),
            2 => Ok(Scheme::NoEvPricing),
            3 => Ok(Scheme::Standalone),
            4 => Ok(Scheme::Baseline),
            _ => Err(Error::param(format!(
                "scheme must be 1, 2, 3 or 4, got {id}"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Scheme::Full => 1,
            Scheme::NoEvPricing => 2,
            Scheme::Standalone => 3,
            Scheme::Baseline => 4,
        }
    }

    pub fn options(self) -> SchemeOptions {
        let (demand_response, ev_policy, cooperative) = match self {
            Scheme::Full => (true, EvPolicy::Dynamic, true),
            Scheme::NoEvPricing => (true, EvPolicy::UserTariff, true),
            Scheme::Standalone => (true, EvPolicy::Dynamic, false),
            Scheme::Baseline => (false, EvPolicy::UserTariff, false),
        };
        SchemeOptions {
            demand_response,
            ev_policy,
            cooperative,
        }
    }

    /// Whether the scheme searches its own tariffs.
    pub fn optimizes_tariffs(self) -> bool {
        self != Scheme::Baseline
    }
}

/// Wall-clock timings; never serialised so reports stay reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub solve: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrogridReport {
    pub name: String,
    /// Operator profit: user and EV payments less the allocated cost.
    pub operating_revenue: f64,
    pub user_cost: f64,
    /// Net EV payment for energy.
    pub ev_cost: f64,
    /// EV owners' expense including battery wear.
    pub ev_expense: f64,
    pub satisfaction: Option<f64>,
    pub cost_share: f64,
    pub grid_buy_kwh: f64,
    pub grid_sell_kwh: f64,
    pub internal_buy_kwh: f64,
    pub internal_sell_kwh: f64,
    pub curtailed_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub case: String,
    pub label: String,
    pub seed: u64,
    pub microgrids: Vec<MicrogridReport>,
    pub total_revenue: f64,
    pub total_user_cost: f64,
    pub total_ev_cost: f64,
    pub load_side_cost: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub total_cost: f64,
    pub grid_buy_kwh: f64,
    pub grid_sell_kwh: f64,
    pub internal_trade_kwh: f64,
    pub generation_kwh: f64,
    pub renewable_consumption_kwh: f64,
    pub curtailed_kwh: f64,
    /// Curtailed share of renewable generation, %.
    pub curtailment_rate: f64,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    #[serde(skip)]
    pub timings: Timings,
}

/// Demand-side figures of one microgrid, input to [`build_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSide {
    pub name: String,
    pub user_cost: f64,
    pub ev_cost: f64,
    pub ev_expense: f64,
    pub satisfaction: Option<f64>,
}

pub fn build_report(
    case: &str,
    label: &str,
    seed: u64,
    demand: &[DemandSide],
    positions: &[MicrogridPosition],
    settlement: &Settlement,
) -> RunReport {
    let d: &DispatchSolution = &settlement.dispatch;
    let sum = |v: &Vec<f64>| v.iter().sum::<f64>();
    let microgrids: Vec<MicrogridReport> = demand
        .iter()
        .enumerate()
        .map(|(k, m)| MicrogridReport {
            name: m.name.clone(),
            operating_revenue: m.user_cost + m.ev_cost - settlement.cost_shares[k],
            user_cost: m.user_cost,
            ev_cost: m.ev_cost,
            ev_expense: m.ev_expense,
            satisfaction: m.satisfaction,
            cost_share: settlement.cost_shares[k],
            grid_buy_kwh: sum(&d.grid_buy_mg[k]),
            grid_sell_kwh: sum(&d.grid_sell_mg[k]),
            internal_buy_kwh: sum(&d.internal_buy[k]),
            internal_sell_kwh: sum(&d.internal_sell[k]),
            curtailed_kwh: sum(&d.curtailed_mg[k]),
        })
        .collect();
    let generation: f64 = positions
        .iter()
        .map(|p| (0..HOURS).map(|h| p.wt[h] + p.pv[h]).sum::<f64>())
        .sum();
    let curtailed = d.curtailed_total();
    let grid_sell = d.grid_sell_total();
    let total_user_cost = microgrids.iter().map(|m| m.user_cost).sum();
    let total_ev_cost: f64 = microgrids.iter().map(|m| m.ev_cost).sum();
    RunReport {
        case: case.to_string(),
        label: label.to_string(),
        seed,
        total_revenue: microgrids.iter().map(|m| m.operating_revenue).sum(),
        total_user_cost,
        total_ev_cost,
        load_side_cost: total_user_cost + total_ev_cost,
        microgrids,
        f1: d.f1,
        f2: d.f2,
        f3: d.f3,
        f4: d.f4,
        total_cost: d.total,
        grid_buy_kwh: d.grid_buy_total(),
        grid_sell_kwh: grid_sell,
        internal_trade_kwh: d.internal_volume(),
        generation_kwh: generation,
        renewable_consumption_kwh: generation - grid_sell - curtailed,
        curtailed_kwh: curtailed,
        curtailment_rate: if generation > 0.0 {
            100.0 * curtailed / generation
        } else {
            0.0
        },
        iterations: None,
        converged: None,
        timings: Timings::default(),
    }
}

pub fn outcome_demand_side(case: &PreparedCase, outcome: &SystemOutcome) -> Vec<DemandSide> {
    case.names()
        .into_iter()
        .zip(&outcome.outcomes)
        .map(|(name, o)| DemandSide {
            name,
            user_cost: o.user_cost,
            ev_cost: o.ev_payment,
            ev_expense: o.ev_expense,
            satisfaction: o.mean_satisfaction(),
        })
        .collect()
}

/// Result of running one scheme on a prepared case.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub tariffs: Vec<Vec<f64>>,
    pub outcome: SystemOutcome,
    pub trace: Vec<TraceRow>,
    pub state: Option<LoopState>,
    pub report: RunReport,
}

impl SchemeRun {
    pub fn positions(&self) -> Vec<MicrogridPosition> {
        self.outcome
            .outcomes
            .iter()
            .map(|o| o.position.clone())
            .collect()
    }
}

/// Runs `scheme`. The baseline scheme reuses the full scheme's tariffs;
/// pass them in `full_tariffs` to avoid solving the full scheme again.
pub fn run_scheme(
    case: &PreparedCase,
    scheme: Scheme,
    full_tariffs: Option<&[Vec<f64>]>,
) -> Result<SchemeRun> {
    let start = Instant::now();
    let opts = scheme.options();
    let (tariffs, outcome, trace, state) = if scheme.optimizes_tariffs() {
        let res = tpm_alliance_loop(&case.model, opts, &case.file.solver.ga(), case.seed())?;
        (
            res.state.tariffs.clone(),
            res.outcome,
            res.trace,
            Some(res.state),
        )
    } else {
        let tariffs = match full_tariffs {
            Some(t) => t.to_vec(),
            None => run_scheme(case, Scheme::Full, None)?.tariffs,
        };
        let outcome = evaluate_system(&case.model, &tariffs, opts)?;
        (tariffs, outcome, Vec::new(), None)
    };
    let solve = start.elapsed();
    let positions: Vec<MicrogridPosition> = outcome
        .outcomes
        .iter()
        .map(|o| o.position.clone())
        .collect();
    let mut report = build_report(
        &case.file.meta.name,
        &format!("scheme-{}", scheme.id()),
        case.seed(),
        &outcome_demand_side(case, &outcome),
        &positions,
        &outcome.settlement,
    );
    if let Some(s) = &state {
        report.iterations = Some(s.iterations);
        report.converged = Some(s.converged);
    }
    report.timings = Timings {
        solve,
        total: start.elapsed(),
    };
    Ok(SchemeRun {
        scheme,
        tariffs,
        outcome,
        trace,
        state,
        report,
    })
}

/// Reference run without the two-stage pricing mechanism: the alliance is
/// kept and the full scheme's tariffs are charged, but users do not respond
/// and EVs charge on arrival at the user tariff.
pub fn run_without_pricing(case: &PreparedCase, full_tariffs: &[Vec<f64>]) -> Result<RunReport> {
    let start = Instant::now();
    let opts = SchemeOptions {
        demand_response: false,
        ev_policy: EvPolicy::UserTariff,
        cooperative: true,
    };
    let outcome = evaluate_system(&case.model, full_tariffs, opts)?;
    let solve = start.elapsed();
    let positions: Vec<MicrogridPosition> = outcome
        .outcomes
        .iter()
        .map(|o| o.position.clone())
        .collect();
    let mut report = build_report(
        &case.file.meta.name,
        "no-tpm",
        case.seed(),
        &outcome_demand_side(case, &outcome),
        &positions,
        &outcome.settlement,
    );
    report.timings = Timings {
        solve,
        total: start.elapsed(),
    };
    Ok(report)
}

/// All four schemes; the baseline reuses the full scheme's tariffs.
pub fn compare_schemes(case: &PreparedCase) -> Result<Vec<SchemeRun>> {
    let full = run_scheme(case, Scheme::Full, None)?;
    let mut runs = Vec::with_capacity(4);
    for scheme in [Scheme::NoEvPricing, Scheme::Standalone] {
        runs.push(run_scheme(case, scheme, None)?);
    }
    let baseline = run_scheme(case, Scheme::Baseline, Some(&full.tariffs))?;
    runs.insert(0, full);
    runs.push(baseline);
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_ids_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::from_id(s.id()).unwrap(), s);
        }
        assert!(Scheme::from_id(5).is_err());
    }

    #[test]
    fn only_standalone_schemes_skip_the_alliance() {
        assert!(Scheme::Full.options().cooperative);
        assert!(Scheme::NoEvPricing.options().cooperative);
        assert!(!Scheme::Standalone.options().cooperative);
        assert!(!Scheme::Baseline.options().demand_response);
    }
}
