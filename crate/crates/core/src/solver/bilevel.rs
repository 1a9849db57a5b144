use serde::{Deserialize, Serialize};

use super::ga::{GaConfig, Population};
use super::system::{
    evaluate_microgrid, evaluate_system, microgrid_profit, MicrogridOutcome, SchemeOptions,
    SystemModel, SystemOutcome,
};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub microgrid: usize,
    /// Best operator profit of this iteration's population.
    pub profit: f64,
    /// User bill under that best tariff.
    pub user_cost: f64,
    /// Retained best profit so far.
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopState {
    pub tariffs: Vec<Vec<f64>>,
    /// Retained profit record per microgrid.
    pub best_profit: Vec<f64>,
    /// User bill paired with the retained profit.
    pub best_user_cost: Vec<f64>,
    /// Outer iterations run after the initial evaluation.
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct LoopResult {
    pub state: LoopState,
    pub trace: Vec<TraceRow>,
    /// Replay of the final tariffs.
    pub outcome: SystemOutcome,
}

fn candidate_fitness(
    model: &SystemModel,
    k: usize,
    price: &[f64],
    frozen: &[MicrogridOutcome],
    opts: SchemeOptions,
) -> Result<f64> {
    let attempt = evaluate_microgrid(model, k, price, opts)
        .and_then(|o| microgrid_profit(k, &o, frozen, &model.alliance, opts.cooperative));
    match attempt {
        // infeasible tariffs lose the selection, they do not stop the search
        Err(e) if e.is_infeasibility() => Ok(f64::NEG_INFINITY),
        other => other,
    }
}

/// Iterative leader search: each microgrid operator evolves its tariff
/// population one generation per outer iteration while the other operators
/// keep their current best tariff (round robin). The retained record per
/// operator keeps the larger profit; the loop stops once no record moves by
/// `convergence_eps` (profit and user bill) in a full iteration, or after
/// `generations` iterations.
pub fn tpm_alliance_loop(
    model: &SystemModel,
    opts: SchemeOptions,
    cfg: &GaConfig,
    seed: u64,
) -> Result<LoopResult> {
    model.validate()?;
    cfg.validate()?;
    let n = model.microgrids.len();
    let mut pops = model
        .microgrids
        .iter()
        .enumerate()
        .map(|(k, mg)| {
            Population::new(
                mg.bands.clone(),
                *cfg,
                stream_rng(seed, streams::GA_BASE + k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tariffs: Vec<Vec<f64>> = pops.iter().map(|p| p.individuals()[0].clone()).collect();
    let mut frozen = tariffs
        .iter()
        .enumerate()
        .map(|(k, t)| evaluate_microgrid(model, k, t, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut best_profit = vec![f64::NEG_INFINITY; n];
    let mut best_user_cost = vec![f64::NAN; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for e in 0..=cfg.generations {
        let before = (best_profit.clone(), best_user_cost.clone());
        for k in 0..n {
            let pop = &mut pops[k];
            if e > 0 {
                pop.advance();
            }
            let snapshot = &frozen;
            pop.evaluate(|x| candidate_fitness(model, k, x, snapshot, opts))?;
            let (x, f) = pop.best();
            if f == f64::NEG_INFINITY {
                // every candidate infeasible: surface the reason
                let o = evaluate_microgrid(model, k, x, opts)?;
                microgrid_profit(k, &o, &frozen, &model.alliance, opts.cooperative)?;
                return Err(Error::param("no feasible tariff candidate"));
            }
            tariffs[k] = x.to_vec();
            frozen[k] = evaluate_microgrid(model, k, x, opts)?;
            let user_cost = frozen[k].user_cost;
            if f > best_profit[k] {
                best_profit[k] = f;
                best_user_cost[k] = user_cost;
            }
            trace.push(TraceRow {
                iteration: e,
                microgrid: k,
                profit: f,
                user_cost,
                best_fitness: best_profit[k],
            });
        }
        iterations = e;
        if e > 0 {
            let eps = cfg.convergence_eps;
            let settled = (0..n).all(|k| {
                (best_profit[k] - before.0[k]).abs() < eps
                    && (best_user_cost[k] - before.1[k]).abs() < eps
            });
            if settled {
                converged = true;
                break;
            }
        }
    }
    let outcome = evaluate_system(model, &tariffs, opts)?;
    Ok(LoopResult {
        state: LoopState {
            tariffs,
            best_profit,
            best_user_cost,
            iterations,
            converged,
        },
        trace,
        outcome,
    })
}

/// Re-runs the demand side and settlement on the final tariffs and checks
/// that profits and user bills come out bit-identical.
pub fn replay_matches(
    model: &SystemModel,
    result: &LoopResult,
    opts: SchemeOptions,
) -> Result<bool> {
    let again = evaluate_system(model, &result.state.tariffs, opts)?;
    Ok(
        again.profits == result.outcome.profits
            && again.user_costs() == result.outcome.user_costs(),
    )
}
