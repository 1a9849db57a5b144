//! Brute-force oracles shared by the oracle and acceptance suites. Each
//! harness runs randomized small instances and reports every trial.
#![allow(dead_code)]

use mmg_core::alliance::{alliance_dispatch, AllianceParams, MicrogridPosition};
use mmg_core::ev::{Battery, Degradation, EvProfile};
use mmg_core::pricing::{
    follower_load_response, optimize_ev_schedule, user_cost, EvPrices, LoadProfile,
};
use mmg_core::renewables::{reduce_scenarios_traced, MicrogridTrajectory, Scenario, ScenarioSet};
use mmg_core::{Error, HOURS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Trial = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn passed(trials: &[Trial]) -> usize {
    trials.iter().filter(|t| t.is_ok()).count()
}

pub fn assert_all(trials: &[Trial]) {
    for (i, t) in trials.iter().enumerate() {
        if let Err(e) = t {
            panic!("trial {i}: {e}");
        }
    }
}

// ---------------------------------------------------------------- scenario reduction

pub fn toy_scenario(r: &mut ChaCha8Rng, microgrids: usize) -> Scenario {
    let mut series = || {
        (0..HOURS)
            .map(|_| r.random_range(0.0..50.0))
            .collect::<Vec<f64>>()
    };
    Scenario {
        microgrids: (0..microgrids)
            .map(|_| MicrogridTrajectory {
                wt: series(),
                pv: series(),
                load: series(),
            })
            .collect(),
    }
}

fn flat_distance(a: &Scenario, b: &Scenario) -> f64 {
    let mut total = 0.0;
    for (x, y) in a.microgrids.iter().zip(&b.microgrids) {
        let xs = x.wt.iter().chain(&x.pv).chain(&x.load);
        let ys = y.wt.iter().chain(&y.pv).chain(&y.load);
        total += xs.zip(ys).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    }
    total
}

/// Deletes, one scenario at a time, the one whose removal costs least
/// (probability times probability-weighted nearest distance), trying every
/// live scenario in turn.
fn brute_deletions(set: &ScenarioSet, target: usize) -> Vec<(usize, usize)> {
    let s = set.scenarios();
    let mut p = set.probabilities().to_vec();
    let mut live: Vec<usize> = (0..s.len()).collect();
    let mut out = Vec::new();
    while live.len() > target {
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &live {
            let (j, d) = live
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (j, flat_distance(&s[i], &s[j])))
                .fold(None, |acc: Option<(usize, f64)>, (j, d)| match acc {
                    Some((_, bd)) if bd <= d => acc,
                    _ => Some((j, d)),
                })
                .unwrap();
            let key = p[i] * p[i] * d;
            if best.is_none_or(|(k, _, _)| key < k) {
                best = Some((key, i, j));
            }
        }
        let (_, i, j) = best.unwrap();
        p[j] += p[i];
        live.retain(|&x| x != i);
        out.push((i, j));
    }
    out
}

/// Three-scenario sets reduced to one and to two survivors.
pub fn reduction_trials(seed: u64, n: usize) -> Vec<Trial> {
    let mut r = rng(seed);
    (0..n)
        .map(|trial| {
            let scen: Vec<Scenario> = (0..3)
                .map(|_| toy_scenario(&mut r, 1 + trial % 3))
                .collect();
            let raw: Vec<f64> = (0..3).map(|_| r.random_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let mut probs: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            probs[2] = 1.0 - probs[0] - probs[1];
            let set = ScenarioSet::new(scen, probs).map_err(|e| e.to_string())?;
            for target in [1, 2] {
                let (reduced, trace) =
                    reduce_scenarios_traced(&set, target).map_err(|e| e.to_string())?;
                let got: Vec<(usize, usize)> =
                    trace.iter().map(|d| (d.removed, d.merged_into)).collect();
                let want = brute_deletions(&set, target);
                ensure!(got == want, "target {target}: {got:?} vs {want:?}");
                let total: f64 = reduced.probabilities().iter().sum();
                ensure!((total - 1.0).abs() <= 1e-12, "mass {total}");
            }
            Ok(())
        })
        .collect()
}

// ---------------------------------------------------------------- follower

/// Minimum bill over the vertices of {lo <= al <= hi, sum al = energy}:
/// every vertex has at most one coordinate strictly inside its bounds.
pub fn vertex_minimum(price: &[f64], lo: &[f64], hi: &[f64], energy: f64) -> Option<f64> {
    let n = price.len();
    let mut best: Option<f64> = None;
    for free in 0..=n {
        for mask in 0..(1u32 << n) {
            let mut al = vec![0.0; n];
            let mut fixed = 0.0;
            for h in (0..n).filter(|&h| h != free) {
                al[h] = if mask & (1 << h) != 0 { hi[h] } else { lo[h] };
                fixed += al[h];
            }
            if free < n {
                al[free] = energy - fixed;
                if al[free] < lo[free] - 1e-9 || al[free] > hi[free] + 1e-9 {
                    continue;
                }
            } else if (fixed - energy).abs() > 1e-9 {
                continue;
            }
            let cost: f64 = (0..n).map(|h| price[h] * al[h]).sum();
            if best.is_none_or(|b| cost < b) {
                best = Some(cost);
            }
        }
    }
    best
}

/// 2 to 4 responsive hours with integer bounds.
pub fn follower_trials(seed: u64, n: usize) -> Vec<Trial> {
    let mut r = rng(seed);
    let levels = [0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4];
    (0..n)
        .map(|trial| {
            let hours = 2 + trial % 3;
            let start = r.random_range(0..HOURS - hours);
            let mut nl = vec![0.0; HOURS];
            let mut base = vec![0.0; HOURS];
            let mut price = vec![1.0; HOURS];
            for h in start..start + hours {
                nl[h] = r.random_range(0..20) as f64;
                base[h] = 5.0 * r.random_range(1..=10) as f64;
                price[h] = levels[r.random_range(0..levels.len())];
            }
            let profile =
                LoadProfile::new(nl.clone(), base.clone(), 0.2).map_err(|e| e.to_string())?;
            let out = follower_load_response(&price, &profile).map_err(|e| e.to_string())?;
            let window = start..start + hours;
            let lo: Vec<f64> = window.clone().map(|h| profile.al_min[h]).collect();
            let hi: Vec<f64> = window.clone().map(|h| profile.al_max[h]).collect();
            ensure!(
                lo.iter().chain(&hi).all(|v| v.fract() == 0.0),
                "bounds not integer"
            );
            let energy: f64 = window.clone().map(|h| base[h]).sum();
            let fixed: f64 = (0..HOURS).map(|h| price[h] * nl[h]).sum();
            let oracle = vertex_minimum(&price[window.clone()], &lo, &hi, energy)
                .ok_or("no vertex")?
                + fixed;
            let got = user_cost(&price, &out);
            ensure!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
            let moved: f64 = out.al.iter().sum();
            ensure!((moved - energy).abs() < 1e-9, "energy {moved} vs {energy}");
            Ok(())
        })
        .collect()
}

// ---------------------------------------------------------------- EV dynamic program

struct Toy {
    kc: i32,
    kd: i32,
    step: f64,
    lowest: i32,
    highest: i32,
    required: i32,
}

fn toy_lattice(p: &EvProfile, res: f64) -> Toy {
    let b = &p.battery;
    let dc = b.max_power_kw * b.charge_eff / b.capacity_kwh;
    let kc = (dc / res - 1e-9).ceil() as i32;
    let step = dc / kc as f64;
    let kd = (b.max_power_kw / (b.discharge_eff * b.capacity_kwh) / step + 1e-9).floor() as i32;
    let lowest = ((b.soc_min - p.soc_arrival) / step - 1e-9).ceil().min(0.0) as i32;
    let highest = ((b.soc_max - p.soc_arrival) / step + 1e-9).floor().max(0.0) as i32;
    let required = ((p.soc_required - p.soc_arrival) / step - 1e-4)
        .ceil()
        .max(0.0)
        .min(highest as f64) as i32;
    Toy {
        kc,
        kd,
        step,
        lowest,
        highest,
        required,
    }
}

fn grid_kw(t: &Toy, b: &Battery, from: i32, to: i32) -> f64 {
    let stored = (to - from) as f64 * t.step * b.capacity_kwh;
    if stored >= 0.0 {
        stored / b.charge_eff
    } else {
        stored * b.discharge_eff
    }
}

/// Grid power of every action sequence (0 charge, 1 idle, 2 discharge)
/// together with the final level.
fn all_plans(t: &Toy, b: &Battery, slots: usize) -> Vec<(Vec<f64>, i32)> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(slots as u32) {
        let mut c = code;
        let mut q = 0;
        let mut power = Vec::with_capacity(slots);
        for _ in 0..slots {
            let next = match c % 3 {
                0 => (q + t.kc).min(t.highest),
                1 => q,
                _ => (q - t.kd).max(t.lowest),
            };
            c /= 3;
            power.push(grid_kw(t, b, q, next));
            q = next;
        }
        out.push((power, q));
    }
    out
}

/// Four-slot windows, scored by an independent price plus travel
/// satisfaction over all 3^4 action sequences.
pub fn ev_trials(seed: u64, n: usize) -> Vec<Trial> {
    let mut r = rng(seed);
    let wear = Degradation::default();
    let w = wear.per_kwh();
    (0..n)
        .map(|trial| {
            let arrive = r.random_range(0..HOURS);
            let battery = Battery {
                capacity_kwh: [20.0, 30.0, 40.0][trial % 3],
                ..Battery::default()
            };
            let soc_arrival: f64 = r.random_range(0.1..0.95);
            let soc_required = (soc_arrival + r.random_range(0.0..0.3_f64)).min(1.0);
            let profile = EvProfile {
                id: trial,
                microgrid: 0,
                controllable: true,
                arrive_hour: arrive,
                depart_hour: (arrive + 4) % HOURS,
                soc_arrival,
                soc_required,
                battery,
            };
            let charge: Vec<f64> = (0..HOURS).map(|_| r.random_range(0.56..2.2)).collect();
            let discharge: Vec<f64> = if trial % 2 == 0 {
                charge.clone()
            } else {
                charge
                    .iter()
                    .map(|c| c * r.random_range(0.6..1.0))
                    .collect()
            };
            let ceiling: Vec<f64> = charge
                .iter()
                .map(|c| c * r.random_range(1.0..1.6))
                .collect();
            let prices = EvPrices {
                charge: &charge,
                discharge: &discharge,
                ceiling: &ceiling,
            };
            let t = toy_lattice(&profile, 0.01);
            let plan = match optimize_ev_schedule(&profile, prices, &wear, 0.01) {
                Ok(plan) => plan,
                Err(Error::DepartureUnreachable { .. }) => {
                    ensure!(t.required > t.kc * 4, "wrongly infeasible");
                    return Ok(());
                }
                Err(e) => return Err(e.to_string()),
            };
            let hour = |i: usize| (arrive + i) % HOURS;
            let expense = |power: &[f64]| -> f64 {
                power
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let price = if p >= 0.0 {
                            charge[hour(i)]
                        } else {
                            discharge[hour(i)]
                        };
                        p * price + p.abs() * w
                    })
                    .sum()
            };
            // immediate reference and latest-start reference
            let mut outmax = Vec::new();
            let mut q = 0;
            for _ in 0..4 {
                let next = (q + t.kc).min(t.highest);
                outmax.push(grid_kw(&t, &battery, q, next));
                q = next;
            }
            let mut outmin = vec![0.0; 4];
            let mut need = t.required;
            for i in (0..4).rev() {
                let take = need.min(t.kc);
                outmin[i] = grid_kw(&t, &battery, 0, take);
                need -= take;
            }
            let f_max: f64 = outmax
                .iter()
                .enumerate()
                .map(|(i, p)| p * ceiling[hour(i)] + p.abs() * w)
                .sum();
            let f_min = expense(&outmax).min(expense(&outmin));
            let span: f64 = outmax.iter().zip(&outmin).map(|(a, b)| (a - b).abs()).sum();
            let score = |power: &[f64]| -> f64 {
                let theta = (1.0 - (expense(power) - f_min) / (f_max - f_min)).clamp(0.0, 1.0);
                let dev: f64 = outmax.iter().zip(power).map(|(a, p)| (a - p).abs()).sum();
                let delta = if span > 1e-9 { 1.0 - dev / span } else { 1.0 };
                theta + delta
            };
            let best = all_plans(&t, &battery, 4)
                .into_iter()
                .filter(|(_, end)| *end >= t.required)
                .map(|(power, _)| score(&power))
                .fold(f64::NEG_INFINITY, f64::max);
            let power = plan.schedule.grid_power();
            let window: Vec<f64> = (0..4).map(|i| power[hour(i)]).collect();
            let got = score(&window);
            ensure!((got - best).abs() < 1e-9, "dp {got} vs brute {best}");
            let sat = plan.satisfaction.ok_or("no satisfaction")?;
            ensure!(
                (sat.total() - got).abs() < 1e-9,
                "reported {} vs {got}",
                sat.total()
            );
            plan.schedule
                .validate(&profile)
                .map_err(|e| e.to_string())?;
            Ok(())
        })
        .collect()
}

// ---------------------------------------------------------------- alliance dispatch

/// Cheapest settlement of one hour by enumerating internal purchases,
/// internal sales, grid purchases and grid sales of every microgrid.
/// Curtailment takes up whatever is left; grid buying and selling are not
/// allowed together.
fn brute_hour(net: &[i32], cap: i32, line: i32, buy: f64, sell: f64, om: f64) -> Option<f64> {
    let n = net.len();
    let mut best: Option<f64> = None;
    let mut bs = vec![0i32; 2 * n];
    loop {
        let bought: i32 = bs[..n].iter().sum();
        let sold: i32 = bs[n..].iter().sum();
        if bought == sold {
            let resid: Vec<i32> = (0..n).map(|k| net[k] + bs[k] - bs[n + k]).collect();
            let gmax: Vec<i32> = resid.iter().map(|r| (-r).max(0)).collect();
            let emax: Vec<i32> = (0..n).map(|k| resid[k].max(0)).collect();
            let mut g = vec![0i32; n];
            loop {
                let mut e = vec![0i32; n];
                loop {
                    let gi: i32 = g.iter().sum();
                    let ei: i32 = e.iter().sum();
                    let balanced = (0..n).all(|k| resid[k] + g[k] - e[k] >= 0);
                    if balanced && gi <= line && ei <= line && (gi == 0 || ei == 0) {
                        let cost = (buy + om) * gi as f64 - (sell - om) * ei as f64;
                        if best.is_none_or(|b| cost < b - 1e-12) {
                            best = Some(cost);
                        }
                    }
                    if !bump(&mut e, &emax) {
                        break;
                    }
                }
                if !bump(&mut g, &gmax) {
                    break;
                }
            }
        }
        let lim = vec![cap; 2 * n];
        if !bump(&mut bs, &lim) {
            break;
        }
    }
    best
}

/// Odometer increment of `v` under per-digit maxima; false once it wraps.
fn bump(v: &mut [i32], max: &[i32]) -> bool {
    for (x, &m) in v.iter_mut().zip(max) {
        if *x < m {
            *x += 1;
            return true;
        }
        *x = 0;
    }
    false
}

/// Up to three microgrids over up to three hours, integer nets and limits.
pub fn dispatch_trials(seed: u64, n: usize) -> Vec<Trial> {
    let mut r = rng(seed);
    let buys = [1.2, 1.4, 1.5, 1.65];
    (0..n)
        .map(|trial| {
            let mgs = 1 + trial % 3;
            let hours = 1 + (trial / 3) % 3;
            let cap = r.random_range(0..=4);
            let line = r.random_range(1..=10);
            let buy: Vec<f64> = (0..HOURS)
                .map(|_| buys[r.random_range(0..buys.len())])
                .collect();
            let om = if trial % 4 == 0 { 0.9 } else { 0.17 };
            let params = AllianceParams {
                grid_sell_price: buy.iter().map(|b| 0.7 * b).collect(),
                inter_price: buy.iter().map(|b| b - 0.1).collect(),
                grid_buy_price: buy.clone(),
                wt_cost: 0.376,
                pv_cost: 0.428,
                line_om_cost: om,
                line_min: 0.0,
                line_max: line as f64,
                transfer_max: cap as f64,
            };
            let nets: Vec<Vec<i32>> = (0..mgs)
                .map(|_| {
                    (0..HOURS)
                        .map(|h| {
                            if h < hours {
                                r.random_range(-10..=10)
                            } else {
                                0
                            }
                        })
                        .collect()
                })
                .collect();
            let positions: Vec<MicrogridPosition> = nets
                .iter()
                .map(|v| {
                    MicrogridPosition::from_net(&v.iter().map(|&x| x as f64).collect::<Vec<_>>())
                })
                .collect();
            let mut oracle = Some(0.0);
            for h in 0..hours {
                let net: Vec<i32> = nets.iter().map(|v| v[h]).collect();
                let hour = brute_hour(&net, cap, line, buy[h], 0.7 * buy[h], om);
                oracle = match (oracle, hour) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
            }
            match (alliance_dispatch(&positions, &params), oracle) {
                (Ok(sol), Some(best)) => {
                    let f3: f64 = positions
                        .iter()
                        .map(|p| p.wt.iter().sum::<f64>() * params.wt_cost)
                        .sum();
                    ensure!(
                        (sol.total - f3 - best).abs() < 1e-9,
                        "{} vs {best}",
                        sol.total - f3
                    );
                    for k in 0..mgs {
                        for h in 0..HOURS {
                            let res = sol.residual(&positions, k, h);
                            ensure!(res.abs() < 1e-9, "residual {res} at mg {k} hour {h}");
                        }
                    }
                    Ok(())
                }
                (Err(Error::GridLimitExceeded { .. }), None) => Ok(()),
                (got, want) => Err(format!("dispatch {got:?}, oracle {want:?}")),
            }
        })
        .collect()
}

// ---------------------------------------------------------------- Shapley

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Mean marginal contribution over every arrival order.
pub fn shapley_by_orders(n: usize, v: &[f64]) -> Vec<f64> {
    let orders = permutations(n);
    let mut phi = vec![0.0; n];
    for order in &orders {
        let mut mask = 0usize;
        for &i in order {
            phi[i] += v[mask | (1 << i)] - v[mask];
            mask |= 1 << i;
        }
    }
    phi.iter().map(|x| x / orders.len() as f64).collect()
}
