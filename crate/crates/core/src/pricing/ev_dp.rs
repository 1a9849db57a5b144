use crate::error::{Error, Result};
use crate::ev::{
    immediate_levels, latest_levels, Degradation, EvProfile, EvSchedule, SatisfactionBounds,
    SocLattice,
};
use crate::HOURS;

/// Hourly prices an EV owner faces.
#[derive(Debug, Clone, Copy)]
pub struct EvPrices<'a> {
    /// Paid per kWh drawn.
    pub charge: &'a [f64],
    /// Received per kWh fed back.
    pub discharge: &'a [f64],
    /// Highest admissible charging price, used for the affordability ceiling.
    pub ceiling: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Satisfaction {
    pub theta: f64,
    pub delta: f64,
    pub bounds: SatisfactionBounds,
}

impl Satisfaction {
    pub fn total(&self) -> f64 {
        self.theta + self.delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvPlan {
    pub schedule: EvSchedule,
    /// Owner expense including wear, yuan.
    pub expense: f64,
    pub satisfaction: Option<Satisfaction>,
}

const SPAN_EPS: f64 = 1e-9;
const TIE_EPS: f64 = 1e-12;

struct Problem<'a> {
    profile: &'a EvProfile,
    lattice: SocLattice,
    prices: EvPrices<'a>,
    wear: f64,
    outmax: [f64; HOURS],
    span: f64,
}

impl<'a> Problem<'a> {
    fn new(
        profile: &'a EvProfile,
        prices: EvPrices<'a>,
        wear: &Degradation,
        resolution: f64,
    ) -> Result<Self> {
        for v in [prices.charge, prices.discharge, prices.ceiling] {
            if v.len() != HOURS {
                return Err(Error::param(format!(
                    "EV price vectors must have {HOURS} entries"
                )));
            }
        }
        wear.validate()?;
        let lattice = SocLattice::new(profile, resolution)?;
        let mut outmax = [0.0; HOURS];
        let mut outmin = [0.0; HOURS];
        for (out, levels) in [
            (&mut outmax, immediate_levels(&lattice)),
            (&mut outmin, latest_levels(&lattice)),
        ] {
            for (i, w) in levels.windows(2).enumerate() {
                out[profile.slot_hour(i)] = lattice.grid_power(&profile.battery, w[0], w[1]);
            }
        }
        let span = outmax.iter().zip(&outmin).map(|(a, b)| (a - b).abs()).sum();
        Ok(Self {
            profile,
            lattice,
            prices,
            wear: wear.per_kwh(),
            outmax,
            span,
        })
    }

    fn power(&self, from: i32, to: i32) -> f64 {
        self.lattice.grid_power(&self.profile.battery, from, to)
    }

    fn slot_expense(&self, h: usize, p: f64) -> f64 {
        let energy = if p >= 0.0 {
            p * self.prices.charge[h]
        } else {
            p * self.prices.discharge[h]
        };
        energy + p.abs() * self.wear
    }

    fn deviation(&self, h: usize, p: f64) -> f64 {
        (self.outmax[h] - p).abs()
    }

    fn schedule(&self, levels: &[i32]) -> EvSchedule {
        EvSchedule::from_levels(self.profile, &self.lattice, levels)
    }

    fn expense_of(&self, levels: &[i32]) -> f64 {
        levels
            .windows(2)
            .enumerate()
            .map(|(i, w)| self.slot_expense(self.profile.slot_hour(i), self.power(w[0], w[1])))
            .sum()
    }

    fn deviation_of(&self, levels: &[i32]) -> f64 {
        levels
            .windows(2)
            .enumerate()
            .map(|(i, w)| self.deviation(self.profile.slot_hour(i), self.power(w[0], w[1])))
            .sum()
    }

    fn theta(&self, f: f64, bounds: &SatisfactionBounds) -> f64 {
        let span = bounds.f_max - bounds.f_min;
        if span > SPAN_EPS {
            (1.0 - (f - bounds.f_min) / span).clamp(0.0, 1.0)
        } else if f <= bounds.f_min + SPAN_EPS {
            1.0
        } else {
            0.0
        }
    }

    fn delta(&self, dev: f64) -> f64 {
        if self.span > SPAN_EPS {
            1.0 - dev / self.span
        } else {
            1.0
        }
    }

    fn satisfaction(&self, levels: &[i32], bounds: SatisfactionBounds) -> (f64, Satisfaction) {
        let f = self.expense_of(levels);
        let theta = self.theta(f, &bounds);
        let delta = self.delta(self.deviation_of(levels));
        (
            f,
            Satisfaction {
                theta,
                delta,
                bounds,
            },
        )
    }

    /// Backward dynamic program over lattice levels maximising the summed
    /// `reward(hour, grid_power)` subject to the departure requirement.
    /// Ties prefer charging, then idling, then discharging.
    fn solve<F: Fn(usize, f64) -> f64>(&self, reward: F) -> (Vec<i32>, f64) {
        let lat = &self.lattice;
        let n = (lat.highest - lat.lowest + 1) as usize;
        let idx = |q: i32| (q - lat.lowest) as usize;
        let slots = lat.slots;
        let kc = lat.charge_steps;
        let kd = lat.discharge_steps;
        let range = |i: usize| -> (i32, i32) {
            let down = if kd > 0 { i as i32 * kd } else { 0 };
            let lo = lat
                .lowest
                .max(-down)
                .max(lat.required - (slots - i) as i32 * kc);
            let hi = lat.highest.min(i as i32 * kc);
            (lo, hi)
        };

        let mut next = vec![f64::NEG_INFINITY; n];
        for q in lat.required..=lat.highest {
            next[idx(q)] = 0.0;
        }
        let mut policy = vec![0i32; slots * n];
        let mut cur = vec![f64::NEG_INFINITY; n];
        for i in (0..slots).rev() {
            let h = self.profile.slot_hour(i);
            cur.fill(f64::NEG_INFINITY);
            let (lo, hi) = range(i);
            for q in lo..=hi {
                let mut best = f64::NEG_INFINITY;
                let mut best_to = q;
                let mut consider = |to: i32| {
                    let tail = next[idx(to)];
                    if tail == f64::NEG_INFINITY {
                        return;
                    }
                    let v = reward(h, self.power(q, to)) + tail;
                    if v > best + TIE_EPS {
                        best = v;
                        best_to = to;
                    }
                };
                if q < lat.highest {
                    consider(lat.after_charge(q));
                }
                consider(q);
                if q > lat.lowest && kd > 0 {
                    consider(lat.after_discharge(q));
                }
                cur[idx(q)] = best;
                policy[i * n + idx(q)] = best_to;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let value = next[idx(0)];
        let mut levels = Vec::with_capacity(slots + 1);
        let mut q = 0;
        levels.push(q);
        for i in 0..slots {
            q = policy[i * n + idx(q)];
            levels.push(q);
        }
        (levels, value)
    }

    fn bounds(&self, wear: &Degradation) -> SatisfactionBounds {
        let immediate = immediate_levels(&self.lattice);
        let latest = latest_levels(&self.lattice);
        let f_max: f64 = immediate
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let h = self.profile.slot_hour(i);
                let p = self.power(w[0], w[1]);
                p * self.prices.ceiling[h] + p.abs() * self.wear
            })
            .sum();
        SatisfactionBounds {
            f_max,
            f_min: self.expense_of(&immediate).min(self.expense_of(&latest)),
            degradation: *wear,
        }
    }

    /// Exact maximiser of price plus travel satisfaction.
    ///
    /// Both measures only get worse as expense or deviation grow, so a
    /// forward pass keeping the (expense, deviation) Pareto front of the
    /// paths into every level finds the optimum among all lattice plans.
    fn best_plan(&self, bounds: SatisfactionBounds) -> Vec<i32> {
        #[derive(Clone, Copy)]
        struct Label {
            f: f64,
            dev: f64,
            level: i32,
            prev: usize,
        }
        let lat = &self.lattice;
        let n = (lat.highest - lat.lowest + 1) as usize;
        let idx = |q: i32| (q - lat.lowest) as usize;
        let slots = lat.slots;
        let kc = lat.charge_steps;

        let mut arenas: Vec<Vec<Label>> = Vec::with_capacity(slots + 1);
        arenas.push(vec![Label {
            f: 0.0,
            dev: 0.0,
            level: 0,
            prev: usize::MAX,
        }]);
        let mut buckets: Vec<Vec<Label>> = vec![Vec::new(); n];
        for i in 0..slots {
            let h = self.profile.slot_hour(i);
            let floor = lat.required - (slots - i - 1) as i32 * kc;
            for b in buckets.iter_mut() {
                b.clear();
            }
            for (j, from) in arenas[i].iter().enumerate() {
                let q = from.level;
                let mut push = |to: i32| {
                    if to < floor {
                        return;
                    }
                    let p = self.power(q, to);
                    buckets[idx(to)].push(Label {
                        f: from.f + self.slot_expense(h, p),
                        dev: from.dev + self.deviation(h, p),
                        level: to,
                        prev: j,
                    });
                };
                if q < lat.highest {
                    push(lat.after_charge(q));
                }
                push(q);
                if q > lat.lowest && lat.discharge_steps > 0 {
                    push(lat.after_discharge(q));
                }
            }
            let mut next = Vec::new();
            for b in buckets.iter_mut() {
                b.sort_by(|x, y| x.f.total_cmp(&y.f).then(x.dev.total_cmp(&y.dev)));
                let mut best_dev = f64::INFINITY;
                for l in b.iter() {
                    if l.dev < best_dev - TIE_EPS {
                        best_dev = l.dev;
                        next.push(*l);
                    }
                }
            }
            arenas.push(next);
        }

        let last = &arenas[slots];
        let mut best = usize::MAX;
        let mut best_value = f64::NEG_INFINITY;
        for (j, l) in last.iter().enumerate() {
            if l.level < lat.required {
                continue;
            }
            let v = self.theta(l.f, &bounds) + self.delta(l.dev);
            if v > best_value + TIE_EPS {
                best_value = v;
                best = j;
            }
        }
        let mut levels = vec![0; slots + 1];
        let mut j = best;
        for i in (1..=slots).rev() {
            let l = arenas[i][j];
            levels[i] = l.level;
            j = l.prev;
        }
        levels
    }
}

/// Affordability range for one vehicle: the cheaper of the two reference
/// plans and the expense of immediate charging at the ceiling price.
pub fn satisfaction_bounds(
    profile: &EvProfile,
    prices: EvPrices<'_>,
    wear: &Degradation,
    resolution: f64,
) -> Result<SatisfactionBounds> {
    Ok(Problem::new(profile, prices, wear, resolution)?.bounds(wear))
}

/// Schedule maximising price plus travel satisfaction on the SOC lattice.
pub fn optimize_ev_schedule(
    profile: &EvProfile,
    prices: EvPrices<'_>,
    wear: &Degradation,
    resolution: f64,
) -> Result<EvPlan> {
    let prob = Problem::new(profile, prices, wear, resolution)?;
    let bounds = prob.bounds(wear);
    let levels = prob.best_plan(bounds);
    let (expense, sat) = prob.satisfaction(&levels, bounds);
    Ok(EvPlan {
        schedule: prob.schedule(&levels),
        expense,
        satisfaction: Some(sat),
    })
}

/// Plan minimising a separable `cost(hour, grid_power)` over the
/// connection window, subject to the same lattice and departure
/// requirement. The plan's owner expense is reported; satisfaction is not.
pub fn min_cost_schedule<F: Fn(usize, f64) -> f64>(
    profile: &EvProfile,
    prices: EvPrices<'_>,
    wear: &Degradation,
    resolution: f64,
    cost: F,
) -> Result<EvPlan> {
    let prob = Problem::new(profile, prices, wear, resolution)?;
    let (levels, _) = prob.solve(|h, p| -cost(h, p));
    Ok(EvPlan {
        schedule: prob.schedule(&levels),
        expense: prob.expense_of(&levels),
        satisfaction: None,
    })
}

/// Plug-in-and-charge plan of a vehicle that ignores prices.
pub fn immediate_plan(
    profile: &EvProfile,
    prices: EvPrices<'_>,
    wear: &Degradation,
    resolution: f64,
) -> Result<EvPlan> {
    let prob = Problem::new(profile, prices, wear, resolution)?;
    let levels = immediate_levels(&prob.lattice);
    Ok(EvPlan {
        schedule: prob.schedule(&levels),
        expense: prob.expense_of(&levels),
        satisfaction: None,
    })
}

/// Price and travel satisfaction of an arbitrary lattice plan.
pub fn evaluate_levels(
    profile: &EvProfile,
    prices: EvPrices<'_>,
    wear: &Degradation,
    resolution: f64,
    levels: &[i32],
) -> Result<(f64, Satisfaction)> {
    let prob = Problem::new(profile, prices, wear, resolution)?;
    if levels.len() != prob.lattice.slots + 1 {
        return Err(Error::param(
            "level path must have one entry per slot boundary",
        ));
    }
    let bounds = prob.bounds(wear);
    Ok(prob.satisfaction(levels, bounds))
}
