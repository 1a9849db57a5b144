use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::HOURS;

/// User demand split into a fixed part and a price-responsive part, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    /// Non-responsive load.
    pub nl: Vec<f64>,
    /// Responsive-load baseline.
    pub al_base: Vec<f64>,
    /// Scheduled responsive load.
    pub al: Vec<f64>,
    pub al_min: Vec<f64>,
    pub al_max: Vec<f64>,
    /// Hours in which the responsive load takes part.
    pub participates: Vec<bool>,
}

impl LoadProfile {
    /// Responsive load may move `band` (fraction) above or below its
    /// baseline in every hour.
    pub fn new(nl: Vec<f64>, al_base: Vec<f64>, band: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&band) {
            return Err(Error::param("responsive band must lie in [0, 1]"));
        }
        let al_min = al_base.iter().map(|a| a * (1.0 - band)).collect();
        let al_max = al_base.iter().map(|a| a * (1.0 + band)).collect();
        let p = Self {
            nl,
            al: al_base.clone(),
            al_base,
            al_min,
            al_max,
            participates: vec![true; HOURS],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = HOURS;
        if [
            &self.nl,
            &self.al_base,
            &self.al,
            &self.al_min,
            &self.al_max,
        ]
        .iter()
        .any(|v| v.len() != n)
            || self.participates.len() != n
        {
            return Err(Error::param(format!(
                "load profile vectors must have {n} entries"
            )));
        }
        for h in 0..n {
            if !(self.nl[h] >= 0.0 && self.al_base[h] >= 0.0) {
                return Err(Error::param(format!(
                    "hour {h}: loads must be non-negative"
                )));
            }
            if !(self.al_min[h] <= self.al_max[h]) || self.al_min[h] < 0.0 {
                return Err(Error::param(format!(
                    "hour {h}: responsive bounds out of order"
                )));
            }
        }
        Ok(())
    }

    /// Load the user draws in hour `h`.
    pub fn total(&self, h: usize) -> f64 {
        self.nl[h]
            + if self.participates[h] {
                self.al[h]
            } else {
                0.0
            }
    }

    pub fn totals(&self) -> Vec<f64> {
        (0..HOURS).map(|h| self.total(h)).collect()
    }

    /// Baseline version of [`total`](Self::total).
    pub fn base_total(&self, h: usize) -> f64 {
        self.nl[h]
            + if self.participates[h] {
                self.al_base[h]
            } else {
                0.0
            }
    }

    pub fn base_totals(&self) -> Vec<f64> {
        (0..HOURS).map(|h| self.base_total(h)).collect()
    }
}

/// User electricity bill under `price`.
pub fn user_cost(price: &[f64], profile: &LoadProfile) -> f64 {
    (0..HOURS).map(|h| price[h] * profile.total(h)).sum()
}

/// Cost-minimising responsive-load schedule under `price`.
///
/// Responsive energy over participating hours is conserved. Starting from
/// the baseline, energy is moved from the dearest hour that can still go
/// down to the cheapest hour that can still go up while that is strictly
/// cheaper. Equal prices are served earliest hour first, so a flat tariff
/// returns the baseline.
pub fn follower_load_response(price: &[f64], profile: &LoadProfile) -> Result<LoadProfile> {
    profile.validate()?;
    if price.len() != HOURS {
        return Err(Error::param(format!(
            "price vector must have {HOURS} entries"
        )));
    }
    let free: Vec<usize> = (0..HOURS).filter(|&h| profile.participates[h]).collect();
    let mut al: Vec<f64> = (0..HOURS)
        .map(|h| {
            if profile.participates[h] {
                profile.al_base[h].clamp(profile.al_min[h], profile.al_max[h])
            } else {
                profile.al_base[h]
            }
        })
        .collect();
    let target: f64 = free.iter().map(|&h| profile.al_base[h]).sum();
    let lo_sum: f64 = free.iter().map(|&h| profile.al_min[h]).sum();
    let hi_sum: f64 = free.iter().map(|&h| profile.al_max[h]).sum();
    let tol = 1e-9 * (1.0 + target.abs());
    if target < lo_sum - tol || target > hi_sum + tol {
        return Err(Error::LoadShiftInfeasible {
            required: target,
            min: lo_sum,
            max: hi_sum,
        });
    }

    let mut cheap = free.clone();
    cheap.sort_by(|&a, &b| price[a].total_cmp(&price[b]).then(a.cmp(&b)));
    let mut dear = free;
    dear.sort_by(|&a, &b| price[b].total_cmp(&price[a]).then(a.cmp(&b)));

    // Clamping may have moved energy; restore the daily total first.
    let mut gap = target - cheap.iter().map(|&h| al[h]).sum::<f64>();
    if gap > 0.0 {
        for &h in &cheap {
            let room = (profile.al_max[h] - al[h]).min(gap);
            al[h] += room;
            gap -= room;
        }
    } else if gap < 0.0 {
        for &h in &dear {
            let room = (al[h] - profile.al_min[h]).min(-gap);
            al[h] -= room;
            gap += room;
        }
    }

    let (mut i, mut j) = (0, 0);
    while i < cheap.len() && j < dear.len() {
        let (up, down) = (cheap[i], dear[j]);
        if price[up] >= price[down] {
            break;
        }
        let room_up = profile.al_max[up] - al[up];
        if room_up <= 0.0 {
            i += 1;
            continue;
        }
        let room_down = al[down] - profile.al_min[down];
        if room_down <= 0.0 {
            j += 1;
            continue;
        }
        let m = room_up.min(room_down);
        al[up] += m;
        al[down] -= m;
        if room_up <= room_down {
            al[up] = profile.al_max[up];
            i += 1;
        }
        if room_down <= room_up {
            al[down] = profile.al_min[down];
            j += 1;
        }
    }

    Ok(LoadProfile {
        al,
        ..profile.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_hour(prices: [f64; 2]) -> (Vec<f64>, LoadProfile) {
        let mut price = vec![5.0; HOURS];
        price[0] = prices[0];
        price[1] = prices[1];
        let mut al_base = vec![0.0; HOURS];
        al_base[0] = 10.0;
        al_base[1] = 10.0;
        (
            price,
            LoadProfile::new(vec![0.0; HOURS], al_base, 0.2).unwrap(),
        )
    }

    #[test]
    fn two_hour_toy() {
        let (price, profile) = two_hour([1.0, 2.0]);
        let out = follower_load_response(&price, &profile).unwrap();
        assert!((out.al[0] - 12.0).abs() < 1e-12 && (out.al[1] - 8.0).abs() < 1e-12);
        assert!((user_cost(&price, &out) - 28.0).abs() < 1e-12);
    }

    #[test]
    fn flat_tariff_keeps_baseline() {
        let base: Vec<f64> = (0..HOURS).map(|h| 10.0 + h as f64).collect();
        let profile = LoadProfile::new(vec![3.0; HOURS], base.clone(), 0.2).unwrap();
        let out = follower_load_response(&vec![1.1; HOURS], &profile).unwrap();
        assert_eq!(out.al, base);
    }

    #[test]
    fn conserves_energy_and_bounds() {
        let base: Vec<f64> = (0..HOURS).map(|h| 20.0 + (h % 5) as f64).collect();
        let profile = LoadProfile::new(vec![0.0; HOURS], base, 0.2).unwrap();
        let price: Vec<f64> = (0..HOURS)
            .map(|h| 1.0 + ((h * 7) % 11) as f64 * 0.03)
            .collect();
        let out = follower_load_response(&price, &profile).unwrap();
        let before: f64 = profile.al_base.iter().sum();
        let after: f64 = out.al.iter().sum();
        assert!((before - after).abs() < 1e-9);
        for h in 0..HOURS {
            assert!(out.al[h] >= out.al_min[h] - 1e-12 && out.al[h] <= out.al_max[h] + 1e-12);
        }
        assert!(user_cost(&price, &out) <= user_cost(&price, &profile) + 1e-9);
    }

    #[test]
    fn inconsistent_bounds_are_infeasible() {
        let mut profile = LoadProfile::new(vec![0.0; HOURS], vec![10.0; HOURS], 0.2).unwrap();
        profile.al_max = vec![9.0; HOURS];
        profile.al_min = vec![5.0; HOURS];
        assert!(matches!(
            follower_load_response(&vec![1.0; HOURS], &profile),
            Err(Error::LoadShiftInfeasible { .. })
        ));
    }
}
