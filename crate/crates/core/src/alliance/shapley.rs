use serde::{Deserialize, Serialize};

use super::dispatch::{alliance_dispatch, AllianceParams, MicrogridPosition};
use crate::error::{Error, Result};

/// Largest player count for exact subset enumeration.
pub const MAX_PLAYERS: usize = 20;

/// Characteristic values and Shapley shares. `values[mask]` is v(S) for the
/// coalition whose members are the set bits of `mask`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionAllocation {
    pub values: Vec<f64>,
    pub shapley: Vec<f64>,
}

impl CoalitionAllocation {
    pub fn players(&self) -> usize {
        self.shapley.len()
    }

    pub fn grand_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn singleton_value(&self, k: usize) -> f64 {
        self.values[1 << k]
    }

    /// Operating-cost share of each microgrid (negated benefit share).
    pub fn cost_shares(&self) -> Vec<f64> {
        self.shapley.iter().map(|v| -v).collect()
    }
}

/// Benefit of a coalition: the negated operating cost of dispatching only
/// its members. The empty coalition is worth zero.
pub fn coalition_value(
    members: &[usize],
    positions: &[MicrogridPosition],
    params: &AllianceParams,
) -> Result<f64> {
    if members.is_empty() {
        return Ok(0.0);
    }
    let subset: Vec<MicrogridPosition> = members
        .iter()
        .map(|&k| {
            positions
                .get(k)
                .cloned()
                .ok_or_else(|| Error::param(format!("coalition member {k} out of range")))
        })
        .collect::<Result<_>>()?;
    Ok(-alliance_dispatch(&subset, params)?.total)
}

/// Exact Shapley values from a complete table of coalition values indexed
/// by member bitmask (`values[0]` must be zero).
pub fn shapley_allocate(n: usize, values: &[Option<f64>]) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::param(format!(
            "Shapley allocation supports 1..={MAX_PLAYERS} players"
        )));
    }
    let full = 1usize << n;
    if values.len() != full {
        return Err(Error::param(format!(
            "expected {full} coalition values, got {}",
            values.len()
        )));
    }
    if let Some(mask) = values.iter().position(Option::is_none) {
        return Err(Error::param(format!(
            "missing value for coalition mask {mask:#b}"
        )));
    }
    let v: Vec<f64> = values.iter().map(|x| x.unwrap()).collect();
    if v[0] != 0.0 {
        return Err(Error::param("value of the empty coalition must be zero"));
    }
    // weight[s] = (s-1)! (n-s)! / n! for a coalition of size s containing i
    let mut weight = vec![0.0; n + 1];
    for (s, w) in weight.iter_mut().enumerate().skip(1) {
        let mut x = 1.0 / n as f64;
        // 1 / (n * C(n-1, s-1))
        for j in 0..(s - 1) {
            x *= (j + 1) as f64 / (n - 1 - j) as f64;
        }
        *w = x;
    }
    let mut phi = vec![0.0; n];
    for mask in 1..full {
        let size = mask.count_ones() as usize;
        let w = weight[size];
        for (i, p) in phi.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *p += w * (v[mask] - v[mask & !(1 << i)]);
            }
        }
    }
    Ok(phi)
}

/// Values of every coalition of `positions` and their Shapley split.
pub fn allocate(
    positions: &[MicrogridPosition],
    params: &AllianceParams,
) -> Result<CoalitionAllocation> {
    let n = positions.len();
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::param(format!(
            "Shapley allocation supports 1..={MAX_PLAYERS} players"
        )));
    }
    let mut values = vec![Some(0.0); 1 << n];
    for (mask, slot) in values.iter_mut().enumerate().skip(1) {
        let members: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        *slot = Some(coalition_value(&members, positions, params)?);
    }
    let shapley = shapley_allocate(n, &values)?;
    Ok(CoalitionAllocation {
        values: values.into_iter().map(Option::unwrap).collect(),
        shapley,
    })
}
