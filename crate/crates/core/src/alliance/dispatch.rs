use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::HOURS;

/// Prices, costs and limits of the alliance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllianceParams {
    /// Price of buying from the distribution grid, yuan/kWh.
    pub grid_buy_price: Vec<f64>,
    /// Price the grid pays for alliance exports, yuan/kWh.
    pub grid_sell_price: Vec<f64>,
    /// Price of power traded between microgrids, yuan/kWh.
    pub inter_price: Vec<f64>,
    pub wt_cost: f64,
    pub pv_cost: f64,
    /// Tie-line operation and maintenance cost per kWh exchanged with the grid.
    pub line_om_cost: f64,
    pub line_min: f64,
    /// Limit on alliance import and on alliance export, kW.
    pub line_max: f64,
    /// Limit on each microgrid's internal purchase and internal sale, kW.
    pub transfer_max: f64,
}

impl AllianceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grid_buy_price", &self.grid_buy_price),
            ("grid_sell_price", &self.grid_sell_price),
            ("inter_price", &self.inter_price),
        ] {
            if v.len() != HOURS {
                return Err(Error::param(format!("{name} must have {HOURS} entries")));
            }
        }
        for h in 0..HOURS {
            let (buy, sell, inter) = (
                self.grid_buy_price[h],
                self.grid_sell_price[h],
                self.inter_price[h],
            );
            if !(0.0 <= sell && sell < inter && inter < buy) {
                return Err(Error::param(format!(
                    "hour {h}: need grid sale price {sell} < internal price {inter} < grid purchase price {buy}"
                )));
            }
        }
        for (name, v) in [
            ("wt_cost", self.wt_cost),
            ("pv_cost", self.pv_cost),
            ("line_om_cost", self.line_om_cost),
            ("line_min", self.line_min),
            ("line_max", self.line_max),
            ("transfer_max", self.transfer_max),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if self.line_min > self.line_max {
            return Err(Error::param("line_min exceeds line_max"));
        }
        Ok(())
    }
}

/// Renewable output and demand of one microgrid after demand-side
/// scheduling, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrogridPosition {
    pub wt: Vec<f64>,
    pub pv: Vec<f64>,
    pub demand: Vec<f64>,
}

impl MicrogridPosition {
    /// Position with the given net surplus (+) or deficit (−) and no
    /// separately metered generation.
    pub fn from_net(net: &[f64]) -> Self {
        Self {
            wt: net.iter().map(|x| x.max(0.0)).collect(),
            pv: vec![0.0; net.len()],
            demand: net.iter().map(|x| (-x).max(0.0)).collect(),
        }
    }

    pub fn net(&self, h: usize) -> f64 {
        self.wt[h] + self.pv[h] - self.demand[h]
    }

    pub fn idle() -> Self {
        Self::from_net(&[0.0; HOURS])
    }
}

/// Hourly settlement of the alliance. Per-microgrid vectors are indexed
/// `[microgrid][hour]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub internal_buy: Vec<Vec<f64>>,
    pub internal_sell: Vec<Vec<f64>>,
    pub grid_buy_mg: Vec<Vec<f64>>,
    pub grid_sell_mg: Vec<Vec<f64>>,
    pub curtailed_mg: Vec<Vec<f64>>,
    pub grid_buy: Vec<f64>,
    pub grid_sell: Vec<f64>,
    /// Grid energy purchases minus sales.
    pub f1: f64,
    /// Internal purchases minus internal sales.
    pub f2: f64,
    /// Renewable generation cost.
    pub f3: f64,
    /// Tie-line operation and maintenance.
    pub f4: f64,
    pub total: f64,
}

impl DispatchSolution {
    pub fn microgrids(&self) -> usize {
        self.internal_buy.len()
    }

    pub fn internal_volume(&self) -> f64 {
        self.internal_buy.iter().flatten().sum()
    }

    pub fn grid_buy_total(&self) -> f64 {
        self.grid_buy.iter().sum()
    }

    pub fn grid_sell_total(&self) -> f64 {
        self.grid_sell.iter().sum()
    }

    pub fn curtailed_total(&self) -> f64 {
        self.curtailed_mg.iter().flatten().sum()
    }

    /// Power-balance residual of microgrid `k` in hour `h`, kW.
    pub fn residual(&self, positions: &[MicrogridPosition], k: usize, h: usize) -> f64 {
        positions[k].net(h) + self.internal_buy[k][h] + self.grid_buy_mg[k][h]
            - self.internal_sell[k][h]
            - self.grid_sell_mg[k][h]
            - self.curtailed_mg[k][h]
    }
}

/// Cost-minimal hourly settlement.
///
/// Internal trade is cheaper than any grid round trip, so deficits are
/// first matched against surpluses up to each microgrid's transfer limit,
/// split in proportion to what each side can offer. Remaining deficits are
/// imported. Remaining surplus is exported up to the line limit when export
/// pays more than the line cost and nothing is imported in that hour;
/// otherwise it is curtailed.
pub fn alliance_dispatch(
    positions: &[MicrogridPosition],
    params: &AllianceParams,
) -> Result<DispatchSolution> {
    params.validate()?;
    if positions.is_empty() {
        return Err(Error::param(
            "alliance dispatch needs at least one microgrid",
        ));
    }
    for (k, p) in positions.iter().enumerate() {
        if p.wt.len() != HOURS || p.pv.len() != HOURS || p.demand.len() != HOURS {
            return Err(Error::param(format!(
                "microgrid {k}: position vectors must have {HOURS} entries"
            )));
        }
        if (0..HOURS).any(|h| !p.net(h).is_finite()) {
            return Err(Error::param(format!(
                "microgrid {k}: non-finite net position"
            )));
        }
    }
    let n = positions.len();
    let grid = |v: f64| vec![vec![v; HOURS]; n];
    let mut sol = DispatchSolution {
        internal_buy: grid(0.0),
        internal_sell: grid(0.0),
        grid_buy_mg: grid(0.0),
        grid_sell_mg: grid(0.0),
        curtailed_mg: grid(0.0),
        grid_buy: vec![0.0; HOURS],
        grid_sell: vec![0.0; HOURS],
        f1: 0.0,
        f2: 0.0,
        f3: 0.0,
        f4: 0.0,
        total: 0.0,
    };
    let cap = params.transfer_max;
    let export_pays = params
        .grid_sell_price
        .iter()
        .map(|&p| p > params.line_om_cost)
        .collect::<Vec<_>>();

    for h in 0..HOURS {
        let net: Vec<f64> = positions.iter().map(|p| p.net(h)).collect();
        let offer: Vec<f64> = net.iter().map(|x| x.max(0.0).min(cap)).collect();
        let want: Vec<f64> = net.iter().map(|x| (-x).max(0.0).min(cap)).collect();
        let (offer_sum, want_sum): (f64, f64) = (offer.iter().sum(), want.iter().sum());
        let traded = offer_sum.min(want_sum);
        if traded > 0.0 {
            for k in 0..n {
                sol.internal_sell[k][h] = traded * offer[k] / offer_sum;
                sol.internal_buy[k][h] = traded * want[k] / want_sum;
            }
        }

        let mut import = 0.0;
        let mut spare = 0.0;
        for k in 0..n {
            let short = (-net[k]).max(0.0) - sol.internal_buy[k][h];
            let long = net[k].max(0.0) - sol.internal_sell[k][h];
            sol.grid_buy_mg[k][h] = short.max(0.0);
            import += sol.grid_buy_mg[k][h];
            spare += long.max(0.0);
        }
        if import > params.line_max + 1e-9 {
            return Err(Error::GridLimitExceeded {
                hour: h,
                import_kw: import,
                limit_kw: params.line_max,
            });
        }
        // Buying and selling in the same hour are mutually exclusive, so a
        // surplus stranded behind a transfer limit is curtailed.
        let export = if export_pays[h] && import == 0.0 {
            spare.min(params.line_max)
        } else {
            0.0
        };
        let share = if spare > 0.0 { export / spare } else { 0.0 };
        for k in 0..n {
            let long = (net[k].max(0.0) - sol.internal_sell[k][h]).max(0.0);
            sol.grid_sell_mg[k][h] = long * share;
            sol.curtailed_mg[k][h] = long - sol.grid_sell_mg[k][h];
        }
        sol.grid_buy[h] = import;
        sol.grid_sell[h] = export;

        sol.f1 += params.grid_buy_price[h] * import - params.grid_sell_price[h] * export;
        let bought: f64 = (0..n).map(|k| sol.internal_buy[k][h]).sum();
        let sold: f64 = (0..n).map(|k| sol.internal_sell[k][h]).sum();
        sol.f2 += params.inter_price[h] * (bought - sold);
        sol.f3 += positions
            .iter()
            .map(|p| params.wt_cost * p.wt[h] + params.pv_cost * p.pv[h])
            .sum::<f64>();
        sol.f4 += params.line_om_cost * (import + export);
    }
    sol.total = sol.f1 + sol.f2 + sol.f3 + sol.f4;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn params() -> AllianceParams {
        AllianceParams {
            grid_buy_price: vec![1.2; HOURS],
            grid_sell_price: vec![0.84; HOURS],
            inter_price: vec![1.1; HOURS],
            wt_cost: 0.376,
            pv_cost: 0.428,
            line_om_cost: 0.17,
            line_min: 0.0,
            line_max: 450.0,
            transfer_max: 450.0,
        }
    }

    fn at_hour0(values: &[f64]) -> Vec<MicrogridPosition> {
        values
            .iter()
            .map(|&v| {
                let mut net = vec![0.0; HOURS];
                net[0] = v;
                MicrogridPosition::from_net(&net)
            })
            .collect()
    }

    #[test]
    fn lone_surplus_is_exported() {
        let sol = alliance_dispatch(&at_hour0(&[100.0]), &params()).unwrap();
        assert_eq!(sol.grid_sell[0], 100.0);
        assert_eq!(sol.grid_buy[0], 0.0);
        assert!((sol.f1 + 84.0).abs() < 1e-9);
        assert!((sol.total - (-84.0 + 37.6 + 17.0)).abs() < 1e-9);
    }

    #[test]
    fn opposite_positions_trade_internally() {
        let sol = alliance_dispatch(&at_hour0(&[-50.0, 50.0]), &params()).unwrap();
        assert_eq!(sol.internal_buy[0][0], 50.0);
        assert_eq!(sol.internal_sell[1][0], 50.0);
        assert_eq!(sol.grid_buy_total() + sol.grid_sell_total(), 0.0);
        assert_eq!(sol.f2, 0.0);
    }

    #[test]
    fn oversized_deficit_is_infeasible() {
        match alliance_dispatch(&at_hour0(&[-10_000.0]), &params()) {
            Err(Error::GridLimitExceeded { hour, .. }) => assert_eq!(hour, 0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn transfer_cap_leaves_residual_to_grid() {
        let mut p = params();
        p.transfer_max = 30.0;
        let pos = at_hour0(&[-50.0, 80.0]);
        let sol = alliance_dispatch(&pos, &p).unwrap();
        assert_eq!(sol.internal_buy[0][0], 30.0);
        assert_eq!(sol.grid_buy[0], 20.0);
        assert_eq!(sol.grid_sell[0], 0.0);
        assert_eq!(sol.curtailed_total(), 50.0);
        for k in 0..2 {
            assert!(sol.residual(&pos, k, 0).abs() < 1e-9);
        }
    }

    #[test]
    fn export_beyond_line_is_curtailed() {
        let mut p = params();
        p.line_max = 60.0;
        let sol = alliance_dispatch(&at_hour0(&[100.0]), &p).unwrap();
        assert_eq!(sol.grid_sell[0], 60.0);
        assert_eq!(sol.curtailed_total(), 40.0);
    }

    #[test]
    fn price_order_is_checked() {
        let mut p = params();
        p.inter_price[5] = 1.3;
        assert!(p.validate().is_err());
    }
}
