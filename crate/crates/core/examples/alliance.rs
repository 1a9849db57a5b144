//! Three microgrids settle one day together, then split the saving.

use mmg_core::alliance::{alliance_dispatch, allocate, AllianceParams, MicrogridPosition};
use mmg_core::HOURS;

fn main() -> mmg_core::Result<()> {
    let buy: Vec<f64> = (0..HOURS)
        .map(|h| if (8..22).contains(&h) { 1.2 } else { 0.6 })
        .collect();
    let params = AllianceParams {
        inter_price: buy.iter().map(|b| 0.5 * (b + 0.45)).collect(),
        grid_buy_price: buy,
        grid_sell_price: vec![0.45; HOURS],
        wt_cost: 0.376,
        pv_cost: 0.428,
        line_om_cost: 0.17,
        line_min: 0.0,
        line_max: 2000.0,
        transfer_max: 450.0,
    };
    let windy = MicrogridPosition {
        wt: (0..HOURS)
            .map(|h| 300.0 + 100.0 * (h as f64 / 4.0).cos())
            .collect(),
        pv: vec![0.0; HOURS],
        demand: vec![250.0; HOURS],
    };
    let sunny = MicrogridPosition {
        wt: vec![0.0; HOURS],
        pv: (0..HOURS)
            .map(|h| if (7..18).contains(&h) { 400.0 } else { 0.0 })
            .collect(),
        demand: vec![220.0; HOURS],
    };
    let town = MicrogridPosition {
        wt: vec![60.0; HOURS],
        pv: vec![0.0; HOURS],
        demand: (0..HOURS)
            .map(|h| if (17..23).contains(&h) { 420.0 } else { 260.0 })
            .collect(),
    };
    let positions = vec![windy, sunny, town];

    let sol = alliance_dispatch(&positions, &params)?;
    println!(
        "grid buy {:.0} kWh, grid sell {:.0} kWh, internal {:.0} kWh, curtailed {:.0} kWh",
        sol.grid_buy_total(),
        sol.grid_sell_total(),
        sol.internal_volume(),
        sol.curtailed_total()
    );
    println!(
        "cost: energy {:.2} + internal {:.2} + generation {:.2} + line {:.2} = {:.2}",
        sol.f1, sol.f2, sol.f3, sol.f4, sol.total
    );

    let alloc = allocate(&positions, &params)?;
    let shares = alloc.cost_shares();
    for (k, name) in ["windy", "sunny", "town"].iter().enumerate() {
        println!(
            "{name:<6} alone {:>10.2}  shapley {:>9.2}  pays {:>10.2}",
            -alloc.singleton_value(k),
            alloc.shapley[k],
            shares[k]
        );
    }
    println!("grand coalition value {:.2}", alloc.grand_value());
    Ok(())
}
