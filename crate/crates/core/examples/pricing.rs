//! The demand side under one user tariff: responsive load follows the
//! price, the EV tariff follows the renewable surplus, and one vehicle
//! picks its charging plan.

use mmg_core::ev::{Battery, Degradation, EvProfile};
use mmg_core::pricing::{
    ev_dynamic_tariff, follower_load_response, immediate_plan, optimize_ev_schedule, user_cost,
    EvPrices, LoadProfile, MicrogridHourState,
};
use mmg_core::HOURS;

fn main() -> mmg_core::Result<()> {
    let price: Vec<f64> = (0..HOURS)
        .map(|h| match h {
            0..=6 | 23 => 0.8,
            10..=14 | 18..=20 => 1.4,
            _ => 1.1,
        })
        .collect();
    let nl: Vec<f64> = (0..HOURS)
        .map(|h| {
            150.0
                + 60.0
                    * ((h as f64 - 6.0) / 24.0 * std::f64::consts::TAU)
                        .sin()
                        .max(0.0)
        })
        .collect();
    let al = vec![80.0; HOURS];
    let base = LoadProfile::new(nl, al, 0.2)?;
    let moved = follower_load_response(&price, &base)?;
    println!(
        "user bill {:.2} -> {:.2} yuan",
        user_cost(&price, &base),
        user_cost(&price, &moved)
    );

    let wt: Vec<f64> = (0..HOURS)
        .map(|h| if !(7..=21).contains(&h) { 260.0 } else { 120.0 })
        .collect();
    let pv: Vec<f64> = (0..HOURS)
        .map(|h| if (8..17).contains(&h) { 90.0 } else { 0.0 })
        .collect();
    let state = MicrogridHourState {
        wt,
        pv,
        load: moved.totals(),
    };
    let ev_price = ev_dynamic_tariff(&price, &state)?.price;

    let car = EvProfile {
        id: 0,
        microgrid: 0,
        controllable: true,
        arrive_hour: 18,
        depart_hour: 7,
        soc_arrival: 0.35,
        soc_required: 0.9,
        battery: Battery::default(),
    };
    let ceiling: Vec<f64> = price.iter().map(|c| 1.3 * c).collect();
    let prices = EvPrices {
        charge: &ev_price,
        discharge: &ev_price,
        ceiling: &ceiling,
    };
    let wear = Degradation::default();
    let plan = optimize_ev_schedule(&car, prices, &wear, 0.01)?;
    let naive = immediate_plan(&car, prices, &wear, 0.01)?;
    let sat = plan
        .satisfaction
        .expect("optimised plans carry satisfaction");
    println!(
        "EV expense {:.2} (plug-in charging {:.2}), theta {:.3}, delta {:.3}",
        plan.expense, naive.expense, sat.theta, sat.delta
    );
    println!("hour  user  ev price   plan kW");
    for i in 0..car.window_len() {
        let h = car.slot_hour(i);
        let kw = plan.schedule.charge_kw[h] - plan.schedule.discharge_kw[h];
        println!("{h:>4}  {:.2}  {:>8.3}  {kw:>8.2}", price[h], ev_price[h]);
    }
    Ok(())
}
