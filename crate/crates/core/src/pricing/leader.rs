use crate::ev::EvSchedule;
use crate::HOURS;

use super::follower::{user_cost, LoadProfile};

/// Net energy payment from EV owners to the operator: charging bought at
/// `charge_price` minus discharge bought back at `discharge_price`.
pub fn ev_energy_payment(
    schedules: &[EvSchedule],
    charge_price: &[f64],
    discharge_price: &[f64],
) -> f64 {
    schedules
        .iter()
        .map(|s| {
            (0..HOURS)
                .map(|h| s.charge_kw[h] * charge_price[h] - s.discharge_kw[h] * discharge_price[h])
                .sum::<f64>()
        })
        .sum()
}

/// Operator profit: user bill plus EV payments minus the operator's share
/// of the alliance operating cost.
pub fn leader_fitness(
    user_price: &[f64],
    response: &LoadProfile,
    ev_schedules: &[EvSchedule],
    ev_charge_price: &[f64],
    ev_discharge_price: &[f64],
    allocated_cost: f64,
) -> f64 {
    user_cost(user_price, response)
        + ev_energy_payment(ev_schedules, ev_charge_price, ev_discharge_price)
        - allocated_cost
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_microgrid_pays_only_its_share() {
        let profile = LoadProfile::new(vec![0.0; HOURS], vec![0.0; HOURS], 0.2).unwrap();
        let p = vec![1.0; HOURS];
        assert_eq!(leader_fitness(&p, &profile, &[], &p, &p, 12.5), -12.5);
    }

    #[test]
    fn two_hour_hand_sum() {
        let mut nl = vec![0.0; HOURS];
        let mut al = vec![0.0; HOURS];
        nl[0] = 5.0;
        nl[1] = 2.0;
        al[0] = 10.0;
        al[1] = 4.0;
        let profile = LoadProfile::new(nl, al, 0.2).unwrap();
        let mut price = vec![0.0; HOURS];
        price[0] = 1.0;
        price[1] = 1.5;
        let mut ev = vec![0.0; HOURS];
        ev[0] = 0.8;
        ev[1] = 1.2;
        let schedule = EvSchedule {
            ev_id: 0,
            microgrid: 0,
            charge_kw: {
                let mut c = vec![0.0; HOURS];
                c[0] = 3.0;
                c
            },
            discharge_kw: {
                let mut d = vec![0.0; HOURS];
                d[1] = 2.0;
                d
            },
            soc: vec![0.5; HOURS],
        };
        // users 15*1 + 6*1.5 = 24, EV 3*0.8 - 2*1.2 = 0, minus share 4
        let f = leader_fitness(&price, &profile, &[schedule], &ev, &ev, 4.0);
        assert!((f - 20.0).abs() < 1e-12);
    }
}
