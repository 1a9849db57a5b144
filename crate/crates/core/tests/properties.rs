use mmg_core::alliance::{alliance_dispatch, allocate, AllianceParams, MicrogridPosition};
use mmg_core::ev::{
    battery_degradation_cost, immediate_levels, price_satisfaction, sample_fleet, soc_transition,
    travel_contribution, Battery, Degradation, EvBehaviorModel, EvProfile, EvSchedule,
    SatisfactionBounds, SocLattice,
};
use mmg_core::pricing::PriceBand;
use mmg_core::pricing::{
    ev_dynamic_tariff, evaluate_levels, follower_load_response, optimize_ev_schedule, user_cost,
    EvPrices, LoadProfile, MicrogridHourState,
};
use mmg_core::renewables::{
    generate_forecast_scenarios, lhs_sample, pv_max_power, reduce_scenarios, wind_power_from_speed,
    ForecastErrorModel, MicrogridTrajectory, PvParams, Scenario, ScenarioSet, WindParams,
};
use mmg_core::rng::stream_rng;
use mmg_core::solver::{ga_optimize, GaConfig};
use mmg_core::HOURS;
use proptest::prelude::*;

fn turbine() -> WindParams {
    WindParams {
        cut_in: 3.0,
        rated_speed: 12.0,
        cut_out: 25.0,
        rated_power: 250.0,
        shape: 2.0,
        scale: 8.0,
    }
}

fn module() -> PvParams {
    PvParams {
        short_circuit_current: 8.7,
        open_circuit_voltage: 37.4,
        mpp_voltage: 30.3,
        mpp_current: 8.25,
        reference_irradiance: 1000.0,
        series_resistance: 0.3,
        reference_temp: 25.0,
        temp_coefficient: -0.03,
        current_temp_coeff: 0.0025,
        voltage_temp_coeff: 0.12,
    }
}

fn alliance() -> AllianceParams {
    AllianceParams {
        grid_buy_price: vec![1.2; HOURS],
        grid_sell_price: vec![0.84; HOURS],
        inter_price: vec![1.1; HOURS],
        wt_cost: 0.376,
        pv_cost: 0.428,
        line_om_cost: 0.17,
        line_min: 0.0,
        line_max: 1e6,
        transfer_max: 450.0,
    }
}

fn hours(range: std::ops::Range<f64>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(range, HOURS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wind_output_stays_in_rating(v in 0.0f64..40.0) {
        let p = wind_power_from_speed(v, &turbine()).unwrap();
        prop_assert!((0.0..=250.0).contains(&p));
    }

    #[test]
    fn pv_output_is_non_negative(a in 0.0f64..1400.0, t in -20.0f64..45.0) {
        prop_assert!(pv_max_power(a, t, &module()).unwrap() >= 0.0);
    }

    #[test]
    fn lhs_puts_one_point_per_stratum(n in 1usize..60, dims in 1usize..5, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let m = lhs_sample(n, dims, &mut rng).unwrap();
        for d in 0..dims {
            let mut hit = vec![0; n];
            for row in &m {
                prop_assert!(row[d] > 0.0 && row[d] < 1.0);
                hit[((row[d] * n as f64).floor() as usize).min(n - 1)] += 1;
            }
            prop_assert!(hit.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn forecast_scenarios_stay_non_negative(da in hours(0.0..400.0), tau in 0.01f64..0.5, seed in any::<u64>(), wind in any::<bool>()) {
        let model = if wind { ForecastErrorModel::wind(tau) } else { ForecastErrorModel::pv_or_load(tau) };
        let mut rng = stream_rng(seed, 1);
        for row in generate_forecast_scenarios(&da, &model, 20, &mut rng).unwrap() {
            prop_assert_eq!(row.len(), HOURS);
            prop_assert!(row.iter().all(|&x| x >= 0.0 && x.is_finite()));
        }
    }

    #[test]
    fn reduction_keeps_unit_mass(levels in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 2..25), raw_w in prop::collection::vec(0.01f64..1.0, 25), target in 1usize..6) {
        let scenarios: Vec<Scenario> = levels
            .iter()
            .map(|&(w, l)| Scenario { microgrids: vec![MicrogridTrajectory::flat(w, 0.0, l)] })
            .collect();
        let n = scenarios.len();
        let sum: f64 = raw_w[..n].iter().sum();
        let probs: Vec<f64> = raw_w[..n].iter().map(|w| w / sum).collect();
        let set = ScenarioSet::new(scenarios, probs).unwrap();
        let reduced = reduce_scenarios(&set, target.min(n)).unwrap();
        prop_assert_eq!(reduced.len(), target.min(n));
        let total: f64 = reduced.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_returns_product_of_efficiencies(soc in 0.1f64..0.85, p in 0.1f64..3.0, ec in 0.8f64..1.0, ed in 0.8f64..1.0) {
        let b = Battery { charge_eff: ec, discharge_eff: ed, ..Battery::default() };
        let up = soc_transition(soc, p, true, false, &b, 1.0).unwrap();
        // deliver exactly what brings the cells back to `soc`
        let delivered = (up - soc) * b.capacity_kwh * ed;
        let back = soc_transition(up, delivered, false, true, &b, 1.0).unwrap();
        prop_assert!((back - soc).abs() < 1e-12);
        prop_assert!((delivered - ec * ed * p).abs() < 1e-12);
    }

    #[test]
    fn sampled_profiles_are_valid(seed in any::<u64>(), mg in 0usize..3) {
        let fleet = sample_fleet(50, &EvBehaviorModel::default(), &Battery::default(), 0.5, mg, seed).unwrap();
        for ev in &fleet {
            ev.profile.validate().unwrap();
            prop_assert!(ev.profile.soc_required + 1e-12 >= ev.profile.soc_arrival);
            SocLattice::new(&ev.profile, 0.01).unwrap();
        }
    }

    #[test]
    fn price_satisfaction_never_rises_with_cost(lo in -50.0f64..50.0, w in 0.1f64..100.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let bounds = SatisfactionBounds { f_min: lo, f_max: lo + w, degradation: Degradation::default() };
        let (x, y) = (lo + a.min(b) * w, lo + a.max(b) * w);
        prop_assert!(price_satisfaction(x, &bounds).unwrap() >= price_satisfaction(y, &bounds).unwrap());
    }

    #[test]
    fn travel_contribution_falls_with_deviation(p in hours(-3.0..3.0), k in 0.0f64..1.0) {
        let outmax: Vec<f64> = (0..HOURS).map(|h| if h < 4 { 3.0 } else { 0.0 }).collect();
        let outmin: Vec<f64> = (0..HOURS).map(|h| if (8..12).contains(&h) { 3.0 } else { 0.0 }).collect();
        // pulling the plan part of the way back toward outmax cannot hurt
        let closer: Vec<f64> = p.iter().zip(&outmax).map(|(x, m)| x + k * (m - x)).collect();
        prop_assert!(travel_contribution(&closer, &outmax, &outmin) >= travel_contribution(&p, &outmax, &outmin) - 1e-12);
    }

    #[test]
    fn wear_cost_scales_with_power(c in hours(0.0..3.0), scale in 0.0f64..3.0) {
        let profile = EvProfile {
            id: 0, microgrid: 0, controllable: true, arrive_hour: 0, depart_hour: 0,
            soc_arrival: 0.5, soc_required: 0.5, battery: Battery::default(),
        };
        let mut s = EvSchedule::idle(&profile);
        s.charge_kw = c.clone();
        let bounds = SatisfactionBounds { f_min: 0.0, f_max: 1.0, degradation: Degradation::default() };
        let base = battery_degradation_cost(&s, &bounds);
        s.charge_kw = c.iter().map(|x| x * scale).collect();
        prop_assert!((battery_degradation_cost(&s, &bounds) - scale * base).abs() < 1e-9);
    }

    #[test]
    fn ev_tariff_respects_band_and_surplus(price in hours(0.8..1.65), wt in hours(0.0..300.0), load in hours(1.0..300.0), extra in 0.0f64..100.0) {
        let state = MicrogridHourState { wt: wt.clone(), pv: vec![0.0; HOURS], load: load.clone() };
        let t = ev_dynamic_tariff(&price, &state).unwrap();
        let more = MicrogridHourState { wt: wt.iter().map(|w| w + extra).collect(), pv: vec![0.0; HOURS], load };
        let t2 = ev_dynamic_tariff(&price, &more).unwrap();
        for h in 0..HOURS {
            prop_assert!(t.price[h] >= 0.7 * price[h] - 1e-12 && t.price[h] <= 1.3 * price[h] + 1e-12);
            prop_assert!(t2.price[h] <= t.price[h] + 1e-12);
        }
    }

    #[test]
    fn follower_never_pays_more_than_baseline(price in hours(0.8..1.4), nl in hours(0.0..200.0), al in hours(0.0..100.0)) {
        let profile = LoadProfile::new(nl, al, 0.2).unwrap();
        let out = follower_load_response(&price, &profile).unwrap();
        prop_assert!(user_cost(&price, &out) <= user_cost(&price, &profile) + 1e-9);
        let again = follower_load_response(&price, &profile).unwrap();
        prop_assert_eq!(out, again);
    }

    #[test]
    fn ev_plan_beats_plug_in_charging(arrive in 0usize..24, len in 3usize..16, soc in 0.1f64..0.8, price in hours(0.6..2.0)) {
        let profile = EvProfile {
            id: 1, microgrid: 0, controllable: true, arrive_hour: arrive, depart_hour: (arrive + len) % HOURS,
            soc_arrival: soc, soc_required: (soc + 0.2).min(1.0), battery: Battery::default(),
        };
        let ceiling: Vec<f64> = price.iter().map(|p| 1.3 * p).collect();
        let prices = EvPrices { charge: &price, discharge: &price, ceiling: &ceiling };
        let wear = Degradation::default();
        let plan = optimize_ev_schedule(&profile, prices, &wear, 0.01).unwrap();
        plan.schedule.validate(&profile).unwrap();
        let lat = SocLattice::new(&profile, 0.01).unwrap();
        let (_, plug) = evaluate_levels(&profile, prices, &wear, 0.01, &immediate_levels(&lat)).unwrap();
        prop_assert!(plan.satisfaction.unwrap().total() >= plug.total() - 1e-12);
    }

    #[test]
    fn ga_never_leaves_the_band(lo in prop::collection::vec(0.5f64..1.0, 6), width in prop::collection::vec(0.0f64..0.6, 6), seed in any::<u64>()) {
        let bands: Vec<PriceBand> = lo.iter().zip(&width).map(|(a, w)| PriceBand::new(*a, a + w).unwrap()).collect();
        let cfg = GaConfig { population: 12, generations: 15, ..GaConfig::default() };
        let fit = |x: &[f64]| Ok(-x.iter().map(|v| (v - 0.9).powi(2)).sum::<f64>());
        let res = ga_optimize(fit, &bands, &cfg, stream_rng(seed, 7)).unwrap();
        for (g, b) in res.best.iter().zip(&bands) {
            prop_assert!(*g >= b.min && *g <= b.max);
        }
        prop_assert!(res.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn dispatch_balances_every_hour(nets in prop::collection::vec(hours(-300.0..300.0), 1..4)) {
        let positions: Vec<MicrogridPosition> = nets.iter().map(|n| MicrogridPosition::from_net(n)).collect();
        let sol = alliance_dispatch(&positions, &alliance()).unwrap();
        for h in 0..HOURS {
            let bought: f64 = sol.internal_buy.iter().map(|v| v[h]).sum();
            let sold: f64 = sol.internal_sell.iter().map(|v| v[h]).sum();
            prop_assert!((bought - sold).abs() < 1e-9);
            prop_assert!(sol.grid_buy[h] == 0.0 || sol.grid_sell[h] == 0.0);
            for k in 0..positions.len() {
                prop_assert!(sol.residual(&positions, k, h).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn dearer_grid_never_cuts_internal_trade(nets in prop::collection::vec(hours(-300.0..300.0), 2..4), bump in 0.0f64..1.0) {
        let positions: Vec<MicrogridPosition> = nets.iter().map(|n| MicrogridPosition::from_net(n)).collect();
        let base = alliance_dispatch(&positions, &alliance()).unwrap();
        let mut p = alliance();
        p.grid_buy_price.iter_mut().for_each(|c| *c += bump);
        let dear = alliance_dispatch(&positions, &p).unwrap();
        prop_assert!(dear.internal_volume() >= base.internal_volume() - 1e-9);
    }

    #[test]
    fn shapley_is_efficient_and_ignores_dummies(nets in prop::collection::vec(hours(-200.0..200.0), 1..4)) {
        let mut positions: Vec<MicrogridPosition> = nets.iter().map(|n| MicrogridPosition::from_net(n)).collect();
        positions.push(MicrogridPosition::idle());
        let alloc = allocate(&positions, &alliance()).unwrap();
        let total: f64 = alloc.shapley.iter().sum();
        prop_assert!((total - alloc.grand_value()).abs() < 1e-9);
        prop_assert!(alloc.shapley.last().unwrap().abs() < 1e-9);
    }
}

#[test]
fn identical_microgrids_split_evenly() {
    let net: Vec<f64> = (0..HOURS)
        .map(|h| if h < 12 { 120.0 } else { -80.0 })
        .collect();
    let positions = vec![MicrogridPosition::from_net(&net); 3];
    let alloc = allocate(&positions, &alliance()).unwrap();
    for phi in &alloc.shapley {
        assert!((phi - alloc.grand_value() / 3.0).abs() < 1e-9);
    }
}
