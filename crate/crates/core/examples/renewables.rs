//! Turbine power curve and PV module output over a clear day.

use mmg_core::renewables::{pv_max_power, wind_power_from_speed, PvParams, WindParams};

fn main() -> mmg_core::Result<()> {
    let turbine = WindParams {
        cut_in: 3.0,
        rated_speed: 12.0,
        cut_out: 25.0,
        rated_power: 500.0,
        shape: 2.0,
        scale: 8.0,
    };
    println!("wind speed (m/s)  power (kW)  density");
    for v in [2.0, 3.0, 5.0, 8.0, 10.0, 12.0, 20.0, 25.0, 26.0] {
        let p = wind_power_from_speed(v, &turbine)?;
        println!("{v:>16.1}  {p:>10.2}  {:.4}", turbine.speed_pdf(v));
    }

    let module = PvParams {
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
    };
    println!("\nhour  irradiance  ambient  module kW");
    for h in 5..20 {
        // crude bell for irradiance, warmer in the afternoon
        let x = (h as f64 - 12.5) / 3.5;
        let a = 950.0 * (-x * x).exp();
        let t = 14.0 + 8.0 * ((h as f64 - 9.0) / 12.0 * std::f64::consts::PI).sin();
        println!(
            "{h:>4}  {a:>10.1}  {t:>7.1}  {:>9.4}",
            pv_max_power(a, t, &module)?
        );
    }
    Ok(())
}
