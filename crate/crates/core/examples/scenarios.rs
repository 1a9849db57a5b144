//! Latin hypercube forecast scenarios for the desk case, reduced by
//! backward deletion, and the probability-weighted expected day.

use mmg_core::case::{day_ahead_forecasts, generate_scenarios, CaseFile};
use mmg_core::renewables::reduce_scenarios_traced;
use mmg_core::solver::expected_scenario_case;

fn main() -> mmg_core::Result<()> {
    let file = CaseFile::desk();
    let forecasts = day_ahead_forecasts(&file)?;
    let all = generate_scenarios(&file, &forecasts)?;
    let (reduced, trace) = reduce_scenarios_traced(&all, file.scenarios.reduce_to)?;
    println!(
        "{} scenarios -> {} after {} deletions",
        all.len(),
        reduced.len(),
        trace.len()
    );
    for d in trace.iter().rev().take(5) {
        println!(
            "  last deletions: {} merged into {}",
            d.removed, d.merged_into
        );
    }
    for (i, p) in reduced.probabilities().iter().enumerate() {
        println!("kept {i}: p = {p:.4}");
    }

    let expected = expected_scenario_case(&reduced)?;
    for (name, (mg, da)) in file.microgrids.iter().zip(expected.iter().zip(&forecasts)) {
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        println!(
            "{:<6} wind {:>8.1} ({:>8.1} forecast)  pv {:>8.1} ({:>8.1})  load {:>8.1} ({:>8.1}) kWh",
            name.name,
            sum(&mg.wt),
            sum(&da.wt),
            sum(&mg.pv),
            sum(&da.pv),
            sum(&mg.load),
            sum(&da.load)
        );
    }
    Ok(())
}
