use crate::error::Result;
use crate::renewables::{MicrogridTrajectory, ScenarioSet};
use crate::HOURS;

/// Probability-weighted mean trajectory of every microgrid.
pub fn expected_scenario_case(set: &ScenarioSet) -> Result<Vec<MicrogridTrajectory>> {
    let n_mg = set.microgrid_count();
    let mut out = vec![MicrogridTrajectory::flat(0.0, 0.0, 0.0); n_mg];
    for (scen, &p) in set.scenarios().iter().zip(set.probabilities()) {
        for (acc, mg) in out.iter_mut().zip(&scen.microgrids) {
            for h in 0..HOURS {
                acc.wt[h] += p * mg.wt[h];
                acc.pv[h] += p * mg.pv[h];
                acc.load[h] += p * mg.load[h];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewables::Scenario;

    fn scen(v: f64) -> Scenario {
        Scenario {
            microgrids: vec![MicrogridTrajectory::flat(v, 2.0 * v, 3.0 * v)],
        }
    }

    #[test]
    fn single_scenario_is_identity() {
        let set = ScenarioSet::new(vec![scen(4.0)], vec![1.0]).unwrap();
        assert_eq!(
            expected_scenario_case(&set).unwrap()[0],
            scen(4.0).microgrids[0]
        );
    }

    #[test]
    fn equal_weights_average() {
        let set = ScenarioSet::uniform(vec![scen(2.0), scen(6.0)]).unwrap();
        let e = expected_scenario_case(&set).unwrap();
        assert!(e[0].wt.iter().all(|&v| (v - 4.0).abs() < 1e-12));
        assert!(e[0].load.iter().all(|&v| (v - 12.0).abs() < 1e-12));
    }
}
