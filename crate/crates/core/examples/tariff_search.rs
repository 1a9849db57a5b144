//! Leader search on the desk case: every operator evolves its tariff in
//! turn until no profit record moves.

use mmg_core::case::{prepare, CaseFile, Scheme};
use mmg_core::solver::{replay_matches, tpm_alliance_loop};

fn main() -> mmg_core::Result<()> {
    let case = prepare(&CaseFile::desk())?;
    let opts = Scheme::Full.options();
    let res = tpm_alliance_loop(&case.model, opts, &case.file.solver.ga(), case.seed())?;
    println!("iter  mg      profit   user cost   best");
    for row in &res.trace {
        println!(
            "{:>4}  {:>2}  {:>10.2}  {:>10.2}  {:>9.2}",
            row.iteration, row.microgrid, row.profit, row.user_cost, row.best_fitness
        );
    }
    println!(
        "{} iterations, converged {}",
        res.state.iterations, res.state.converged
    );
    println!(
        "replay identical: {}",
        replay_matches(&case.model, &res, opts)?
    );
    for (name, t) in case.names().iter().zip(&res.state.tariffs) {
        let shown: Vec<String> = t.iter().map(|p| format!("{p:.2}")).collect();
        println!("{name}: {}", shown.join(" "));
    }
    Ok(())
}
