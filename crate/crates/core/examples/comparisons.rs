//! Schemes 1 to 4, the run without two-stage pricing, and the four
//! scheduling methods on the desk case.

use mmg_core::case::{
    compare_methods, compare_schemes, prepare, run_without_pricing, CaseFile, RunReport,
};

fn show(title: &str, reports: &[&RunReport]) {
    println!("{title}");
    println!(
        "{:<12} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "run", "revenue", "grid buy", "grid sell", "renew", "curt %"
    );
    for r in reports {
        println!(
            "{:<12} {:>10.1} {:>10.1} {:>10.1} {:>10.1} {:>10.3}",
            r.label,
            r.total_revenue,
            r.grid_buy_kwh,
            r.grid_sell_kwh,
            r.renewable_consumption_kwh,
            r.curtailment_rate
        );
    }
    println!();
}

fn main() -> mmg_core::Result<()> {
    let case = prepare(&CaseFile::desk())?;
    let runs = compare_schemes(&case)?;
    show(
        "schemes",
        &runs.iter().map(|r| &r.report).collect::<Vec<_>>(),
    );

    let without = run_without_pricing(&case, &runs[0].tariffs)?;
    show("effect of two-stage pricing", &[&runs[0].report, &without]);

    let methods = compare_methods(&case, Some(&runs[0]))?;
    show("methods", &methods.iter().collect::<Vec<_>>());
    Ok(())
}
