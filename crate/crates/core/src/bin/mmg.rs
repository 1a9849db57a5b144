use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mmg_core::case::{
    compare_methods, compare_schemes, export_comparison, export_run, export_scenarios, prepare,
    run_scheme, run_without_pricing, CaseFile, Overrides, RunReport, Scheme,
};
use mmg_core::Error;

#[derive(Parser)]
#[command(
    name = "mmg",
    version,
    about = "Day-ahead multi-microgrid alliance dispatch with EV fleets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Case file (TOML); the bundled desk case when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    n_scenarios: Option<usize>,
    #[arg(long)]
    reduce_to: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scheme and export its artifacts.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        scheme: u8,
    },
    /// Schemes 1 to 4 side by side.
    CompareSchemes {
        #[command(flatten)]
        common: Common,
    },
    /// Methods 1 to 4 side by side.
    CompareMethods {
        #[command(flatten)]
        common: Common,
    },
    /// Generate, reduce and export scenarios and fleets only.
    GenScenarios {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<CaseFile, Error> {
    let file = match &common.config {
        Some(path) => CaseFile::parse(&std::fs::read_to_string(path)?)?,
        None => CaseFile::desk(),
    };
    Overrides {
        seed: common.seed,
        n_scenarios: common.n_scenarios,
        reduce_to: common.reduce_to,
    }
    .apply(&file)
}

fn print_reports(reports: &[RunReport]) {
    println!(
        "{:<10} {:>12} {:>12} {:>10} {:>12} {:>11} {:>11} {:>12} {:>8}",
        "run",
        "revenue",
        "user_cost",
        "ev_cost",
        "system_cost",
        "grid_buy",
        "grid_sell",
        "renew_used",
        "curt_%"
    );
    for r in reports {
        println!(
            "{:<10} {:>12.2} {:>12.2} {:>10.2} {:>12.2} {:>11.2} {:>11.2} {:>12.2} {:>8.3}",
            r.label,
            r.total_revenue,
            r.total_user_cost,
            r.total_ev_cost,
            r.total_cost,
            r.grid_buy_kwh,
            r.grid_sell_kwh,
            r.renewable_consumption_kwh,
            r.curtailment_rate
        );
    }
}

fn converged(reports: &[RunReport]) -> bool {
    reports.iter().all(|r| r.converged != Some(false))
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let started = Instant::now();
    let ok = match cli.command {
        Command::Run { common, scheme } => {
            let scheme = Scheme::from_id(scheme)?;
            let case = prepare(&load(&common)?)?;
            let run = run_scheme(&case, scheme, None)?;
            export_run(&common.out, &case, &run)?;
            print_reports(std::slice::from_ref(&run.report));
            eprintln!("solve {:.2} s", run.report.timings.solve.as_secs_f64());
            converged(std::slice::from_ref(&run.report))
        }
        Command::CompareSchemes { common } => {
            let case = prepare(&load(&common)?)?;
            let runs = compare_schemes(&case)?;
            for run in &runs {
                export_run(&common.out.join(&run.report.label), &case, run)?;
                eprintln!(
                    "{} solve {:.2} s",
                    run.report.label,
                    run.report.timings.solve.as_secs_f64()
                );
            }
            let without = run_without_pricing(&case, &runs[0].tariffs)?;
            let pricing = vec![runs[0].report.clone(), without];
            export_comparison(&common.out, &case.file, "pricing_effect", &pricing)?;
            let reports: Vec<RunReport> = runs.into_iter().map(|r| r.report).collect();
            export_comparison(&common.out, &case.file, "schemes", &reports)?;
            print_reports(&reports);
            print_reports(&pricing[1..]);
            converged(&reports)
        }
        Command::CompareMethods { common } => {
            let case = prepare(&load(&common)?)?;
            let reports = compare_methods(&case, None)?;
            export_comparison(&common.out, &case.file, "methods", &reports)?;
            print_reports(&reports);
            converged(&reports)
        }
        Command::GenScenarios { common } => {
            let case = prepare(&load(&common)?)?;
            export_scenarios(&common.out, &case)?;
            println!(
                "{} scenarios reduced to {} for {} microgrids",
                case.file.scenarios.n_scenarios,
                case.reduced.len(),
                case.reduced.microgrid_count()
            );
            true
        }
    };
    eprintln!("total {:.2} s", started.elapsed().as_secs_f64());
    Ok(ok)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: tariff search stopped at the iteration limit without converging");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
