use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::build::PreparedCase;
use super::file::CaseFile;
use super::schemes::{RunReport, SchemeRun};
use crate::error::{Error, Result};
use crate::ev::{write_fleet, EvProfile};
use crate::renewables::{MicrogridTrajectory, ScenarioSet};
use crate::table::{csv_err, f6, writer};
use crate::HOURS;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => f6(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(raw: &str) -> Cell {
        if let Ok(i) = raw.parse::<i64>() {
            Cell::Int(i)
        } else if let Ok(x) = raw.parse::<f64>() {
            Cell::Num(x)
        } else {
            Cell::Text(raw.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

fn int(i: usize) -> Cell {
    Cell::Int(i as i64)
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

/// A header plus rows; floats are written with six decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = writer(out);
        w.write_record(&self.header)
            .map_err(|e| csv_err(&self.name, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| csv_err(&self.name, e))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read<R: Read>(name: &str, input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r
            .headers()
            .map_err(|e| csv_err(name, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_err(name, e))?;
            rows.push(rec.iter().map(Cell::parse).collect());
        }
        Ok(Self {
            name: name.to_string(),
            header,
            rows,
        })
    }

    /// The table as it reads back after export.
    pub fn rounded(&self) -> Self {
        let mut t = self.clone();
        for row in &mut t.rows {
            for c in row.iter_mut() {
                *c = Cell::parse(&c.render());
            }
        }
        t
    }

    pub fn save(&self, dir: &Path, file: &str) -> Result<()> {
        self.write(fs::File::create(dir.join(file))?)
    }
}

pub fn scenario_table(set: &ScenarioSet) -> Table {
    let mut t = Table::new(
        "scenarios",
        &[
            "scenario",
            "probability",
            "microgrid",
            "hour",
            "wt_kw",
            "pv_kw",
            "load_kw",
        ],
    );
    for (s, (scen, &p)) in set.scenarios().iter().zip(set.probabilities()).enumerate() {
        for (k, mg) in scen.microgrids.iter().enumerate() {
            for h in 0..HOURS {
                t.push(vec![
                    int(s),
                    num(p),
                    int(k),
                    int(h),
                    num(mg.wt[h]),
                    num(mg.pv[h]),
                    num(mg.load[h]),
                ]);
            }
        }
    }
    t
}

pub fn trajectory_table(name: &str, trajectories: &[MicrogridTrajectory]) -> Table {
    let mut t = Table::new(name, &["microgrid", "hour", "wt_kw", "pv_kw", "load_kw"]);
    for (k, mg) in trajectories.iter().enumerate() {
        for h in 0..HOURS {
            t.push(vec![
                int(k),
                int(h),
                num(mg.wt[h]),
                num(mg.pv[h]),
                num(mg.load[h]),
            ]);
        }
    }
    t
}

pub fn tariff_table(run: &SchemeRun) -> Table {
    let mut t = Table::new(
        "tariffs",
        &[
            "microgrid",
            "hour",
            "user_price",
            "ev_price",
            "band_min",
            "band_max",
        ],
    );
    for (k, o) in run.outcome.outcomes.iter().enumerate() {
        for h in 0..HOURS {
            t.push(vec![
                int(k),
                int(h),
                num(o.tariff.user_price[h]),
                num(o.tariff.ev_price[h]),
                num(o.tariff.band[h].min),
                num(o.tariff.band[h].max),
            ]);
        }
    }
    t
}

pub fn load_table(run: &SchemeRun) -> Table {
    let mut t = Table::new(
        "loads",
        &[
            "microgrid",
            "hour",
            "nl_kw",
            "al_base_kw",
            "al_kw",
            "user_before_kw",
            "user_after_kw",
            "ev_kw",
        ],
    );
    for (k, o) in run.outcome.outcomes.iter().enumerate() {
        let ev = o.ev_load();
        let r = &o.response;
        for h in 0..HOURS {
            t.push(vec![
                int(k),
                int(h),
                num(r.nl[h]),
                num(r.al_base[h]),
                num(r.al[h]),
                num(r.base_total(h)),
                num(r.total(h)),
                num(ev[h]),
            ]);
        }
    }
    t
}

pub fn ev_schedule_table(run: &SchemeRun) -> Table {
    let mut t = Table::new(
        "ev_schedules",
        &["microgrid", "ev_id", "hour", "power_kw", "mode", "soc"],
    );
    for (k, o) in run.outcome.outcomes.iter().enumerate() {
        for plan in &o.ev_plans {
            let s = &plan.schedule;
            for h in 0..HOURS {
                t.push(vec![
                    int(k),
                    int(s.ev_id),
                    int(h),
                    num(s.charge_kw[h] - s.discharge_kw[h]),
                    text(s.mode(h).as_str()),
                    num(s.soc[h]),
                ]);
            }
        }
    }
    t
}

pub fn dispatch_table(run: &SchemeRun) -> Table {
    let d = &run.outcome.settlement.dispatch;
    let mut t = Table::new(
        "dispatch",
        &[
            "hour",
            "microgrid",
            "internal_buy_kw",
            "internal_sell_kw",
            "grid_buy_kw",
            "grid_sell_kw",
            "curtailed_kw",
        ],
    );
    for h in 0..HOURS {
        for k in 0..d.microgrids() {
            t.push(vec![
                int(h),
                int(k),
                num(d.internal_buy[k][h]),
                num(d.internal_sell[k][h]),
                num(d.grid_buy_mg[k][h]),
                num(d.grid_sell_mg[k][h]),
                num(d.curtailed_mg[k][h]),
            ]);
        }
    }
    t
}

pub fn convergence_table(run: &SchemeRun) -> Table {
    let mut t = Table::new(
        "convergence",
        &[
            "iteration",
            "microgrid",
            "profit",
            "user_cost",
            "best_fitness",
        ],
    );
    for r in &run.trace {
        t.push(vec![
            int(r.iteration),
            int(r.microgrid),
            num(r.profit),
            num(r.user_cost),
            num(r.best_fitness),
        ]);
    }
    t
}

pub fn allocation_table(run: &SchemeRun) -> Table {
    let mut t = Table::new(
        "allocation",
        &["microgrid", "v_singleton", "shapley", "cost_share"],
    );
    let s = &run.outcome.settlement;
    for (k, share) in s.cost_shares.iter().enumerate() {
        let (single, phi) = match &s.allocation {
            Some(a) => (a.singleton_value(k), a.shapley[k]),
            None => (-share, -share),
        };
        t.push(vec![int(k), num(single), num(phi), num(*share)]);
    }
    t
}

/// One row per microgrid plus a total row.
pub fn summary_table(report: &RunReport) -> Table {
    let mut t = Table::new(
        "summary",
        &[
            "microgrid",
            "operating_revenue",
            "user_cost",
            "ev_cost",
            "cost_share",
            "grid_buy_kwh",
            "grid_sell_kwh",
            "curtailed_kwh",
        ],
    );
    for m in &report.microgrids {
        t.push(vec![
            text(&m.name),
            num(m.operating_revenue),
            num(m.user_cost),
            num(m.ev_cost),
            num(m.cost_share),
            num(m.grid_buy_kwh),
            num(m.grid_sell_kwh),
            num(m.curtailed_kwh),
        ]);
    }
    t.push(vec![
        text("total"),
        num(report.total_revenue),
        num(report.total_user_cost),
        num(report.total_ev_cost),
        num(report.total_cost),
        num(report.grid_buy_kwh),
        num(report.grid_sell_kwh),
        num(report.curtailed_kwh),
    ]);
    t
}

/// Side-by-side comparison of several runs.
pub fn comparison_table(name: &str, reports: &[RunReport]) -> Table {
    let mut t = Table::new(
        name,
        &[
            "run",
            "operating_revenue",
            "user_cost",
            "ev_cost",
            "load_side_cost",
            "system_cost",
            "grid_buy_kwh",
            "grid_sell_kwh",
            "internal_trade_kwh",
            "renewable_consumption_kwh",
            "curtailment_rate",
        ],
    );
    for r in reports {
        t.push(vec![
            text(&r.label),
            num(r.total_revenue),
            num(r.total_user_cost),
            num(r.total_ev_cost),
            num(r.load_side_cost),
            num(r.total_cost),
            num(r.grid_buy_kwh),
            num(r.grid_sell_kwh),
            num(r.internal_trade_kwh),
            num(r.renewable_consumption_kwh),
            num(r.curtailment_rate),
        ]);
    }
    t
}

pub fn fleet_profiles(case: &PreparedCase) -> Vec<EvProfile> {
    case.model
        .microgrids
        .iter()
        .flat_map(|m| m.fleet.iter().cloned())
        .collect()
}

/// SHA-256 of the effective case file in canonical form.
pub fn config_hash(file: &CaseFile) -> Result<String> {
    let canonical = toml::to_string(file).map_err(|e| Error::CaseParse(e.to_string()))?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn round_floats(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            let r = (x * 1e6).round() / 1e6;
            let r = if r == 0.0 { 0.0 } else { r };
            *v = serde_json::Number::from_f64(r)
                .map_or(serde_json::Value::Null, serde_json::Value::Number);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    case: &'a str,
    config_sha256: String,
    seed: u64,
    #[serde(flatten)]
    body: T,
}

/// Structured summary with provenance; floats rounded to six decimals.
pub fn summary_json<T: Serialize>(file: &CaseFile, body: T) -> Result<String> {
    let doc = Summary {
        case: &file.meta.name,
        config_sha256: config_hash(file)?,
        seed: file.meta.seed,
        body,
    };
    let mut value = serde_json::to_value(&doc).map_err(|e| Error::CaseParse(e.to_string()))?;
    round_floats(&mut value);
    let mut s =
        serde_json::to_string_pretty(&value).map_err(|e| Error::CaseParse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct RunBody<'a> {
    report: &'a RunReport,
    tariffs: &'a [Vec<f64>],
}

/// Writes every artifact of one scheme run into `dir`.
pub fn export_run(dir: &Path, case: &PreparedCase, run: &SchemeRun) -> Result<()> {
    fs::create_dir_all(dir)?;
    scenario_table(&case.reduced).save(dir, "scenarios.csv")?;
    tariff_table(run).save(dir, "tariffs.csv")?;
    load_table(run).save(dir, "loads.csv")?;
    ev_schedule_table(run).save(dir, "ev_schedules.csv")?;
    dispatch_table(run).save(dir, "dispatch.csv")?;
    convergence_table(run).save(dir, "convergence.csv")?;
    allocation_table(run).save(dir, "allocation.csv")?;
    summary_table(&run.report).save(dir, "summary.csv")?;
    write_fleet(
        &fleet_profiles(case),
        fs::File::create(dir.join("fleet.csv"))?,
    )?;
    let json = summary_json(
        &case.file,
        RunBody {
            report: &run.report,
            tariffs: &run.tariffs,
        },
    )?;
    fs::write(dir.join("summary.json"), json)?;
    Ok(())
}

#[derive(Serialize)]
struct ComparisonBody<'a> {
    runs: &'a [RunReport],
}

/// Writes a comparison table and summary for several runs.
pub fn export_comparison(
    dir: &Path,
    file: &CaseFile,
    name: &str,
    reports: &[RunReport],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    comparison_table(name, reports).save(dir, &format!("{name}.csv"))?;
    fs::write(
        dir.join(format!("{name}.json")),
        summary_json(file, ComparisonBody { runs: reports })?,
    )?;
    Ok(())
}

/// Scenario artifacts: the reduced set, its expected case and the fleets.
pub fn export_scenarios(dir: &Path, case: &PreparedCase) -> Result<()> {
    fs::create_dir_all(dir)?;
    scenario_table(&case.reduced).save(dir, "scenarios.csv")?;
    trajectory_table("forecast", &case.forecasts).save(dir, "forecast.csv")?;
    trajectory_table("expected", &case.expected).save(dir, "expected.csv")?;
    write_fleet(
        &fleet_profiles(case),
        fs::File::create(dir.join("fleet.csv"))?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trips() {
        let mut t = Table::new("t", &["id", "x", "mode"]);
        t.push(vec![int(0), num(1.0 / 3.0), text("charge")]);
        t.push(vec![int(1), num(-0.0000001), text("idle")]);
        t.push(vec![int(2), num(42.0), text("discharge")]);
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("id,x,mode\n0,0.333333,charge\n1,0.000000,idle\n"));
        let back = Table::read("t", csv.as_bytes()).unwrap();
        assert_eq!(back, t.rounded());
        assert_eq!(back.to_csv().unwrap(), csv);
    }

    #[test]
    fn json_floats_are_rounded() {
        let mut v = serde_json::json!({"a": 0.1234567891, "b": [1.0000004, -0.0000001], "c": 3});
        round_floats(&mut v);
        assert_eq!(v["a"].as_f64().unwrap(), 0.123457);
        assert_eq!(v["b"][0].as_f64().unwrap(), 1.0);
        assert_eq!(v["b"][1].as_f64().unwrap(), 0.0);
        assert_eq!(v["c"].as_i64().unwrap(), 3);
    }

    #[test]
    fn hash_tracks_the_seed() {
        let a = CaseFile::desk();
        let mut b = a.clone();
        b.meta.seed += 1;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap(), config_hash(&a.clone()).unwrap());
    }
}
