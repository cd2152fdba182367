use std::fs;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::runner::RunRecord;
use super::table::TableCell;
use crate::error::{Error, Result};

pub const RUNS_HEADER: [&str; 13] = [
    "run_id",
    "problem",
    "n",
    "m",
    "alpha",
    "algorithm",
    "t_freeze",
    "instance_seed",
    "run_seed",
    "evals_used",
    "best_value",
    "success",
    "wall_ms",
];

pub const TABLE_HEADER: [&str; 6] = ["problem", "alpha", "algorithm", "trials", "success_rate", "median_evals"];

pub const TRAJ_HEADER: [&str; 2] = ["evals", "best_f"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        writer.write_record(&row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

fn run_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.run_id.clone(),
        r.problem.to_string(),
        r.n.to_string(),
        r.m.to_string(),
        r.alpha.to_string(),
        r.algorithm.to_string(),
        r.t_freeze.to_string(),
        r.instance_seed.to_string(),
        r.run_seed.to_string(),
        r.evals_used.to_string(),
        format!("{:e}", r.best_value),
        u8::from(r.success).to_string(),
        r.wall_ms.to_string(),
    ]
}

fn table_row(c: &TableCell) -> Vec<String> {
    vec![
        c.problem.to_string(),
        c.alpha.to_string(),
        c.algorithm.to_string(),
        c.trials.to_string(),
        c.success_rate.to_string(),
        c.median_evals.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

pub fn write_runs(records: &[RunRecord], path: &Path) -> Result<()> {
    write_csv(path, &RUNS_HEADER, records.iter().map(run_row))
}

pub fn write_table(table: &[TableCell], path: &Path) -> Result<()> {
    write_csv(path, &TABLE_HEADER, table.iter().map(table_row))
}

/// Writes one `traj/<run_id>.csv` per record that carries a trajectory.
pub fn write_trajectories(records: &[RunRecord], dir: &Path) -> Result<()> {
    let traj_dir = dir.join("traj");
    let mut created = false;
    for rec in records {
        let Some(traj) = &rec.trajectory else { continue };
        if !created {
            fs::create_dir_all(&traj_dir).map_err(io_err(&traj_dir))?;
            created = true;
        }
        let path = traj_dir.join(format!("{}.csv", rec.run_id));
        let rows = traj.iter().map(|(evals, best)| vec![evals.to_string(), format!("{best:e}")]);
        write_csv(&path, &TRAJ_HEADER, rows)?;
    }
    Ok(())
}

pub fn write_config(config: &RunConfig, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(config)?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// Paths of the files written by [`write_results`].
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub runs: PathBuf,
    pub table: PathBuf,
    pub config: PathBuf,
}

/// Writes `runs.csv`, `table.csv`, `config.json` and, when recorded,
/// `traj/<run_id>.csv` under `dir`.
pub fn write_results(records: &[RunRecord], table: &[TableCell], config: &RunConfig, dir: &Path) -> Result<OutputPaths> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let paths = OutputPaths {
        runs: dir.join("runs.csv"),
        table: dir.join("table.csv"),
        config: dir.join("config.json"),
    };
    write_runs(records, &paths.runs)?;
    write_table(table, &paths.table)?;
    write_config(config, &paths.config)?;
    write_trajectories(records, dir)?;
    Ok(paths)
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: u64, name: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{}:{line}: bad {name} {value:?}: {e}", path.display())))
}

/// Reads a `runs.csv` file back. Trajectories and diagnostics are not stored
/// there and come back as `None`.
pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(RUNS_HEADER.iter().copied()) {
        return Err(Error::Config(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map_or(0, |p| p.line());
        let f = |i: usize| &row[i];
        let success = match f(11) {
            "0" => false,
            "1" => true,
            other => return Err(Error::Config(format!("{}:{line}: bad success {other:?}", path.display()))),
        };
        records.push(RunRecord {
            run_id: f(0).to_string(),
            problem: parse_field(path, line, "problem", f(1))?,
            n: parse_field(path, line, "n", f(2))?,
            m: parse_field(path, line, "m", f(3))?,
            alpha: parse_field(path, line, "alpha", f(4))?,
            algorithm: parse_field(path, line, "algorithm", f(5))?,
            t_freeze: parse_field(path, line, "t_freeze", f(6))?,
            instance_seed: parse_field(path, line, "instance_seed", f(7))?,
            run_seed: parse_field(path, line, "run_seed", f(8))?,
            evals_used: parse_field(path, line, "evals_used", f(9))?,
            best_value: parse_field(path, line, "best_value", f(10))?,
            success,
            wall_ms: parse_field(path, line, "wall_ms", f(12))?,
            trajectory: None,
            diagnostic: None,
        });
    }
    Ok(records)
}
