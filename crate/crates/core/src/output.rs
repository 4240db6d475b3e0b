//! CSV and summary writers. Floats are written with Rust's shortest
//! round-trip formatting, so identical runs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::BoundReport;
use crate::sim::{RunResult, SweepOutcome, SweepParam};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Flat view of a run used by both summary formats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub controller: String,
    pub case: Option<String>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub v0: Option<f64>,
    pub bound: Option<f64>,
    pub threshold: f64,
    pub settled: bool,
    pub t_settle: Option<f64>,
    pub residual_at_bound: Option<f64>,
    pub dbar_required: Option<f64>,
    pub dbar_configured: Option<f64>,
    pub scenario_hash: String,
    pub cells: usize,
    pub dt: f64,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn of(result: &RunResult) -> Self {
        let b = result.bound.as_ref();
        Self {
            name: result.name.clone(),
            controller: result.controller.name().to_string(),
            case: b.map(|b| b.case.name().to_string()),
            c1: b.and_then(|b| b.c1),
            c2: b.and_then(|b| b.c2),
            c3: b.and_then(|b| b.c3),
            c4: b.and_then(|b| b.c4),
            v0: b.and_then(|b| b.v0),
            bound: b.map(|b| b.t_star_bound),
            threshold: result.settling.threshold,
            settled: result.settling.settled,
            t_settle: result.settling.t_settle,
            residual_at_bound: result.settling.residual_at_bound,
            dbar_required: result.dbar_required,
            dbar_configured: result.dbar_configured,
            scenario_hash: result.provenance.scenario_hash.clone(),
            cells: result.provenance.cells,
            dt: result.provenance.dt,
            seed: result.provenance.seed,
            warnings: result.warnings.clone(),
        }
    }

    /// `key = value` lines; absent values are written as `none`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("controller", self.controller.clone());
        kv("case", self.case.clone().unwrap_or_else(|| "none".into()));
        kv("c1", opt(self.c1));
        kv("c2", opt(self.c2));
        kv("c3", opt(self.c3));
        kv("c4", opt(self.c4));
        kv("v0", opt(self.v0));
        kv("bound", opt(self.bound));
        kv("threshold", self.threshold.to_string());
        kv("settled", self.settled.to_string());
        kv("t_settle", opt(self.t_settle));
        kv("residual_at_bound", opt(self.residual_at_bound));
        kv("dbar_required", opt(self.dbar_required));
        kv("dbar_configured", opt(self.dbar_configured));
        kv("scenario_hash", self.scenario_hash.clone());
        kv("cells", self.cells.to_string());
        kv("dt", self.dt.to_string());
        kv(
            "seed",
            self.seed.map_or_else(|| "none".into(), |s| s.to_string()),
        );
        kv("warnings", self.warnings.len().to_string());
        for (i, w) in self.warnings.iter().enumerate() {
            kv(&format!("warning.{}", i + 1), w.clone());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes to JSON")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

fn opt_csv(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Bound-only block for the `bounds` command.
pub fn bounds_text(name: &str, bound: Option<&BoundReport>) -> String {
    let mut out = format!("name = {name}\n");
    match bound {
        None => out.push_str("case = none\nbound = none\n"),
        Some(b) => {
            let _ = writeln!(out, "case = {}", b.case.name());
            for (k, v) in [
                ("c1", b.c1),
                ("c2", b.c2),
                ("c3", b.c3),
                ("c4", b.c4),
                ("v0", b.v0),
            ] {
                let _ = writeln!(out, "{k} = {}", opt(v));
            }
            let _ = writeln!(out, "bound = {}", b.t_star_bound);
            let _ = writeln!(out, "dbar_required = {}", opt(b.dbar_required));
        }
    }
    out
}

pub fn trajectory_header(result: &RunResult) -> Vec<String> {
    let mut cols = vec![
        "t".to_string(),
        "V".to_string(),
        "max_disagreement".to_string(),
    ];
    let n_agents = result.records.first().map_or(0, |r| r.probes.len());
    for i in 0..n_agents {
        for x in &result.probe_locations {
            cols.push(format!("y_{}_at_{x}", i + 1));
        }
    }
    cols
}

pub fn write_trajectory_csv<W: Write>(mut w: W, result: &RunResult) -> io::Result<()> {
    writeln!(w, "{}", trajectory_header(result).join(","))?;
    for r in &result.records {
        let mut line = format!("{},{},{}", r.time, r.energy, r.disagreement);
        for v in r.probes.iter().flatten() {
            let _ = write!(line, ",{v}");
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// One row per `(t, x)`.
pub fn write_snapshots_csv<W: Write>(mut w: W, result: &RunResult) -> io::Result<()> {
    let n_agents = result.snapshots.first().map_or(0, |s| s.fields.len());
    let mut header = String::from("t,x");
    for i in 0..n_agents {
        let _ = write!(header, ",y_{}", i + 1);
    }
    writeln!(w, "{header}")?;
    for snap in &result.snapshots {
        for (j, x) in result.grid_nodes.iter().enumerate() {
            let mut line = format!("{},{x}", snap.time);
            for field in &snap.fields {
                let _ = write!(line, ",{}", field[j]);
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

/// One row per sweep point: every sweepable parameter, then the outcome.
pub fn write_sweep_csv<W: Write>(mut w: W, outcome: &SweepOutcome) -> io::Result<()> {
    let mut header: Vec<&str> = SweepParam::ALL.iter().map(|p| p.name()).collect();
    header.extend(["bound", "t_settle", "residual", "settled", "error"]);
    writeln!(w, "{}", header.join(","))?;
    for row in &outcome.rows {
        let mut cells: Vec<String> = row.params.iter().map(|&p| opt_csv(p)).collect();
        cells.push(opt_csv(row.bound));
        cells.push(opt_csv(row.t_settle));
        cells.push(opt_csv(row.residual));
        cells.push(row.settled.to_string());
        cells.push(row.error.as_deref().map(csv_quote).unwrap_or_default());
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
}

/// Writes the trajectory, optional snapshots and both summaries into `dir`.
pub fn write_run(dir: &Path, result: &RunResult) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join(TRAJECTORY_FILE);
    write_trajectory_csv(io::BufWriter::new(fs::File::create(&path)?), result)?;
    written.push(path);

    if !result.snapshots.is_empty() {
        let path = dir.join(SNAPSHOTS_FILE);
        write_snapshots_csv(io::BufWriter::new(fs::File::create(&path)?), result)?;
        written.push(path);
    }

    let summary = Summary::of(result);
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, summary.to_text())?;
    written.push(path);
    let path = dir.join(SUMMARY_JSON_FILE);
    fs::write(&path, summary.to_json())?;
    written.push(path);
    Ok(written)
}

pub fn write_sweep(dir: &Path, outcome: &SweepOutcome) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(SWEEP_FILE);
    write_sweep_csv(io::BufWriter::new(fs::File::create(&path)?), outcome)?;
    Ok(path)
}
