//! Run artifacts: summary JSON, workload curve, trajectory, rasters and the
//! comparison table. Every raster is written one grid row per line, bottom
//! row (smallest `y`) first.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::mission::{Event, IterationRecord, OutputConfig, RunSummary};
use crate::Result;

#[derive(Serialize)]
struct SummaryFile<'a> {
    algorithm: &'a str,
    completed: bool,
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "T_star")]
    t_star: f64,
    #[serde(rename = "delta_T")]
    delta_t: f64,
    initial_total: f64,
    final_total: f64,
    coverage_speed: f64,
    steps: usize,
    solver_calls: usize,
    iterations: &'a [IterationRecord],
    events: &'a [Event],
}

/// `"<algo>: T=… T*=… dT=…"`, plus a marker when the run did not finish.
pub fn summary_line(s: &RunSummary) -> String {
    let mut line = format!("{}: T={:.1} T*={:.1} dT={:.1}", s.algorithm, s.t, s.t_star, s.delta_t);
    if !s.completed {
        line.push_str(&format!(" (incomplete, M={:.4})", s.final_total));
    }
    line
}

/// Writes every artifact `output` asks for into `dir`, file names prefixed
/// with the algorithm name. Returns the paths written.
pub fn write_run(summary: &RunSummary, output: &OutputConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let name = summary.algorithm.name();
    let mut written = Vec::new();
    let path = |suffix: &str| dir.join(format!("{name}_{suffix}"));

    if output.summary {
        let p = path("summary.json");
        write_summary(summary, &p)?;
        written.push(p);
    }
    if output.workload_curve {
        let p = path("curve.csv");
        write_curve(summary, &p)?;
        written.push(p);
    }
    if output.trajectory {
        let p = path("trajectory.csv");
        write_trajectory(summary, &p)?;
        written.push(p);
    }
    if output.rasters {
        let (nx, _) = summary.grid;
        let p = path("workload_initial.csv");
        write_raster(&p, nx, summary.initial_raster.iter().map(|v| Some(*v)))?;
        written.push(p);
        let p = path("workload_final.csv");
        write_raster(&p, nx, summary.final_raster.iter().map(|v| Some(*v)))?;
        written.push(p);
        for (k, labels) in &summary.partitions {
            let p = path(&format!("partition_k{k}.csv"));
            write_raster(&p, nx, labels.iter().map(|v| Some(*v)))?;
            written.push(p);
        }
    }
    if output.field_snapshots {
        let (nx, _) = summary.grid;
        for snap in &summary.field_snapshots {
            let p = path(&format!("field_k{}_agent{}.csv", snap.k, snap.agent + 1));
            write_raster(&p, nx, snap.values.iter().copied())?;
            written.push(p);
        }
    }
    Ok(written)
}

pub fn write_summary(s: &RunSummary, path: &Path) -> Result<()> {
    let file = SummaryFile {
        algorithm: s.algorithm.name(),
        completed: s.completed,
        t: s.t,
        t_star: s.t_star,
        delta_t: s.delta_t,
        initial_total: s.initial_total,
        final_total: s.final_total,
        coverage_speed: s.coverage_speed,
        steps: s.steps,
        solver_calls: s.solver_calls,
        iterations: &s.iterations,
        events: &s.events,
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| crate::Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Columns `t, k, M_total, M_per_agent_1..N`.
pub fn write_curve(s: &RunSummary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = s.samples.first().map_or(0, |c| c.per_agent.len());
    let mut header = vec!["t".to_string(), "k".into(), "M_total".into()];
    header.extend((1..=n).map(|i| format!("M_per_agent_{i}")));
    w.write_record(&header)?;
    for c in &s.samples {
        let mut row = vec![c.t.to_string(), c.k.to_string(), c.total.to_string()];
        row.extend(c.per_agent.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(s: &RunSummary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "k", "agent", "x", "y", "mode", "u_norm"])?;
    for r in &s.trajectory {
        w.write_record([
            r.t.to_string(),
            r.k.to_string(),
            r.agent.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.mode.to_string(),
            r.speed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a row-major raster; `None` cells are left blank.
pub fn write_raster<T: ToString>(
    path: &Path,
    nx: usize,
    values: impl Iterator<Item = Option<T>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    let mut row = Vec::with_capacity(nx);
    for v in values {
        row.push(v.map_or_else(String::new, |v| v.to_string()));
        if row.len() == nx {
            w.write_record(&row)?;
            row.clear();
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `method, T, delta_T, T_star, completed`.
pub fn write_compare(runs: &[RunSummary], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "T", "delta_T", "T_star", "completed"])?;
    for s in runs {
        w.write_record([
            s.algorithm.name().to_string(),
            s.t.to_string(),
            s.delta_t.to_string(),
            s.t_star.to_string(),
            s.completed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
