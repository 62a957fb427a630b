//! CSV schemas and readers/writers.
//!
//! Checkpoint stream: `t,grad_norm_x,grad_norm_xbar,phi,e_diss,energy_residual`.
//! Sweep rows: `T,alpha,min_grad_norm_xbar,t_star,leading_bound,finite_T_bound,
//! satisfied,wall_time_seconds,step_count`.
//!
//! Floats are written with 17 significant digits so re-running a config
//! reproduces files byte for byte (wall time excepted).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ode::Trajectory;

use super::SweepRecord;

pub const RUN_HEADER: &str = "t,grad_norm_x,grad_norm_xbar,phi,e_diss,energy_residual";
pub const SWEEP_HEADER: &str =
    "T,alpha,min_grad_norm_xbar,t_star,leading_bound,finite_T_bound,satisfied,wall_time_seconds,step_count";

/// 17 significant digits, round-trippable through `f64::from_str`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_run_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::with_capacity(96 * (traj.checkpoints.len() + 1));
    out.push_str(RUN_HEADER);
    out.push('\n');
    for (i, c) in traj.checkpoints.iter().enumerate() {
        let residual = traj.energy_residual(i);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(c.t),
            fmt_f64(c.grad_norm_x),
            fmt_f64(c.grad_norm_xbar),
            fmt_f64(c.phi),
            fmt_f64(c.e_diss),
            fmt_f64(residual),
        ));
    }
    write_atomically(path, &out)
}

pub fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6},{}\n",
            fmt_f64(r.t_final),
            fmt_f64(r.alpha),
            fmt_f64(r.min_grad_norm_xbar),
            fmt_f64(r.t_star),
            fmt_f64(r.leading_bound),
            fmt_f64(r.finite_t_bound),
            r.satisfied,
            r.wall_time_seconds,
            r.step_count,
        ));
    }
    write_atomically(path, &out)
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

/// A parsed CSV: header fields plus float-typed rows (booleans become 0/1).
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{}: empty file", path.display())))?;
    let header: Vec<String> = header_line
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Schema(format!(
                "{}: line {} has {} fields, header has {}",
                path.display(),
                lineno + 2,
                fields.len(),
                header.len()
            )));
        }
        let row = fields
            .iter()
            .map(|f| parse_field(f.trim()))
            .collect::<Result<Vec<f64>>>()
            .map_err(|e| Error::Schema(format!("{}: line {}: {e}", path.display(), lineno + 2)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Schema(format!("{}: no data rows", path.display())));
    }
    Ok(CsvTable { header, rows })
}

fn parse_field(s: &str) -> Result<f64> {
    match s {
        "true" => Ok(1.0),
        "false" => Ok(0.0),
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::Schema(format!("unparseable field `{s}`"))),
    }
}
