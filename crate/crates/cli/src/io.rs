//! Trajectory CSV format and small file helpers.
//!
//! One row per sample, full double precision (17 significant digits):
//!
//! ```text
//! t,y_0,...,y_{n-1}          # public form
//! t,x_0,...,x_{n-1},y_0,...  # with private columns
//! ```

use std::io::Write;
use std::path::Path;

use masked_consensus::dynamics::Trajectory;
use nalgebra::DVector;

use crate::CliError;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory,
    emit_private: bool,
) -> Result<(), CliError> {
    let n = traj.dim();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?,
    );
    let mut header = String::from("t");
    if emit_private {
        for i in 0..n {
            header.push_str(&format!(",x_{i}"));
        }
    }
    for i in 0..n {
        header.push_str(&format!(",y_{i}"));
    }
    writeln!(out, "{header}").map_err(CliError::io)?;
    for (k, t) in traj.times().iter().enumerate() {
        let mut row = fmt_f64(*t);
        if emit_private {
            for v in traj.x_samples()[k].iter() {
                row.push(',');
                row.push_str(&fmt_f64(*v));
            }
        }
        for v in traj.y_samples()[k].iter() {
            row.push(',');
            row.push_str(&fmt_f64(*v));
        }
        writeln!(out, "{row}").map_err(CliError::io)?;
    }
    Ok(())
}

/// Read the public columns of a trajectory CSV. Private `x_*` columns are
/// skipped when present, so an attack fed a full dump still sees only the
/// masked outputs.
pub fn read_public_log_csv(path: &Path) -> Result<(Vec<f64>, Vec<DVector<f64>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read log {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("empty log file {}", path.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"t") {
        return Err(CliError::config(format!(
            "log {} does not start with a t column",
            path.display()
        )));
    }
    let y_indices: Vec<usize> = columns
        .iter()
        .enumerate()
        .filter(|(_, name)| name.starts_with("y_"))
        .map(|(idx, _)| idx)
        .collect();
    if y_indices.is_empty() {
        return Err(CliError::config(format!(
            "log {} has no y_* columns",
            path.display()
        )));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(CliError::config(format!(
                "log {} row {} has {} fields, header has {}",
                path.display(),
                lineno + 2,
                fields.len(),
                columns.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.parse::<f64>().map_err(|e| {
                CliError::config(format!(
                    "log {} row {}: bad number {s:?}: {e}",
                    path.display(),
                    lineno + 2
                ))
            })
        };
        times.push(parse(fields[0])?);
        let mut y = Vec::with_capacity(y_indices.len());
        for &idx in &y_indices {
            y.push(parse(fields[idx])?);
        }
        samples.push(DVector::from_vec(y));
    }
    Ok((times, samples))
}

pub fn write_string(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}
