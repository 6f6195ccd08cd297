//! Field files and the output directory of a run.
//!
//! Layout of `dir`:
//!
//! ```text
//! report.json
//! timings.json
//! bumps/A(1)_1.csv          one per component
//! solutions/0001.csv        one per multi-bump solution, in report order
//! ```
//!
//! CSV fields hold `x1, .., xN, u` for every non-exterior node in scan order.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use multibump_core::grid::{Grid, NodeClass};
use multibump_core::multibump::extend_bump;

use crate::config::FieldExport;
use crate::pipeline::RunOutcome;
use crate::{AppError, Result};

fn format_err(path: &Path, message: impl Into<String>) -> AppError {
    AppError::Format { path: path.to_path_buf(), message: message.into() }
}

/// Write `u` (one value per grid node) as CSV.
pub fn write_field_csv(path: &Path, grid: &Grid, u: &[f64]) -> Result<()> {
    if u.len() != grid.len() {
        return Err(format_err(path, format!("field has {} values for {} nodes", u.len(), grid.len())));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let dim = grid.dim();
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    header.push("u".into());
    w.write_record(&header).map_err(|e| format_err(path, e.to_string()))?;
    let mut x = vec![0.0; dim];
    let mut row: Vec<String> = Vec::with_capacity(dim + 1);
    for p in 0..grid.len() {
        if grid.class(p) == NodeClass::Exterior {
            continue;
        }
        grid.point(p, &mut x);
        row.clear();
        row.extend(x.iter().map(|v| format!("{v}")));
        row.push(format!("{}", u[p]));
        w.write_record(&row).map_err(|e| format_err(path, e.to_string()))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Read a CSV field back onto `grid`. Every non-exterior node must appear
/// exactly once; exterior nodes get zero.
pub fn read_field_csv(path: &Path, grid: &Grid) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let dim = grid.dim();
    let headers = r.headers().map_err(|e| format_err(path, e.to_string()))?.clone();
    if headers.len() != dim + 1 {
        return Err(format_err(path, format!("expected {} columns for a {dim}-dimensional grid", dim + 1)));
    }
    let h = grid.spacing();
    let n = grid.n();
    let mut u = vec![0.0; grid.len()];
    let mut seen = vec![false; grid.len()];
    let mut multi = vec![0usize; dim];
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let mut values = Vec::with_capacity(dim + 1);
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format_err(path, format!("row {}: `{field}` is not a number", line + 2)))?;
            values.push(v);
        }
        for k in 0..dim {
            let t = (values[k] - grid.lower()[k]) / h;
            let i = t.round();
            if !(i >= 0.0 && i < n as f64) || (t - i).abs() > 1e-6 {
                return Err(format_err(path, format!("row {}: point is not a grid node", line + 2)));
            }
            multi[k] = i as usize;
        }
        let p = grid.index_of(&multi);
        if grid.class(p) == NodeClass::Exterior {
            return Err(format_err(path, format!("row {}: node lies outside the domain", line + 2)));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(format_err(path, format!("row {}: node appears twice", line + 2)));
        }
        u[p] = values[dim];
    }
    let missing = (0..grid.len()).filter(|&p| grid.class(p) != NodeClass::Exterior && !seen[p]).count();
    if missing > 0 {
        return Err(format_err(path, format!("{missing} domain nodes have no value")));
    }
    Ok(u)
}

/// Legacy VTK rectilinear grid with point data `u` (zero outside the domain)
/// and the node class. Only `N <= 3`.
pub fn write_field_vtk(path: &Path, grid: &Grid, u: &[f64], title: &str) -> Result<()> {
    let dim = grid.dim();
    if dim > 3 {
        return Err(format_err(path, "VTK output needs N <= 3"));
    }
    let n = grid.n();
    let h = grid.spacing();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title.lines().next().unwrap_or("field"));
    out.push_str("\nASCII\nDATASET RECTILINEAR_GRID\n");
    let dims: Vec<usize> = (0..3).map(|k| if k < dim { n } else { 1 }).collect();
    out.push_str(&format!("DIMENSIONS {} {} {}\n", dims[0], dims[1], dims[2]));
    for (k, axis) in ["X", "Y", "Z"].iter().enumerate() {
        out.push_str(&format!("{axis}_COORDINATES {} double\n", dims[k]));
        let coords: Vec<String> = if k < dim {
            (0..n).map(|i| format!("{}", grid.lower()[k] + i as f64 * h)).collect()
        } else {
            vec!["0".into()]
        };
        out.push_str(&coords.join(" "));
        out.push('\n');
    }
    out.push_str(&format!("POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default\n", grid.len()));
    for p in 0..grid.len() {
        let v = if grid.class(p) == NodeClass::Exterior { 0.0 } else { u[p] };
        out.push_str(&format!("{v}\n"));
    }
    out.push_str("SCALARS class int 1\nLOOKUP_TABLE default\n");
    for &c in grid.classes() {
        let code = match c {
            NodeClass::Exterior => 0,
            NodeClass::Boundary => 1,
            NodeClass::Interior => 2,
        };
        out.push_str(&format!("{code}\n"));
    }
    fs::write(path, out).map_err(|e| AppError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| AppError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| AppError::io(path, e))
}

/// Write fields, then the report with their relative paths, then timings.
/// Returns the path of `report.json`.
pub fn write_outputs(outcome: &mut RunOutcome, dir: &Path, fields: FieldExport, vtk: bool) -> Result<PathBuf> {
    create_dir(dir)?;
    if let Some(solved) = &outcome.solved {
        let grid = &solved.grid;
        if fields != FieldExport::None {
            create_dir(&dir.join("bumps"))?;
            for (bump, row) in solved.bumps.iter().zip(outcome.report.bumps.iter_mut()) {
                let rel = format!("bumps/{}.csv", bump.component);
                let u = extend_bump(bump, grid);
                write_field_csv(&dir.join(&rel), grid, &u)?;
                if vtk {
                    write_field_vtk(
                        &dir.join(rel.replace(".csv", ".vtk")),
                        grid,
                        &u,
                        &format!("bump {}", bump.component),
                    )?;
                }
                row.field = Some(rel);
            }
        }
        if fields == FieldExport::All {
            create_dir(&dir.join("solutions"))?;
            for (sol, row) in solved.solutions.iter().zip(outcome.report.solutions.iter_mut()) {
                let rel = format!("solutions/{:04}.csv", row.index);
                let u = sol.materialize(&solved.bumps, grid);
                write_field_csv(&dir.join(&rel), grid, &u)?;
                if vtk {
                    write_field_vtk(
                        &dir.join(rel.replace(".csv", ".vtk")),
                        grid,
                        &u,
                        &format!("solution {}", sol.label()),
                    )?;
                }
                row.field = Some(rel);
            }
        }
    }
    let report_path = dir.join("report.json");
    write_text(&report_path, &outcome.report.to_json())?;
    write_text(&dir.join("timings.json"), &outcome.timings.to_json())?;
    Ok(report_path)
}
