use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::sheet::{Grid, Sheet};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Writes `t1..tk,q1..qn` rows, last axis fastest, 17 significant digits.
/// An existing file is only replaced when `overwrite` is set.
pub fn emit_sheet(sheet: &Sheet, path: &Path, overwrite: bool) -> Result<()> {
    if path.exists() && !overwrite {
        return Err(io_err(path, "file exists (pass the overwrite flag to replace it)"));
    }
    let (k, n) = (sheet.k(), sheet.n());
    let mut out = String::new();
    let header: Vec<String> = (1..=k).map(|a| format!("t{a}")).chain((1..=n).map(|i| format!("q{i}"))).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for node in 0..sheet.grid().len() {
        let t = sheet.grid().point(node);
        let row: Vec<String> = t.iter().chain(sheet.value(node)).map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(",")).expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads a sheet written by [`emit_sheet`]; the grid is rebuilt from the
/// parameter columns.
pub fn read_sheet(path: &Path) -> Result<Sheet> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| io_err(path, "empty file"))?.split(',').map(str::trim).collect();
    let k = header.iter().take_while(|h| h.starts_with('t')).count();
    let n = header.len() - k;
    if k == 0 || n == 0 {
        return Err(io_err(path, "header must be t1..tk,q1..qn"));
    }
    let mut ts: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::new();
    for (r, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| io_err(path, format!("row {}: {e}", r + 2)))?;
        if row.len() != k + n {
            return Err(io_err(path, format!("row {} has {} fields, expected {}", r + 2, row.len(), k + n)));
        }
        ts.push(row[..k].to_vec());
        values.extend_from_slice(&row[k..]);
    }
    let mut lower = Vec::with_capacity(k);
    let mut upper = Vec::with_capacity(k);
    let mut nodes = Vec::with_capacity(k);
    for a in 0..k {
        let mut axis: Vec<f64> = ts.iter().map(|t| t[a]).collect();
        axis.sort_by(f64::total_cmp);
        axis.dedup();
        lower.push(axis[0]);
        upper.push(*axis.last().expect("non-empty"));
        nodes.push(axis.len());
    }
    let grid = Grid::new(lower, upper, nodes).map_err(|e| io_err(path, e))?;
    if grid.len() != ts.len() {
        return Err(io_err(path, "rows do not form a full rectangular grid"));
    }
    for (node, t) in ts.iter().enumerate() {
        let expect = grid.point(node);
        let tol = 1e-9 * grid.spacing(0).min(1.0);
        if t.iter().zip(&expect).any(|(a, b)| (a - b).abs() > tol) {
            return Err(io_err(path, "rows are not in grid order (last axis fastest) or spacing is not uniform"));
        }
    }
    Sheet::new(grid, n, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let grid = Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![5, 5]).unwrap();
        let s = Sheet::from_fn(grid, 1, |t| Ok(vec![(t[0] * 3.1).sin() / 7.0 + t[1]])).unwrap();
        emit_sheet(&s, &path, false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t1,t2,q1");
        assert_eq!(text.lines().count(), 26);
        let back = read_sheet(&path).unwrap();
        assert_eq!(back.values(), s.values());
        assert!(matches!(emit_sheet(&s, &path, false), Err(Error::Io { .. })));
        emit_sheet(&s, &path, true).unwrap();
    }
}
