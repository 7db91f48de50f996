//! CSV and file plumbing.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tsicd::ci::{Column, Series};

/// Reads a header-plus-rows CSV of numeric cells into real columns.
pub fn read_series(path: &Path) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        bail!("{}: header row must name every column", path.display());
    }
    let mut cols = vec![Vec::new(); names.len()];
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let rec = rec.with_context(|| format!("{}: malformed row at line {line}", path.display()))?;
        if rec.len() != names.len() {
            bail!("{}: line {line} has {} cells, expected {}", path.display(), rec.len(), names.len());
        }
        for (k, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                bail!("{}: missing value in column {:?} at line {line}", path.display(), names[k]);
            }
            let v: f64 = cell
                .parse()
                .with_context(|| format!("{}: non-numeric cell {cell:?} at line {line}", path.display()))?;
            if !v.is_finite() {
                bail!("{}: non-finite cell {cell:?} at line {line}", path.display());
            }
            cols[k].push(v);
        }
    }
    Ok(Series::new(names, cols.into_iter().map(Column::Real).collect())?)
}

pub fn series_to_csv(series: &Series) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(series.names())?;
    for row in 0..series.len() {
        let cells: Vec<String> = series
            .columns()
            .iter()
            .map(|c| match c {
                Column::Real(v) => v[row].to_string(),
                Column::Categorical(v) => v[row].to_string(),
            })
            .collect();
        w.write_record(&cells)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Writes to `path` when given, otherwise to stdout.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
