use std::path::Path;

use anyhow::{bail, Context, Result};

/// Reads two numeric columns (1-based indices) from a comma-separated file.
///
/// A first row whose selected cells are not all numeric is taken as a header.
/// Rows with an empty or `NA` cell in a selected column are dropped; any other
/// non-numeric cell is an error naming its line.
pub fn read_pairs(path: &Path, columns: (usize, usize)) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let (c1, c2) = (columns.0 - 1, columns.1 - 1);
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 1;
        let rec = rec.with_context(|| format!("{}: malformed CSV at line {line}", path.display()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let cells = [rec.get(c1), rec.get(c2)];
        if idx == 0 && cells.iter().any(|c| c.map_or(true, |s| parse(s).is_err())) {
            continue;
        }
        let mut vals = [0.0; 2];
        let mut complete = true;
        for (j, cell) in cells.into_iter().enumerate() {
            match cell.map(parse) {
                None | Some(Ok(None)) => complete = false,
                Some(Ok(Some(x))) => vals[j] = x,
                Some(Err(s)) => bail!(
                    "{}: non-numeric value {s:?} at line {line}, column {}",
                    path.display(),
                    [columns.0, columns.1][j]
                ),
            }
        }
        if complete {
            out.push((vals[0], vals[1]));
        }
    }
    Ok(out)
}

/// `Ok(None)` for a missing value, `Err` with the cell text if non-numeric.
fn parse(s: &str) -> std::result::Result<Option<f64>, String> {
    let t = s.trim_matches('"').trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Some(x)),
        _ => Err(s.to_string()),
    }
}
