use std::io::{Read, Write};

use faer::Mat;
use serde::Serialize;

use crate::classify::DecisionScore;
use crate::error::{Error, Result};
use crate::model::Dataset;

fn parse_bool(v: &str, line: usize) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" | "" => Ok(false),
        other => Err(Error::InvalidInput(format!("line {line}: is_test must be 0/1, got `{other}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str, col: &str, line: usize) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("line {line}: column `{col}` has unparsable value `{v}`")))
}

/// Reads `row, col, y, x1..xk, is_test`; an empty `y` marks an unobserved cell.
pub fn read_dataset<R: Read>(r: R) -> Result<Dataset> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ir, ic, iy, it) = (find("row")?, find("col")?, find("y")?, find("is_test")?);
    let mut xs: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(k, h)| h.trim().strip_prefix('x').and_then(|d| d.parse::<usize>().ok()).map(|d| (d, k)))
        .collect();
    xs.sort();
    for (expect, &(d, _)) in (1..).zip(&xs) {
        if d != expect {
            return Err(Error::MissingColumn(format!("x{expect}")));
        }
    }
    let (mut coords, mut y, mut mask, mut cov) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        coords.push((parse_num(&rec[ir], "row", line)?, parse_num(&rec[ic], "col", line)?));
        let yv = rec[iy].trim();
        y.push(if yv.is_empty() { None } else { Some(parse_num::<u8>(yv, "y", line)?) });
        mask.push(parse_bool(&rec[it], line)?);
        cov.push(
            xs.iter()
                .map(|&(d, c)| parse_num::<f64>(&rec[c], &format!("x{d}"), line))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("data file has no rows".into()));
    }
    let names: Vec<String> = xs.iter().map(|(d, _)| format!("x{d}")).collect();
    let m = Mat::from_fn(y.len(), xs.len(), |i, j| cov[i][j]);
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = coords.iter().find(|c| !seen.insert(**c)) {
        return Err(Error::InvalidInput(format!("duplicate location {dup:?}")));
    }
    Dataset::with_intercept(y, &m, &names, coords, mask)
}

pub fn write_dataset<W: Write>(w: W, data: &Dataset) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let cols = data.covariate_columns();
    let mut header = vec!["row".to_string(), "col".to_string(), "y".to_string()];
    header.extend((1..=cols.len()).map(|k| format!("x{k}")));
    header.push("is_test".into());
    out.write_record(&header)?;
    for i in 0..data.n() {
        let (r, c) = data.coords[i];
        let mut rec = vec![r.to_string(), c.to_string(), data.y[i].map_or(String::new(), |v| v.to_string())];
        rec.extend(cols.iter().map(|&j| data.x[(i, j)].to_string()));
        rec.push(u8::from(data.test_mask[i]).to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionRow {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
    pub p1: Option<f64>,
    pub label: u8,
}

pub fn prediction_row(data: &Dataset, site: usize, score: &DecisionScore, label: u8) -> PredictionRow {
    let (row, col) = data.coords[site];
    PredictionRow {
        row,
        col,
        delta: score.delta,
        p1: score.p1,
        label,
    }
}

pub fn write_predictions<W: Write>(w: W, rows: &[PredictionRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(["row", "col", "delta", "p1", "label"])?;
    }
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
