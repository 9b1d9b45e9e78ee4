//! Artifact files: labelled CSV matrices, JSON documents and graymap heatmaps.
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qwalk_core::{MarginalSample, RMatrix};
use serde::Serialize;

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn csv_bytes(rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

/// Shortest decimal that reads back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

/// Square matrix with the waveguide labels as header row and first column.
/// Rows are the signal waveguide, columns the idler.
pub fn matrix_csv(values: &RMatrix, origin: usize) -> Result<Vec<u8>> {
    let labels: Vec<i64> = (0..values.cols()).map(|c| c as i64 - origin as i64).collect();
    let mut header = vec!["n_s\\n_i".to_string()];
    header.extend(labels.iter().map(|l| l.to_string()));
    let rows = std::iter::once(header).chain((0..values.rows()).map(|r| {
        let mut row = vec![labels[r].to_string()];
        row.extend(values.row(r).iter().map(|&v| num(v)));
        row
    }));
    csv_bytes(rows)
}

/// Inverse of [`matrix_csv`]: returns the values and the position of label 0.
pub fn read_matrix_csv(path: &Path) -> Result<(RMatrix, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<i64> = reader
        .headers()?
        .iter()
        .skip(1)
        .map(|s| s.parse::<i64>())
        .collect::<Result<_, _>>()
        .context("column labels must be integers")?;
    let n = header.len();
    let origin = header
        .iter()
        .position(|&l| l == 0)
        .context("labels do not include waveguide 0")?;
    let mut data = Vec::with_capacity(n * n);
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n + 1 {
            bail!("row {r} has {} fields, expected {}", record.len(), n + 1);
        }
        for field in record.iter().skip(1) {
            data.push(field.parse::<f64>().with_context(|| format!("bad number {field:?}"))?);
        }
    }
    let values = RMatrix::from_row_major(n, n, data).context("matrix is not square")?;
    Ok((values, origin))
}

#[derive(Serialize)]
struct JsonMatrix<'a> {
    labels: Vec<i64>,
    /// Row-major, rows indexed by the signal waveguide.
    values: Vec<&'a [f64]>,
}

pub fn matrix_json(values: &RMatrix, origin: usize) -> Result<Vec<u8>> {
    let doc = JsonMatrix {
        labels: (0..values.cols()).map(|c| c as i64 - origin as i64).collect(),
        values: (0..values.rows()).map(|r| values.row(r)).collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn counts_csv(counts: &qwalk_core::Matrix<u64>, origin: usize) -> Result<Vec<u8>> {
    let values = RMatrix::from_fn(counts.rows(), counts.cols(), |r, c| counts[(r, c)] as f64);
    matrix_csv(&values, origin)
}

/// One row per depth: `z` followed by the signal marginal per waveguide.
pub fn marginals_csv(samples: &[MarginalSample]) -> Result<Vec<u8>> {
    let Some(first) = samples.first() else {
        return csv_bytes(Vec::new());
    };
    let mut header = vec!["z".to_string()];
    header.extend((0..first.marginal.len()).map(|p| (p as i64 - first.origin as i64).to_string()));
    let rows = std::iter::once(header).chain(samples.iter().map(|s| {
        let mut row = vec![num(s.z)];
        row.extend(s.marginal.iter().map(|&v| num(v)));
        row
    }));
    csv_bytes(rows)
}

/// One row per accepted optimizer step.
pub fn trace_csv(trace: &[f64]) -> Result<Vec<u8>> {
    let rows = std::iter::once(vec!["iteration".to_string(), "similarity".to_string()])
        .chain(trace.iter().enumerate().map(|(k, &v)| vec![k.to_string(), num(v)]));
    csv_bytes(rows)
}

pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    csv_bytes(
        std::iter::once(header.iter().map(|s| s.to_string()).collect())
            .chain(rows.iter().cloned()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapScale {
    Linear,
    /// Four decades below the maximum map to black.
    Log,
}

const LOG_DECADES: f64 = 4.0;

/// 8-bit binary graymap (P5). The top row is the largest signal label, columns
/// run from the smallest idler label; white is the maximum entry.
pub fn heatmap_pgm(values: &RMatrix, scale: HeatmapScale) -> Vec<u8> {
    let (rows, cols) = (values.rows(), values.cols());
    let max = values.max();
    let level = |v: f64| -> u8 {
        if !(max > 0.0) {
            return 0;
        }
        let t = match scale {
            HeatmapScale::Linear => v / max,
            HeatmapScale::Log => {
                if v <= 0.0 {
                    0.0
                } else {
                    ((v / max).log10() + LOG_DECADES) / LOG_DECADES
                }
            }
        };
        (t.clamp(0.0, 1.0) * 255.0).round() as u8
    };
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for r in (0..rows).rev() {
        out.extend(values.row(r).iter().map(|&v| level(v)));
    }
    out
}

/// Parses a P5 graymap back into `(width, height, pixels)`.
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            bail!("truncated graymap header");
        }
        fields.push(std::str::from_utf8(&bytes[start..pos])?.to_string());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        bail!("not an 8-bit P5 graymap");
    }
    let (w, h): (usize, usize) = (fields[1].parse()?, fields[2].parse()?);
    let pixels = bytes[pos + 1..].to_vec();
    if pixels.len() != w * h {
        bail!("expected {} pixels, found {}", w * h, pixels.len());
    }
    Ok((w, h, pixels))
}
