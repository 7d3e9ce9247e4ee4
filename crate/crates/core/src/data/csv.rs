//! CSV ingestion: one sample per line, `label,p₀,…,p_{HW-1}` with pixels in 0–255.

use std::fs;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub fn parse_csv_dataset(text: &str, classes: usize, height: usize, width: usize) -> Result<Dataset> {
    let pixels = height * width;
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line, msg };
        let cells: Vec<&str> = row.split(',').map(str::trim).collect();
        if cells.len() != pixels + 1 {
            return Err(perr(format!(
                "expected label plus {pixels} pixels, got {} cells",
                cells.len()
            )));
        }
        let label: usize = cells[0]
            .parse()
            .map_err(|_| perr(format!("non-numeric label `{}`", cells[0])))?;
        if label >= classes {
            return Err(perr(format!("label {label} out of range for {classes} classes")));
        }
        labels.push(label);
        for (col, cell) in cells[1..].iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| perr(format!("non-numeric pixel `{cell}` in column {}", col + 2)))?;
            if !(0.0..=255.0).contains(&v) {
                return Err(perr(format!("pixel {v} outside 0-255 in column {}", col + 2)));
            }
            data.push(v / 255.0);
        }
    }
    let n = labels.len();
    Dataset::new(Tensor::new(vec![n, 1, height, width], data)?, labels, classes)
}

pub fn load_csv_dataset(path: &Path, classes: usize, height: usize, width: usize) -> Result<Dataset> {
    parse_csv_dataset(&fs::read_to_string(path)?, classes, height, width)
}
