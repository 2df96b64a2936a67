//! Image files.
//!
//! Two layouts are read:
//!
//! * a self-contained JSON document
//!   `{"geometry":{...},"rows":R,"cols":C,"values":[[...],...]}`;
//! * a one-line JSON header `{"geometry":{...},"rows":R,"cols":C}` followed
//!   by `R` comma-separated rows of `C` values.
//!
//! The JSON document is the default output; the header + CSV layout can be
//! written on request.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorGeometry, Image};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Serialize, Deserialize)]
struct Header {
    geometry: DetectorGeometry,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Document {
    geometry: DetectorGeometry,
    rows: usize,
    cols: usize,
    values: Vec<Vec<f64>>,
}

fn check_dims(geometry: &DetectorGeometry, rows: usize, cols: usize) -> Result<()> {
    geometry.validate()?;
    if geometry.dims() != (rows, cols) {
        return Err(Error::InvalidImage(format!(
            "header says {rows}x{cols}, geometry implies {:?}",
            geometry.dims()
        )));
    }
    Ok(())
}

pub fn to_json(img: &Image) -> String {
    let (rows, cols) = img.dims();
    let doc = Document {
        geometry: img.geometry().clone(),
        rows,
        cols,
        values: img.values().chunks(cols).map(<[f64]>::to_vec).collect(),
    };
    serde_json::to_string(&doc).expect("image serializes")
}

pub fn to_csv(img: &Image) -> String {
    let (rows, cols) = img.dims();
    let header = Header {
        geometry: img.geometry().clone(),
        rows,
        cols,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for row in img.values().chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_image(text: &str) -> Result<Image> {
    let trimmed = text.trim_start();
    if let Ok(doc) = serde_json::from_str::<Document>(trimmed) {
        check_dims(&doc.geometry, doc.rows, doc.cols)?;
        if doc.values.len() != doc.rows || doc.values.iter().any(|r| r.len() != doc.cols) {
            return Err(Error::InvalidImage("value grid does not match rows x cols".into()));
        }
        return Image::new(doc.geometry, doc.values.concat());
    }
    let mut lines = trimmed.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| Error::Parse("empty image file".into()))?;
    let header: Header = serde_json::from_str(first)?;
    check_dims(&header.geometry, header.rows, header.cols)?;
    let mut values = Vec::with_capacity(header.rows * header.cols);
    let mut n_rows = 0;
    for (k, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {k}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.cols {
            return Err(Error::InvalidImage(format!("row {k} has {} values, expected {}", row.len(), header.cols)));
        }
        values.extend(row);
        n_rows += 1;
    }
    if n_rows != header.rows {
        return Err(Error::InvalidImage(format!("found {n_rows} rows, expected {}", header.rows)));
    }
    Image::new(header.geometry, values)
}

pub fn read_image(path: &Path) -> Result<Image> {
    parse_image(&fs::read_to_string(path)?)
}

pub fn write_image(path: &Path, img: &Image, format: ImageFormat) -> Result<()> {
    let text = match format {
        ImageFormat::Json => to_json(img),
        ImageFormat::Csv => to_csv(img),
    };
    fs::write(path, text)?;
    Ok(())
}
