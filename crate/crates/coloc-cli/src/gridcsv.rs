//! CSV grids: one image row per record, comma-separated intensities.
//!
//! This is the lossless interchange format; values round-trip exactly
//! through Rust's shortest-representation float formatting. A single-column
//! file is read as a width-1 image.

use std::fs;
use std::path::Path;

use coloc::Channel;

use crate::error::{CliError, CliResult};

pub fn read_csv(path: &Path) -> CliResult<Channel> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|m| CliError::Data(format!("{}: {m}", path.display())))
}

pub fn parse(text: &str) -> Result<Channel, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                format!(
                    "line {}, field {}: cannot parse {:?} as a number",
                    lineno + 1,
                    col + 1,
                    field.trim()
                )
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    let width = rows[0].len();
    let height = rows.len();
    let pixels: Vec<f64> = rows.into_iter().flatten().collect();
    Channel::new(width, height, pixels).map_err(|e| e.to_string())
}

pub fn write_csv(path: &Path, ch: &Channel) -> CliResult<()> {
    let mut out = String::new();
    for y in 0..ch.height() {
        let row = &ch.pixels()[y * ch.width()..(y + 1) * ch.width()];
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
