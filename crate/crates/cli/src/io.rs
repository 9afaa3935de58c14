use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hjet_core::exact_poly::rational::{parse, pow2, NumberFormat, Rational};
use serde_json::{json, Value};

/// Reads a CSV with a header row into named columns of rationals.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<Rational>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|cell| parse(cell).with_context(|| format!("row {}", i + 2)))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            bail!("row {} has {} fields, expected {}", i + 2, row.len(), header.len());
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn column(header: &[String], rows: &[Vec<Rational>], name: &str) -> Option<Vec<Rational>> {
    let idx = header.iter().position(|h| h == name)?;
    Some(rows.iter().map(|r| r[idx].clone()).collect())
}

/// CSV text with LF line endings.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// Run information kept apart from the data files.
pub fn write_metadata(dir: &Path, command: &str, flags: Value) -> Result<()> {
    write_json(
        &dir.join("metadata.json"),
        &json!({
            "tool": "hjet",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "flags": flags,
        }),
    )
}

/// `"a..b"` for the dyadic scales `2^-a, …, 2^-b`, or a comma-separated list of rationals.
pub fn parse_ladder(text: &str) -> Result<Vec<Rational>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: i64 = a.trim().parse().context("ladder start")?;
        let b: i64 = b.trim().parse().context("ladder end")?;
        if a > b {
            bail!("ladder range {a}..{b} is empty");
        }
        return Ok((a..=b).map(|j| pow2(-j)).collect());
    }
    text.split(',')
        .map(|s| parse(s.trim()).map_err(anyhow::Error::from))
        .collect()
}

pub fn number_format(decimal: Option<usize>) -> NumberFormat {
    decimal.map(NumberFormat::Decimal).unwrap_or(NumberFormat::Exact)
}
