//! Mission logs as CSV.
//!
//! The header row is mandatory and fixed to [`LOG_COLUMNS`]. Values are
//! written in shortest round-trip form, so import after export is exact.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use heliquad_core::harness::{LogRecord, LOG_COLUMNS};

use crate::{parse_f64, FormatError};

pub fn write_log<W: Write>(w: W, records: &[LogRecord]) -> Result<(), FormatError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(LOG_COLUMNS)?;
    let mut fields: Vec<String> = Vec::with_capacity(LogRecord::WIDTH);
    for r in records {
        fields.clear();
        fields.extend(r.to_row().iter().map(|v| v.to_string()));
        wr.write_record(&fields)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(mut r: R) -> Result<Vec<LogRecord>, FormatError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    if text.is_empty() {
        return Err(FormatError::at(1, "missing header row"));
    }
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.iter().ne(LOG_COLUMNS.iter().copied()) {
        return Err(FormatError::at(1, "header does not match the log column order"));
    }
    let mut out = Vec::new();
    let mut row = Vec::with_capacity(LogRecord::WIDTH);
    let mut last_line = 1;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        last_line = line;
        if rec.len() != LogRecord::WIDTH {
            return Err(FormatError::at(line, format!("expected {} fields, found {}", LogRecord::WIDTH, rec.len())));
        }
        row.clear();
        for (s, name) in rec.iter().zip(LOG_COLUMNS) {
            row.push(parse_f64(s, line, name)?);
        }
        out.push(LogRecord::from_row(&row).ok_or_else(|| FormatError::at(line, "sigma must be 0|1 and mu 0..4"))?);
    }
    // The writer terminates every record, so a missing newline means a cut file.
    if !out.is_empty() && !text.ends_with('\n') {
        return Err(FormatError::at(last_line, "record is truncated"));
    }
    Ok(out)
}

pub fn export_csv(records: &[LogRecord], path: &Path) -> Result<(), FormatError> {
    write_log(BufWriter::new(File::create(path)?), records)
}

pub fn import_csv(path: &Path) -> Result<Vec<LogRecord>, FormatError> {
    read_log(File::open(path)?)
}
