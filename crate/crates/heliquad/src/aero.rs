//! Airfoil polars and rotor tables as CSV.
//!
//! Polar files have the header `alpha_deg,cl,cd,cm`. Rotor tables (sweeps and
//! synthetic datasets) use `gamma_deg,rpm,thrust_N,torque_Nm,moment_Nm`.

use std::io::{Read, Write};
use std::path::Path;

use heliquad_core::propeller::{AirfoilModel, DatasetRow, ParametricPolar, PolarRow, PolarTable, RPM_TO_RAD_S};

use crate::{parse_f64, FormatError};

pub const POLAR_COLUMNS: [&str; 4] = ["alpha_deg", "cl", "cd", "cm"];
pub const ROTOR_COLUMNS: [&str; 5] = ["gamma_deg", "rpm", "thrust_N", "torque_Nm", "moment_Nm"];

/// Reads numeric rows after checking the header; returns `(line, fields)`.
fn read_table<R: Read>(r: R, columns: &[&str]) -> Result<Vec<(u64, Vec<f64>)>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).comment(Some(b'#')).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(FormatError::at(1, format!("expected header {}", columns.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != columns.len() {
            return Err(FormatError::at(line, format!("expected {} fields, found {}", columns.len(), rec.len())));
        }
        let vals = rec.iter().zip(columns).map(|(s, c)| parse_f64(s, line, c)).collect::<Result<Vec<_>, _>>()?;
        rows.push((line, vals));
    }
    Ok(rows)
}

pub fn read_polar<R: Read>(r: R) -> Result<PolarTable, FormatError> {
    let rows: Vec<PolarRow> = read_table(r, &POLAR_COLUMNS)?
        .into_iter()
        .map(|(_, v)| PolarRow { alpha: v[0].to_radians(), cl: v[1], cd: v[2], cm: v[3] })
        .collect();
    PolarTable::new(&rows).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_polar<W: Write>(w: W, table: &PolarTable) -> Result<(), FormatError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(POLAR_COLUMNS)?;
    for r in table.rows() {
        wr.write_record([r.alpha.to_degrees(), r.cl, r.cd, r.cm].map(|v| v.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// `builtin` (cambered), `symmetric`, or a polar CSV path.
pub fn load_airfoil(spec: &str) -> Result<AirfoilModel, FormatError> {
    match spec {
        "builtin" => Ok(AirfoilModel::Parametric(ParametricPolar::cambered())),
        "symmetric" => Ok(AirfoilModel::Parametric(ParametricPolar::symmetric())),
        path => Ok(AirfoilModel::Tabulated(read_polar(std::fs::File::open(Path::new(path))?)?)),
    }
}

pub fn write_rotor_table<W: Write>(w: W, rows: &[DatasetRow]) -> Result<(), FormatError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(ROTOR_COLUMNS)?;
    for r in rows.iter().filter(|r| r.converged) {
        let vals = [r.gamma.to_degrees(), r.omega / RPM_TO_RAD_S, r.thrust, r.torque, r.moment];
        wr.write_record(vals.map(|v| v.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rotor_table<R: Read>(r: R) -> Result<Vec<DatasetRow>, FormatError> {
    read_table(r, &ROTOR_COLUMNS)?
        .into_iter()
        .map(|(line, v)| {
            if !(v[1] > 0.0) {
                return Err(FormatError::at(line, "rpm must be positive"));
            }
            Ok(DatasetRow {
                gamma: v[0].to_radians(),
                omega: v[1] * RPM_TO_RAD_S,
                thrust: v[2],
                torque: v[3],
                moment: v[4],
                converged: true,
            })
        })
        .collect()
}
