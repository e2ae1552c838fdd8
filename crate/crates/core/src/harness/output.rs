//! CSV emission. Reals are written with 17 significant digits in Rust's
//! locale-independent scientific format.

use std::path::Path;

use crate::dynamics::RunDiagnostics;
use crate::error::Result;
use crate::oracle::FieldErrors;

pub const DIAGNOSTICS_HEADER: [&str; 7] = ["t", "mass", "q_invariant", "energy", "v_sup", "inner_iters_u", "inner_iters_v"];
pub const ERRORS_HEADER: [&str; 3] = ["t", "err_u", "err_v"];
pub const CONVERGENCE_HEADER: [&str; 9] = ["J", "h", "tau", "T", "err_u", "err_v", "max_inner_iters", "wall_time_s", "status"];
pub const CONSERVATION_HEADER: [&str; 8] = ["scheme", "t", "mass", "q_invariant", "energy", "v_sup", "inner_iters_u", "inner_iters_v"];
pub const TRUNCATION_HEADER: [&str; 6] = ["M", "max_v_sup", "stayed_below", "active", "max_state_diff", "status"];

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

/// A trailing row `status,<message>` padded to the header width.
fn status_row(width: usize, message: &str) -> Vec<String> {
    let mut row = vec![String::new(); width];
    row[0] = "status".into();
    row[1] = message.into();
    row
}

fn diagnostics_rows(diag: &RunDiagnostics) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..diag.len()).map(move |k| {
        vec![
            real(diag.times[k]),
            real(diag.mass[k]),
            real(diag.q_invariant[k]),
            real(diag.energy[k]),
            real(diag.v_sup[k]),
            diag.inner_iters_u[k].to_string(),
            diag.inner_iters_v[k].to_string(),
        ]
    })
}

/// Writes `diagnostics.csv`; `failure` appends a status row.
pub fn write_diagnostics(path: &Path, diag: &RunDiagnostics, failure: Option<&str>) -> Result<()> {
    let mut w = writer(path, &DIAGNOSTICS_HEADER)?;
    for row in diagnostics_rows(diag) {
        w.write_record(&row)?;
    }
    if let Some(msg) = failure {
        w.write_record(status_row(DIAGNOSTICS_HEADER.len(), &format!("failed: {msg}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors(path: &Path, rows: &[(f64, FieldErrors)], failure: Option<&str>) -> Result<()> {
    let mut w = writer(path, &ERRORS_HEADER)?;
    for (t, e) in rows {
        w.write_record([real(*t), real(e.err_u), real(e.err_v)])?;
    }
    if let Some(msg) = failure {
        w.write_record(status_row(ERRORS_HEADER.len(), &format!("failed: {msg}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Both schemes' series in one file, tagged by the `scheme` column.
pub fn write_conservation(path: &Path, series: &[(&str, &RunDiagnostics)], failure: Option<&str>) -> Result<()> {
    let mut w = writer(path, &CONSERVATION_HEADER)?;
    for (scheme, diag) in series {
        for row in diagnostics_rows(diag) {
            let mut full = Vec::with_capacity(CONSERVATION_HEADER.len());
            full.push(scheme.to_string());
            full.extend(row);
            w.write_record(&full)?;
        }
    }
    if let Some(msg) = failure {
        w.write_record(status_row(CONSERVATION_HEADER.len(), &format!("failed: {msg}")))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path, header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_seventeen_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(0.0), "0.0000000000000000e0");
        assert_eq!(real(-1234.5), "-1.2345000000000000e3");
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 6.02214076e23, -2.5e-300] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn failure_appends_status_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_diagnostics(&path, &RunDiagnostics::default(), Some("blow-up")).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,mass,q_invariant,energy,v_sup,inner_iters_u,inner_iters_v\nstatus,failed: blow-up,,,,,\n");
    }
}
