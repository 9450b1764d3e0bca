//! CSV and JSON file formats. Every writer goes through [`write_atomic`].

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use protoalign::survival::{KmCurve, KmPoint, SurvivalTable};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Write `bytes` to a temporary file next to `path`, then rename it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::format(path, e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(path: &Path, row: usize, col: usize, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| CliError::Parse {
        path: path.into(),
        row,
        col,
        msg: format!("cannot parse {field:?} as a number"),
    })
}

fn reader(bytes: &[u8], headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn record_error(path: &Path, e: csv::Error) -> CliError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    CliError::Parse {
        path: path.into(),
        row,
        col: 0,
        msg: e.to_string(),
    }
}

/// Headerless numeric matrix. Rows and columns in diagnostics are 1-based.
pub fn parse_matrix(path: &Path, bytes: &[u8]) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (r, rec) in reader(bytes, false).records().enumerate() {
        let rec = rec.map_err(|e| record_error(path, e))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(CliError::Parse {
                path: path.into(),
                row: r + 1,
                col: rec.len().min(w) + 1,
                msg: format!("expected {w} columns, found {}", rec.len()),
            });
        }
        for (c, field) in rec.iter().enumerate() {
            values.push(parse_f64(path, r + 1, c + 1, field)?);
        }
        rows += 1;
    }
    let Some(w) = width else {
        return Err(CliError::format(path, "no data rows"));
    };
    Array2::from_shape_vec((rows, w), values).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    parse_matrix(path, &read_bytes(path)?)
}

pub fn format_matrix(m: &Array2<f64>) -> Vec<u8> {
    let mut out = String::new();
    for row in m.rows() {
        let fields: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    write_atomic(path, &format_matrix(m))
}

/// Single-column headerless file.
pub fn write_column(path: &Path, v: &[f64]) -> Result<()> {
    let m = Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("n×1");
    write_matrix(path, &m)
}

fn expect_header(path: &Path, rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| record_error(path, e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(CliError::format(
            path,
            format!("expected header {}, found {}", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

/// Survival table with header `time,event,risk`; `event` is 0 or 1.
pub fn parse_survival(path: &Path, bytes: &[u8]) -> Result<SurvivalTable<f64>> {
    let mut rdr = reader(bytes, true);
    expect_header(path, &mut rdr, &["time", "event", "risk"])?;
    let (mut time, mut event, mut risk) = (Vec::new(), Vec::new(), Vec::new());
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| record_error(path, e))?;
        let row = r + 2;
        if rec.len() != 3 {
            return Err(CliError::Parse {
                path: path.into(),
                row,
                col: rec.len().min(3) + 1,
                msg: format!("expected 3 columns, found {}", rec.len()),
            });
        }
        time.push(parse_f64(path, row, 1, &rec[0])?);
        event.push(match &rec[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::Parse {
                    path: path.into(),
                    row,
                    col: 2,
                    msg: format!("event must be 0 or 1, found {other:?}"),
                })
            }
        });
        risk.push(parse_f64(path, row, 3, &rec[2])?);
    }
    SurvivalTable::new(time, event, risk).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn read_survival(path: &Path) -> Result<SurvivalTable<f64>> {
    parse_survival(path, &read_bytes(path)?)
}

pub fn format_survival(t: &SurvivalTable<f64>) -> Vec<u8> {
    let mut out = String::from("time,event,risk\n");
    for i in 0..t.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(t.time()[i]),
            u8::from(t.event()[i]),
            fmt_f64(t.risk()[i])
        ));
    }
    out.into_bytes()
}

pub fn format_km(curve: &KmCurve<f64>) -> Vec<u8> {
    let mut out = String::from("time,survival,at_risk,events\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{},{}\n", fmt_f64(p.time), fmt_f64(p.survival), p.at_risk, p.events));
    }
    out.into_bytes()
}

pub fn parse_km(path: &Path, bytes: &[u8]) -> Result<KmCurve<f64>> {
    let mut rdr = reader(bytes, true);
    expect_header(path, &mut rdr, &["time", "survival", "at_risk", "events"])?;
    let mut points = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| record_error(path, e))?;
        let row = r + 2;
        if rec.len() != 4 {
            return Err(CliError::format(path, format!("row {row}: expected 4 columns")));
        }
        let count = |c: usize| {
            rec[c].parse::<usize>().map_err(|_| CliError::Parse {
                path: path.into(),
                row,
                col: c + 1,
                msg: format!("cannot parse {:?} as a count", &rec[c]),
            })
        };
        points.push(KmPoint {
            time: parse_f64(path, row, 1, &rec[0])?,
            survival: parse_f64(path, row, 2, &rec[1])?,
            at_risk: count(2)?,
            events: count(3)?,
        });
    }
    Ok(KmCurve { points })
}

/// `t,rho` schedule table.
pub fn format_schedule(rows: &[(u64, f64)]) -> Vec<u8> {
    let mut out = String::from("t,rho\n");
    for (t, rho) in rows {
        out.push_str(&format!("{t},{}\n", fmt_f64(*rho)));
    }
    out.into_bytes()
}

pub fn parse_schedule(path: &Path, bytes: &[u8]) -> Result<Vec<(u64, f64)>> {
    let mut rdr = reader(bytes, true);
    expect_header(path, &mut rdr, &["t", "rho"])?;
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| record_error(path, e))?;
        let row = r + 2;
        if rec.len() != 2 {
            return Err(CliError::format(path, format!("row {row}: expected 2 columns")));
        }
        let t = rec[0].parse::<u64>().map_err(|_| CliError::Parse {
            path: path.into(),
            row,
            col: 1,
            msg: format!("cannot parse {:?} as a step", &rec[0]),
        })?;
        rows.push((t, parse_f64(path, row, 2, &rec[1])?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_diagnostics() {
        let p = Path::new("m.csv");
        let err = parse_matrix(p, b"1,2\n3,x\n").unwrap_err().to_string();
        assert_eq!(err, "m.csv: row 2, column 2: cannot parse \"x\" as a number");
        let err = parse_matrix(p, b"1,2\n3\n").unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("expected 2 columns"), "{err}");
        assert!(parse_matrix(p, b"").is_err());
    }

    #[test]
    fn matrix_roundtrip_is_exact() {
        let m = array![[0.1, -1.0 / 3.0, 1e-300], [f64::MAX, 0.0, 2.5e17]];
        let back = parse_matrix(Path::new("m"), &format_matrix(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn survival_header_and_events() {
        let p = Path::new("s.csv");
        let t = parse_survival(p, b"time,event,risk\n1.5,1,0.2\n3,0,-1\n").unwrap();
        assert_eq!(t.event(), &[true, false]);
        let err = parse_survival(p, b"time,event,risk\n1.5,2,0.2\n").unwrap_err().to_string();
        assert!(err.contains("row 2, column 2"), "{err}");
        assert!(parse_survival(p, b"t,e,r\n1,1,1\n").is_err());
    }
}
