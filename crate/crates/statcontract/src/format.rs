//! Text formats: real-number rendering, license records, policy tables and
//! the CSV dialect shared by every experiment.

use std::io::Write;

use statcontract_core::evalue::LicenseFn;
use statcontract_core::multi_round::{Action, DPPolicy, StepUpdate};
use thiserror::Error;

/// Significant digits for reals in CSV output.
pub const CSV_DIGITS: usize = 12;
/// Significant digits for exact round trips.
pub const EXACT_DIGITS: usize = 17;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed record {record:?}: {reason}")]
    Malformed { record: String, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(record: &str, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed { record: record.to_owned(), reason: reason.into() }
}

/// `%g`-style rendering with `digits` significant digits and trailing zeros
/// removed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1, "need at least one significant digit");
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    if x == 0.0 {
        return "0".to_owned();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Real in the CSV dialect.
pub fn fmt_real(x: f64) -> String {
    fmt_sig(x, CSV_DIGITS)
}

fn fmt_exact(x: f64) -> String {
    fmt_sig(x, EXACT_DIGITS)
}

fn join_exact(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_exact(*x)).collect::<Vec<_>>().join(",")
}

fn parse_reals(record: &str, field: &str) -> Result<Vec<f64>, FormatError> {
    if field.trim().is_empty() {
        return Ok(Vec::new());
    }
    field.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| malformed(record, e.to_string()))).collect()
}

/// `breakpoints;values`, each a comma-separated list; a constant license
/// has an empty breakpoint list, e.g. `;5`.
pub fn license_to_record(f: &LicenseFn) -> String {
    format!("{};{}", join_exact(f.breakpoints()), join_exact(f.values()))
}

pub fn license_from_record(record: &str) -> Result<LicenseFn, FormatError> {
    let (bps, values) = record.trim().split_once(';').ok_or_else(|| malformed(record, "missing ';'"))?;
    LicenseFn::new(parse_reals(record, bps)?, parse_reals(record, values)?)
        .map_err(|e| malformed(record, e.to_string()))
}

/// CSV writer in the shared dialect: comma-separated, LF line endings.
pub fn csv_writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(inner)
}

/// One row of an exported policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    /// Rounds already completed.
    pub t: usize,
    pub level: usize,
    /// `None` for stop.
    pub update: Option<StepUpdate>,
    pub value: f64,
}

pub const POLICY_HEADER: [&str; 6] = ["t", "level", "action", "z_breakpoints", "grid_values", "value"];

pub fn policy_rows(policy: &DPPolicy) -> Vec<PolicyRow> {
    let levels = policy.grid().levels();
    (0..policy.horizon())
        .flat_map(|t| (0..=levels).map(move |level| (t, level)))
        .map(|(t, level)| PolicyRow {
            t,
            level,
            update: match policy.action(t, level) {
                Action::Stop => None,
                Action::Continue(u) => Some(u.clone()),
            },
            value: policy.value(t, level),
        })
        .collect()
}

/// Writes the policy table; lists inside fields are `;`-separated and reals
/// carry 17 significant digits.
pub fn write_policy<W: Write>(rows: &[PolicyRow], out: W) -> Result<(), FormatError> {
    let mut w = csv_writer(out);
    w.write_record(POLICY_HEADER)?;
    for row in rows {
        let (action, bps, vals) = match &row.update {
            None => ("stop", String::new(), String::new()),
            Some(u) => (
                "continue",
                u.z_breakpoints().iter().map(|z| fmt_exact(*z)).collect::<Vec<_>>().join(";"),
                u.grid_values().iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            ),
        };
        w.write_record([
            row.t.to_string(),
            row.level.to_string(),
            action.to_owned(),
            bps,
            vals,
            fmt_exact(row.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_policy(text: &str) -> Result<Vec<PolicyRow>, FormatError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(POLICY_HEADER) {
        return Err(malformed(&header.iter().collect::<Vec<_>>().join(","), "unexpected header"));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let line = rec.iter().collect::<Vec<_>>().join(",");
            let int = |s: &str| s.parse::<usize>().map_err(|e| malformed(&line, e.to_string()));
            fn list(s: &str) -> Vec<&str> {
                if s.is_empty() {
                    Vec::new()
                } else {
                    s.split(';').collect()
                }
            }
            let update = match &rec[2] {
                "stop" => None,
                "continue" => {
                    let bps = list(&rec[3])
                        .into_iter()
                        .map(|s| s.parse::<f64>().map_err(|e| malformed(&line, e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?;
                    let vals = list(&rec[4]).into_iter().map(int).collect::<Result<Vec<_>, _>>()?;
                    Some(StepUpdate::new(bps, vals).map_err(|e| malformed(&line, e.to_string()))?)
                }
                other => return Err(malformed(&line, format!("unknown action {other:?}"))),
            };
            Ok(PolicyRow {
                t: int(&rec[0])?,
                level: int(&rec[1])?,
                update,
                value: rec[5]
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| malformed(&line, e.to_string()))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(0.05), "0.05");
        assert_eq!(fmt_real(-5000000.0), "-5000000");
        assert_eq!(fmt_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_real(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_real(1e12), "1e12");
        assert_eq!(fmt_real(123456789012.4), "123456789012");
        assert_eq!(fmt_real(9.9999999999996), "10");
        assert_eq!(fmt_real(f64::INFINITY), "inf");
    }

    #[test]
    fn exact_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-9, 1.6448536269514722, 1e300, 5e-324] {
            assert_eq!(fmt_exact(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn license_record_round_trip() {
        let f = LicenseFn::new(vec![-0.3, 1.6448536269514722], vec![0.0, 0.1, 20.0 / 3.0]).unwrap();
        let rec = license_to_record(&f);
        assert_eq!(license_from_record(&rec).unwrap(), f);
        let c = LicenseFn::constant(5.0).unwrap();
        assert_eq!(license_to_record(&c), ";5");
        assert_eq!(license_from_record(";5").unwrap(), c);
    }

    #[test]
    fn bad_license_records() {
        assert!(license_from_record("1,2").is_err());
        assert!(license_from_record("1;0,x").is_err());
        assert!(license_from_record("2,1;0,1,2").is_err());
        assert!(license_from_record("1;2,1").is_err());
    }

    #[test]
    fn csv_uses_lf() {
        let mut buf = Vec::new();
        {
            let mut w = csv_writer(&mut buf);
            w.write_record(["a", "b"]).unwrap();
            w.write_record(["1", "2"]).unwrap();
        }
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2\n");
    }
}
