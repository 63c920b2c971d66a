use statcontract_core::fda::{audit_table_with_band, builtin_protocols, AuditRow, Money, Protocol, Verdict};

use super::{Output, RunError};
use crate::config::ExperimentConfig;
use crate::format::{fmt_real, FormatError};

/// Table of expected placebo values and verdicts, with the tolerance each
/// printed value carries.
pub const BUILTIN_REFERENCE: &str = include_str!("../../reference/table1.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub protocol: String,
    pub profit: Money,
    pub cost: Money,
    pub expected_value: Money,
    pub verdict: Verdict,
    pub tolerance: Money,
}

fn bad(line: &str, reason: &str) -> FormatError {
    FormatError::Malformed { record: line.to_owned(), reason: reason.to_owned() }
}

impl ReferenceRow {
    /// Parses `protocol,profit,cost,expected_value,verdict,tolerance` with
    /// money in dollars.
    pub fn parse_table(text: &str) -> Result<Vec<Self>, FormatError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        reader
            .records()
            .map(|rec| {
                let rec = rec?;
                let line = rec.iter().collect::<Vec<_>>().join(",");
                if rec.len() != 6 {
                    return Err(bad(&line, "expected six fields"));
                }
                let money = |s: &str| {
                    s.parse::<i64>()
                        .ok()
                        .filter(|d| d % 1000 == 0)
                        .map(|d| Money::from_thousands(d / 1000))
                        .ok_or_else(|| bad(&line, "money must be whole thousands of dollars"))
                };
                Ok(Self {
                    protocol: rec[0].to_owned(),
                    profit: money(&rec[1])?,
                    cost: money(&rec[2])?,
                    expected_value: money(&rec[3])?,
                    verdict: Verdict::parse(&rec[4]).ok_or_else(|| bad(&line, "unknown verdict"))?,
                    tolerance: money(&rec[5])?,
                })
            })
            .collect()
    }
}

/// Mismatches between computed rows and the reference rows sharing their
/// protocol, profit and cost; rows without a reference are not checked.
pub fn check_against_reference(rows: &[AuditRow], reference: &[ReferenceRow]) -> Vec<String> {
    let mut deviations = Vec::new();
    for row in rows {
        let Some(r) = reference.iter().find(|r| {
            r.protocol == row.protocol && r.profit == row.profit_if_approved && r.cost == row.trial_cost
        }) else {
            continue;
        };
        let what = format!("{} at profit ${}", row.protocol, row.profit_if_approved.dollars());
        if row.verdict != r.verdict {
            deviations.push(format!(
                "{what}: verdict {} but reference says {}",
                row.verdict.label(),
                r.verdict.label()
            ));
        }
        let gap = (row.expected_value_of_placebo.thousands() - r.expected_value.thousands()).abs();
        if gap > r.tolerance.thousands() {
            deviations.push(format!(
                "{what}: expected value ${} differs from reference ${} by more than ${}",
                row.expected_value_of_placebo.dollars(),
                r.expected_value.dollars(),
                r.tolerance.dollars()
            ));
        }
    }
    deviations
}

fn dollars(cfg: &ExperimentConfig, key: &str, d: i64) -> Result<Money, RunError> {
    if d < 0 || d % 1000 != 0 {
        return Err(cfg.reject(key, "nonnegative whole thousands of dollars").into());
    }
    Ok(Money::from_thousands(d / 1000))
}

fn protocols(cfg: &ExperimentConfig) -> Result<Vec<Protocol>, RunError> {
    let raw = cfg.raw("protocols");
    if raw == "builtin" {
        return Ok(builtin_protocols());
    }
    let expected = "builtin or name:probability pairs";
    raw.split(',')
        .map(|item| {
            let (name, p) = item.split_once(':').ok_or_else(|| cfg.reject("protocols", expected))?;
            let p: f64 = p.trim().parse().map_err(|_| cfg.reject("protocols", expected))?;
            Protocol::new(name.trim(), p)
                .map_err(|_| cfg.reject("protocols", "probabilities in [0, 1]").into())
        })
        .collect()
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let cost = match cfg.integers("cost")?.as_slice() {
        [d] if *d > 0 => dollars(cfg, "cost", *d)?,
        _ => return Err(cfg.reject("cost", "one positive amount in dollars").into()),
    };
    let profits = cfg
        .integers("profits")?
        .into_iter()
        .map(|d| dollars(cfg, "profits", d))
        .collect::<Result<Vec<_>, _>>()?;
    let band = cfg.real("band")?;
    if band < 0.0 {
        return Err(cfg.reject("band", "a nonnegative fraction").into());
    }
    let rows = audit_table_with_band(&protocols(cfg)?, &profits, cost, band);
    out.csv(
        "audit.csv",
        &["protocol", "p_null_approval", "profit", "cost", "expected_value", "verdict"],
        rows.iter().map(|r| {
            vec![
                r.protocol.clone(),
                fmt_real(r.p_null_approval),
                r.profit_if_approved.dollars().to_string(),
                r.trial_cost.dollars().to_string(),
                r.expected_value_of_placebo.dollars().to_string(),
                r.verdict.as_str().to_owned(),
            ]
        }),
    )?;

    let reference = match cfg.raw("reference") {
        "none" => return Ok(()),
        "builtin" => BUILTIN_REFERENCE.to_owned(),
        path => std::fs::read_to_string(path)
            .map_err(|_| cfg.reject("reference", "builtin, none, or a readable CSV path"))?,
    };
    let reference = ReferenceRow::parse_table(&reference)
        .map_err(|_| cfg.reject("reference", "a valid reference table"))?;
    out.deviations = check_against_reference(&rows, &reference);
    Ok(())
}
