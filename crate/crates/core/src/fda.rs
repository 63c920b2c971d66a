//! Incentive audit of simplified drug-approval protocols.
//!
//! A protocol is summarized by the probability that a placebo is approved.
//! The expected value of running a trial on a placebo is `p * profit - cost`;
//! a protocol is aligned for a market when that value is clearly negative.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Money in whole thousands of dollars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(pub i64);

impl Money {
    pub const fn from_thousands(k: i64) -> Self {
        Money(k)
    }

    pub const fn from_millions(m: i64) -> Self {
        Money(m * 1_000)
    }

    pub const fn from_billions(b: i64) -> Self {
        Money(b * 1_000_000)
    }

    /// Nearest thousand to an amount in dollars.
    pub fn from_dollars(d: f64) -> Self {
        Money(libm::round(d / 1_000.0) as i64)
    }

    pub const fn thousands(self) -> i64 {
        self.0
    }

    pub const fn dollars(self) -> i64 {
        self.0 * 1_000
    }

    pub fn millions(self) -> f64 {
        self.0 as f64 / 1_000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub name: String,
    pub p_null_approval: f64,
}

impl Protocol {
    pub fn new(name: impl Into<String>, p_null_approval: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_null_approval) {
            return Err(Error::InvalidInput("approval probability must lie in [0, 1]"));
        }
        Ok(Self { name: name.into(), p_null_approval })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Aligned,
    Borderline,
    NotAligned,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Aligned => "aligned",
            Verdict::Borderline => "borderline",
            Verdict::NotAligned => "not_aligned",
        }
    }

    /// Table label: Yes / Borderline / No.
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Aligned => "Yes",
            Verdict::Borderline => "Borderline",
            Verdict::NotAligned => "No",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "aligned" | "Yes" => Some(Verdict::Aligned),
            "borderline" | "Borderline" => Some(Verdict::Borderline),
            "not_aligned" | "No" => Some(Verdict::NotAligned),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub protocol: String,
    pub p_null_approval: f64,
    pub profit_if_approved: Money,
    pub trial_cost: Money,
    pub expected_value_of_placebo: Money,
    pub verdict: Verdict,
}

/// Fraction of the trial cost within which the expected value counts as
/// borderline.
pub const DEFAULT_BAND: f64 = 0.02;

pub const DEFAULT_COST: Money = Money::from_millions(50);

pub const DEFAULT_PROFITS: [Money; 3] =
    [Money::from_billions(1), Money::from_billions(10), Money::from_billions(100)];

/// Two significant trials, one modernized single trial, and the
/// high-discretion accelerated pathway.
pub fn builtin_protocols() -> Vec<Protocol> {
    alloc::vec![
        Protocol { name: String::from("standard"), p_null_approval: 0.000_625 },
        Protocol { name: String::from("modernized"), p_null_approval: 0.005 },
        Protocol { name: String::from("accelerated"), p_null_approval: 0.0494 },
    ]
}

/// `p * profit - cost`, to the nearest thousand dollars.
pub fn placebo_expected_value(p: f64, profit: Money, cost: Money) -> Money {
    let gain = libm::round(p * profit.thousands() as f64) as i64;
    Money(gain - cost.thousands())
}

pub fn classify(ev: Money, cost: Money, band: f64) -> Verdict {
    let margin = band * cost.thousands() as f64;
    let ev = ev.thousands() as f64;
    if ev.abs() <= margin {
        Verdict::Borderline
    } else if ev < 0.0 {
        Verdict::Aligned
    } else {
        Verdict::NotAligned
    }
}

/// One row per (protocol, profit) pair, protocols outermost.
pub fn audit_table(protocols: &[Protocol], profits: &[Money], cost: Money) -> Vec<AuditRow> {
    audit_table_with_band(protocols, profits, cost, DEFAULT_BAND)
}

pub fn audit_table_with_band(
    protocols: &[Protocol],
    profits: &[Money],
    cost: Money,
    band: f64,
) -> Vec<AuditRow> {
    protocols
        .iter()
        .flat_map(|p| {
            profits.iter().map(move |&profit| {
                let ev = placebo_expected_value(p.p_null_approval, profit, cost);
                AuditRow {
                    protocol: p.name.clone(),
                    p_null_approval: p.p_null_approval,
                    profit_if_approved: profit,
                    trial_cost: cost,
                    expected_value_of_placebo: ev,
                    verdict: classify(ev, cost, band),
                }
            })
        })
        .collect()
}
