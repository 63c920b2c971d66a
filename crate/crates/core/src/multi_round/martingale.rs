//! Net-profit supermartingale diagnostics.

use alloc::vec::Vec;

use super::simulate::EpisodeRecord;
use crate::stats::MeanEstimate;

/// Standard errors allowed above zero before an estimate counts as positive.
pub const SE_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SupermartingaleReport {
    /// `E[N(t)]` for `t = 1..=T`.
    pub stages: Vec<MeanEstimate>,
    /// `E[N(tau)]`, the agent's expected profit.
    pub terminal: MeanEstimate,
    pub passes: bool,
}

/// Estimates `E[N(t)]` per stage and at exit; passes when none exceeds zero
/// by more than three standard errors.
pub fn supermartingale_check(episodes: &[EpisodeRecord], costs: &[f64]) -> SupermartingaleReport {
    let horizon = costs.len();
    let paths: Vec<Vec<f64>> = episodes.iter().map(|e| e.net_profit_path(horizon)).collect();
    let stages: Vec<MeanEstimate> = (1..=horizon)
        .map(|t| {
            let xs: Vec<f64> = paths.iter().map(|p| p[t]).collect();
            MeanEstimate::from_samples(&xs)
        })
        .collect();
    let profits: Vec<f64> = episodes.iter().map(EpisodeRecord::profit).collect();
    let terminal = MeanEstimate::from_samples(&profits);
    let passes = terminal.at_most(0.0, SE_MULTIPLIER) && stages.iter().all(|s| s.at_most(0.0, SE_MULTIPLIER));
    SupermartingaleReport { stages, terminal, passes }
}
