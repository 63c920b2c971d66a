//! Exhaustive policy enumeration for the discretized-evidence game.
//!
//! A policy is a first update (or stop) plus, for every level it can reach,
//! a second update (or stop). Its value separates over reached levels, so the
//! best policy is found by enumerating every nondecreasing level sequence at
//! each stage. Sums run from the highest evidence cell down so that values
//! are bit-identical to the dynamic program's.

use statcontract_core::multi_round::{DiscreteEvidence, LicenseGrid};

/// Every nondecreasing sequence of `len` levels in `0..=top`.
pub fn monotone_sequences(len: usize, top: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, len: usize, top: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        let lo = prefix.last().copied().unwrap_or(0);
        for a in lo..=top {
            prefix.push(a);
            extend(prefix, len, top, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(len), len, top, &mut out);
    out
}

fn weighted_sum(weights: &[f64], levels: &[usize], value: impl Fn(usize) -> f64) -> f64 {
    let mut s = 0.0;
    for j in (0..weights.len()).rev() {
        s += weights[j] * value(levels[j]);
    }
    s
}

/// Optimal expected profit `v_t(level)` for every stage `t = 0..=T` and
/// level, by enumeration.
pub fn enumerate_values(evidence: &DiscreteEvidence, costs: &[f64], grid: &LicenseGrid) -> Vec<Vec<f64>> {
    let top = grid.levels();
    let seqs = monotone_sequences(evidence.points().len(), top);
    let (q0, q1) = (evidence.null_probs(), evidence.alt_probs());
    let null_costs: Vec<f64> = seqs.iter().map(|s| weighted_sum(q0, s, |a| grid.value(a))).collect();
    let horizon = costs.len();
    let mut values = vec![Vec::new(); horizon + 1];
    values[horizon] = (0..=top).map(|l| grid.value(l).min(grid.cap())).collect();
    for t in (0..horizon).rev() {
        let next = values[t + 1].clone();
        let payoffs: Vec<f64> = seqs.iter().map(|s| weighted_sum(q1, s, |a| next[a])).collect();
        values[t] = (0..=top)
            .map(|l| {
                let stop = grid.value(l);
                let budget = stop + costs[t];
                let best = null_costs
                    .iter()
                    .zip(&payoffs)
                    .filter(|(c, _)| **c <= budget)
                    .map(|(_, p)| *p)
                    .fold(f64::NEG_INFINITY, f64::max);
                let go = best - costs[t];
                if go > stop {
                    go
                } else {
                    stop
                }
            })
            .collect();
    }
    values
}
