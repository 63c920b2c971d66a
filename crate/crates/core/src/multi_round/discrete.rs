//! Exact single-round step on a finite evidence grid.
//!
//! Evidence `z` is reported on a grid of points; the cell of point `j` runs
//! between the midpoints to its neighbours, so a license on this grid is a
//! step function whose breakpoints are those midpoints. The best
//! nondecreasing grid-valued license under a null budget is a small
//! multiple-choice knapsack, solved exactly by sweeping the cells from the
//! highest `z` down while keeping, for each current level, the Pareto front
//! of (null cost, alternative value).

use alloc::vec::Vec;

use super::dp::StepSolver;
use super::step::{LicenseGrid, StepUpdate};
use crate::error::{Error, Result};
use crate::stats::GaussianModel;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEvidence {
    points: Vec<f64>,
    cuts: Vec<f64>,
    null_probs: Vec<f64>,
    alt_probs: Vec<f64>,
    theta1: f64,
}

impl DiscreteEvidence {
    /// Cells around strictly increasing `points` under `N(0, 1)` and
    /// `N(theta1, 1)`.
    pub fn from_points(points: Vec<f64>, theta1: f64) -> Result<Self> {
        if points.is_empty() || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("evidence points must be strictly increasing"));
        }
        let null = GaussianModel::unit(0.0)?;
        let alt = GaussianModel::unit(theta1)?;
        let cuts: Vec<f64> = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let cell_probs = |m: &GaussianModel| -> Vec<f64> {
            (0..points.len())
                .map(|j| {
                    let lo = if j == 0 { f64::NEG_INFINITY } else { cuts[j - 1] };
                    let hi = cuts.get(j).copied().unwrap_or(f64::INFINITY);
                    m.prob_above(lo) - m.prob_above(hi)
                })
                .collect()
        };
        let null_probs = cell_probs(&null);
        let alt_probs = cell_probs(&alt);
        Ok(Self { points, cuts, null_probs, alt_probs, theta1 })
    }

    /// `n` equally spaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize, theta1: f64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidInput("need at least two points on a proper interval"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::from_points((0..n).map(|i| lo + step * i as f64).collect(), theta1)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Cell boundaries (midpoints between consecutive points).
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn null_probs(&self) -> &[f64] {
        &self.null_probs
    }

    pub fn alt_probs(&self) -> &[f64] {
        &self.alt_probs
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    /// Step update that assigns `levels[j]` to cell `j`.
    pub fn update_from_levels(&self, levels: &[usize]) -> Result<StepUpdate> {
        let mut breaks = Vec::new();
        let mut vals = alloc::vec![levels[0]];
        for j in 1..levels.len() {
            if levels[j] != levels[j - 1] {
                breaks.push(self.cuts[j - 1]);
                vals.push(levels[j]);
            }
        }
        StepUpdate::new(breaks, vals)
    }
}

/// Best assignment found by [`DiscreteSolver::best_assignment`].
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Level per evidence cell, lowest `z` first.
    pub levels: Vec<usize>,
    pub null_cost: f64,
    pub alt_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolver {
    pub evidence: DiscreteEvidence,
}

#[derive(Clone)]
struct Label {
    cost: f64,
    value: f64,
    // levels from the highest cell downwards
    picks: Vec<usize>,
}

impl DiscreteSolver {
    pub fn new(evidence: DiscreteEvidence) -> Self {
        Self { evidence }
    }

    /// Maximize `sum_j q1_j v[a_j]` over nondecreasing level sequences with
    /// `sum_j q0_j value(a_j) <= budget`. Sums run from the highest cell
    /// down.
    pub fn best_assignment(&self, v_next: &[f64], budget: f64, grid: &LicenseGrid) -> Assignment {
        let top = grid.levels();
        let (q0, q1) = (&self.evidence.null_probs, &self.evidence.alt_probs);
        let mut fronts: Vec<Vec<Label>> = alloc::vec![Vec::new(); top + 1];
        fronts[top].push(Label { cost: 0.0, value: 0.0, picks: Vec::new() });
        for j in (0..q0.len()).rev() {
            let mut next: Vec<Vec<Label>> = alloc::vec![Vec::new(); top + 1];
            for (bound, front) in fronts.iter().enumerate() {
                for label in front {
                    for a in 0..=bound {
                        let cost = label.cost + q0[j] * grid.value(a);
                        if cost > budget {
                            break;
                        }
                        let mut picks = label.picks.clone();
                        picks.push(a);
                        next[a].push(Label { cost, value: label.value + q1[j] * v_next[a], picks });
                    }
                }
            }
            for front in &mut next {
                prune(front);
            }
            fronts = next;
        }
        let best = fronts
            .into_iter()
            .flatten()
            .max_by(|a, b| a.value.total_cmp(&b.value).then(b.cost.total_cmp(&a.cost)))
            .expect("the zero license is always feasible");
        let mut levels = best.picks;
        levels.reverse();
        Assignment { levels, null_cost: best.cost, alt_value: best.value }
    }
}

// Keep labels not dominated in (lower cost, higher value).
fn prune(front: &mut Vec<Label>) {
    front.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(b.value.total_cmp(&a.value)));
    let mut best = f64::NEG_INFINITY;
    front.retain(|l| {
        if l.value > best {
            best = l.value;
            true
        } else {
            false
        }
    });
}

impl StepSolver for DiscreteSolver {
    fn theta1(&self) -> f64 {
        self.evidence.theta1
    }

    fn solve_stage(
        &self,
        v_next: &[f64],
        budgets: &[f64],
        grid: &LicenseGrid,
    ) -> Result<Vec<(StepUpdate, f64)>> {
        if v_next.len() != grid.levels() + 1 {
            return Err(Error::InvalidInput("need one continuation value per grid level"));
        }
        budgets
            .iter()
            .map(|b| {
                let best = self.best_assignment(v_next, *b, grid);
                Ok((self.evidence.update_from_levels(&best.levels)?, best.alt_value))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_probabilities_sum_to_one() {
        let ev = DiscreteEvidence::uniform(-3.0, 5.0, 21, 1.0).unwrap();
        assert_eq!(ev.cuts().len(), 20);
        let s0: f64 = ev.null_probs().iter().sum();
        let s1: f64 = ev.alt_probs().iter().sum();
        assert!((s0 - 1.0).abs() < 1e-14 && (s1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn knapsack_respects_budget_and_monotonicity() {
        let ev = DiscreteEvidence::uniform(-2.0, 3.0, 9, 1.0).unwrap();
        let grid = LicenseGrid::new(1.0, 4).unwrap();
        let solver = DiscreteSolver::new(ev);
        let a = solver.best_assignment(&grid.values(), 0.2, &grid);
        assert!(a.null_cost <= 0.2);
        assert!(a.levels.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.alt_value > 0.0);
    }

    #[test]
    fn zero_budget_gives_zero_license() {
        let ev = DiscreteEvidence::uniform(-2.0, 3.0, 5, 1.0).unwrap();
        let grid = LicenseGrid::new(1.0, 3).unwrap();
        let a = DiscreteSolver::new(ev).best_assignment(&grid.values(), 0.0, &grid);
        assert!(a.levels.iter().all(|l| *l == 0));
    }
}
