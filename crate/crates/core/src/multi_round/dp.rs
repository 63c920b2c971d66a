//! Backward induction over `(round, license level)`.
//!
//! `v_T(l) = l` on the grid (the grid tops out at the cap). Before round `t`
//! an agent holding level `l` either stops with `l`, or pays `C_t` and picks
//! an update whose null expectation is at most `l + C_t`, worth
//! `-C_t + E_theta1[v_t(next)]`.

use alloc::vec::Vec;

use super::concave::PLCValue;
use super::step::{concavified, step_from_concave, LicenseGrid, StepUpdate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Stop,
    Continue(StepUpdate),
}

/// Solves every state of one stage given the continuation values.
pub trait StepSolver {
    /// Mean of the alternative the agent plays against.
    fn theta1(&self) -> f64;

    /// For each budget, the best update and its expected continuation value.
    fn solve_stage(
        &self,
        v_next: &[f64],
        budgets: &[f64],
        grid: &LicenseGrid,
    ) -> Result<Vec<(StepUpdate, f64)>>;
}

/// Continuous Gaussian evidence with closed-form tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSolver {
    pub theta1: f64,
}

impl StepSolver for AnalyticSolver {
    fn theta1(&self) -> f64 {
        self.theta1
    }

    fn solve_stage(
        &self,
        v_next: &[f64],
        budgets: &[f64],
        grid: &LicenseGrid,
    ) -> Result<Vec<(StepUpdate, f64)>> {
        let plc: PLCValue = concavified(v_next, grid)?;
        budgets.iter().map(|b| step_from_concave(&plc, v_next, self.theta1, *b)).collect()
    }
}

/// Optimal stopping-and-update policy.
#[derive(Debug, Clone, PartialEq)]
pub struct DPPolicy {
    grid: LicenseGrid,
    costs: Vec<f64>,
    theta1: f64,
    // actions[t][l]: decision with t rounds done and level l
    actions: Vec<Vec<Action>>,
    // values[t][l] for t = 0..=T
    values: Vec<Vec<f64>>,
}

impl DPPolicy {
    pub fn horizon(&self) -> usize {
        self.costs.len()
    }

    pub fn grid(&self) -> &LicenseGrid {
        &self.grid
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    /// Decision before round `t + 1`, with `t` rounds completed.
    pub fn action(&self, t: usize, level: usize) -> &Action {
        &self.actions[t][level]
    }

    /// `v_t(level)`.
    pub fn value(&self, t: usize, level: usize) -> f64 {
        self.values[t][level]
    }

    pub fn value_table(&self, t: usize) -> &[f64] {
        &self.values[t]
    }

    /// Optimal expected profit from the empty license.
    pub fn root_value(&self) -> f64 {
        self.values[0][0]
    }
}

/// Backward induction with closed-form Gaussian steps.
pub fn backward_induction(
    horizon: usize,
    costs: &[f64],
    theta1: f64,
    grid: &LicenseGrid,
) -> Result<DPPolicy> {
    if !(theta1 > 0.0) {
        return Err(Error::Domain("alternative must be positive"));
    }
    backward_induction_with(&AnalyticSolver { theta1 }, horizon, costs, grid)
}

pub fn backward_induction_with<S: StepSolver>(
    solver: &S,
    horizon: usize,
    costs: &[f64],
    grid: &LicenseGrid,
) -> Result<DPPolicy> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least one round"));
    }
    if costs.len() != horizon {
        return Err(Error::InvalidInput("need one cost per round"));
    }
    if costs.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidInput("round costs must be positive"));
    }
    let levels = grid.values();
    let mut values = alloc::vec![Vec::new(); horizon + 1];
    let mut actions = alloc::vec![Vec::new(); horizon];
    values[horizon] = levels.iter().map(|l| l.min(grid.cap())).collect();
    for t in (1..=horizon).rev() {
        let cost = costs[t - 1];
        let budgets: Vec<f64> = levels.iter().map(|l| l + cost).collect();
        let steps = solver.solve_stage(&values[t], &budgets, grid)?;
        let mut v = Vec::with_capacity(levels.len());
        let mut a = Vec::with_capacity(levels.len());
        for (stop, (update, cont)) in levels.iter().zip(steps) {
            let go = cont - cost;
            if go > *stop {
                v.push(go);
                a.push(Action::Continue(update));
            } else {
                v.push(*stop);
                a.push(Action::Stop);
            }
        }
        values[t - 1] = v;
        actions[t - 1] = a;
    }
    Ok(DPPolicy { grid: *grid, costs: costs.to_vec(), theta1: solver.theta1(), actions, values })
}
