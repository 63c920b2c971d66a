//! Optimal single-round update under a concave value function.
//!
//! With null `N(0, 1)` and alternative `N(theta, 1)` the likelihood ratio is
//! `exp(theta y - theta^2 / 2)`. Maximizing `E_theta[v(f)] - lambda E_0[f]`
//! pointwise puts `f(y)` on the largest knot whose left slope clears
//! `lambda / LR(y)`, so `f` jumps to knot `k` at
//! `y_k = theta / 2 - ln(v'_k / lambda) / theta`. The null expectation is
//! continuous and decreasing in `lambda`, and the multiplier that spends the
//! budget exactly is found by bisection on `ln(lambda)`.

use alloc::vec::Vec;

use super::concave::{PLCValue, Tabulation};
use crate::error::{Error, Result};
use crate::evalue::LicenseFn;
use crate::stats::{upper_tail, GaussianModel};

/// License values `{0, eps, ..., K eps}` with `K eps` the market cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LicenseGrid {
    cap: f64,
    levels: usize,
}

impl LicenseGrid {
    pub fn new(cap: f64, levels: usize) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::InvalidInput("license cap must be positive"));
        }
        if levels == 0 {
            return Err(Error::InvalidInput("license grid needs at least one level"));
        }
        Ok(Self { cap, levels })
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Number of nonzero levels `K`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn epsilon(&self) -> f64 {
        self.cap / self.levels as f64
    }

    /// Money value of level `i`; level `K` is exactly the cap.
    pub fn value(&self, i: usize) -> f64 {
        if i == self.levels {
            return self.cap;
        }
        i as f64 * self.cap / self.levels as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.levels).map(|i| self.value(i)).collect()
    }

    /// Level whose value is nearest to `money`.
    pub fn nearest_level(&self, money: f64) -> usize {
        let i = libm::round(money / self.epsilon());
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.levels)
        }
    }
}

/// A license update as a nondecreasing step function from evidence to grid
/// levels: level `grid_values[j]` on `(z_breakpoints[j-1], z_breakpoints[j]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepUpdate {
    z_breakpoints: Vec<f64>,
    grid_values: Vec<usize>,
}

impl StepUpdate {
    pub fn new(z_breakpoints: Vec<f64>, grid_values: Vec<usize>) -> Result<Self> {
        if grid_values.len() != z_breakpoints.len() + 1 {
            return Err(Error::InvalidInput("update needs one level per interval"));
        }
        if z_breakpoints.iter().any(|z| !z.is_finite()) || z_breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("update breakpoints must be finite and increasing"));
        }
        if grid_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("update levels must be nondecreasing"));
        }
        Ok(Self { z_breakpoints, grid_values })
    }

    pub fn constant(level: usize) -> Self {
        Self { z_breakpoints: Vec::new(), grid_values: alloc::vec![level] }
    }

    pub fn z_breakpoints(&self) -> &[f64] {
        &self.z_breakpoints
    }

    pub fn grid_values(&self) -> &[usize] {
        &self.grid_values
    }

    pub fn eval(&self, z: f64) -> usize {
        self.grid_values[self.z_breakpoints.partition_point(|b| *b < z)]
    }

    /// `E[values[update(Z)]]` for `Z ~ model`.
    pub fn expectation_of(&self, values: &[f64], model: &GaussianModel) -> f64 {
        let mut acc = values[self.grid_values[0]];
        for (j, b) in self.z_breakpoints.iter().enumerate() {
            let jump = values[self.grid_values[j + 1]] - values[self.grid_values[j]];
            acc += jump * model.prob_above(*b);
        }
        acc
    }

    /// The next license as money.
    pub fn to_license(&self, grid: &LicenseGrid) -> Result<LicenseFn> {
        LicenseFn::new(self.z_breakpoints.clone(), self.grid_values.iter().map(|l| grid.value(*l)).collect())
    }
}

/// Largest knot whose left slope is at least `lambda / lr`.
pub fn pointwise_update(v: &PLCValue, lambda: f64, lr: f64) -> f64 {
    let price = lambda / lr;
    let k = v.slopes().partition_point(|s| *s >= price);
    v.knots()[k.saturating_sub(1)]
}

/// Evidence thresholds `y_k` for knots `k = 1..=K`; zero slopes map to
/// `+inf`.
pub fn update_breakpoints(v: &PLCValue, lambda: f64, theta: f64) -> Vec<f64> {
    v.slopes()[1..]
        .iter()
        .map(|s| if *s <= 0.0 { f64::INFINITY } else { theta / 2.0 - libm::log(s / lambda) / theta })
        .collect()
}

// sum_k (g_k - g_{k-1}) P(Y > y_k - shift), Y standard normal
fn telescoped(increments: impl Iterator<Item = f64>, ys: &[f64], shift: f64) -> f64 {
    increments.zip(ys).map(|(d, y)| if y.is_finite() { d * upper_tail(y - shift) } else { 0.0 }).sum()
}

/// `E_0[E_lambda]` in closed form.
pub fn null_expectation_of_update(v: &PLCValue, lambda: f64, theta: f64) -> f64 {
    let ys = update_breakpoints(v, lambda, theta);
    telescoped(v.knots().windows(2).map(|w| w[1] - w[0]), &ys, 0.0)
}

/// `E_theta[E_lambda]` in closed form.
pub fn alt_expectation_of_update(v: &PLCValue, lambda: f64, theta: f64) -> f64 {
    let ys = update_breakpoints(v, lambda, theta);
    telescoped(v.knots().windows(2).map(|w| w[1] - w[0]), &ys, theta)
}

/// `E_theta[v(E_lambda)]` in closed form.
pub fn alt_value_of_update(v: &PLCValue, lambda: f64, theta: f64) -> f64 {
    let ys = update_breakpoints(v, lambda, theta);
    v.values()[0] + telescoped(v.values().windows(2).map(|w| w[1] - w[0]), &ys, theta)
}

/// The multiplier at which the update's null expectation equals `budget`.
///
/// The budget must be below the leftmost knot attaining the maximum of `v`,
/// which is the supremum of the null expectation over `lambda > 0`.
pub fn solve_lambda(v: &PLCValue, theta: f64, budget: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain("alternative must be positive"));
    }
    if !(budget > 0.0) {
        return Err(Error::Domain("budget must be positive"));
    }
    let sup = v.knots()[v.top_useful_index()];
    if budget >= sup {
        return Err(Error::InfeasibleBudget { budget, max: sup });
    }
    let spend = |log_lambda: f64| null_expectation_of_update(v, libm::exp(log_lambda), theta);
    let step = libm::log(1e3);
    let (mut lo, mut hi) = (libm::log(1e-6), libm::log(1e6));
    let mut guard = 0;
    while spend(lo) < budget {
        lo -= step;
        guard += 1;
        if guard > 200 {
            return Err(Error::InfeasibleBudget { budget, max: sup });
        }
    }
    while spend(hi) > budget {
        hi += step;
        guard += 1;
        if guard > 400 {
            return Err(Error::Domain("multiplier bracket did not close"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(libm::exp(0.5 * (lo + hi)))
}

/// Best update of the license on `grid` for continuation values `v_next`
/// (one per grid level) under a null budget, with its expected continuation
/// value under `N(theta1, 1)`.
pub fn optimal_step(
    v_next: &[f64],
    theta1: f64,
    budget: f64,
    grid: &LicenseGrid,
) -> Result<(StepUpdate, f64)> {
    let plc = concavified(v_next, grid)?;
    step_from_concave(&plc, v_next, theta1, budget)
}

pub(crate) fn concavified(v_next: &[f64], grid: &LicenseGrid) -> Result<PLCValue> {
    if v_next.len() != grid.levels() + 1 {
        return Err(Error::InvalidInput("need one continuation value per grid level"));
    }
    PLCValue::concavify(&Tabulation::new(grid.values(), v_next.to_vec())?)
}

pub(crate) fn step_from_concave(
    plc: &PLCValue,
    v_next: &[f64],
    theta1: f64,
    budget: f64,
) -> Result<(StepUpdate, f64)> {
    if !(theta1 > 0.0) {
        return Err(Error::Domain("alternative must be positive"));
    }
    if !(budget > 0.0) {
        return Err(Error::Domain("budget must be positive"));
    }
    let top = plc.top_useful_index();
    if budget >= plc.knots()[top] {
        return Ok((StepUpdate::constant(top), v_next[top]));
    }
    let lambda = solve_lambda(plc, theta1, budget)?;
    let ys = update_breakpoints(plc, lambda, theta1);
    let mut z_breakpoints: Vec<f64> = Vec::new();
    let mut grid_values = alloc::vec![0usize];
    for (k, y) in ys.iter().enumerate() {
        let level = k + 1;
        if !y.is_finite() {
            break;
        }
        if z_breakpoints.last() == Some(y) {
            *grid_values.last_mut().expect("nonempty") = level;
        } else {
            z_breakpoints.push(*y);
            grid_values.push(level);
        }
    }
    let update = StepUpdate::new(z_breakpoints, grid_values)?;
    let alt = GaussianModel::unit(theta1)?;
    let value = update.expectation_of(v_next, &alt);
    Ok((update, value))
}
