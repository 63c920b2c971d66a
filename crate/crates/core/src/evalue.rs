//! License functions, e-values and the incentive-alignment check.
//!
//! A license function caps the agent's profit as a function of the trial
//! evidence `z`. Licenses here are nondecreasing step functions of `z`:
//! with breakpoints `b_0 < ... < b_{n-1}` and values `v_0 <= ... <= v_n`,
//! `f(z) = v_k` on the interval `(b_{k-1}, b_k]` (with `b_{-1} = -inf` and
//! `b_n = +inf`). Their expectations under a Gaussian law are exact sums of
//! normal tails.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::{GaussianModel, RandomStream};

/// Default relative tolerance for the alignment checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Nondecreasing step function of the evidence, valued in money.
#[derive(Debug, Clone, PartialEq)]
pub struct LicenseFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl LicenseFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidLicense("need exactly one value per interval"));
        }
        if breakpoints.iter().any(|b| b.is_nan()) {
            return Err(Error::InvalidLicense("breakpoints must not be NaN"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLicense("breakpoints must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidLicense("values must be finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidLicense("values must be nondecreasing in the evidence"));
        }
        Ok(Self { breakpoints, values })
    }

    /// `f(z) = c` everywhere.
    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Vec::new(), alloc::vec![c])
    }

    /// All-or-nothing license `amount * 1{z > threshold}`.
    ///
    /// A threshold of `-inf` gives the constant license `amount`.
    pub fn all_or_nothing(threshold: f64, amount: f64) -> Result<Self> {
        if threshold == f64::NEG_INFINITY {
            return Self::constant(amount);
        }
        if threshold == f64::INFINITY {
            return Self::constant(0.0);
        }
        Self::new(alloc::vec![threshold], alloc::vec![0.0, amount])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().expect("at least one interval")
    }

    pub fn eval(&self, z: f64) -> f64 {
        // number of breakpoints strictly below z
        let k = self.breakpoints.partition_point(|b| *b < z);
        self.values[k]
    }

    /// Smallest `z` above which the license pays anything, if it ever does.
    pub fn approval_threshold(&self) -> Option<f64> {
        if self.values[0] > 0.0 {
            return Some(f64::NEG_INFINITY);
        }
        self.values.iter().position(|v| *v > 0.0).map(|k| self.breakpoints[k - 1])
    }

    /// Exact `E[f(Z)]` for `Z ~ model`.
    pub fn expectation(&self, model: &GaussianModel) -> f64 {
        // v_0 + sum_k (v_{k+1} - v_k) P(Z > b_k); every increment is >= 0.
        let mut acc = self.values[0];
        for (k, b) in self.breakpoints.iter().enumerate() {
            let jump = self.values[k + 1] - self.values[k];
            if jump > 0.0 {
                acc += jump * model.prob_above(*b);
            }
        }
        acc
    }

    /// `P(f(Z) > 0)` for `Z ~ model`.
    pub fn approval_probability(&self, model: &GaussianModel) -> f64 {
        match self.approval_threshold() {
            Some(t) => model.prob_above(t),
            None => 0.0,
        }
    }

    /// `a * self + b * other` on the merged breakpoints. Coefficients must be
    /// nonnegative so the result stays a valid license.
    pub fn combine(a: f64, f: &LicenseFn, b: f64, g: &LicenseFn) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InvalidLicense("combination weights must be nonnegative"));
        }
        let mut merged: Vec<f64> = f.breakpoints.iter().chain(&g.breakpoints).copied().collect();
        merged.sort_by(f64::total_cmp);
        merged.dedup();
        let mut values = Vec::with_capacity(merged.len() + 1);
        values.push(a * f.values[0] + b * g.values[0]);
        for x in &merged {
            // value just to the right of x
            let fi = f.breakpoints.partition_point(|t| t <= x);
            let gi = g.breakpoints.partition_point(|t| t <= x);
            values.push(a * f.values[fi] + b * g.values[gi]);
        }
        // rounding can break monotonicity by an ulp
        for k in 1..values.len() {
            if values[k] < values[k - 1] {
                values[k] = values[k - 1];
            }
        }
        Self::new(merged, values)
    }

    /// Multiply every value by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.breakpoints.clone(), self.values.iter().map(|v| v * c).collect())
    }
}

/// `E_{Z ~ null}[f(Z)]`.
pub fn null_expectation(f: &LicenseFn, null: &GaussianModel) -> f64 {
    f.expectation(null)
}

/// Whether `f` is an e-value for `null`: `E_null[f] <= 1 + tol`.
pub fn is_evalue(f: &LicenseFn, null: &GaussianModel, tol: f64) -> bool {
    null_expectation(f, null) <= 1.0 + tol
}

/// Set of license functions offered to the agent, together with the trial
/// cost `C`.
#[derive(Debug, Clone, PartialEq)]
pub enum Menu {
    /// `C` times every e-value; represented intensionally.
    AllEValues { cost: f64 },
    /// A finite list of licenses.
    Explicit { licenses: Vec<LicenseFn>, cost: f64 },
}

impl Menu {
    pub fn cost(&self) -> f64 {
        match self {
            Menu::AllEValues { cost } | Menu::Explicit { cost, .. } => *cost,
        }
    }

    pub fn is_all_evalues(&self) -> bool {
        matches!(self, Menu::AllEValues { .. })
    }
}

/// No null agent gains from any menu item: `E_null[f] <= C (1 + tol)` for all
/// `f`. The all-e-values menu is aligned by construction.
pub fn is_incentive_aligned(menu: &Menu, null: &GaussianModel, tol: f64) -> bool {
    match menu {
        Menu::AllEValues { .. } => true,
        Menu::Explicit { licenses, cost } => {
            licenses.iter().all(|f| null_expectation(f, null) <= cost * (1.0 + tol))
        }
    }
}

/// Largest value returned by [`analytic_evalue_value`] before clamping.
pub const EVALUE_CLAMP: f64 = 1e300;

/// Likelihood-ratio e-value `exp(theta1 * sum(z) - n * theta1^2 / 2)` for
/// `n` unit-variance observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEValue {
    pub theta1: f64,
    pub n: u32,
}

/// Value of an analytic e-value together with an overflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EValueReading {
    pub value: f64,
    pub clamped: bool,
}

pub fn analytic_evalue_value(e: &AnalyticEValue, z_sum: f64) -> EValueReading {
    let log_e = log_analytic_evalue(e, z_sum);
    let value = libm::exp(log_e);
    if value.is_finite() && value <= EVALUE_CLAMP {
        EValueReading { value, clamped: false }
    } else {
        EValueReading { value: EVALUE_CLAMP, clamped: true }
    }
}

/// `log` of the analytic e-value; never overflows.
pub fn log_analytic_evalue(e: &AnalyticEValue, z_sum: f64) -> f64 {
    e.theta1 * z_sum - f64::from(e.n) * e.theta1 * e.theta1 / 2.0
}

/// Per-`n` summary of simulated analytic e-value paths.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub n: u32,
    pub mean_log_e: f64,
    pub mean_e: f64,
    pub se_e: f64,
    pub clamped: u64,
}

/// Simulate `paths` running e-values `E_n` for `n = 0..=max_n` with
/// observations from `N(true_mean, 1)`; path `i` uses stream index `i`.
pub fn simulate_growth(
    theta1: f64,
    true_mean: f64,
    max_n: u32,
    paths: u64,
    seed: u64,
) -> Result<Vec<GrowthRow>> {
    let model = GaussianModel::unit(true_mean)?;
    let len = max_n as usize + 1;
    let mut sum_log = alloc::vec![0.0; len];
    let mut sum_e = alloc::vec![0.0; len];
    let mut sum_e2 = alloc::vec![0.0; len];
    let mut clamped = alloc::vec![0u64; len];
    for path in 0..paths {
        let mut rng = RandomStream::new(seed, path).rng();
        let mut z_sum = 0.0;
        for n in 0..=max_n {
            if n > 0 {
                z_sum += crate::stats::draw(&model, &mut rng);
            }
            let e = AnalyticEValue { theta1, n };
            let reading = analytic_evalue_value(&e, z_sum);
            let k = n as usize;
            sum_log[k] += log_analytic_evalue(&e, z_sum);
            sum_e[k] += reading.value;
            sum_e2[k] += reading.value * reading.value;
            clamped[k] += u64::from(reading.clamped);
        }
    }
    let m = paths as f64;
    Ok((0..len)
        .map(|k| {
            let mean_e = sum_e[k] / m;
            let var = if paths > 1 { ((sum_e2[k] - m * mean_e * mean_e) / (m - 1.0)).max(0.0) } else { 0.0 };
            GrowthRow {
                n: k as u32,
                mean_log_e: sum_log[k] / m,
                mean_e,
                se_e: libm::sqrt(var / m),
                clamped: clamped[k],
            }
        })
        .collect())
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::upper_tail_inverse;

    fn std_null() -> GaussianModel {
        GaussianModel::unit(0.0).unwrap()
    }

    #[test]
    fn constant_expectation() {
        let f = LicenseFn::constant(3.25).unwrap();
        assert_eq!(null_expectation(&f, &std_null()), 3.25);
        assert_eq!(null_expectation(&f, &GaussianModel::new(-4.0, 0.1).unwrap()), 3.25);
    }

    #[test]
    fn five_percent_threshold_expectation() {
        let f = LicenseFn::all_or_nothing(1.6449, 1.0).unwrap();
        assert!((null_expectation(&f, &std_null()) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn inverse_threshold_spends_exactly_c() {
        let r = 10.0;
        for c in [0.01, 0.5, 2.0, 9.99] {
            let f = LicenseFn::all_or_nothing(upper_tail_inverse(c / r).unwrap(), r).unwrap();
            assert!((null_expectation(&f, &std_null()) - c).abs() <= 1e-10 * r);
        }
    }

    #[test]
    fn evalue_checks() {
        assert!(is_evalue(&LicenseFn::constant(1.0).unwrap(), &std_null(), 0.0));
        assert!(!is_evalue(&LicenseFn::constant(1.01).unwrap(), &std_null(), 0.0));
        // 20 * P(Z > 1.64) = 1.0100
        let f = LicenseFn::all_or_nothing(1.64, 20.0).unwrap();
        assert!(!is_evalue(&f, &std_null(), 1e-6));
        // 20 * P(Z > 1.6449) = 0.99991: just inside
        let g = LicenseFn::all_or_nothing(1.6449, 20.0).unwrap();
        assert!(is_evalue(&g, &std_null(), 0.0));
    }

    #[test]
    fn alignment_examples() {
        let (c, r) = (1.0, 4.0);
        let np = LicenseFn::all_or_nothing(upper_tail_inverse(c / r).unwrap(), r).unwrap();
        let menu = Menu::Explicit { licenses: alloc::vec![np], cost: c };
        assert!(is_incentive_aligned(&menu, &std_null(), DEFAULT_TOL));

        let sq = |r: f64| LicenseFn::all_or_nothing(upper_tail_inverse(0.05).unwrap(), r).unwrap();
        let high = Menu::Explicit { licenses: alloc::vec![sq(50.0)], cost: 1.0 };
        assert!(!is_incentive_aligned(&high, &std_null(), DEFAULT_TOL));
        let low = Menu::Explicit { licenses: alloc::vec![sq(5.0)], cost: 1.0 };
        assert!(is_incentive_aligned(&low, &std_null(), DEFAULT_TOL));
        assert!(is_incentive_aligned(&Menu::AllEValues { cost: 1.0 }, &std_null(), 0.0));
    }

    #[test]
    fn license_validation() {
        assert!(LicenseFn::new(alloc::vec![1.0, 0.0], alloc::vec![0.0, 1.0, 2.0]).is_err());
        assert!(LicenseFn::new(alloc::vec![0.0], alloc::vec![1.0, 0.5]).is_err());
        assert!(LicenseFn::new(alloc::vec![0.0], alloc::vec![-1.0, 0.5]).is_err());
        assert!(LicenseFn::new(alloc::vec![0.0], alloc::vec![1.0]).is_err());
    }

    #[test]
    fn eval_uses_left_closed_right_open_cells() {
        let f = LicenseFn::new(alloc::vec![0.0, 1.0], alloc::vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(f.eval(-0.5), 0.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(1.5), 3.0);
        assert_eq!(f.approval_threshold(), Some(0.0));
    }

    #[test]
    fn analytic_values() {
        let e = AnalyticEValue { theta1: 0.2, n: 10 };
        assert!((analytic_evalue_value(&e, 1.0).value - 1.0).abs() < 1e-15);
        let e0 = AnalyticEValue { theta1: 0.2, n: 0 };
        assert_eq!(analytic_evalue_value(&e0, 0.0).value, 1.0);
        let big = AnalyticEValue { theta1: 10.0, n: 1 };
        let r = analytic_evalue_value(&big, 1e3);
        assert!(r.clamped);
        assert_eq!(r.value, EVALUE_CLAMP);
    }

    #[test]
    fn analytic_evalue_null_mean_is_one() {
        let rows = simulate_growth(0.2, 0.0, 10, 100_000, 99).unwrap();
        for row in &rows {
            assert!((row.mean_e - 1.0).abs() <= 3.0 * row.se_e + 1e-12, "{row:?}");
        }
        assert_eq!(rows[0].mean_e, 1.0);
    }
}
