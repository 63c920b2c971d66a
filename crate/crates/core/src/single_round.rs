//! The single-round contract game.
//!
//! The agent knows its type `theta`, sees the menu, and either opts out or
//! pays `C` to run a trial whose evidence is `Z ~ N(theta, sd^2)`, keeping a
//! license to at most `f(Z)` in profit (capped by the market at `R`). Against
//! the all-e-values menu the best response is the Neyman-Pearson license
//! `R * 1{z > t}` whose null expectation is exactly `C`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evalue::{LicenseFn, Menu};
use crate::stats::GaussianModel;

/// The null type in the simple game.
pub const NULL_MEAN: f64 = 0.0;

/// Level of the incentive-unaware one-sided test.
pub const STATUS_QUO_LEVEL: f64 = 0.05;

/// A menu with its market cap `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    menu: Menu,
    cap: f64,
}

impl Contract {
    pub fn new(menu: Menu, cap: f64) -> Result<Self> {
        let cost = menu.cost();
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::InvalidInput("trial cost must be positive"));
        }
        if !(cap > cost && cap.is_finite()) {
            return Err(Error::InvalidInput("market cap must exceed the trial cost"));
        }
        Ok(Self { menu, cap })
    }

    /// The all-e-values menu at cost `C` with cap `R`.
    pub fn aligned(cost: f64, cap: f64) -> Result<Self> {
        Self::new(Menu::AllEValues { cost }, cap)
    }

    /// The single status-quo license at cost `C` with cap `R`.
    pub fn status_quo(cost: f64, cap: f64) -> Result<Self> {
        Self::new(Menu::Explicit { licenses: alloc::vec![status_quo_license(cap)?], cost }, cap)
    }

    pub fn menu(&self) -> &Menu {
        &self.menu
    }

    pub fn cost(&self) -> f64 {
        self.menu.cost()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentDecision {
    pub opted_in: bool,
    pub chosen_license: Option<LicenseFn>,
    pub expected_profit: f64,
}

impl AgentDecision {
    fn opt_out() -> Self {
        Self { opted_in: false, chosen_license: None, expected_profit: 0.0 }
    }
}

/// Neyman-Pearson license for a unit-variance null at `null_mean` against
/// `alt_mean`.
pub fn np_best_response(null_mean: f64, alt_mean: f64, cost: f64, cap: f64) -> Result<LicenseFn> {
    np_best_response_for(&GaussianModel::unit(null_mean)?, alt_mean, cost, cap)
}

/// Neyman-Pearson license against an arbitrary Gaussian null; the
/// alternative shares the null's standard deviation.
pub fn np_best_response_for(null: &GaussianModel, alt_mean: f64, cost: f64, cap: f64) -> Result<LicenseFn> {
    if !(alt_mean > null.mean()) {
        return Err(Error::Domain("alternative mean must exceed the null mean"));
    }
    if !(cost > 0.0) {
        return Err(Error::Domain("trial cost must be positive"));
    }
    if !(cap > 0.0) {
        return Err(Error::Domain("market cap must be positive"));
    }
    if cost >= cap {
        return LicenseFn::constant(cap);
    }
    LicenseFn::all_or_nothing(null.threshold_for(cost / cap)?, cap)
}

/// `R * 1{z > upper_tail_inverse(0.05)}`.
pub fn status_quo_license(cap: f64) -> Result<LicenseFn> {
    if cap == 0.0 {
        return LicenseFn::constant(0.0);
    }
    if !(cap > 0.0) {
        return Err(Error::Domain("market cap must be nonnegative"));
    }
    LicenseFn::all_or_nothing(crate::stats::upper_tail_inverse(STATUS_QUO_LEVEL)?, cap)
}

/// `E_{Z ~ model}[f(Z)]`.
pub fn expected_license(f: &LicenseFn, model: &GaussianModel) -> f64 {
    f.expectation(model)
}

/// Best response of an agent of type `theta` with unit-variance evidence.
pub fn agent_decide(theta: f64, contract: &Contract) -> AgentDecision {
    agent_decide_with_sd(theta, 1.0, contract)
}

/// Best response of an agent whose evidence is `N(theta, sd^2)` against a
/// null `N(0, sd^2)`.
pub fn agent_decide_with_sd(theta: f64, sd: f64, contract: &Contract) -> AgentDecision {
    let (Ok(model), Ok(null)) = (GaussianModel::new(theta, sd), GaussianModel::new(NULL_MEAN, sd)) else {
        return AgentDecision::opt_out();
    };
    let cost = contract.cost();
    let chosen = match contract.menu() {
        Menu::AllEValues { .. } => {
            if theta <= NULL_MEAN {
                // Every aligned nondecreasing license has E_theta[f] <= C here.
                return AgentDecision::opt_out();
            }
            match np_best_response_for(&null, theta, cost, contract.cap()) {
                Ok(f) => f,
                Err(_) => return AgentDecision::opt_out(),
            }
        }
        Menu::Explicit { licenses, .. } => match best_in_menu(licenses, &model, &null) {
            Some(f) => f.clone(),
            None => return AgentDecision::opt_out(),
        },
    };
    let profit = expected_license(&chosen, &model) - cost;
    if profit > 0.0 {
        AgentDecision { opted_in: true, chosen_license: Some(chosen), expected_profit: profit }
    } else {
        AgentDecision::opt_out()
    }
}

/// Argmax of the expected license under `model`; ties go to the smaller
/// null expectation.
fn best_in_menu<'a>(
    licenses: &'a [LicenseFn],
    model: &GaussianModel,
    null: &GaussianModel,
) -> Option<&'a LicenseFn> {
    let scored: Vec<(f64, f64, &LicenseFn)> =
        licenses.iter().map(|f| (f.expectation(model), f.expectation(null), f)).collect();
    let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * best.abs().max(1.0);
    scored.into_iter().filter(|s| s.0 >= best - slack).min_by(|a, b| a.1.total_cmp(&b.1)).map(|s| s.2)
}

/// Share of approved products that are null, given approval rates for null
/// and nonnull products and the prior odds of a product being null.
pub fn posterior_null_share(null_rate: f64, nonnull_rate: f64, odds_null: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&null_rate) || !(0.0..=1.0).contains(&nonnull_rate) {
        return Err(Error::Domain("approval rates must lie in [0, 1]"));
    }
    if !(odds_null > 0.0) {
        return Err(Error::Domain("prior odds must be positive"));
    }
    let num = odds_null * null_rate;
    let den = num + nonnull_rate;
    if den == 0.0 {
        return Err(Error::UndefinedPosterior);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::upper_tail;

    fn unit(m: f64) -> GaussianModel {
        GaussianModel::unit(m).unwrap()
    }

    #[test]
    fn np_threshold_at_five_percent() {
        let f = np_best_response(0.0, 1.0, 0.05, 1.0).unwrap();
        assert!((f.breakpoints()[0] - 1.6449).abs() < 1e-4);
        assert_eq!(f.values(), &[0.0, 1.0]);
    }

    #[test]
    fn np_degenerate_level_one() {
        let f = np_best_response(0.0, 1.0, 2.0, 2.0).unwrap();
        assert!(f.breakpoints().is_empty());
        assert_eq!(f.values(), &[2.0]);
    }

    #[test]
    fn np_threshold_small_level() {
        let f = np_best_response(0.0, 1.0, 0.002, 1.0).unwrap();
        assert!((f.breakpoints()[0] - 2.878).abs() < 1e-3);
        assert!((expected_license(&f, &unit(0.0)) - 0.002).abs() < 1e-12);
    }

    #[test]
    fn np_rejects_wrong_direction() {
        assert!(matches!(np_best_response(0.0, 0.0, 0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(np_best_response(1.0, 0.5, 0.1, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn status_quo_examples() {
        let f = status_quo_license(1.0).unwrap();
        assert!((f.breakpoints()[0] - 1.6449).abs() < 1e-4);
        let zero = status_quo_license(0.0).unwrap();
        assert_eq!(zero.eval(100.0), 0.0);
        let f7 = status_quo_license(7.0).unwrap();
        assert!((expected_license(&f7, &unit(0.0)) - 0.35).abs() < 1e-12);
    }

    #[test]
    fn status_quo_power_at_one() {
        let f = status_quo_license(1.0).unwrap();
        let power = expected_license(&f, &unit(1.0));
        assert!((power - upper_tail(1.644_853_626_951_472_2 - 1.0)).abs() < 1e-12);
        assert!((power - 0.2595).abs() < 1e-4);
    }

    #[test]
    fn null_agent_opts_out_of_aligned_menu() {
        let d = agent_decide(0.0, &Contract::aligned(1.0, 50.0).unwrap());
        assert!(!d.opted_in);
        assert_eq!(d.expected_profit, 0.0);
        assert!(d.chosen_license.is_none());
    }

    #[test]
    fn null_agent_enters_high_profit_status_quo() {
        let d = agent_decide(0.0, &Contract::status_quo(1.0, 50.0).unwrap());
        assert!(d.opted_in);
        assert!((d.expected_profit - 1.5).abs() < 1e-12);
    }

    #[test]
    fn nonnull_agent_status_quo_low_profit() {
        let d = agent_decide(1.0, &Contract::status_quo(1.0, 5.0).unwrap());
        let expected = upper_tail(1.644_853_626_951_472_2 - 1.0) * 5.0 - 1.0;
        assert!((d.expected_profit - expected).abs() < 1e-12);
        assert!((d.expected_profit - 0.2977).abs() < 1e-3);
    }

    #[test]
    fn explicit_ties_prefer_smaller_null_expectation() {
        // Identical alternative expectation is hard to hit by accident; use
        // constants, which have the same expectation under every model.
        let a = LicenseFn::constant(2.0).unwrap();
        let b = LicenseFn::constant(2.0).unwrap();
        let menu = Menu::Explicit { licenses: alloc::vec![a, b], cost: 1.0 };
        let d = agent_decide(1.0, &Contract::new(menu, 3.0).unwrap());
        assert!(d.opted_in);
        assert_eq!(d.expected_profit, 1.0);
    }

    #[test]
    fn opt_out_at_exactly_zero_profit() {
        let menu = Menu::Explicit { licenses: alloc::vec![LicenseFn::constant(1.0).unwrap()], cost: 1.0 };
        let d = agent_decide(3.0, &Contract::new(menu, 2.0).unwrap());
        assert!(!d.opted_in);
    }

    #[test]
    fn posterior_examples() {
        assert!((posterior_null_share(0.05, 0.80, 20.0).unwrap() - 0.5556).abs() < 5e-5);
        assert_eq!(posterior_null_share(0.0, 0.3, 7.0).unwrap(), 0.0);
        assert!((posterior_null_share(0.005, 0.80, 20.0).unwrap() - 0.1111).abs() < 5e-5);
        assert_eq!(posterior_null_share(0.0, 0.0, 1.0), Err(Error::UndefinedPosterior));
    }

    #[test]
    fn contract_validation() {
        assert!(Contract::aligned(0.0, 1.0).is_err());
        assert!(Contract::aligned(1.0, 1.0).is_err());
        assert!(Contract::aligned(1.0, 0.5).is_err());
    }
}
