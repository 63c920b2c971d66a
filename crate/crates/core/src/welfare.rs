//! Principal's expected utility against strategic agents.
//!
//! Society pays `c1 < 0` when a null product reaches the market and gains
//! `c2 > 0` when a nonnull one does; nothing happens if the agent opts out or
//! ends with a zero license. Utilities are closed-form sums over the atoms of
//! a finite type mixture.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::single_round::{agent_decide, AgentDecision, Contract, NULL_MEAN};
use crate::stats::{self, GaussianModel, RandomStream};

/// Finite distribution over agent types.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeMixture {
    atoms: Vec<(f64, f64)>,
}

impl TypeMixture {
    /// Atoms are `(theta, weight)` pairs.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one atom"));
        }
        if atoms.iter().any(|(t, w)| !t.is_finite() || !(*w >= 0.0)) {
            return Err(Error::InvalidInput("mixture weights must be nonnegative"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("mixture weights must sum to one"));
        }
        Ok(Self { atoms })
    }

    /// `pi0 * delta(theta0) + (1 - pi0) * delta(theta1)`.
    pub fn two_point(pi0: f64, theta0: f64, theta1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi0) {
            return Err(Error::InvalidInput("null fraction must lie in [0, 1]"));
        }
        Self::new(alloc::vec![(theta0, pi0), (theta1, 1.0 - pi0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareSpec {
    cost_null: f64,
    benefit_nonnull: f64,
}

impl WelfareSpec {
    pub fn new(cost_null: f64, benefit_nonnull: f64) -> Result<Self> {
        if !(cost_null < 0.0 && benefit_nonnull > 0.0) {
            return Err(Error::InvalidInput("need c1 < 0 < c2"));
        }
        Ok(Self { cost_null, benefit_nonnull })
    }

    /// `c2 / |c1| = 10` with `|c1| = 1`.
    pub fn high_severity() -> Self {
        Self { cost_null: -1.0, benefit_nonnull: 10.0 }
    }

    /// `c2 / |c1| = 4/7` with `|c1| = 1`.
    pub fn low_severity() -> Self {
        Self { cost_null: -1.0, benefit_nonnull: 4.0 / 7.0 }
    }

    pub fn cost_null(&self) -> f64 {
        self.cost_null
    }

    pub fn benefit_nonnull(&self) -> f64 {
        self.benefit_nonnull
    }

    /// Utility of a product of type `theta` reaching the market.
    pub fn per_type(&self, theta: f64) -> f64 {
        if theta <= NULL_MEAN {
            self.cost_null
        } else {
            self.benefit_nonnull
        }
    }
}

/// How the principal's utility depends on the terminal license `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UtilityForm {
    /// `c(theta) * 1{L > 0}`: only market entry matters.
    #[default]
    Approval,
    /// `c(theta) * L / R`: affine in the license payout.
    Linear,
}

/// Expected utility contributed by one agent of type `theta`.
pub fn type_utility(theta: f64, contract: &Contract, welfare: &WelfareSpec, form: UtilityForm) -> f64 {
    let decision = agent_decide(theta, contract);
    decision_utility(theta, &decision, contract, welfare, form)
}

fn decision_utility(
    theta: f64,
    decision: &AgentDecision,
    contract: &Contract,
    welfare: &WelfareSpec,
    form: UtilityForm,
) -> f64 {
    let Some(f) = decision.chosen_license.as_ref().filter(|_| decision.opted_in) else {
        return 0.0;
    };
    let model = GaussianModel::unit(theta).expect("finite type");
    let weight = match form {
        UtilityForm::Approval => f.approval_probability(&model),
        UtilityForm::Linear => f.expectation(&model) / contract.cap(),
    };
    weight * welfare.per_type(theta)
}

/// `E_{theta ~ Q} E_{Z ~ P_theta}[u(theta, L) I]` with approval utility.
pub fn principal_utility(mixture: &TypeMixture, contract: &Contract, welfare: &WelfareSpec) -> f64 {
    principal_utility_with(mixture, contract, welfare, UtilityForm::Approval)
}

pub fn principal_utility_with(
    mixture: &TypeMixture,
    contract: &Contract,
    welfare: &WelfareSpec,
    form: UtilityForm,
) -> f64 {
    mixture
        .atoms()
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(theta, w)| w * type_utility(*theta, contract, welfare, form))
        .sum()
}

/// Monte Carlo estimate of [`principal_utility`]: `(mean, standard error)`.
/// Replicate `i` uses stream index `i` of `stream.seed`.
pub fn principal_utility_mc(
    mixture: &TypeMixture,
    contract: &Contract,
    welfare: &WelfareSpec,
    reps: u64,
    stream: RandomStream,
) -> (f64, f64) {
    let decisions: Vec<AgentDecision> =
        mixture.atoms().iter().map(|(t, _)| agent_decide(*t, contract)).collect();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for rep in 0..reps {
        let mut rng = stream.with_index(rep).rng();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = mixture.atoms().len() - 1;
        for (i, (_, w)) in mixture.atoms().iter().enumerate() {
            acc += w;
            if u < acc {
                idx = i;
                break;
            }
        }
        let theta = mixture.atoms()[idx].0;
        let d = &decisions[idx];
        let mut util = 0.0;
        if let (true, Some(f)) = (d.opted_in, d.chosen_license.as_ref()) {
            let z = stats::draw(&GaussianModel::unit(theta).expect("finite type"), &mut rng);
            if f.eval(z) > 0.0 {
                util = welfare.per_type(theta);
            }
        }
        sum += util;
        sum2 += util * util;
    }
    let n = reps as f64;
    let mean = sum / n;
    let var = if reps > 1 { ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, libm::sqrt(var / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareRow {
    pub pi0: f64,
    pub utility_aligned: f64,
    pub utility_status_quo: f64,
}

/// Utility of the all-e-values menu and of the status-quo license, at the
/// cost and cap of `contract`, over a grid of null fractions with types
/// `{0, theta1}`.
pub fn welfare_curve(
    pi0_grid: &[f64],
    contract: &Contract,
    welfare: &WelfareSpec,
    theta1: f64,
) -> Result<Vec<WelfareRow>> {
    let aligned = Contract::aligned(contract.cost(), contract.cap())?;
    let status_quo = Contract::status_quo(contract.cost(), contract.cap())?;
    pi0_grid
        .iter()
        .map(|&pi0| {
            let q = TypeMixture::two_point(pi0, NULL_MEAN, theta1)?;
            Ok(WelfareRow {
                pi0,
                utility_aligned: principal_utility(&q, &aligned, welfare),
                utility_status_quo: principal_utility(&q, &status_quo, welfare),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximinReport {
    /// Smallest utility over every two-point mixture on the grid.
    pub infimum: f64,
    /// Mixture attaining it: `(theta_a, theta_b, weight on theta_a)`.
    pub worst: (f64, f64, f64),
    pub passes: bool,
}

/// Worst-case utility over two-point mixtures drawn from `theta_grid` with
/// weights on a 101-point grid. Aligned menus have maximin value zero.
pub fn maximin_check(
    contract: &Contract,
    welfare: &WelfareSpec,
    theta_grid: &[f64],
    tol: f64,
) -> Result<MaximinReport> {
    if theta_grid.is_empty() {
        return Err(Error::InvalidInput("type grid must not be empty"));
    }
    let per_type: Vec<f64> =
        theta_grid.iter().map(|t| type_utility(*t, contract, welfare, UtilityForm::Approval)).collect();
    let mut infimum = f64::INFINITY;
    let mut worst = (theta_grid[0], theta_grid[0], 1.0);
    for (i, ui) in per_type.iter().enumerate() {
        for (j, uj) in per_type.iter().enumerate().skip(i) {
            for step in 0..=100 {
                let w = f64::from(step) / 100.0;
                let u = w * ui + (1.0 - w) * uj;
                if u < infimum {
                    infimum = u;
                    worst = (theta_grid[i], theta_grid[j], w);
                }
            }
        }
    }
    Ok(MaximinReport { infimum, worst, passes: infimum >= -tol })
}
