//! Playing the multi-round profit license.
//!
//! Each round the agent may withdraw `P(t) <= L(t-1)` and may pay `C_t` to
//! run the stage; a run moves the license to
//! `L(t) = (L(t-1) + C_t - P(t)) f_t(Z_t)`, otherwise `L(t) = L(t-1) - P(t)`.
//! Strategies hand back the next license as a function of `Z_t` directly,
//! i.e. the already scaled `(L(t-1) + C_t - P(t)) f_t`.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::dp::{Action, DPPolicy};
use crate::error::{Error, Result};
use crate::evalue::LicenseFn;
use crate::single_round::{agent_decide_with_sd, Contract};
use crate::stats::{draw, GaussianModel, MeanEstimate, RandomStream};

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub ran: bool,
    pub cost_paid: f64,
    pub withdrawal: f64,
    pub evidence: Option<f64>,
    pub license: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Rounds played before exiting, in order.
    pub rounds: Vec<RoundRecord>,
    pub terminal_license: f64,
    /// Number of rounds in which the trial ran.
    pub tau: usize,
    pub total_cost: f64,
    pub total_withdrawal: f64,
}

impl EpisodeRecord {
    /// `L + P - C`.
    pub fn profit(&self) -> f64 {
        self.terminal_license + self.total_withdrawal - self.total_cost
    }

    /// Net profit `N(t) = L(t) + P(1..t) - C(1..t)` for `t = 0..=horizon`;
    /// constant after the agent exits.
    pub fn net_profit_path(&self, horizon: usize) -> Vec<f64> {
        let mut path = Vec::with_capacity(horizon + 1);
        path.push(0.0);
        let (mut paid, mut taken) = (0.0, 0.0);
        for r in &self.rounds {
            paid += r.cost_paid;
            taken += r.withdrawal;
            path.push(r.license + taken - paid);
        }
        while path.len() <= horizon {
            let last = *path.last().expect("nonempty");
            path.push(last);
        }
        path
    }
}

pub enum RoundAction {
    /// Leave with the current license.
    Exit,
    /// Withdraw and sit the round out.
    Skip { withdrawal: f64 },
    /// Withdraw, pay, and move to `next_license(Z_t)`.
    Run { withdrawal: f64, next_license: LicenseFn },
}

/// An agent strategy; `round` is 1-based and `license` is `L(round - 1)`.
pub trait Strategy {
    fn act(&self, round: usize, license: f64, rng: &mut ChaCha8Rng) -> RoundAction;
}

/// Play one episode of at most `costs.len()` rounds with evidence from
/// `N(theta_true, 1)`.
pub fn play_episode<S: Strategy + ?Sized>(
    strategy: &S,
    costs: &[f64],
    theta_true: f64,
    stream: RandomStream,
) -> Result<EpisodeRecord> {
    let model = GaussianModel::unit(theta_true)?;
    let mut rng = stream.rng();
    let mut license = 0.0_f64;
    let mut rounds = Vec::with_capacity(costs.len());
    let (mut tau, mut total_cost, mut total_withdrawal) = (0, 0.0, 0.0);
    for (i, cost) in costs.iter().enumerate() {
        let action = strategy.act(i + 1, license, &mut rng);
        let (withdrawal, run) = match action {
            RoundAction::Exit => break,
            RoundAction::Skip { withdrawal } => (withdrawal, None),
            RoundAction::Run { withdrawal, next_license } => (withdrawal, Some(next_license)),
        };
        if !(withdrawal >= 0.0 && withdrawal <= license) {
            return Err(Error::InvalidInput("withdrawal must lie in [0, L(t-1)]"));
        }
        total_withdrawal += withdrawal;
        let record = match run {
            Some(next) => {
                let z = draw(&model, &mut rng);
                license = next.eval(z);
                tau += 1;
                total_cost += cost;
                RoundRecord { ran: true, cost_paid: *cost, withdrawal, evidence: Some(z), license }
            }
            None => {
                license -= withdrawal;
                RoundRecord { ran: false, cost_paid: 0.0, withdrawal, evidence: None, license }
            }
        };
        rounds.push(record);
    }
    Ok(EpisodeRecord { rounds, terminal_license: license, tau, total_cost, total_withdrawal })
}

impl Strategy for DPPolicy {
    fn act(&self, round: usize, license: f64, _rng: &mut ChaCha8Rng) -> RoundAction {
        let level = self.grid().nearest_level(license);
        match self.action(round - 1, level) {
            Action::Stop => RoundAction::Exit,
            Action::Continue(update) => RoundAction::Run {
                withdrawal: 0.0,
                next_license: update.to_license(self.grid()).expect("grid levels are valid"),
            },
        }
    }
}

/// Episodes of the DP policy; replicate `i` uses stream index `i`.
pub fn simulate_policy(
    policy: &DPPolicy,
    theta_true: f64,
    reps: usize,
    stream: RandomStream,
) -> Result<Vec<EpisodeRecord>> {
    if reps == 0 {
        return Err(Error::InvalidInput("need at least one replicate"));
    }
    (0..reps).map(|i| simulate_policy_episode(policy, theta_true, stream.with_index(i as u64))).collect()
}

pub fn simulate_policy_episode(
    policy: &DPPolicy,
    theta_true: f64,
    stream: RandomStream,
) -> Result<EpisodeRecord> {
    play_episode(policy, policy.costs(), theta_true, stream)
}

/// A random strategy whose every update is a (scaled) e-value for the
/// standard normal null, with random withdrawals, skips and exits.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedStrategy {
    rounds: Vec<RandomRound>,
}

#[derive(Debug, Clone, PartialEq)]
struct RandomRound {
    cost: f64,
    exit_prob: f64,
    skip_prob: f64,
    withdraw_frac: f64,
    // null expectation <= 1
    update: LicenseFn,
}

impl RandomizedStrategy {
    /// Strategy for rounds costing `costs`.
    pub fn generate(costs: &[f64], stream: RandomStream) -> Self {
        let mut rng = stream.rng();
        let null = GaussianModel::unit(0.0).expect("valid");
        let rounds = costs
            .iter()
            .map(|&cost| {
                let update = random_step(&mut rng);
                let mass = rng.random_range(0.9..=1.0);
                let scale = mass / update.expectation(&null);
                RandomRound {
                    cost,
                    exit_prob: rng.random_range(0.0..0.3),
                    skip_prob: rng.random_range(0.0..0.2),
                    withdraw_frac: rng.random_range(0.05..0.6),
                    update: update.scaled(scale).expect("nonnegative scale"),
                }
            })
            .collect();
        Self { rounds }
    }

    /// Null expectations of the per-round update factors.
    pub fn update_masses(&self) -> Vec<f64> {
        let null = GaussianModel::unit(0.0).expect("valid");
        self.rounds.iter().map(|r| r.update.expectation(&null)).collect()
    }
}

/// Random nondecreasing step function with 1 to 4 breakpoints and a
/// positive top value.
pub fn random_step<R: Rng + ?Sized>(rng: &mut R) -> LicenseFn {
    let k = rng.random_range(1..=4);
    let mut bps: Vec<f64> = (0..k).map(|_| rng.random_range(-1.5..3.0)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut values = Vec::with_capacity(bps.len() + 1);
    let mut v: f64 = rng.random_range(0.0..0.5);
    values.push(v);
    for _ in 0..bps.len() {
        v += rng.random_range(0.0..3.0);
        values.push(v);
    }
    if v == 0.0 {
        *values.last_mut().expect("nonempty") = 1.0;
    }
    LicenseFn::new(bps, values).expect("sorted breakpoints, nondecreasing values")
}

impl Strategy for RandomizedStrategy {
    fn act(&self, round: usize, license: f64, rng: &mut ChaCha8Rng) -> RoundAction {
        let r = &self.rounds[round - 1];
        let u: f64 = rng.random();
        if u < r.exit_prob {
            return RoundAction::Exit;
        }
        let withdrawal = r.withdraw_frac * license;
        if u < r.exit_prob + r.skip_prob {
            return RoundAction::Skip { withdrawal };
        }
        RoundAction::Run {
            withdrawal,
            next_license: r
                .update
                .scaled((license - withdrawal).max(0.0) + r.cost)
                .expect("nonnegative stake"),
        }
    }
}

/// Plays only round `stage` with update factor `update`, then exits.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleStageStrategy {
    pub stage: usize,
    pub cost: f64,
    pub update: LicenseFn,
}

impl Strategy for SingleStageStrategy {
    fn act(&self, round: usize, license: f64, _rng: &mut ChaCha8Rng) -> RoundAction {
        if round < self.stage {
            RoundAction::Skip { withdrawal: 0.0 }
        } else if round == self.stage {
            RoundAction::Run {
                withdrawal: 0.0,
                next_license: self.update.scaled(license + self.cost).expect("positive stake"),
            }
        } else {
            RoundAction::Exit
        }
    }
}

/// One-shot agent that best-responds to the all-e-values menu with
/// evidence `N(theta, sd^2)` at cost `cost` and cap `cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRoundAgent {
    pub sd: f64,
    pub cost: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRoundOutcome {
    pub opted_in: bool,
    pub license: f64,
    pub cost: f64,
}

impl OneRoundOutcome {
    pub fn profit(&self) -> f64 {
        self.license - self.cost
    }
}

impl OneRoundAgent {
    /// Exact expected profit of the agent believing (correctly) in `theta`.
    pub fn expected_profit(&self, theta: f64) -> Result<f64> {
        let contract = Contract::aligned(self.cost, self.cap)?;
        Ok(agent_decide_with_sd(theta, self.sd, &contract).expected_profit)
    }

    /// Outcomes when the agent plans for `theta_plan` and the truth is
    /// `theta_true`; replicate `i` uses stream index `i`.
    pub fn simulate(
        &self,
        theta_plan: f64,
        theta_true: f64,
        reps: usize,
        stream: RandomStream,
    ) -> Result<Vec<OneRoundOutcome>> {
        let contract = Contract::aligned(self.cost, self.cap)?;
        let decision = agent_decide_with_sd(theta_plan, self.sd, &contract);
        let model = GaussianModel::new(theta_true, self.sd)?;
        Ok((0..reps)
            .map(|i| match decision.chosen_license.as_ref().filter(|_| decision.opted_in) {
                Some(f) => {
                    let mut rng = stream.with_index(i as u64).rng();
                    let z = draw(&model, &mut rng);
                    OneRoundOutcome { opted_in: true, license: f.eval(z), cost: self.cost }
                }
                None => OneRoundOutcome { opted_in: false, license: 0.0, cost: 0.0 },
            })
            .collect())
    }
}

/// Mean profit over episodes.
pub fn mean_profit(episodes: &[EpisodeRecord]) -> MeanEstimate {
    let xs: Vec<f64> = episodes.iter().map(EpisodeRecord::profit).collect();
    MeanEstimate::from_samples(&xs)
}
