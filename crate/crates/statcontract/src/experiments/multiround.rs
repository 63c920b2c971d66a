//! Multi-round agent against one-round agents with one and several rounds'
//! worth of data.

use statcontract_core::multi_round::{
    backward_induction, DPPolicy, EpisodeRecord, LicenseGrid, OneRoundAgent,
};
use statcontract_core::stats::{MeanEstimate, RandomStream};

use super::{tag, Output, RunError};
use crate::config::ExperimentConfig;
use crate::format::{fmt_real, policy_rows, write_policy};
use crate::parallel::simulate_policy;
use crate::svg::{Plot, Series};

/// Agents compared in one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub horizon: usize,
    pub round_cost: f64,
    pub cap: f64,
    pub levels: usize,
    pub pooled_factor: f64,
}

impl Setup {
    /// Five rounds at 0.1 each, 100 license levels, pooled agent with five
    /// rounds of data.
    pub fn standard(cap: f64) -> Self {
        Self { horizon: 5, round_cost: 0.1, cap, levels: 100, pooled_factor: 5.0 }
    }

    pub fn costs(&self) -> Vec<f64> {
        vec![self.round_cost; self.horizon]
    }

    pub fn single(&self) -> OneRoundAgent {
        OneRoundAgent { sd: 1.0, cost: self.round_cost, cap: self.cap }
    }

    pub fn pooled(&self) -> OneRoundAgent {
        OneRoundAgent {
            sd: 1.0 / self.pooled_factor.sqrt(),
            cost: self.pooled_factor * self.round_cost,
            cap: self.cap,
        }
    }

    pub fn policy(&self, theta1: f64) -> Result<DPPolicy, RunError> {
        let grid = LicenseGrid::new(self.cap, self.levels)?;
        Ok(backward_induction(self.horizon, &self.costs(), theta1, &grid)?)
    }
}

/// Simulated outcomes of the three agents planning for `theta1` while the
/// truth is `theta_true`.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// `None` when the planned alternative is not positive: the agent never
    /// plays.
    pub policy: Option<DPPolicy>,
    pub episodes: Vec<EpisodeRecord>,
    pub multi_round: MeanEstimate,
    pub single: MeanEstimate,
    pub pooled: MeanEstimate,
    pub single_licenses: Vec<f64>,
    pub pooled_licenses: Vec<f64>,
}

/// Seed for one (cap, alternative, agent) cell.
fn cell_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(seed, |acc, p| {
        let mut z = acc ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

pub fn compare_agents(
    setup: &Setup,
    theta1: f64,
    theta_true: f64,
    reps: usize,
    seed: u64,
) -> Result<Comparison, RunError> {
    let stream = |agent: u64| {
        RandomStream::new(
            cell_seed(seed, &[setup.cap.to_bits(), theta1.to_bits(), theta_true.to_bits(), agent]),
            0,
        )
    };
    let (policy, episodes) = if theta1 > 0.0 {
        let policy = setup.policy(theta1)?;
        let episodes = simulate_policy(&policy, theta_true, reps, stream(0))?;
        (Some(policy), episodes)
    } else {
        (None, Vec::new())
    };
    let profits: Vec<f64> = if episodes.is_empty() {
        vec![0.0; reps]
    } else {
        episodes.iter().map(EpisodeRecord::profit).collect()
    };
    let single = setup.single().simulate(theta1, theta_true, reps, stream(1))?;
    let pooled = setup.pooled().simulate(theta1, theta_true, reps, stream(2))?;
    let profit = |o: &[statcontract_core::multi_round::OneRoundOutcome]| {
        MeanEstimate::from_samples(&o.iter().map(|x| x.profit()).collect::<Vec<_>>())
    };
    Ok(Comparison {
        multi_round: MeanEstimate::from_samples(&profits),
        single: profit(&single),
        pooled: profit(&pooled),
        single_licenses: single.iter().map(|o| o.license).collect(),
        pooled_licenses: pooled.iter().map(|o| o.license).collect(),
        policy,
        episodes,
    })
}

/// `(value, count)` pairs in increasing value order.
fn histogram(xs: impl Iterator<Item = f64>) -> Vec<(f64, usize)> {
    let mut sorted: Vec<f64> = xs.collect();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for x in sorted {
        match out.last_mut() {
            Some((v, n)) if *v == x => *n += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let horizon = cfg.positive_count("horizon")?;
    let round_cost = cfg.positive_real("round_cost")?;
    let levels = cfg.positive_count("levels")?;
    let pooled_factor = cfg.positive_real("pooled_factor")?;
    let caps = cfg.reals("caps")?;
    if caps.iter().any(|c| *c <= 0.0) {
        return Err(cfg.reject("caps", "positive caps").into());
    }
    let grid = cfg.reals("theta1_grid")?;
    let focus = cfg.positive_real("focus_theta1")?;
    let reps = cfg.positive_count("reps")?;
    let seed = cfg.seed()?;

    let mut null_rows = Vec::new();
    for cap in caps {
        let setup = Setup { horizon, round_cost, cap, levels, pooled_factor };
        let stem = |name: &str| format!("{name}_cap{}", tag(cap));

        let mut rows = Vec::new();
        let mut curves: [Vec<(f64, f64)>; 3] = Default::default();
        for &theta1 in &grid {
            let c = compare_agents(&setup, theta1, theta1, reps, seed)?;
            let exact_multi = c.policy.as_ref().map_or(0.0, DPPolicy::root_value);
            rows.push(vec![
                fmt_real(theta1),
                fmt_real(c.multi_round.mean),
                fmt_real(c.multi_round.se),
                fmt_real(c.single.mean),
                fmt_real(c.single.se),
                fmt_real(c.pooled.mean),
                fmt_real(c.pooled.se),
                fmt_real(exact_multi),
                fmt_real(setup.single().expected_profit(theta1)?),
                fmt_real(setup.pooled().expected_profit(theta1)?),
            ]);
            curves[0].push((theta1, c.multi_round.mean));
            curves[1].push((theta1, c.single.mean));
            curves[2].push((theta1, c.pooled.mean));
        }
        out.csv(
            &format!("{}.csv", stem("profit")),
            &[
                "theta1",
                "multi_round",
                "multi_round_se",
                "one_round",
                "one_round_se",
                "pooled",
                "pooled_se",
                "multi_round_exact",
                "one_round_exact",
                "pooled_exact",
            ],
            rows,
        )?;

        let c = compare_agents(&setup, focus, focus, reps, seed)?;
        let policy = c.policy.as_ref().expect("focus alternative is positive");
        let mut terminal = Vec::new();
        for (agent, xs) in [
            ("multi_round", c.episodes.iter().map(|e| e.terminal_license).collect::<Vec<_>>()),
            ("one_round", c.single_licenses.clone()),
            ("pooled", c.pooled_licenses.clone()),
        ] {
            for (v, n) in histogram(xs.into_iter()) {
                terminal.push(vec![agent.to_owned(), fmt_real(v), n.to_string()]);
            }
        }
        out.csv(
            &format!("{}.csv", stem("terminal_license")),
            &["agent", "terminal_license", "count"],
            terminal,
        )?;
        let mut taus = vec![0usize; horizon + 1];
        for e in &c.episodes {
            taus[e.tau] += 1;
        }
        out.csv(
            &format!("{}.csv", stem("rounds")),
            &["tau", "count"],
            taus.iter().enumerate().map(|(t, n)| vec![t.to_string(), n.to_string()]),
        )?;
        out.csv(
            &format!("{}.csv", stem("episodes")),
            &["rep", "tau", "terminal_license", "total_cost", "profit"],
            c.episodes.iter().enumerate().map(|(i, e)| {
                vec![
                    i.to_string(),
                    e.tau.to_string(),
                    fmt_real(e.terminal_license),
                    fmt_real(e.total_cost),
                    fmt_real(e.profit()),
                ]
            }),
        )?;
        let mut policy_text = Vec::new();
        write_policy(&policy_rows(policy), &mut policy_text)?;
        out.write(&format!("{}.csv", stem("policy")), &policy_text)?;

        let n = compare_agents(&setup, focus, 0.0, reps, seed)?;
        for (agent, m) in [("multi_round", n.multi_round), ("one_round", n.single), ("pooled", n.pooled)] {
            null_rows.push(vec![fmt_real(cap), agent.to_owned(), fmt_real(m.mean), fmt_real(m.se)]);
        }

        let [multi, single, pooled] = curves;
        out.svg(
            &format!("{}.svg", stem("profit")),
            &Plot::new(format!("Agent profit, R = {}", tag(cap)), "alternative theta1", "mean profit")
                .with(Series::line(format!("{horizon}-round"), multi))
                .with(Series::line("one round", single))
                .with(Series::line(format!("one round, {}x data", tag(pooled_factor)), pooled)),
        )?;
        out.svg(
            &format!("{}.svg", stem("rounds")),
            &Plot::new(format!("Rounds used, theta1 = {}", tag(focus)), "rounds", "episodes").with(
                Series::step(
                    "multi-round",
                    taus.iter().enumerate().map(|(t, n)| (t as f64, *n as f64)).collect(),
                ),
            ),
        )?;
    }
    out.csv("null_profit.csv", &["cap", "agent", "mean_profit", "se"], null_rows)?;
    Ok(())
}
