//! Replicate-parallel Monte Carlo. Replicate `i` always draws from stream
//! index `i`, so results match the sequential versions exactly.

use rayon::prelude::*;
use statcontract_core::multi_round::{
    play_episode, simulate_policy_episode, DPPolicy, EpisodeRecord, Strategy,
};
use statcontract_core::stats::RandomStream;
use statcontract_core::{Error, Result};

pub fn simulate_policy(
    policy: &DPPolicy,
    theta_true: f64,
    reps: usize,
    stream: RandomStream,
) -> Result<Vec<EpisodeRecord>> {
    if reps == 0 {
        return Err(Error::InvalidInput("need at least one replicate"));
    }
    (0..reps)
        .into_par_iter()
        .map(|i| simulate_policy_episode(policy, theta_true, stream.with_index(i as u64)))
        .collect()
}

pub fn play_episodes<S: Strategy + Sync + ?Sized>(
    strategy: &S,
    costs: &[f64],
    theta_true: f64,
    reps: usize,
    stream: RandomStream,
) -> Result<Vec<EpisodeRecord>> {
    (0..reps)
        .into_par_iter()
        .map(|i| play_episode(strategy, costs, theta_true, stream.with_index(i as u64)))
        .collect()
}
