//! Multi-round profit licenses: concave reductions, the Lagrangian
//! single-step optimizer, backward induction on a license grid, episode
//! simulation and the net-profit supermartingale check.

pub mod concave;
pub mod discrete;
pub mod dp;
pub mod martingale;
pub mod simulate;
pub mod step;

pub use concave::{least_concave_majorant, monotone_envelope, PLCValue, Tabulation};
pub use discrete::{DiscreteEvidence, DiscreteSolver};
pub use dp::{backward_induction, backward_induction_with, Action, AnalyticSolver, DPPolicy, StepSolver};
pub use martingale::{supermartingale_check, SupermartingaleReport};
pub use simulate::{
    mean_profit, play_episode, random_step, simulate_policy, simulate_policy_episode, EpisodeRecord,
    OneRoundAgent, OneRoundOutcome, RandomizedStrategy, RoundAction, RoundRecord, SingleStageStrategy,
    Strategy,
};
pub use step::{
    alt_expectation_of_update, alt_value_of_update, null_expectation_of_update, optimal_step,
    pointwise_update, solve_lambda, update_breakpoints, LicenseGrid, StepUpdate,
};
