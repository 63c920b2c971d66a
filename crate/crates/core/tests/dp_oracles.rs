mod support;

use statcontract_core::multi_round::{
    backward_induction, backward_induction_with, optimal_step, Action, DiscreteEvidence, DiscreteSolver,
    LicenseGrid, PLCValue, Tabulation,
};
use statcontract_core::single_round::{expected_license, np_best_response};
use statcontract_core::stats::GaussianModel;
use support::brute_force::{enumerate_values, monotone_sequences};

#[test]
fn monotone_sequence_count() {
    // stars and bars: C(len + top, top)
    assert_eq!(monotone_sequences(21, 5).len(), 65_780);
    assert_eq!(monotone_sequences(3, 1).len(), 4);
}

fn check_enumeration(lo: f64, hi: f64, theta1: f64, cap: f64, costs: &[f64]) {
    let evidence = DiscreteEvidence::uniform(lo, hi, 21, theta1).unwrap();
    let grid = LicenseGrid::new(cap, 5).unwrap();
    let policy =
        backward_induction_with(&DiscreteSolver::new(evidence.clone()), costs.len(), costs, &grid).unwrap();
    let oracle = enumerate_values(&evidence, costs, &grid);
    for (t, row) in oracle.iter().enumerate() {
        assert_eq!(policy.value_table(t), row.as_slice(), "stage {t}");
    }
}

#[test]
fn discrete_dp_matches_enumeration() {
    check_enumeration(-3.0, 5.0, 1.0, 1.0, &[0.1, 0.1]);
}

#[test]
fn discrete_dp_matches_enumeration_uneven_costs() {
    check_enumeration(-2.0, 4.0, 0.5, 2.0, &[0.05, 0.3]);
}

#[test]
fn single_round_dp_is_neyman_pearson() {
    let grid = LicenseGrid::new(1.0, 100).unwrap();
    for ratio in [0.002, 0.05, 0.2] {
        for theta1 in [0.5, 1.0, 1.645] {
            let policy = backward_induction(1, &[ratio], theta1, &grid).unwrap();
            let np = np_best_response(0.0, theta1, ratio, 1.0).unwrap();
            let profit = expected_license(&np, &GaussianModel::unit(theta1).unwrap()) - ratio;
            assert!((policy.root_value() - profit).abs() <= grid.epsilon(), "C/R {ratio} theta {theta1}");
            let Action::Continue(update) = policy.action(0, 0) else { panic!("should play") };
            let cell = grid.epsilon() / 1.0;
            assert!((update.z_breakpoints()[0] - np.breakpoints()[0]).abs() <= cell.max(1e-8));
        }
    }
}

#[test]
fn refinement_never_lowers_value() {
    let mut previous = f64::NEG_INFINITY;
    let mut gaps = Vec::new();
    for levels in [25, 50, 100, 200, 400] {
        let grid = LicenseGrid::new(1.0, levels).unwrap();
        let v = backward_induction(5, &[0.1; 5], 1.645, &grid).unwrap().root_value();
        assert!(v >= previous - 1e-9, "K = {levels}: {v} < {previous}");
        if previous.is_finite() {
            gaps.push(v - previous);
        }
        previous = v;
    }
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9), "gaps {gaps:?}");
}

// Raw continuation values with dips and plateaus on a 21-point grid.
fn bumpy(grid: &LicenseGrid, seed: u64) -> Vec<f64> {
    let mut state = seed;
    (0..=grid.levels())
        .map(|i| {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            let noise = (state >> 11) as f64 / (1u64 << 53) as f64;
            grid.value(i).sqrt() * 0.8 + 0.3 * noise - 0.1
        })
        .collect()
}

#[test]
fn concave_reduction_loses_no_value() {
    let grid = LicenseGrid::new(1.0, 20).unwrap();
    for seed in 0..20 {
        let raw = bumpy(&grid, seed);
        let tab = Tabulation::new(grid.values(), raw.clone()).unwrap();
        let reduced = PLCValue::concavify(&tab).unwrap().values().to_vec();
        for budget in [0.05, 0.2, 0.5] {
            let (update, value) = optimal_step(&raw, 1.0, budget, &grid).unwrap();
            let alt = GaussianModel::unit(1.0).unwrap();
            let under_reduced = update.expectation_of(&reduced, &alt);
            assert!((value - under_reduced).abs() < 1e-10, "seed {seed} budget {budget}");
        }
    }
}

#[test]
fn analytic_step_beats_every_cell_license() {
    // Every nondecreasing assignment of 6 grid levels to 21 evidence cells,
    // priced exactly under the Gaussian laws.
    let grid = LicenseGrid::new(1.0, 5).unwrap();
    let evidence = DiscreteEvidence::uniform(-3.0, 5.0, 21, 1.0).unwrap();
    let seqs = monotone_sequences(21, 5);
    for seed in [3, 11] {
        let raw = bumpy(&grid, seed);
        for budget in [0.1, 0.3] {
            let (_, analytic) = optimal_step(&raw, 1.0, budget, &grid).unwrap();
            let mut best = f64::NEG_INFINITY;
            for s in &seqs {
                let cost: f64 = s.iter().zip(evidence.null_probs()).map(|(a, q)| q * grid.value(*a)).sum();
                if cost <= budget {
                    let v: f64 = s.iter().zip(evidence.alt_probs()).map(|(a, q)| q * raw[*a]).sum();
                    best = best.max(v);
                }
            }
            assert!(best <= analytic + 1e-9, "seed {seed} budget {budget}: {best} > {analytic}");
            assert!(analytic - best < 0.05, "cell licenses should come close");
        }
    }
}
