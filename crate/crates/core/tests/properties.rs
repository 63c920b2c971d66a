use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statcontract_core::evalue::{is_evalue, is_incentive_aligned, null_expectation, LicenseFn, Menu};
use statcontract_core::fda::{classify, placebo_expected_value, Money, Verdict};
use statcontract_core::multi_round::{
    backward_induction, least_concave_majorant, monotone_envelope, random_step, Action, LicenseGrid,
    PLCValue, Tabulation,
};
use statcontract_core::single_round::{agent_decide, expected_license, np_best_response, Contract};
use statcontract_core::stats::{upper_tail, upper_tail_inverse, GaussianModel};
use statcontract_core::welfare::{
    principal_utility_with, welfare_curve, TypeMixture, UtilityForm, WelfareSpec,
};

fn null() -> GaussianModel {
    GaussianModel::unit(0.0).unwrap()
}

fn license(seed: u64) -> LicenseFn {
    random_step(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random license rescaled to null expectation `mass`, capped at `cap`.
fn aligned_license(seed: u64, mass: f64, cap: f64) -> LicenseFn {
    let f = license(seed);
    let scale = (mass / null_expectation(&f, &null())).min(cap / f.max_value());
    f.scaled(scale).unwrap()
}

fn concave(v: &Tabulation) -> bool {
    let (x, y) = (v.xs(), v.ys());
    let slopes: Vec<f64> = (1..x.len()).map(|i| (y[i] - y[i - 1]) / (x[i] - x[i - 1])).collect();
    slopes.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

fn tabulation() -> impl Strategy<Value = Tabulation> {
    prop::collection::vec((0.01f64..2.0, -3.0f64..3.0), 1..25).prop_map(|steps| {
        let mut x = 0.0;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (dx, y) in steps {
            xs.push(x);
            ys.push(y);
            x += dx;
        }
        Tabulation::new(xs, ys).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tail_is_decreasing_and_symmetric(x in -30.0f64..30.0, dx in 1e-6f64..5.0) {
        prop_assert!(upper_tail(x + dx) <= upper_tail(x));
        // strict wherever the step is representable
        if x >= -5.0 {
            prop_assert!(upper_tail(x + dx) < upper_tail(x));
        }
        prop_assert!((upper_tail(x) + upper_tail(-x) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn quantile_inverts_tail(x in -6.0f64..6.0) {
        prop_assert!((upper_tail_inverse(upper_tail(x)).unwrap() - x).abs() <= 1e-8);
    }

    #[test]
    fn null_expectation_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let (f, g) = (license(s1), license(s2));
        let h = LicenseFn::combine(a, &f, b, &g).unwrap();
        let lhs = null_expectation(&h, &null());
        let rhs = a * null_expectation(&f, &null()) + b * null_expectation(&g, &null());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn concave_utility_agents_stay_out(seed in any::<u64>(), cost in 0.05f64..2.0, knots in prop::collection::vec((0.05f64..2.0, 0.0f64..2.0), 1..8)) {
        // nu(x) = P(x + C) - P(C) is concave, nondecreasing and zero at zero.
        let mut xs = vec![0.0];
        let mut slopes: Vec<f64> = knots.iter().map(|k| k.1).collect();
        slopes.sort_by(|a, b| b.total_cmp(a));
        let mut ys = vec![0.0];
        for ((dx, _), s) in knots.iter().zip(&slopes) {
            xs.push(xs.last().unwrap() + dx);
            ys.push(ys.last().unwrap() + s * dx);
        }
        let p = PLCValue::new(xs, ys).unwrap();
        let f = aligned_license(seed, cost, f64::INFINITY);
        let model = null();
        let mut e = 0.0;
        let bps = f.breakpoints();
        for (k, v) in f.values().iter().enumerate() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { bps[k - 1] };
            let hi = bps.get(k).copied().unwrap_or(f64::INFINITY);
            e += (model.prob_above(lo) - model.prob_above(hi)) * p.eval(*v);
        }
        prop_assert!(e - p.eval(cost) <= 1e-9);
    }

    #[test]
    fn neyman_pearson_dominates(seed in any::<u64>(), ratio in 0.002f64..0.9, theta in 0.1f64..3.0) {
        let (cap, cost) = (1.0, ratio);
        let np = np_best_response(0.0, theta, cost, cap).unwrap();
        let g = aligned_license(seed, cost, cap);
        let alt = GaussianModel::unit(theta).unwrap();
        prop_assert!(expected_license(&np, &alt) >= expected_license(&g, &alt) - 1e-9);
    }

    #[test]
    fn larger_menus_never_hurt(seeds in prop::collection::vec(any::<u64>(), 2..6), extra in any::<u64>(), theta in -1.0f64..3.0) {
        let cost = 0.3;
        let small: Vec<LicenseFn> = seeds.iter().map(|s| license(*s)).collect();
        let mut large = small.clone();
        large.push(license(extra));
        let cap = large.iter().map(LicenseFn::max_value).fold(1.0, f64::max);
        let a = agent_decide(theta, &Contract::new(Menu::Explicit { licenses: small, cost }, cap).unwrap());
        let b = agent_decide(theta, &Contract::new(Menu::Explicit { licenses: large, cost }, cap).unwrap());
        prop_assert!(b.expected_profit >= a.expected_profit);
    }

    #[test]
    fn alignment_iff_null_stays_out(seeds in prop::collection::vec(any::<u64>(), 1..5), cost in 0.1f64..3.0) {
        let licenses: Vec<LicenseFn> = seeds.iter().map(|s| license(*s)).collect();
        let cap = licenses.iter().map(LicenseFn::max_value).fold(cost * 2.0, f64::max);
        let menu = Menu::Explicit { licenses, cost };
        let aligned = is_incentive_aligned(&menu, &null(), 0.0);
        let d = agent_decide(0.0, &Contract::new(menu, cap).unwrap());
        prop_assert_eq!(d.opted_in, !aligned);
    }

    #[test]
    fn menu_alignment_matches_scaled_evalues(seeds in prop::collection::vec(any::<u64>(), 1..5), cost in 0.1f64..3.0) {
        let licenses: Vec<LicenseFn> = seeds.iter().map(|s| license(*s)).collect();
        let each = licenses.iter().all(|f| is_evalue(&f.scaled(1.0 / cost).unwrap(), &null(), 1e-9));
        prop_assert_eq!(is_incentive_aligned(&Menu::Explicit { licenses, cost }, &null(), 1e-9), each);
    }

    #[test]
    fn majorant_is_idempotent_and_dominates(v in tabulation()) {
        let m = least_concave_majorant(&v);
        prop_assert!(concave(&m));
        for (a, b) in m.ys().iter().zip(v.ys()) {
            prop_assert!(a >= b);
        }
        let mm = least_concave_majorant(&m);
        for (a, b) in mm.ys().iter().zip(m.ys()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn envelope_then_majorant_is_concave_nondecreasing(v in tabulation()) {
        let e = monotone_envelope(&v);
        prop_assert!(e.ys().windows(2).all(|w| w[1] >= w[0]));
        let m = least_concave_majorant(&e);
        prop_assert!(concave(&m));
        prop_assert!(m.ys().windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn welfare_is_affine_in_null_share(p in 0.0f64..0.5, q in 0.5f64..1.0, ratio in 1.5f64..80.0) {
        let contract = Contract::aligned(1.0, ratio).unwrap();
        let mid = 0.5 * (p + q);
        let rows = welfare_curve(&[p, mid, q], &contract, &WelfareSpec::high_severity(), 1.0).unwrap();
        let a = &rows;
        prop_assert!((a[1].utility_aligned - 0.5 * (a[0].utility_aligned + a[2].utility_aligned)).abs() <= 1e-9);
        prop_assert!((a[1].utility_status_quo - 0.5 * (a[0].utility_status_quo + a[2].utility_status_quo)).abs() <= 1e-9);
    }

    #[test]
    fn all_evalues_is_best_under_linear_utility(seeds in prop::collection::vec(any::<u64>(), 1..4), pi0 in 0.0f64..1.0, theta1 in 0.2f64..3.0) {
        let (cost, cap) = (0.2, 1.0);
        let licenses: Vec<LicenseFn> = seeds.iter().map(|s| aligned_license(*s, cost, cap)).collect();
        let explicit = Contract::new(Menu::Explicit { licenses, cost }, cap).unwrap();
        let all = Contract::aligned(cost, cap).unwrap();
        let q = TypeMixture::two_point(pi0, 0.0, theta1).unwrap();
        let w = WelfareSpec::high_severity();
        let u_all = principal_utility_with(&q, &all, &w, UtilityForm::Linear);
        let u_explicit = principal_utility_with(&q, &explicit, &w, UtilityForm::Linear);
        prop_assert!(u_all >= u_explicit - 1e-9);
    }

    #[test]
    fn verdicts_never_return_to_aligned(p in 0.0f64..0.1, cost_m in 1i64..500, profits in prop::collection::vec(0i64..200_000, 1..10)) {
        let cost = Money::from_millions(cost_m);
        let mut profits = profits;
        profits.sort_unstable();
        let rank = |v: Verdict| match v { Verdict::Aligned => 0, Verdict::Borderline => 1, Verdict::NotAligned => 2 };
        let ranks: Vec<u8> = profits
            .iter()
            .map(|m| rank(classify(placebo_expected_value(p, Money::from_millions(*m), cost), cost, 0.02)))
            .collect();
        prop_assert!(ranks.windows(2).all(|w| w[1] >= w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_round_dp_is_neyman_pearson(ratio in 0.002f64..0.6, theta1 in 0.3f64..2.5) {
        let grid = LicenseGrid::new(1.0, 100).unwrap();
        let policy = backward_induction(1, &[ratio], theta1, &grid).unwrap();
        let np = np_best_response(0.0, theta1, ratio, 1.0).unwrap();
        let profit = (expected_license(&np, &GaussianModel::unit(theta1).unwrap()) - ratio).max(0.0);
        prop_assert!((policy.root_value() - profit).abs() <= 1e-7);
        if let Action::Continue(u) = policy.action(0, 0) {
            prop_assert_eq!(u.grid_values(), &[0, 100][..]);
            prop_assert!((u.z_breakpoints()[0] - np.breakpoints()[0]).abs() <= 1e-6);
        }
    }

    #[test]
    fn dp_values_are_monotone(cost in 0.02f64..0.4, theta1 in 0.3f64..2.5, horizon in 1usize..5) {
        let grid = LicenseGrid::new(1.0, 40).unwrap();
        let p = backward_induction(horizon, &vec![cost; horizon], theta1, &grid).unwrap();
        for t in 0..=horizon {
            let v = p.value_table(t);
            prop_assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            for (l, x) in v.iter().enumerate() {
                prop_assert!(*x >= grid.value(l).min(1.0) - 1e-12);
                if t > 0 {
                    prop_assert!(p.value(t - 1, l) >= *x - 1e-12);
                }
            }
        }
    }
}
