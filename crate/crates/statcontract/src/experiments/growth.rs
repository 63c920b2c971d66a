use statcontract_core::evalue::{
    analytic_evalue_value, log_analytic_evalue, ols_slope, simulate_growth, AnalyticEValue, GrowthRow,
};
use statcontract_core::stats::{draw, GaussianModel, RandomStream};

use super::{Output, RunError};
use crate::config::ExperimentConfig;
use crate::format::fmt_real;
use crate::svg::{Plot, Series};

/// Seed offset separating null paths from alternative paths.
const NULL_SEED_OFFSET: u64 = 1;

const HEADER: [&str; 5] = ["n", "mean_log_e", "mean_e", "se_e", "clamped"];

fn table(rows: &[GrowthRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            fmt_real(r.mean_log_e),
            fmt_real(r.mean_e),
            fmt_real(r.se_e),
            r.clamped.to_string(),
        ]
    })
}

pub(super) fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let theta1 = cfg.positive_real("theta1")?;
    let max_n = u32::try_from(cfg.count("max_n")?).map_err(|_| cfg.reject("max_n", "at most 2^32 - 1"))?;
    let paths = cfg.positive_count("reps")? as u64;
    let sample_paths = cfg.count("sample_paths")?;
    let seed = cfg.seed()?;

    let alt = simulate_growth(theta1, theta1, max_n, paths, seed)?;
    let null = simulate_growth(theta1, 0.0, max_n, paths, seed.wrapping_add(NULL_SEED_OFFSET))?;
    out.csv("growth_alternative.csv", &HEADER, table(&alt))?;
    out.csv("growth_null.csv", &HEADER, table(&null))?;

    let model = GaussianModel::unit(theta1)?;
    let mut path_rows = Vec::new();
    let mut path_series = Vec::new();
    for i in 0..sample_paths {
        let mut rng = RandomStream::new(seed, i as u64).rng();
        let mut z_sum = 0.0;
        let mut points = Vec::new();
        for n in 0..=max_n {
            if n > 0 {
                z_sum += draw(&model, &mut rng);
            }
            let e = AnalyticEValue { theta1, n };
            let log_e = log_analytic_evalue(&e, z_sum);
            path_rows.push(vec![
                i.to_string(),
                n.to_string(),
                fmt_real(analytic_evalue_value(&e, z_sum).value),
                fmt_real(log_e),
            ]);
            points.push((f64::from(n), log_e));
        }
        path_series.push(Series::line(format!("path {i}"), points));
    }
    out.csv("sample_paths.csv", &["path", "n", "e", "log_e"], path_rows)?;

    let fitted: Vec<&GrowthRow> = alt.iter().filter(|r| r.n >= 1).collect();
    let slope = if fitted.len() >= 2 {
        let xs: Vec<f64> = fitted.iter().map(|r| f64::from(r.n)).collect();
        let ys: Vec<f64> = fitted.iter().map(|r| r.mean_log_e).collect();
        ols_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let target = theta1 * theta1 / 2.0;
    let null_bounded = null.iter().all(|r| r.mean_e <= 1.0 + 3.0 * r.se_e);
    out.csv(
        "growth_summary.csv",
        &["theta1", "slope", "target_slope", "relative_error", "null_mean_e_within_3se"],
        [vec![
            fmt_real(theta1),
            fmt_real(slope),
            fmt_real(target),
            fmt_real((slope - target).abs() / target),
            null_bounded.to_string(),
        ]],
    )?;

    let mut plot = Plot::new(format!("log e-value, theta1 = {}", fmt_real(theta1)), "sample size n", "log E")
        .with(Series::line("mean log E", alt.iter().map(|r| (f64::from(r.n), r.mean_log_e)).collect()));
    for s in path_series {
        plot = plot.with(s);
    }
    out.svg("growth.svg", &plot)?;
    Ok(())
}
