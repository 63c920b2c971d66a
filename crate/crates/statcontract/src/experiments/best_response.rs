use statcontract_core::evalue::LicenseFn;
use statcontract_core::single_round::{expected_license, np_best_response_for, STATUS_QUO_LEVEL};
use statcontract_core::stats::GaussianModel;

use super::{Output, RunError};
use crate::config::ExperimentConfig;
use crate::format::{fmt_real, license_to_record};

pub(super) fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let theta = cfg.real("theta")?;
    let null_mean = cfg.real("null_mean")?;
    if theta <= null_mean {
        return Err(cfg.reject("theta", "a type above null_mean").into());
    }
    let sd = cfg.positive_real("sd")?;
    let cap = cfg.positive_real("cap")?;
    let ratios = cfg.reals("cost_ratios")?;
    if ratios.iter().any(|r| *r <= 0.0) {
        return Err(cfg.reject("cost_ratios", "positive ratios").into());
    }
    let null = GaussianModel::new(null_mean, sd)?;
    let alt = GaussianModel::new(theta, sd)?;
    let status_quo = LicenseFn::all_or_nothing(null.threshold_for(STATUS_QUO_LEVEL)?, cap)?;

    let mut rows = Vec::new();
    let mut records = String::from("# cost_ratio breakpoints;values\n");
    for ratio in ratios {
        let cost = ratio * cap;
        let f = np_best_response_for(&null, theta, cost, cap)?;
        let profit = expected_license(&f, &alt) - cost;
        rows.push(vec![
            fmt_real(ratio),
            fmt_real(cost),
            fmt_real(f.approval_threshold().unwrap_or(f64::NEG_INFINITY)),
            fmt_real(expected_license(&f, &null)),
            fmt_real(f.approval_probability(&alt)),
            fmt_real(profit),
            (profit > 0.0).to_string(),
            fmt_real(status_quo.approval_probability(&alt)),
            fmt_real(expected_license(&status_quo, &null) - cost),
        ]);
        records.push_str(&format!("{} {}\n", fmt_real(ratio), license_to_record(&f)));
    }
    out.csv(
        "best_response.csv",
        &[
            "cost_ratio",
            "cost",
            "threshold",
            "null_expectation",
            "power",
            "expected_profit",
            "opted_in",
            "status_quo_power",
            "status_quo_null_profit",
        ],
        rows,
    )?;
    out.write("licenses.txt", records.as_bytes())
}
