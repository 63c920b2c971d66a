use statcontract_core::single_round::Contract;
use statcontract_core::welfare::{welfare_curve, WelfareSpec};

use super::{tag, Output, RunError};
use crate::config::ExperimentConfig;
use crate::format::fmt_real;
use crate::svg::{Plot, Series};

pub(super) fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), RunError> {
    let cost = cfg.positive_real("cost")?;
    let theta1 = cfg.positive_real("theta1")?;
    let ratios = cfg.reals("ratios")?;
    if ratios.iter().any(|r| *r <= 1.0) {
        return Err(cfg.reject("ratios", "every market-cap ratio above 1").into());
    }
    let welfare = match cfg.raw("severity") {
        "high" => WelfareSpec::high_severity(),
        "low" => WelfareSpec::low_severity(),
        _ => return Err(cfg.reject("severity", "high or low").into()),
    };
    let points = cfg.positive_count("pi0_points")?;
    let grid: Vec<f64> =
        if points == 1 { vec![0.0] } else { (0..points).map(|i| i as f64 / (points - 1) as f64).collect() };

    for ratio in ratios {
        let contract = Contract::aligned(cost, ratio * cost)?;
        let rows = welfare_curve(&grid, &contract, &welfare, theta1)?;
        let stem = format!("welfare_rc{}", tag(ratio));
        out.csv(
            &format!("{stem}.csv"),
            &["pi0", "utility_aligned", "utility_status_quo"],
            rows.iter()
                .map(|r| vec![fmt_real(r.pi0), fmt_real(r.utility_aligned), fmt_real(r.utility_status_quo)]),
        )?;
        let plot = Plot::new(
            format!("Principal utility, R/C = {}", tag(ratio)),
            "fraction of null agents",
            "expected utility",
        )
        .with(Series::line("incentive-aligned", rows.iter().map(|r| (r.pi0, r.utility_aligned)).collect()))
        .with(Series::line("status quo", rows.iter().map(|r| (r.pi0, r.utility_status_quo)).collect()));
        out.svg(&format!("{stem}.svg"), &plot)?;
    }
    Ok(())
}
