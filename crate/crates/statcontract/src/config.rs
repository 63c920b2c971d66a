//! Experiment configuration: flat `key = value` lines with `#` comments.
//!
//! Each experiment has a fixed key set with defaults; any other key is an
//! error. The resolved configuration is echoed into the run manifest, which
//! is itself a valid configuration file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Welfare,
    FdaAudit,
    EvalueGrowth,
    Multiround,
    BestResponse,
}

/// `(key, default, description)`.
type KeySpec = (&'static str, &'static str, &'static str);

const COMMON_KEYS: &[KeySpec] = &[
    ("seed", "20240601", "base seed of the random streams"),
    ("reps", "10000", "Monte Carlo replicates"),
    ("out", "out", "output directory"),
    ("plots", "true", "write SVG plots"),
];

const WELFARE_KEYS: &[KeySpec] = &[
    ("ratios", "5,50", "market cap over trial cost, one panel each"),
    ("cost", "1", "trial cost C"),
    ("theta1", "1", "nonnull type"),
    ("severity", "high", "high (c2/|c1| = 10) or low (c2/|c1| = 4/7)"),
    ("pi0_points", "101", "points of the null-fraction grid on [0, 1]"),
];

const AUDIT_KEYS: &[KeySpec] = &[
    ("cost", "50000000", "trial cost in dollars"),
    ("profits", "1000000000,10000000000,100000000000", "profits if approved, in dollars"),
    ("protocols", "builtin", "builtin, or name:probability pairs separated by commas"),
    ("band", "0.02", "borderline band as a fraction of cost"),
    ("reference", "builtin", "builtin, none, or a reference CSV path"),
];

const GROWTH_KEYS: &[KeySpec] = &[
    ("theta1", "0.2", "alternative of the e-value"),
    ("max_n", "500", "largest sample size"),
    ("sample_paths", "5", "individual paths written out"),
];

const MULTIROUND_KEYS: &[KeySpec] = &[
    ("horizon", "5", "rounds T"),
    ("round_cost", "0.1", "cost C_t of each round"),
    ("caps", "1,5", "market caps R, one profit curve each"),
    ("levels", "100", "license grid levels K"),
    ("theta1_grid", "0.25,0.5,0.75,1,1.25,1.5,1.645,2,2.5,3", "alternatives for the profit curves"),
    ("focus_theta1", "1.645", "alternative for the license and rounds histograms"),
    ("pooled_factor", "5", "data multiple of the pooled one-round agent"),
];

const BEST_RESPONSE_KEYS: &[KeySpec] = &[
    ("theta", "1", "agent type"),
    ("null_mean", "0", "null type"),
    ("sd", "1", "standard deviation of the evidence"),
    ("cap", "1", "market cap R"),
    ("cost_ratios", "0.002,0.05,0.2", "trial cost over market cap"),
];

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Welfare,
        Experiment::FdaAudit,
        Experiment::EvalueGrowth,
        Experiment::Multiround,
        Experiment::BestResponse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Welfare => "welfare",
            Experiment::FdaAudit => "fda-audit",
            Experiment::EvalueGrowth => "evalue-growth",
            Experiment::Multiround => "multiround",
            Experiment::BestResponse => "best-response",
        }
    }

    fn own_keys(self) -> &'static [KeySpec] {
        match self {
            Experiment::Welfare => WELFARE_KEYS,
            Experiment::FdaAudit => AUDIT_KEYS,
            Experiment::EvalueGrowth => GROWTH_KEYS,
            Experiment::Multiround => MULTIROUND_KEYS,
            Experiment::BestResponse => BEST_RESPONSE_KEYS,
        }
    }

    /// Every accepted key with its default and description.
    pub fn keys(self) -> impl Iterator<Item = &'static KeySpec> {
        COMMON_KEYS.iter().chain(self.own_keys())
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_owned()))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("unknown key {key:?} for experiment {experiment}")]
    UnknownKey { key: String, experiment: Experiment },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("key {key:?}: invalid value {value:?} ({expected})")]
    Invalid { key: String, value: String, expected: String },
    #[error("config names experiment {found:?} but the command is {expected}")]
    ExperimentMismatch { found: String, expected: Experiment },
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
}

/// Resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    experiment: Experiment,
    params: BTreeMap<&'static str, String>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let params = experiment.keys().map(|(k, v, _)| (*k, (*v).to_owned())).collect();
        Self { experiment, params }
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let slot =
            self.experiment.keys().find(|(k, _, _)| *k == key).map(|(k, _, _)| *k).ok_or_else(|| {
                ConfigError::UnknownKey { key: key.to_owned(), experiment: self.experiment }
            })?;
        self.params.insert(slot, value.trim().to_owned());
        Ok(())
    }

    /// Applies `key = value` lines; an `experiment` line must name this
    /// experiment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, _)| !k.is_empty())
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_owned() })?;
            if key == "experiment" {
                if value != self.experiment.name() {
                    return Err(ConfigError::ExperimentMismatch {
                        found: value.to_owned(),
                        expected: self.experiment,
                    });
                }
                continue;
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        self.apply_text(&text)
    }

    pub fn raw(&self, key: &str) -> &str {
        self.params.get(key).unwrap_or_else(|| panic!("key {key:?} is not defined for {}", self.experiment))
    }

    fn invalid(&self, key: &str, expected: &str) -> ConfigError {
        ConfigError::Invalid {
            key: key.to_owned(),
            value: self.raw(key).to_owned(),
            expected: expected.to_owned(),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str, expected: &str) -> Result<T, ConfigError> {
        self.raw(key).parse().map_err(|_| self.invalid(key, expected))
    }

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        self.parsed::<f64>(key, "a real number").and_then(|x| {
            if x.is_finite() {
                Ok(x)
            } else {
                Err(self.invalid(key, "a finite real"))
            }
        })
    }

    pub fn positive_real(&self, key: &str) -> Result<f64, ConfigError> {
        self.real(key).and_then(|x| if x > 0.0 { Ok(x) } else { Err(self.invalid(key, "a positive real")) })
    }

    pub fn count(&self, key: &str) -> Result<usize, ConfigError> {
        self.parsed(key, "a nonnegative integer")
    }

    pub fn positive_count(&self, key: &str) -> Result<usize, ConfigError> {
        self.count(key).and_then(|n| if n > 0 { Ok(n) } else { Err(self.invalid(key, "a positive integer")) })
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.parsed("seed", "an unsigned 64-bit integer")
    }

    pub fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        self.parsed(key, "true or false")
    }

    /// Comma-separated reals; an empty value is an empty list.
    pub fn reals(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.invalid(key, "comma-separated reals"))
    }

    /// Comma-separated integers; an empty value is an empty list.
    pub fn integers(&self, key: &str) -> Result<Vec<i64>, ConfigError> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| s.trim().parse::<i64>().ok())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.invalid(key, "comma-separated integers"))
    }

    /// Rejects a value with a message naming the key.
    pub fn reject(&self, key: &str, expected: &str) -> ConfigError {
        self.invalid(key, expected)
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out"))
    }

    /// Manifest text: the resolved configuration plus the list of outputs,
    /// loadable again with `--config`.
    pub fn manifest(&self, outputs: &[String]) -> String {
        let mut text = format!(
            "# statcontract {} run manifest\n# outputs: {}\nexperiment = {}\n",
            env!("CARGO_PKG_VERSION"),
            outputs.join(" "),
            self.experiment
        );
        for (key, _, _) in self.experiment.keys() {
            text.push_str(&format!("{key} = {}\n", self.params[key]));
        }
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let mut c = ExperimentConfig::defaults(Experiment::Welfare);
        c.apply_text("# header\n\nratios = 5 # one panel\n  theta1=2\n").unwrap();
        assert_eq!(c.reals("ratios").unwrap(), vec![5.0]);
        assert_eq!(c.real("theta1").unwrap(), 2.0);
        assert_eq!(c.real("cost").unwrap(), 1.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        let mut c = ExperimentConfig::defaults(Experiment::FdaAudit);
        let err = c.apply_text("horizon = 3").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref key, .. } if key == "horizon"));
        assert!(err.to_string().contains("horizon"));
    }

    #[test]
    fn rejects_bad_syntax_and_values() {
        let mut c = ExperimentConfig::defaults(Experiment::Multiround);
        assert!(matches!(c.apply_text("levels"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.apply_text("= 3"), Err(ConfigError::Syntax { .. })));
        c.set("levels", "ten").unwrap();
        let err = c.positive_count("levels").unwrap_err();
        assert!(err.to_string().contains("levels"));
        c.set("caps", "1,x").unwrap();
        assert!(c.reals("caps").is_err());
    }

    #[test]
    fn experiment_line_must_match() {
        let mut c = ExperimentConfig::defaults(Experiment::Welfare);
        c.apply_text("experiment = welfare").unwrap();
        assert!(matches!(
            c.apply_text("experiment = multiround"),
            Err(ConfigError::ExperimentMismatch { .. })
        ));
    }

    #[test]
    fn manifest_replays() {
        let mut c = ExperimentConfig::defaults(Experiment::Multiround);
        c.set("caps", "2").unwrap();
        c.set("seed", "7").unwrap();
        let text = c.manifest(&["a.csv".into()]);
        let mut d = ExperimentConfig::defaults(Experiment::Multiround);
        d.apply_text(&text).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn empty_lists() {
        let mut c = ExperimentConfig::defaults(Experiment::FdaAudit);
        c.set("profits", "").unwrap();
        assert!(c.integers("profits").unwrap().is_empty());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("plot".parse::<Experiment>().is_err());
    }
}
