//! Experiment configuration: parsing, validation with exhaustive issue
//! lists, defaulting, and semantic hashing.

use std::fmt;
use std::path::PathBuf;

use muntz::bernstein::OptimizerBudget;
use muntz::ExponentRule;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The experiment families the runner knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VolterraEssential,
    CesaroEssential,
    HqBound,
    Bernstein,
    Newman,
    CompositionDemo,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::VolterraEssential => "volterra-essential",
            Experiment::CesaroEssential => "cesaro-essential",
            Experiment::HqBound => "hq-bound",
            Experiment::Bernstein => "bernstein",
            Experiment::Newman => "newman",
            Experiment::CompositionDemo => "composition-demo",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "volterra-essential" => Some(Experiment::VolterraEssential),
            "cesaro-essential" => Some(Experiment::CesaroEssential),
            "hq-bound" => Some(Experiment::HqBound),
            "bernstein" => Some(Experiment::Bernstein),
            "newman" => Some(Experiment::Newman),
            "composition-demo" => Some(Experiment::CompositionDemo),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Self-maps of [0, 1] available to the composition demo. `Const` pins the
/// map to the configured alpha, the negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMap {
    Square,
    Identity,
    Const,
}

impl ThetaMap {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "square" => Some(ThetaMap::Square),
            "identity" => Some(ThetaMap::Identity),
            "const" => Some(ThetaMap::Const),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThetaMap::Square => "square",
            ThetaMap::Identity => "identity",
            ThetaMap::Const => "const",
        }
    }
}

/// A validated experiment configuration. Every field is semantic: two runs
/// with equal configs and seeds produce byte-identical payloads, and the
/// config hash covers exactly these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub rule: ExponentRule,
    pub eps: f64,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub samples: u64,
    pub nhat_samples: u64,
    pub trials: u64,
    pub n: u32,
    pub n_max: u64,
    pub alpha: f64,
    pub theta: ThetaMap,
    pub seed: u64,
    pub budget: OptimizerBudget,
}

/// Execution parameters that affect how a run is carried out but not what it
/// computes; excluded from the config hash.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            out_dir: default_out_dir(),
        }
    }
}

/// Output directory: `MUNTZ_OUT_DIR` when set, `runs/` otherwise.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os("MUNTZ_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Raw key/value document as read from a config file; unknown keys are
/// rejected at parse time.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub rule: Option<ExponentRule>,
    pub eps: Option<f64>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub samples: Option<u64>,
    pub nhat_samples: Option<u64>,
    pub trials: Option<u64>,
    pub n: Option<u32>,
    pub n_max: Option<u64>,
    pub alpha: Option<f64>,
    pub theta: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<String>,
    pub budget: Option<RawBudget>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBudget {
    pub starts: Option<u64>,
    pub max_evals: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not well-formed: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", issues.join("\n"))]
    Invalid { issues: Vec<String> },
    #[error("io error reading config: {0}")]
    Io(String),
}

/// Parses a structured-text config. JSON documents are detected by their
/// leading brace; everything else parses as TOML.
pub fn parse_config(source: &str) -> Result<(ExperimentConfig, RunOptions), ConfigError> {
    let raw = parse_raw(source)?;
    validate(raw)
}

/// Parses only the raw key/value layer (used by the CLI so flag overrides
/// can be applied before validation).
pub fn parse_raw(source: &str) -> Result<RawConfig, ConfigError> {
    if source.trim_start().starts_with('{') {
        serde_json::from_str(source).map_err(|e| ConfigError::Parse(e.to_string()))
    } else {
        toml::from_str(source).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

/// Validates and defaults a raw config, reporting every offending key at
/// once.
pub fn validate(raw: RawConfig) -> Result<(ExperimentConfig, RunOptions), ConfigError> {
    let mut issues: Vec<String> = Vec::new();

    let experiment = match raw.experiment.as_deref() {
        None => {
            issues.push("experiment: missing (expected one of volterra-essential, cesaro-essential, hq-bound, bernstein, newman, composition-demo)".into());
            None
        }
        Some(name) => {
            let parsed = Experiment::parse(name);
            if parsed.is_none() {
                issues.push(format!("experiment: unknown experiment '{name}'"));
            }
            parsed
        }
    };

    let rule = match raw.rule {
        None => ExponentRule::geometric(1.0, 2.0, 48).expect("default rule is valid"),
        Some(rule) => {
            if let Err(e) = rule.validate() {
                issues.push(format!("rule: {e}"));
            }
            rule
        }
    };

    let eps = raw.eps.unwrap_or(0.1);
    if !(eps > 0.0 && eps < 1.0) {
        issues.push(format!("eps: must lie in (0, 1), got {eps}"));
    }
    if let Some(rho) = raw.rho {
        if !(rho > 0.0 && rho < 1.0) {
            issues.push(format!("rho: must lie in (0, 1), got {rho}"));
        }
    }
    if let Some(c) = raw.c {
        if !(c > 0.0 && c < 1.0) {
            issues.push(format!("c: must lie in (0, 1), got {c}"));
        }
    }

    let samples = raw.samples.unwrap_or(match experiment {
        Some(Experiment::HqBound) => 500,
        _ => 1000,
    });
    if samples == 0 {
        issues.push("samples: must be positive".into());
    }
    let nhat_samples = raw.nhat_samples.unwrap_or(500);
    if nhat_samples == 0 {
        issues.push("nhat_samples: must be positive".into());
    }
    let trials = raw.trials.unwrap_or(500);
    if trials == 0 {
        issues.push("trials: must be positive".into());
    }
    let n = raw.n.unwrap_or(match experiment {
        Some(Experiment::Newman) => 4,
        _ => 2,
    });
    if n == 0 {
        issues.push("n: must be positive".into());
    }
    let n_max = raw.n_max.unwrap_or(10_000);
    if n_max == 0 {
        issues.push("n_max: must be positive".into());
    }
    let alpha = raw.alpha.unwrap_or(0.25);
    if !(0.0..=1.0).contains(&alpha) {
        issues.push(format!("alpha: must lie in [0, 1], got {alpha}"));
    }
    let theta = match raw.theta.as_deref() {
        None => ThetaMap::Square,
        Some(name) => match ThetaMap::parse(name) {
            Some(t) => t,
            None => {
                issues.push(format!(
                    "theta: unknown map '{name}' (expected square, identity, or const)"
                ));
                ThetaMap::Square
            }
        },
    };
    let seed = raw.seed.unwrap_or(42);

    let default_budget = OptimizerBudget::default();
    let budget_raw = raw.budget.unwrap_or_default();
    let budget = OptimizerBudget {
        starts: budget_raw.starts.unwrap_or(default_budget.starts as u64) as usize,
        max_evals: budget_raw
            .max_evals
            .unwrap_or(default_budget.max_evals as u64) as usize,
        tol: budget_raw.tol.unwrap_or(default_budget.tol),
    };
    if budget.starts == 0 {
        issues.push("budget.starts: must be positive".into());
    }
    if budget.max_evals == 0 {
        issues.push("budget.max_evals: must be positive".into());
    }
    if !(budget.tol > 0.0) {
        issues.push(format!("budget.tol: must be positive, got {}", budget.tol));
    }

    let workers = raw.workers.unwrap_or(1);
    if workers == 0 {
        issues.push("workers: must be positive".into());
    }

    if !issues.is_empty() {
        return Err(ConfigError::Invalid { issues });
    }

    let config = ExperimentConfig {
        experiment: experiment.expect("issues would have been reported"),
        rule,
        eps,
        rho: raw.rho,
        c: raw.c,
        samples,
        nhat_samples,
        trials,
        n,
        n_max,
        alpha,
        theta,
        seed,
        budget,
    };
    let options = RunOptions {
        workers,
        out_dir: raw.out_dir.map(PathBuf::from).unwrap_or_else(default_out_dir),
    };
    Ok((config, options))
}

/// Hash of the semantic fields: whitespace and key order in the source text
/// cannot affect it, and it changes exactly when a semantic field changes.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical =
        serde_json::to_string(config).expect("config serialization cannot fail");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let (cfg, opts) = parse_config(r#"{"experiment": "bernstein", "n": 2, "eps": 0.1}"#).unwrap();
        assert_eq!(cfg.experiment, Experiment::Bernstein);
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.budget.starts, 32);
        assert_eq!(opts.workers, 1);
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let err = parse_config(r#"{"experiment": "frobnicate"}"#).unwrap_err();
        match err {
            ConfigError::Invalid { issues } => {
                assert!(issues.iter().any(|i| i.contains("frobnicate")));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn out_of_range_rho_is_rejected() {
        let err = parse_config(r#"{"experiment": "hq-bound", "rho": 1.5}"#).unwrap_err();
        match err {
            ConfigError::Invalid { issues } => {
                assert!(issues.iter().any(|i| i.starts_with("rho:")));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn every_offending_key_is_listed() {
        let err = parse_config(
            r#"{"experiment": "nope", "eps": 2.0, "samples": 0, "alpha": 7.0}"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Invalid { issues } => {
                assert!(issues.len() >= 4, "{issues:?}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_keys_fail_at_parse() {
        assert!(matches!(
            parse_config(r#"{"experiment": "newman", "bogus": 1}"#),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn toml_and_json_agree() {
        let toml_src = "experiment = \"newman\"\nseed = 7\n";
        let json_src = r#"{"experiment": "newman", "seed": 7}"#;
        let (a, _) = parse_config(toml_src).unwrap();
        let (b, _) = parse_config(json_src).unwrap();
        assert_eq!(a, b);
        assert_eq!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn hash_ignores_formatting_but_sees_semantics() {
        let (a, _) = parse_config(r#"{"experiment": "newman", "seed": 7}"#).unwrap();
        let (b, _) =
            parse_config("{\n  \"seed\": 7,\n  \"experiment\": \"newman\"\n}").unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));

        let (c, _) = parse_config(r#"{"experiment": "newman", "seed": 8}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));

        // workers is an execution parameter, not a semantic one
        let (d, opts) = parse_config(r#"{"experiment": "newman", "seed": 7, "workers": 8}"#).unwrap();
        assert_eq!(opts.workers, 8);
        assert_eq!(config_hash(&a), config_hash(&d));
    }

    #[test]
    fn config_round_trips_through_json() {
        let (cfg, _) = parse_config(
            r#"{"experiment": "hq-bound", "eps": 0.2, "rho": 0.75,
                "rule": {"kind": "geometric", "parameters": {"base": 1.0, "ratio": 3.0}, "length": 12}}"#,
        )
        .unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }
}
