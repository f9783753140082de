use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use muntz_cli::config::{self, RawConfig};
use muntz_cli::report::{emit_report, ReportFormat};
use muntz_cli::run::{load_index, run_experiment};

/// Numerical experiments with the Volterra and Cesàro operators on Müntz
/// polynomial spaces.
#[derive(Parser)]
#[command(name = "muntz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        /// Path to a TOML or JSON config.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Volterra essential-norm experiment.
    VolterraEssential(Overrides),
    /// Cesàro essential-norm experiment.
    CesaroEssential(Overrides),
    /// Weighted upper-bound experiment for both rank-one variants.
    HqBound(Overrides),
    /// Bernstein-number estimate for one dimension, both operators.
    Bernstein(Overrides),
    /// Partial-sum inequality fuzz over a lacunary sequence.
    Newman(Overrides),
    /// Composition-operator discontinuity demo.
    CompositionDemo(Overrides),
    /// Render the run index of an output directory.
    Report {
        /// Output directory holding `index.jsonl`.
        #[arg(long, default_value_os_t = config::default_out_dir())]
        dir: PathBuf,
        /// `json` or `csv`.
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

/// One flag per config key; flags beat file values.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    nhat_samples: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<String>,
    /// Optimizer starts.
    #[arg(long)]
    starts: Option<u64>,
    /// Optimizer ratio-evaluation budget per start.
    #[arg(long)]
    max_evals: Option<u64>,
    /// Optimizer convergence tolerance.
    #[arg(long)]
    opt_tol: Option<f64>,
    /// Exponent rule kind: explicit, geometric, or power.
    #[arg(long)]
    rule_kind: Option<String>,
    /// Geometric base.
    #[arg(long)]
    rule_base: Option<f64>,
    /// Geometric ratio.
    #[arg(long)]
    rule_ratio: Option<f64>,
    /// Power-rule exponent.
    #[arg(long)]
    rule_power: Option<f64>,
    /// Comma-separated explicit exponent list.
    #[arg(long)]
    rule_exponents: Option<String>,
    /// Materialized length of the rule.
    #[arg(long)]
    rule_length: Option<usize>,
}

impl Overrides {
    fn apply(self, mut raw: RawConfig) -> Result<RawConfig, String> {
        macro_rules! take {
            ($field:ident) => {
                if self.$field.is_some() {
                    raw.$field = self.$field.clone();
                }
            };
        }
        take!(eps);
        take!(rho);
        take!(c);
        take!(samples);
        take!(nhat_samples);
        take!(trials);
        take!(n);
        take!(n_max);
        take!(alpha);
        take!(theta);
        take!(seed);
        take!(workers);
        take!(out_dir);

        if self.starts.is_some() || self.max_evals.is_some() || self.opt_tol.is_some() {
            let mut budget = raw.budget.unwrap_or_default();
            if self.starts.is_some() {
                budget.starts = self.starts;
            }
            if self.max_evals.is_some() {
                budget.max_evals = self.max_evals;
            }
            if self.opt_tol.is_some() {
                budget.tol = self.opt_tol;
            }
            raw.budget = Some(budget);
        }

        if self.rule_kind.is_some()
            || self.rule_base.is_some()
            || self.rule_ratio.is_some()
            || self.rule_power.is_some()
            || self.rule_exponents.is_some()
            || self.rule_length.is_some()
        {
            raw.rule = Some(self.build_rule()?);
        }
        Ok(raw)
    }

    fn build_rule(&self) -> Result<muntz::ExponentRule, String> {
        let kind = self.rule_kind.as_deref().unwrap_or("geometric");
        match kind {
            "geometric" => muntz::ExponentRule::geometric(
                self.rule_base.unwrap_or(1.0),
                self.rule_ratio.unwrap_or(2.0),
                self.rule_length.unwrap_or(48),
            )
            .map_err(|e| e.to_string()),
            "power" => muntz::ExponentRule::power(
                self.rule_power.unwrap_or(2.0),
                self.rule_length.unwrap_or(48),
            )
            .map_err(|e| e.to_string()),
            "explicit" => {
                let list = self
                    .rule_exponents
                    .as_deref()
                    .ok_or("explicit rule needs --rule-exponents")?;
                let exponents: Result<Vec<f64>, _> =
                    list.split(',').map(|s| s.trim().parse::<f64>()).collect();
                muntz::ExponentRule::explicit(exponents.map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())
            }
            other => Err(format!("unknown rule kind '{other}'")),
        }
    }
}

fn execute(raw: RawConfig, overrides: Overrides) -> ExitCode {
    let raw = match overrides.apply(raw) {
        Ok(raw) => raw,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let (cfg, options) = match config::validate(raw) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let record = run_experiment(&cfg, &options);
    println!(
        "{}",
        serde_json::to_string_pretty(&record).expect("record serializes")
    );
    ExitCode::from(record.verdict.exit_code())
}

fn load_raw(path: &PathBuf) -> Result<RawConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    config::parse_raw(&text).map_err(|e| e.to_string())
}

fn named(experiment: &str, overrides: Overrides) -> ExitCode {
    let raw = RawConfig {
        experiment: Some(experiment.to_string()),
        ..RawConfig::default()
    };
    execute(raw, overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides } => match load_raw(&config) {
            Ok(raw) => execute(raw, overrides),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
        Command::VolterraEssential(o) => named("volterra-essential", o),
        Command::CesaroEssential(o) => named("cesaro-essential", o),
        Command::HqBound(o) => named("hq-bound", o),
        Command::Bernstein(o) => named("bernstein", o),
        Command::Newman(o) => named("newman", o),
        Command::CompositionDemo(o) => named("composition-demo", o),
        Command::Report { dir, format } => {
            let Some(format) = ReportFormat::parse(&format) else {
                eprintln!("error: unknown report format");
                return ExitCode::from(2);
            };
            match load_index(&dir) {
                Ok(records) => match emit_report(&records, format) {
                    Ok(text) => {
                        print!("{text}");
                        ExitCode::SUCCESS
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(2)
                    }
                },
                Err(e) => {
                    eprintln!("error: cannot load index from {}: {e}", dir.display());
                    ExitCode::from(2)
                }
            }
        }
    }
}
