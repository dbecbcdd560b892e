//! Flat user-facing settings and their resolution into experiment configs.
//!
//! Precedence: command-line flags, then the JSON config file, then (seed only)
//! `EINSELECT_SEED`, then built-in defaults.

use std::f64::consts::PI;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::central_spin::CouplingSpec;
use crate::experiments::{
    default_horizon, ConstancyConfig, DensityConfig, EinselectConfig, EnvInitSpec, ExperimentConfig, ExperimentId,
    HamiltonianSource, ModelOptions, RecurrenceConfig, ReversalConfig, TimeGrid, TypicalityConfig,
};

pub const SEED_ENV: &str = "EINSELECT_SEED";
pub const DEFAULT_SEED: u64 = 7;

/// Every tunable, as flags and as keys of the flat JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Master seed [default: $EINSELECT_SEED, else 7]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Monte Carlo sample count
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// Total Hilbert space dimension
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_total: Option<usize>,

    /// Subsystem dimension
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,

    /// Environment dimensions for the density-of-states fit, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_env: Option<Vec<usize>>,

    /// Initial histogram bins on [0, 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,

    /// Hamiltonian for the constancy experiment: central-spin | gue
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,

    /// Number of environment qubits N
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_qubits: Option<usize>,

    /// uniform:LOW:HIGH | equal:G | list:G1,G2,...
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<String>,

    /// superposition | z-up | haar
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_init: Option<String>,

    /// Initial polar angle(s) of the central spin, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,

    /// Number of time grid points
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,

    /// Decoherence threshold on |r(t)|
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,

    /// Allowed gap between late-time purity and 1 - sin^2(theta)/2
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity_tolerance: Option<f64>,
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Settings { $($f: $hi.$f.clone().or_else(|| $lo.$f.clone())),* }
    };
}

impl Settings {
    /// `self` wins over `lower`.
    pub fn over(&self, lower: &Settings) -> Settings {
        merge_fields!(
            self, lower, seed, samples, n_total, m, n_env, bins, hamiltonian, env_qubits, couplings, env_init,
            theta, t_start, t_end, steps, epsilon, purity_tolerance
        )
    }

    /// Names of the flags that are set.
    pub fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! probe {
            ($($f:ident => $n:literal),*) => { $( if self.$f.is_some() { out.push($n); } )* };
        }
        probe!(
            seed => "seed", samples => "samples", n_total => "n-total", m => "m", n_env => "n-env",
            bins => "bins", hamiltonian => "hamiltonian", env_qubits => "env-qubits", couplings => "couplings",
            env_init => "env-init", theta => "theta", t_start => "t-start", t_end => "t-end", steps => "steps",
            epsilon => "epsilon", purity_tolerance => "purity-tolerance"
        );
        out
    }
}

/// Keys each experiment reads.
pub fn applicable(id: ExperimentId) -> &'static [&'static str] {
    match id {
        ExperimentId::Typicality => &["seed", "samples", "n-total", "m"],
        ExperimentId::Density => &["seed", "samples", "n-env", "bins"],
        ExperimentId::Constancy => &[
            "seed", "samples", "hamiltonian", "env-qubits", "couplings", "n-total", "m", "t-start", "t-end",
            "steps",
        ],
        ExperimentId::Einselect => &[
            "seed",
            "env-qubits",
            "couplings",
            "env-init",
            "theta",
            "t-start",
            "t-end",
            "steps",
            "epsilon",
            "purity-tolerance",
        ],
        ExperimentId::Recurrence => &["seed", "env-qubits", "couplings", "env-init", "t-start", "t-end", "steps", "epsilon"],
        ExperimentId::Reversal => &["seed", "env-qubits", "couplings", "env-init", "theta", "t-end", "steps"],
    }
}

/// Rejects command-line flags that the experiment would ignore.
pub fn check_flags_apply(id: ExperimentId, flags: &Settings) -> Result<(), CliError> {
    let ok = applicable(id);
    match flags.present().into_iter().find(|f| !ok.contains(f)) {
        Some(f) => Err(CliError::config(f, format!("does not apply to the {id} experiment"))),
        None => Ok(()),
    }
}

fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(SEED_ENV, format!("`{v}` is not an unsigned 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

pub fn parse_couplings(text: &str) -> Result<CouplingSpec, CliError> {
    let bad = || CliError::config("couplings", format!("cannot parse `{text}`; use uniform:LOW:HIGH, equal:G or list:G1,G2,..."));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "uniform" => {
            let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
            Ok(CouplingSpec::Uniform {
                low: num(lo)?,
                high: num(hi)?,
            })
        }
        "equal" => Ok(CouplingSpec::Equal { g: num(rest)? }),
        "list" => Ok(CouplingSpec::List {
            values: rest.split(',').map(num).collect::<Result<_, _>>()?,
        }),
        _ => Err(bad()),
    }
}

pub fn format_couplings(spec: &CouplingSpec) -> String {
    match spec {
        CouplingSpec::Uniform { low, high } => format!("uniform:{low}:{high}"),
        CouplingSpec::Equal { g } => format!("equal:{g}"),
        CouplingSpec::List { values } => {
            let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            format!("list:{}", parts.join(","))
        }
    }
}

fn parse_env_init(text: &str) -> Result<EnvInitSpec, CliError> {
    match text {
        "superposition" => Ok(EnvInitSpec::Superposition),
        "z-up" => Ok(EnvInitSpec::ZUp),
        "haar" => Ok(EnvInitSpec::Haar),
        _ => Err(CliError::config("env-init", format!("`{text}` is not one of superposition, z-up, haar"))),
    }
}

fn env_init_name(spec: EnvInitSpec) -> &'static str {
    match spec {
        EnvInitSpec::Superposition => "superposition",
        EnvInitSpec::ZUp => "z-up",
        EnvInitSpec::Haar => "haar",
    }
}

fn parse_hamiltonian(text: &str) -> Result<HamiltonianSource, CliError> {
    match text {
        "central-spin" => Ok(HamiltonianSource::CentralSpin),
        "gue" => Ok(HamiltonianSource::Gue),
        _ => Err(CliError::config("hamiltonian", format!("`{text}` is not one of central-spin, gue"))),
    }
}

fn model_options(s: &Settings, default_env: usize, default_couplings: CouplingSpec) -> Result<ModelOptions, CliError> {
    Ok(ModelOptions {
        env_qubits: s.env_qubits.unwrap_or(default_env),
        couplings: match &s.couplings {
            Some(text) => parse_couplings(text)?,
            None => default_couplings,
        },
        env_init: match &s.env_init {
            Some(text) => parse_env_init(text)?,
            None => EnvInitSpec::default(),
        },
    })
}

fn horizon(s: &Settings, model: &ModelOptions, seed: u64, half_periods: f64) -> Result<f64, CliError> {
    match s.t_end {
        Some(t) => Ok(t),
        None => Ok(default_horizon(&model.couplings, model.env_qubits, seed, half_periods)?),
    }
}

/// Materializes every default for `id`. The result is validated.
pub fn resolve(id: ExperimentId, s: &Settings) -> Result<ExperimentConfig, CliError> {
    let seed = match s.seed {
        Some(v) => v,
        None => seed_from_env()?.unwrap_or(DEFAULT_SEED),
    };
    let cfg = match id {
        ExperimentId::Typicality => {
            let d = TypicalityConfig::default();
            ExperimentConfig::Typicality(TypicalityConfig {
                seed,
                samples: s.samples.unwrap_or(d.samples),
                n_total: s.n_total.unwrap_or(d.n_total),
                m: s.m.unwrap_or(d.m),
            })
        }
        ExperimentId::Density => {
            let d = DensityConfig::default();
            ExperimentConfig::Density(DensityConfig {
                seed,
                samples: s.samples.unwrap_or(d.samples),
                n_env: s.n_env.clone().unwrap_or(d.n_env),
                bins: s.bins.unwrap_or(d.bins),
            })
        }
        ExperimentId::Constancy => {
            let d = ConstancyConfig::default();
            let hamiltonian = match &s.hamiltonian {
                Some(h) => parse_hamiltonian(h)?,
                None => d.hamiltonian,
            };
            let model = model_options(s, d.env_qubits, d.couplings.clone())?;
            let (n_total, t_end) = match hamiltonian {
                HamiltonianSource::CentralSpin => {
                    model.validate()?;
                    let n = s.n_total.unwrap_or(1usize << (model.env_qubits + 1));
                    (n, horizon(s, &model, seed, 4.0)?)
                }
                HamiltonianSource::Gue => (s.n_total.unwrap_or(64), s.t_end.unwrap_or(4.0 * PI)),
            };
            ExperimentConfig::Constancy(ConstancyConfig {
                seed,
                samples: s.samples.unwrap_or(d.samples),
                hamiltonian,
                env_qubits: model.env_qubits,
                couplings: model.couplings,
                n_total,
                m: s.m.unwrap_or(d.m),
                grid: TimeGrid::new(s.t_start.unwrap_or(0.0), t_end, s.steps.unwrap_or(d.grid.steps)),
            })
        }
        ExperimentId::Einselect => {
            let d = EinselectConfig::default();
            let model = model_options(s, d.model.env_qubits, d.model.couplings.clone())?;
            model.validate()?;
            let t_end = horizon(s, &model, seed, 4.0)?;
            ExperimentConfig::Einselect(EinselectConfig {
                seed,
                thetas: s.theta.clone().unwrap_or(d.thetas),
                grid: TimeGrid::new(s.t_start.unwrap_or(0.0), t_end, s.steps.unwrap_or(d.grid.steps)),
                epsilon: s.epsilon.unwrap_or(d.epsilon),
                purity_tolerance: s.purity_tolerance.unwrap_or(d.purity_tolerance),
                model,
            })
        }
        ExperimentId::Recurrence => {
            let d = RecurrenceConfig::default();
            let model = model_options(s, d.model.env_qubits, d.model.couplings.clone())?;
            model.validate()?;
            let half_periods = match model.couplings {
                CouplingSpec::Equal { .. } => 2.0,
                _ => 4.0,
            };
            let t_end = horizon(s, &model, seed, half_periods)?;
            ExperimentConfig::Recurrence(RecurrenceConfig {
                seed,
                grid: TimeGrid::new(s.t_start.unwrap_or(0.0), t_end, s.steps.unwrap_or(d.grid.steps)),
                epsilon: s.epsilon.unwrap_or(d.epsilon),
                model,
            })
        }
        ExperimentId::Reversal => {
            let d = ReversalConfig::default();
            let model = model_options(s, d.model.env_qubits, d.model.couplings.clone())?;
            model.validate()?;
            let theta = match s.theta.as_deref() {
                None => d.theta,
                Some([one]) => *one,
                Some(_) => return Err(CliError::config("theta", "the reversal experiment takes a single angle")),
            };
            let t_end = horizon(s, &model, seed, 4.0)?;
            ExperimentConfig::Reversal(ReversalConfig {
                seed,
                theta,
                grid: TimeGrid::new(0.0, t_end, s.steps.unwrap_or(d.grid.steps)),
                model,
            })
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Flat settings that resolve back to exactly `cfg`.
pub fn settings_for(cfg: &ExperimentConfig) -> Settings {
    let mut s = Settings {
        seed: Some(cfg.seed()),
        ..Default::default()
    };
    let set_model = |s: &mut Settings, m: &ModelOptions| {
        s.env_qubits = Some(m.env_qubits);
        s.couplings = Some(format_couplings(&m.couplings));
        s.env_init = Some(env_init_name(m.env_init).to_string());
    };
    let set_grid = |s: &mut Settings, g: &TimeGrid| {
        s.t_start = Some(g.t_start);
        s.t_end = Some(g.t_end);
        s.steps = Some(g.steps);
    };
    match cfg {
        ExperimentConfig::Typicality(c) => {
            s.samples = Some(c.samples);
            s.n_total = Some(c.n_total);
            s.m = Some(c.m);
        }
        ExperimentConfig::Density(c) => {
            s.samples = Some(c.samples);
            s.n_env = Some(c.n_env.clone());
            s.bins = Some(c.bins);
        }
        ExperimentConfig::Constancy(c) => {
            s.samples = Some(c.samples);
            s.hamiltonian = Some(
                match c.hamiltonian {
                    HamiltonianSource::CentralSpin => "central-spin",
                    HamiltonianSource::Gue => "gue",
                }
                .into(),
            );
            s.env_qubits = Some(c.env_qubits);
            s.couplings = Some(format_couplings(&c.couplings));
            s.n_total = Some(c.n_total);
            s.m = Some(c.m);
            set_grid(&mut s, &c.grid);
        }
        ExperimentConfig::Einselect(c) => {
            set_model(&mut s, &c.model);
            s.theta = Some(c.thetas.clone());
            set_grid(&mut s, &c.grid);
            s.epsilon = Some(c.epsilon);
            s.purity_tolerance = Some(c.purity_tolerance);
        }
        ExperimentConfig::Recurrence(c) => {
            set_model(&mut s, &c.model);
            set_grid(&mut s, &c.grid);
            s.epsilon = Some(c.epsilon);
        }
        ExperimentConfig::Reversal(c) => {
            set_model(&mut s, &c.model);
            s.theta = Some(vec![c.theta]);
            s.t_end = Some(c.grid.t_end);
            s.steps = Some(c.grid.steps);
        }
    }
    s
}
