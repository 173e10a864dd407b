//! Run configuration schema: JSON on disk, strict parsing (unknown keys
//! rejected), and semantic validation that reports every violation with its
//! field path instead of stopping at the first.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::circuit::{EncodingKind, EncodingScheme, EntanglementGenerator};
use crate::error::{Error, Result, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    pub kind: EncodingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntanglementConfig {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub n: usize,
    pub layers: usize,
    pub encoding: EncodingConfig,
    pub entanglement: EntanglementConfig,
    pub observable_qubit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub frequencies: Vec<i64>,
    pub amplitudes: Vec<f64>,
    pub phase_seed: u64,
}

fn default_early_stop() -> Option<f64> {
    Some(1e-5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub eval_every: usize,
    pub grid_size: usize,
    pub omega_max_track: i64,
    #[serde(default = "default_early_stop")]
    pub early_stop_loss: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Redundancy,
    Train,
    Robustness,
    EntangleSweep,
    InitSweep,
    VerifyBounds,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Redundancy => "redundancy",
            ExperimentKind::Train => "train",
            ExperimentKind::Robustness => "robustness",
            ExperimentKind::EntangleSweep => "entangle-sweep",
            ExperimentKind::InitSweep => "init-sweep",
            ExperimentKind::VerifyBounds => "verify-bounds",
        }
    }
}

/// Experiment selector plus kind-specific parameters. Fields that do not
/// apply to the selected kind must stay unset; validation enforces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    // robustness
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_seed: Option<u64>,
    // entangle-sweep
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layouts: Option<Vec<EntanglementConfig>>,
    // entangle-sweep and init-sweep
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold: Option<usize>,
    // init-sweep
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<bool>,
    // verify-bounds
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite_seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn bare(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            deltas: None,
            n_directions: None,
            direction_seed: None,
            layouts: None,
            seeds: None,
            threshold: None,
            hold: None,
            sigmas: None,
            train: None,
            instances: None,
            suite_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: CircuitConfig,
    pub init: InitConfig,
    pub target: TargetConfig,
    pub training: TrainingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    pub output: OutputConfig,
}

/// Built-in configuration presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    /// Small circuits and grids that run in minutes on a laptop.
    Desk,
    /// The large reference setup (5 qubits, 20 layers, 2048-point grid).
    Full,
}

impl Profile {
    pub fn config(&self) -> RunConfig {
        match self {
            Profile::Desk => RunConfig {
                circuit: CircuitConfig {
                    n: 3,
                    layers: 4,
                    encoding: EncodingConfig {
                        kind: EncodingKind::Constant,
                        betas: None,
                    },
                    // this layout keeps the near-identity initialization's
                    // coefficient magnitudes far below the convergence
                    // threshold at every default target frequency
                    entanglement: EntanglementConfig {
                        generator: "random".into(),
                        count: Some(2),
                        seed: Some(37),
                    },
                    observable_qubit: 1,
                },
                init: InitConfig {
                    sigma: 0.01,
                    seed: 1,
                },
                target: TargetConfig {
                    frequencies: (1..=6).collect(),
                    amplitudes: vec![1.0; 6],
                    phase_seed: 1,
                },
                training: TrainingConfig {
                    learning_rate: 0.005,
                    epochs: 3000,
                    eval_every: 5,
                    grid_size: 256,
                    omega_max_track: 64,
                    early_stop_loss: Some(1e-5),
                },
                experiment: None,
                output: OutputConfig {
                    directory: "runs/desk".into(),
                },
            },
            Profile::Full => RunConfig {
                circuit: CircuitConfig {
                    n: 5,
                    layers: 20,
                    encoding: EncodingConfig {
                        kind: EncodingKind::Constant,
                        betas: None,
                    },
                    entanglement: EntanglementConfig {
                        generator: "ladder".into(),
                        count: None,
                        seed: None,
                    },
                    observable_qubit: 1,
                },
                init: InitConfig {
                    sigma: 0.01,
                    seed: 1,
                },
                target: TargetConfig {
                    frequencies: (1..=10).map(|i| 5 * i).collect(),
                    amplitudes: vec![1.0; 10],
                    phase_seed: 1,
                },
                training: TrainingConfig {
                    learning_rate: 0.0005,
                    epochs: 3000,
                    eval_every: 5,
                    grid_size: 2048,
                    omega_max_track: 100,
                    early_stop_loss: Some(1e-5),
                },
                experiment: None,
                output: OutputConfig {
                    directory: "runs/full".into(),
                },
            },
        }
    }
}

impl RunConfig {
    /// Collect every semantic violation; an empty list means the config is
    /// usable as-is.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |field: &str, message: String| {
            v.push(Violation {
                field: field.to_string(),
                message,
            });
        };

        if self.circuit.n < 1 {
            push("circuit.n", "must be at least 1".into());
        }
        if self.circuit.layers < 1 {
            push("circuit.layers", "must be at least 1".into());
        }
        if self.circuit.n >= 1 && self.circuit.observable_qubit >= self.circuit.n {
            push(
                "circuit.observable_qubit",
                format!("out of range for {} qubits", self.circuit.n),
            );
        }
        match self.circuit.encoding.kind {
            EncodingKind::Custom => match &self.circuit.encoding.betas {
                None => push(
                    "circuit.encoding.betas",
                    "custom encoding requires explicit betas".into(),
                ),
                Some(betas) => {
                    if betas.len() != self.circuit.n {
                        push(
                            "circuit.encoding.betas",
                            format!("expected {} entries, got {}", self.circuit.n, betas.len()),
                        );
                    }
                    if betas.iter().any(|b| !b.is_finite() || *b <= 0.0) {
                        push(
                            "circuit.encoding.betas",
                            "entries must be finite and strictly positive".into(),
                        );
                    }
                }
            },
            _ => {
                if self.circuit.encoding.betas.is_some() {
                    push(
                        "circuit.encoding.betas",
                        "only allowed for the custom encoding kind".into(),
                    );
                }
            }
        }
        match self.circuit.entanglement.generator.as_str() {
            "none" | "ladder" | "one_d_hop" | "all_to_all" => {
                if self.circuit.entanglement.count.is_some() {
                    push(
                        "circuit.entanglement.count",
                        "only allowed for the random generator".into(),
                    );
                }
                if self.circuit.entanglement.seed.is_some() {
                    push(
                        "circuit.entanglement.seed",
                        "only allowed for the random generator".into(),
                    );
                }
            }
            "random" => {
                if self.circuit.entanglement.count.is_none() {
                    push(
                        "circuit.entanglement.count",
                        "required for the random generator".into(),
                    );
                }
                if self.circuit.entanglement.seed.is_none() {
                    push(
                        "circuit.entanglement.seed",
                        "required for the random generator".into(),
                    );
                }
            }
            other => push(
                "circuit.entanglement.generator",
                format!(
                    "unknown generator '{other}'; expected none, ladder, one_d_hop, \
                     all_to_all or random"
                ),
            ),
        }

        if !(self.init.sigma.is_finite() && self.init.sigma >= 0.0) {
            push("init.sigma", "must be finite and >= 0".into());
        }

        if self.target.frequencies.is_empty() {
            push("target.frequencies", "must be non-empty".into());
        }
        if self.target.frequencies.iter().any(|f| *f <= 0) {
            push("target.frequencies", "must be positive integers".into());
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            if !self.target.frequencies.iter().all(|f| seen.insert(*f)) {
                push("target.frequencies", "must be distinct".into());
            }
        }
        if self.target.amplitudes.len() != self.target.frequencies.len() {
            push(
                "target.amplitudes",
                format!(
                    "expected {} entries, got {}",
                    self.target.frequencies.len(),
                    self.target.amplitudes.len()
                ),
            );
        }
        if self
            .target
            .amplitudes
            .iter()
            .any(|a| !a.is_finite() || *a <= 0.0)
        {
            push("target.amplitudes", "must be finite and positive".into());
        }

        if !(self.training.learning_rate.is_finite() && self.training.learning_rate > 0.0) {
            push("training.learning_rate", "must be positive".into());
        }
        if self.training.eval_every == 0 {
            push("training.eval_every", "must be at least 1".into());
        }
        if self.training.grid_size < 2 {
            push("training.grid_size", "must be at least 2".into());
        }
        if self.training.omega_max_track < 1 {
            push("training.omega_max_track", "must be at least 1".into());
        }
        if 2 * self.training.omega_max_track >= self.training.grid_size as i64 {
            push(
                "training.omega_max_track",
                format!(
                    "window {} violates the Nyquist limit for grid_size {}; \
                     require omega_max_track < grid_size / 2",
                    self.training.omega_max_track, self.training.grid_size
                ),
            );
        }
        if let Some(max) = self.target.frequencies.iter().max() {
            if *max > self.training.omega_max_track {
                push(
                    "target.frequencies",
                    format!(
                        "top frequency {max} exceeds training.omega_max_track {}",
                        self.training.omega_max_track
                    ),
                );
            }
        }

        if self.output.directory.is_empty() {
            push("output.directory", "must be non-empty".into());
        }
        if let Some(experiment) = &self.experiment {
            self.validate_experiment(experiment, &mut v);
        }
        v
    }

    fn validate_experiment(&self, experiment: &ExperimentConfig, v: &mut Vec<Violation>) {
        use ExperimentKind::*;
        let mut push = |field: &str, message: String| {
            v.push(Violation {
                field: format!("experiment.{field}"),
                message,
            });
        };
        let forbid = |set: &mut Vec<Violation>, name: &str, present: bool, kind: &str| {
            if present {
                set.push(Violation {
                    field: format!("experiment.{name}"),
                    message: format!("not applicable to kind '{kind}'"),
                });
            }
        };
        let kind = experiment.kind.name();
        match experiment.kind {
            Redundancy | Train => {
                forbid(v, "deltas", experiment.deltas.is_some(), kind);
                forbid(v, "n_directions", experiment.n_directions.is_some(), kind);
                forbid(v, "direction_seed", experiment.direction_seed.is_some(), kind);
                forbid(v, "layouts", experiment.layouts.is_some(), kind);
                forbid(v, "seeds", experiment.seeds.is_some(), kind);
                forbid(v, "sigmas", experiment.sigmas.is_some(), kind);
                forbid(v, "train", experiment.train.is_some(), kind);
                forbid(v, "instances", experiment.instances.is_some(), kind);
                forbid(v, "suite_seed", experiment.suite_seed.is_some(), kind);
                forbid(v, "threshold", experiment.threshold.is_some(), kind);
                forbid(v, "hold", experiment.hold.is_some(), kind);
            }
            Robustness => {
                if let Some(deltas) = &experiment.deltas {
                    if deltas.is_empty() {
                        push("deltas", "must be non-empty".into());
                    }
                    if deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
                        push("deltas", "must be finite and >= 0".into());
                    }
                }
                if experiment.n_directions == Some(0) {
                    push("n_directions", "must be at least 1".into());
                }
                forbid(v, "layouts", experiment.layouts.is_some(), kind);
                forbid(v, "sigmas", experiment.sigmas.is_some(), kind);
                forbid(v, "instances", experiment.instances.is_some(), kind);
            }
            EntangleSweep => {
                match &experiment.layouts {
                    None => push("layouts", "required for entangle-sweep".into()),
                    Some(layouts) if layouts.is_empty() => {
                        push("layouts", "must be non-empty".into())
                    }
                    _ => {}
                }
                match &experiment.seeds {
                    None => push("seeds", "required for entangle-sweep".into()),
                    Some(seeds) if seeds.is_empty() => push("seeds", "must be non-empty".into()),
                    _ => {}
                }
                forbid(v, "sigmas", experiment.sigmas.is_some(), kind);
                forbid(v, "instances", experiment.instances.is_some(), kind);
            }
            InitSweep => {
                match &experiment.sigmas {
                    None => push("sigmas", "required for init-sweep".into()),
                    Some(sigmas) if sigmas.is_empty() => {
                        push("sigmas", "must be non-empty".into())
                    }
                    Some(sigmas) if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) => {
                        push("sigmas", "must be finite and >= 0".into())
                    }
                    _ => {}
                }
                match &experiment.seeds {
                    None => push("seeds", "required for init-sweep".into()),
                    Some(seeds) if seeds.is_empty() => push("seeds", "must be non-empty".into()),
                    _ => {}
                }
                forbid(v, "layouts", experiment.layouts.is_some(), kind);
                forbid(v, "instances", experiment.instances.is_some(), kind);
            }
            VerifyBounds => {
                if experiment.instances == Some(0) {
                    push("instances", "must be at least 1".into());
                }
                forbid(v, "layouts", experiment.layouts.is_some(), kind);
                forbid(v, "sigmas", experiment.sigmas.is_some(), kind);
                forbid(v, "deltas", experiment.deltas.is_some(), kind);
                forbid(v, "seeds", experiment.seeds.is_some(), kind);
            }
        }
    }

    pub fn encoding_scheme(&self) -> Result<EncodingScheme> {
        match self.circuit.encoding.kind {
            EncodingKind::Custom => EncodingScheme::custom(
                self.circuit
                    .encoding
                    .betas
                    .clone()
                    .ok_or_else(|| Error::Config("custom encoding without betas".into()))?,
            ),
            kind => EncodingScheme::named(kind, self.circuit.n),
        }
    }

    pub fn entanglement_generator(&self) -> Result<EntanglementGenerator> {
        entanglement_from_config(&self.circuit.entanglement)
    }
}

pub fn entanglement_from_config(config: &EntanglementConfig) -> Result<EntanglementGenerator> {
    match config.generator.as_str() {
        "none" => Ok(EntanglementGenerator::None),
        "ladder" => Ok(EntanglementGenerator::Ladder),
        "one_d_hop" => Ok(EntanglementGenerator::OneDHop),
        "all_to_all" => Ok(EntanglementGenerator::AllToAll),
        "random" => Ok(EntanglementGenerator::Random {
            count: config
                .count
                .ok_or_else(|| Error::Config("random layout requires count".into()))?,
            seed: config
                .seed
                .ok_or_else(|| Error::Config("random layout requires seed".into()))?,
        }),
        other => Err(Error::Config(format!("unknown entanglement generator '{other}'"))),
    }
}

/// Read, parse and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: RunConfig = serde_json::from_str(&text)?;
    let violations = config.validate();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::ConfigViolations(violations))
    }
}
