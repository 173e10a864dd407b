//! Reuploader circuit construction.
//!
//! A circuit is an initial trainable block followed by L repetitions of
//! (encoding layer, trainable block). Each trainable block applies one R_y
//! and one R_x per qubit (in that order) and then the block's CNOT pairs;
//! each encoding layer applies R_x(β_i x) to qubit i.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcore::{AngleSource, Gate, Observable, RotationAxis};

/// Named per-qubit encoding scale families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    /// β_i = 1
    Constant,
    /// β_i = i + 1
    Linear,
    /// β_i = 2^i
    Binary,
    /// β_i = 3^i
    Ternary,
    /// user-supplied β vector
    Custom,
}

/// Per-qubit encoding scales β_i, repeated identically in every reupload
/// layer. Each encoding gate contributes the eigen-angle pair {−β_i/2, +β_i/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingScheme {
    kind: EncodingKind,
    betas: Vec<f64>,
}

/// The β vector for a named encoding kind on `n` qubits.
pub fn encoding_betas(kind: EncodingKind, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("qubit count must be at least 1".into()));
    }
    match kind {
        EncodingKind::Constant => Ok(vec![1.0; n]),
        EncodingKind::Linear => Ok((0..n).map(|i| (i + 1) as f64).collect()),
        EncodingKind::Binary => Ok((0..n).map(|i| 2f64.powi(i as i32)).collect()),
        EncodingKind::Ternary => Ok((0..n).map(|i| 3f64.powi(i as i32)).collect()),
        EncodingKind::Custom => Err(Error::Config(
            "custom encoding requires explicit betas".into(),
        )),
    }
}

impl EncodingScheme {
    pub fn named(kind: EncodingKind, n: usize) -> Result<Self> {
        Ok(EncodingScheme {
            kind,
            betas: encoding_betas(kind, n)?,
        })
    }

    pub fn custom(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::Config("custom betas must be non-empty".into()));
        }
        if betas.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(Error::Config(
                "custom betas must be finite and strictly positive".into(),
            ));
        }
        Ok(EncodingScheme {
            kind: EncodingKind::Custom,
            betas,
        })
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn qubit_count(&self) -> usize {
        self.betas.len()
    }

    /// Sum of scales per reupload layer; L times this is the top frequency.
    pub fn beta_sum(&self) -> f64 {
        self.betas.iter().sum()
    }
}

/// CNOT placement rule for the trainable blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "generator")]
pub enum EntanglementGenerator {
    /// No entanglement.
    None,
    /// Pairs (0,1),(1,2),…,(n−2,n−1) in every trainable block.
    Ladder,
    /// One cascading nearest-neighbour pair per reupload layer l (1-based):
    /// ((l−1) mod (n−1), (l−1) mod (n−1) + 1). The initial block carries none.
    OneDHop,
    /// Every ordered pair (i, j), i < j, in each trainable block.
    AllToAll,
    /// `count` pairs per trainable block drawn without replacement from all
    /// ordered (control < target) pairs, reproducible from `seed`. The count
    /// is clamped to the number of available pairs so that degenerate widths
    /// (n = 1) resolve to no entanglement.
    Random { count: usize, seed: u64 },
}

impl EntanglementGenerator {
    pub fn label(&self) -> String {
        match self {
            EntanglementGenerator::None => "none".to_string(),
            EntanglementGenerator::Ladder => "ladder".to_string(),
            EntanglementGenerator::OneDHop => "one_d_hop".to_string(),
            EntanglementGenerator::AllToAll => "all_to_all".to_string(),
            EntanglementGenerator::Random { count, seed } => format!("random_{count}_s{seed}"),
        }
    }
}

/// Resolve the per-block CNOT pairs (length L+1: the initial block plus one
/// block per reupload layer).
pub fn resolve_entanglement(
    generator: EntanglementGenerator,
    n: usize,
    layers: usize,
) -> Result<Vec<Vec<(usize, usize)>>> {
    let blocks = layers + 1;
    let all_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    match generator {
        EntanglementGenerator::None => Ok(vec![Vec::new(); blocks]),
        EntanglementGenerator::Ladder => {
            let ladder: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            Ok(vec![ladder; blocks])
        }
        EntanglementGenerator::OneDHop => {
            let mut resolved = vec![Vec::new(); blocks];
            if n >= 2 {
                for l in 1..=layers {
                    let i = (l - 1) % (n - 1);
                    resolved[l] = vec![(i, i + 1)];
                }
            }
            Ok(resolved)
        }
        EntanglementGenerator::AllToAll => Ok(vec![all_pairs; blocks]),
        EntanglementGenerator::Random { count, seed } => {
            let k = count.min(all_pairs.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut resolved = Vec::with_capacity(blocks);
            for _ in 0..blocks {
                let mut pool = all_pairs.clone();
                let mut chosen = Vec::with_capacity(k);
                for _ in 0..k {
                    let idx = rand::Rng::gen_range(&mut rng, 0..pool.len());
                    chosen.push(pool.swap_remove(idx));
                }
                chosen.sort_unstable();
                resolved.push(chosen);
            }
            Ok(resolved)
        }
    }
}

/// Trainable parameter vector θ indexed by (block, qubit, rotation-slot):
/// index = block·2n + qubit·2 + slot, slot 0 = R_y, slot 1 = R_x.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterTable {
    values: Vec<f64>,
}

impl ParameterTable {
    pub fn zeros(len: usize) -> Self {
        ParameterTable {
            values: vec![0.0; len],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("parameter table contains non-finite values".into()));
        }
        Ok(ParameterTable { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A fully resolved reuploader circuit: layout, encoding, observable and the
/// flattened gate program the simulator executes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReuploaderCircuit {
    n: usize,
    layers: usize,
    encoding: EncodingScheme,
    generator: EntanglementGenerator,
    resolved_entanglement: Vec<Vec<(usize, usize)>>,
    observable: Observable,
    gate_program: Vec<Gate>,
    parameter_count: usize,
}

impl ReuploaderCircuit {
    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn layer_count(&self) -> usize {
        self.layers
    }

    pub fn encoding(&self) -> &EncodingScheme {
        &self.encoding
    }

    pub fn entanglement_generator(&self) -> EntanglementGenerator {
        self.generator
    }

    pub fn resolved_entanglement(&self) -> &[Vec<(usize, usize)>] {
        &self.resolved_entanglement
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn gate_program(&self) -> &[Gate] {
        &self.gate_program
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    /// CNOT pairs in the first reupload-layer block, as a layout size label.
    pub fn cnots_per_block(&self) -> usize {
        self.resolved_entanglement
            .get(1)
            .or_else(|| self.resolved_entanglement.first())
            .map(|b| b.len())
            .unwrap_or(0)
    }

    /// Largest accessible frequency: L · Σ_i β_i.
    pub fn max_frequency(&self) -> f64 {
        self.layers as f64 * self.encoding.beta_sum()
    }

    pub fn evaluate(&self, params: &ParameterTable, x: f64) -> Result<f64> {
        crate::simcore::evaluate_circuit(self, params, x)
    }
}

/// Build the circuit for a given width, depth, encoding, entanglement layout
/// and observable. Trainable parameter count is n·2·(L+1).
pub fn build_circuit(
    n: usize,
    layers: usize,
    encoding: EncodingScheme,
    entanglement: EntanglementGenerator,
    observable: Observable,
) -> Result<ReuploaderCircuit> {
    if n < 1 {
        return Err(Error::Config("qubit count must be at least 1".into()));
    }
    if layers < 1 {
        return Err(Error::Config("layer count must be at least 1".into()));
    }
    if encoding.qubit_count() != n {
        return Err(Error::Config(format!(
            "encoding has {} betas but the circuit has {} qubits",
            encoding.qubit_count(),
            n
        )));
    }
    if observable.qubit >= n {
        return Err(Error::Config(format!(
            "observable qubit {} out of range for {} qubits",
            observable.qubit, n
        )));
    }
    let resolved = resolve_entanglement(entanglement, n, layers)?;
    for block in &resolved {
        for &(c, t) in block {
            if c >= n || t >= n || c == t {
                return Err(Error::Config(format!(
                    "entanglement pair ({c}, {t}) out of range for {n} qubits"
                )));
            }
        }
    }

    let parameter_count = n * 2 * (layers + 1);
    let mut program = Vec::new();
    let param_index = |block: usize, qubit: usize, slot: usize| block * 2 * n + qubit * 2 + slot;
    let push_block = |program: &mut Vec<Gate>, block: usize| {
        for q in 0..n {
            program.push(Gate::Rotation {
                axis: RotationAxis::Y,
                qubit: q,
                angle: AngleSource::Parameter(param_index(block, q, 0)),
            });
        }
        for q in 0..n {
            program.push(Gate::Rotation {
                axis: RotationAxis::X,
                qubit: q,
                angle: AngleSource::Parameter(param_index(block, q, 1)),
            });
        }
        for &(c, t) in &resolved[block] {
            program.push(Gate::Cnot { control: c, target: t });
        }
    };

    push_block(&mut program, 0);
    for l in 1..=layers {
        for (q, &beta) in encoding.betas().iter().enumerate() {
            program.push(Gate::Rotation {
                axis: RotationAxis::X,
                qubit: q,
                angle: AngleSource::Encoding(beta),
            });
        }
        push_block(&mut program, l);
    }

    Ok(ReuploaderCircuit {
        n,
        layers,
        encoding,
        generator: entanglement,
        resolved_entanglement: resolved,
        observable,
        gate_program: program,
        parameter_count,
    })
}

/// Draw an i.i.d. N(0, σ²) parameter table, reproducible from `seed`.
pub fn init_params(circuit: &ReuploaderCircuit, sigma: f64, seed: u64) -> Result<ParameterTable> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Config(format!(
            "initialization std-dev must be finite and >= 0, got {sigma}"
        )));
    }
    let count = circuit.parameter_count();
    if sigma == 0.0 {
        return Ok(ParameterTable::zeros(count));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::Numeric(format!("normal distribution: {e}")))?;
    let values = (0..count).map(|_| normal.sample(&mut rng)).collect();
    Ok(ParameterTable { values })
}
