//! Fourier coefficients of sampled circuit outputs, per-frequency loss
//! decomposition, coefficient gradients, and a tiny-scale matrix-product
//! oracle that builds the coefficients from explicit block unitaries.
//!
//! Convention: c_ω = (1/M) Σ_m f(x_m) e^{−iω x_m} on the grid x_m = 2πm/M,
//! so that f(x) = Σ_ω c_ω e^{iωx}.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::circuit::{ParameterTable, ReuploaderCircuit};
use crate::error::{Error, Result};
use crate::gradients::value_and_adjoint_gradient;
use crate::simcore::{AngleSource, Gate, RotationAxis};
use crate::util::{fmt_f64, fmt_omega};

/// M equally spaced sample points x_m = 2πm/M on [0, 2π).
pub fn sample_grid(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::Config(format!("grid size must be at least 2, got {m}")));
    }
    Ok((0..m).map(|i| TAU * i as f64 / m as f64).collect())
}

/// Fourier coefficients c_ω on the integer window |ω| ≤ W.
///
/// `grid_size` records the sampling grid the snapshot came from; 0 marks an
/// analytically constructed snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSnapshot {
    coefficients: BTreeMap<i64, Complex64>,
    grid_size: usize,
}

impl FourierSnapshot {
    pub fn from_coefficients(coefficients: BTreeMap<i64, Complex64>, grid_size: usize) -> Self {
        FourierSnapshot {
            coefficients,
            grid_size,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// c_ω, zero off-support.
    pub fn get(&self, omega: i64) -> Complex64 {
        self.coefficients
            .get(&omega)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coefficients.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Complex64)> {
        self.coefficients.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Largest |c_{−ω} − conj(c_ω)| over the support; ~0 for real sources.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|(k, v)| (self.get(-k) - v.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Σ_ω |c_ω|² over the support.
    pub fn sum_abs_sqr(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,re,im,abs\n");
        for (omega, c) in &self.coefficients {
            out.push_str(&format!(
                "{},{},{},{}\n",
                omega,
                fmt_f64(c.re),
                fmt_f64(c.im),
                fmt_f64(c.norm())
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .coefficients
            .iter()
            .map(|(k, c)| serde_json::json!({ "omega": k, "re": c.re, "im": c.im, "abs": c.norm() }))
            .collect();
        serde_json::json!({ "grid_size": self.grid_size, "coefficients": entries })
    }
}

fn check_window(grid_size: usize, omega_max_track: i64) -> Result<()> {
    if omega_max_track < 0 {
        return Err(Error::Config(format!(
            "tracking window must be non-negative, got {omega_max_track}"
        )));
    }
    if 2 * omega_max_track >= grid_size as i64 {
        return Err(Error::Aliasing(format!(
            "tracking window |ω| ≤ {omega_max_track} violates the Nyquist limit ω < M/2 \
             for grid size M = {grid_size}; coefficients above M/2 would alias"
        )));
    }
    Ok(())
}

/// Direct DFT of real samples over the window |ω| ≤ `omega_max_track`,
/// exact for integer-band-limited inputs.
pub fn dft_coefficients(samples: &[f64], omega_max_track: i64) -> Result<FourierSnapshot> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::Config(format!(
            "need at least 2 samples, got {m}"
        )));
    }
    check_window(m, omega_max_track)?;
    let coefficients: BTreeMap<i64, Complex64> = (-omega_max_track..=omega_max_track)
        .into_par_iter()
        .map(|omega| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &sample) in samples.iter().enumerate() {
                let phase = -(omega as f64) * TAU * i as f64 / m as f64;
                let (s, c) = phase.sin_cos();
                acc += sample * Complex64::new(c, s);
            }
            (omega, acc / m as f64)
        })
        .collect();
    Ok(FourierSnapshot::from_coefficients(coefficients, m))
}

/// Per-parameter gradients of every tracked coefficient:
/// ∂c_ω/∂θ_k is the DFT of the θ_k derivative samples (the shift-rule
/// derivative, computed by the equivalent adjoint sweep).
#[derive(Debug, Clone)]
pub struct CoefficientGradients {
    per_omega: BTreeMap<i64, Vec<Complex64>>,
    parameter_count: usize,
}

impl CoefficientGradients {
    /// ∂c_ω/∂θ over all parameters; zero vector off-support.
    pub fn at(&self, omega: i64) -> Vec<Complex64> {
        self.per_omega
            .get(&omega)
            .cloned()
            .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.parameter_count])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Vec<Complex64>)> {
        self.per_omega.iter().map(|(k, v)| (*k, v))
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    /// G(ω) = Σ_k |∂c_ω/∂θ_k|.
    pub fn total_abs(&self, omega: i64) -> f64 {
        self.per_omega
            .get(&omega)
            .map(|v| v.iter().map(|c| c.norm()).sum())
            .unwrap_or(0.0)
    }
}

/// Gradients of all tracked coefficients with respect to every parameter.
pub fn coefficient_gradients(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    grid_size: usize,
    omega_max_track: i64,
) -> Result<CoefficientGradients> {
    check_window(grid_size, omega_max_track)?;
    let grid = sample_grid(grid_size)?;
    let parameter_count = circuit.parameter_count();

    // derivative samples: rows indexed by grid point, columns by parameter
    let derivative_rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| value_and_adjoint_gradient(circuit, params, x).map(|(_, g)| g.values))
        .collect::<Result<Vec<_>>>()?;

    let m = grid_size as f64;
    let per_omega: BTreeMap<i64, Vec<Complex64>> = (-omega_max_track..=omega_max_track)
        .into_par_iter()
        .map(|omega| {
            let mut acc = vec![Complex64::new(0.0, 0.0); parameter_count];
            for (i, row) in derivative_rows.iter().enumerate() {
                let phase = -(omega as f64) * TAU * i as f64 / m;
                let (s, c) = phase.sin_cos();
                let kernel = Complex64::new(c, s);
                for (a, &d) in acc.iter_mut().zip(row) {
                    *a += d * kernel;
                }
            }
            for a in &mut acc {
                *a /= m;
            }
            (omega, acc)
        })
        .collect();
    Ok(CoefficientGradients {
        per_omega,
        parameter_count,
    })
}

/// Per-frequency squared coefficient error L(ω) = |c_ω(model) − c_ω(target)|²
/// over a shared integer support; the total equals the grid MSE for
/// band-limited sources.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpectrum {
    pub per_omega: BTreeMap<i64, f64>,
    pub total: f64,
}

pub fn loss_decomposition(
    model: &FourierSnapshot,
    target: &FourierSnapshot,
) -> Result<LossSpectrum> {
    if model.support() != target.support() {
        return Err(Error::Config(
            "model and target snapshots cover different frequency supports".into(),
        ));
    }
    let mut per_omega = BTreeMap::new();
    let mut total = 0.0;
    for (omega, c_model) in model.iter() {
        let value = (c_model - target.get(omega)).norm_sqr();
        per_omega.insert(omega, value);
        total += value;
    }
    Ok(LossSpectrum { per_omega, total })
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Loss shares assigned to arbitrary real frequencies:
/// L(ω) = Re(c_Dω · Σ_{ω'} conj(c_Dω') e^{iπ(ω−ω')} sinc(π(ω−ω'))).
/// The shares sum to (1/2π)∫₀^{2π} D(x)² dx and reduce to the orthogonal
/// per-frequency squares when every frequency is an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct NonintegerLossSpectrum {
    pub frequencies: Vec<f64>,
    pub per_omega: Vec<f64>,
    pub total: f64,
}

pub fn noninteger_loss_assignment(
    frequencies: &[f64],
    model: &[Complex64],
    target: &[Complex64],
) -> Result<NonintegerLossSpectrum> {
    if frequencies.len() != model.len() || frequencies.len() != target.len() {
        return Err(Error::Config(format!(
            "spectrum ({}), model ({}) and target ({}) lengths differ",
            frequencies.len(),
            model.len(),
            target.len()
        )));
    }
    if frequencies.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numeric("non-finite frequency in spectrum".into()));
    }
    let diff: Vec<Complex64> = model.iter().zip(target).map(|(m, t)| m - t).collect();
    let mut per_omega = Vec::with_capacity(frequencies.len());
    let mut total = 0.0;
    for (j, &omega) in frequencies.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (jp, &omega_p) in frequencies.iter().enumerate() {
            let gap = std::f64::consts::PI * (omega - omega_p);
            let (s, c) = gap.sin_cos();
            acc += diff[jp].conj() * Complex64::new(c, s) * sinc(gap);
        }
        let share = (diff[j] * acc).re;
        per_omega.push(share);
        total += share;
    }
    Ok(NonintegerLossSpectrum {
        frequencies: frequencies.to_vec(),
        per_omega,
        total,
    })
}

impl NonintegerLossSpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,loss_share\n");
        for (w, l) in self.frequencies.iter().zip(&self.per_omega) {
            out.push_str(&format!("{},{}\n", fmt_omega(*w), fmt_f64(*l)));
        }
        out
    }
}

/// Least-squares projection of grid samples onto exp(iωx) atoms at arbitrary
/// real frequencies (the atoms are not orthogonal off the integer lattice).
pub fn project_coefficients(samples: &[f64], frequencies: &[f64]) -> Result<Vec<Complex64>> {
    use nalgebra::{DMatrix, DVector};
    let m = samples.len();
    let k = frequencies.len();
    if m < 2 {
        return Err(Error::Config("need at least 2 samples".into()));
    }
    if k == 0 {
        return Err(Error::Config("empty frequency list".into()));
    }
    if k > m {
        return Err(Error::Config(format!(
            "cannot fit {k} atoms to {m} samples"
        )));
    }
    let grid = sample_grid(m)?;
    let atoms = DMatrix::<Complex64>::from_fn(m, k, |row, col| {
        let phase = frequencies[col] * grid[row];
        let (s, c) = phase.sin_cos();
        Complex64::new(c, s)
    });
    let rhs_samples = DVector::<Complex64>::from_iterator(
        m,
        samples.iter().map(|&v| Complex64::new(v, 0.0)),
    );
    let gram = atoms.adjoint() * &atoms;
    let rhs = atoms.adjoint() * rhs_samples;
    let solution = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular least-squares system for frequency atoms".into()))?;
    Ok(solution.iter().copied().collect())
}

// ---------------------------------------------------------------------------
// coefficients from explicit block matrices (tiny-scale oracle)
// ---------------------------------------------------------------------------

type CMatrix = nalgebra::DMatrix<Complex64>;

fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

fn single_qubit_matrix(axis: RotationAxis, angle: f64) -> CMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    match axis {
        RotationAxis::X => CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                Complex64::new(0.0, -s),
                Complex64::new(0.0, -s),
                Complex64::new(c, 0.0),
            ],
        ),
        RotationAxis::Y => CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                Complex64::new(-s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(c, 0.0),
            ],
        ),
        RotationAxis::Z => CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, -s),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(c, s),
            ],
        ),
    }
}

/// Embed a single-qubit matrix at `qubit` (MSB ordering) in an n-qubit space.
fn embed_single(n: usize, qubit: usize, gate: &CMatrix) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for q in 0..n {
        let factor = if q == qubit {
            gate.clone()
        } else {
            identity(2)
        };
        acc = acc.kronecker(&factor);
    }
    acc
}

fn cnot_matrix(n: usize, control: usize, target: usize) -> CMatrix {
    let dim = 1 << n;
    let cmask = 1usize << (n - 1 - control);
    let tmask = 1usize << (n - 1 - target);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let row = if col & cmask != 0 { col ^ tmask } else { col };
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    m
}

fn hadamard_all(n: usize) -> CMatrix {
    let inv = 1.0 / 2f64.sqrt();
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(inv, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(-inv, 0.0),
        ],
    );
    let mut acc = CMatrix::identity(1, 1);
    for _ in 0..n {
        acc = acc.kronecker(&h);
    }
    acc
}

/// Split the flat program into the L+1 trainable segments, dropping the
/// encoding layers (handled analytically as diagonal phase factors).
fn trainable_segments(circuit: &ReuploaderCircuit) -> Vec<Vec<Gate>> {
    let mut segments = Vec::new();
    let mut current = Vec::new();
    let mut in_encoding = false;
    for gate in circuit.gate_program() {
        let is_encoding = matches!(
            gate,
            Gate::Rotation {
                angle: AngleSource::Encoding(_),
                ..
            }
        );
        if is_encoding {
            if !in_encoding {
                segments.push(std::mem::take(&mut current));
                in_encoding = true;
            }
        } else {
            in_encoding = false;
            current.push(*gate);
        }
    }
    segments.push(current);
    segments
}

fn segment_matrix(n: usize, segment: &[Gate], params: &ParameterTable) -> Result<CMatrix> {
    let mut acc = identity(1 << n);
    for gate in segment {
        let m = match *gate {
            Gate::Rotation { axis, qubit, angle } => {
                let resolved = match angle {
                    AngleSource::Parameter(idx) => params.values()[idx],
                    AngleSource::Fixed(a) => a,
                    AngleSource::Encoding(_) => {
                        return Err(Error::Config(
                            "encoding gate inside a trainable segment".into(),
                        ))
                    }
                };
                embed_single(n, qubit, &single_qubit_matrix(axis, resolved))
            }
            Gate::Cnot { control, target } => cnot_matrix(n, control, target),
        };
        acc = m * acc;
    }
    Ok(acc)
}

fn decomposition_core(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
) -> Result<(BTreeMap<i64, Complex64>, BTreeMap<i64, u64>)> {
    let n = circuit.qubit_count();
    let layers = circuit.layer_count();
    if n > 2 || layers > 2 {
        return Err(Error::Size(format!(
            "coefficient decomposition enumerates d^(2L) index pairs; \
             limited to n ≤ 2 and L ≤ 2, got n = {n}, L = {layers}"
        )));
    }
    if params.len() != circuit.parameter_count() {
        return Err(Error::Config(format!(
            "parameter table has {} entries, circuit expects {}",
            params.len(),
            circuit.parameter_count()
        )));
    }
    let mut scaled_betas = Vec::with_capacity(n);
    for &beta in circuit.encoding().betas() {
        let rounded = beta.round();
        if (beta - rounded).abs() > 1e-9 || rounded < 1.0 {
            return Err(Error::UnsupportedLattice(format!(
                "encoding scale {beta} is not an integer"
            )));
        }
        scaled_betas.push(rounded as i64);
    }

    let dim: usize = 1 << n;
    let segments = trainable_segments(circuit);
    if segments.len() != layers + 1 {
        return Err(Error::Config(format!(
            "expected {} trainable segments, found {}",
            layers + 1,
            segments.len()
        )));
    }
    let blocks: Vec<CMatrix> = segments
        .iter()
        .map(|seg| segment_matrix(n, seg, params))
        .collect::<Result<Vec<_>>>()?;

    // each encoding layer is H̄ · diag(e^{−iΛ_b x}) · H̄ in the computational
    // basis; fold the basis changes into the neighbouring trainable blocks
    let hbar = hadamard_all(n);
    let mut effective: Vec<CMatrix> = Vec::with_capacity(layers + 1);
    for (l, block) in blocks.iter().enumerate() {
        let mut m = block.clone();
        if l < layers {
            m = &hbar * m;
        }
        if l > 0 {
            m = m * &hbar;
        }
        effective.push(m);
    }

    // 2Λ_b: + β_q where the basis bit is 0, − β_q where it is 1
    let lam2: Vec<i64> = (0..dim)
        .map(|b| {
            (0..n)
                .map(|q| {
                    let bit = (b >> (n - 1 - q)) & 1;
                    if bit == 0 {
                        scaled_betas[q]
                    } else {
                        -scaled_betas[q]
                    }
                })
                .sum()
        })
        .collect();

    // path amplitude and eigen-sum per multi-index (j_1, …, j_L)
    let path_count = dim.pow(layers as u32);
    let mut amplitudes = Vec::with_capacity(path_count);
    let mut eigen_sums = Vec::with_capacity(path_count);
    let mut last_index = Vec::with_capacity(path_count);
    for idx in 0..path_count {
        let mut digits = Vec::with_capacity(layers);
        let mut rest = idx;
        for _ in 0..layers {
            digits.push(rest % dim);
            rest /= dim;
        }
        let mut amp = effective[0][(digits[0], 0)];
        let mut lam = lam2[digits[0]];
        for p in 1..layers {
            amp *= effective[p][(digits[p], digits[p - 1])];
            lam += lam2[digits[p]];
        }
        amplitudes.push(amp);
        eigen_sums.push(lam);
        last_index.push(digits[layers - 1]);
    }

    // G[k, j] = Σ_i O_i conj(W_L[i, k]) W_L[i, j]
    let final_block = &effective[layers];
    let obs_mask = 1usize << (n - 1 - circuit.observable().qubit);
    let mut pair_weight = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                let sign = if i & obs_mask == 0 { 1.0 } else { -1.0 };
                acc += sign * final_block[(i, k)].conj() * final_block[(i, j)];
            }
            pair_weight[(k, j)] = acc;
        }
    }

    let mut coefficients: BTreeMap<i64, Complex64> = BTreeMap::new();
    let mut term_counts: BTreeMap<i64, u64> = BTreeMap::new();
    for k in 0..path_count {
        for j in 0..path_count {
            let scaled_diff = eigen_sums[k] - eigen_sums[j];
            debug_assert_eq!(scaled_diff % 2, 0);
            let omega = scaled_diff / 2;
            let term =
                amplitudes[k].conj() * amplitudes[j] * pair_weight[(last_index[k], last_index[j])];
            *coefficients
                .entry(omega)
                .or_insert(Complex64::new(0.0, 0.0)) += term;
            *term_counts.entry(omega).or_insert(0) += 1;
        }
    }
    Ok((coefficients, term_counts))
}

/// The Fourier coefficients assembled term-by-term from explicit block
/// matrices, diagonal encoding phases and the diagonal observable. Agrees
/// with `dft_coefficients` of the sampled output; feasible only for n ≤ 2,
/// L ≤ 2.
pub fn coefficients_by_decomposition(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
) -> Result<FourierSnapshot> {
    let (coefficients, _) = decomposition_core(circuit, params)?;
    Ok(FourierSnapshot::from_coefficients(coefficients, 0))
}

/// Number of (eigen-sum, eigen-sum) index pairs feeding each frequency in
/// the term-by-term assembly; equals the redundancy profile.
pub fn decomposition_term_counts(circuit: &ReuploaderCircuit) -> Result<BTreeMap<i64, u64>> {
    let params = ParameterTable::zeros(circuit.parameter_count());
    let (_, counts) = decomposition_core(circuit, &params)?;
    Ok(counts)
}
