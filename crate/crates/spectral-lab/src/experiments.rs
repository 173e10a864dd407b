//! Experiment orchestration: sinusoidal regression targets, full-batch Adam
//! training with per-frequency traces, perturbation robustness reports, and
//! the entanglement / initialization sweeps.
//!
//! Every experiment is a pure function of its configuration and seeds;
//! reruns produce identical traces byte for byte.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::circuit::{
    build_circuit, init_params, EncodingScheme, EntanglementGenerator, ParameterTable,
    ReuploaderCircuit,
};
use crate::error::{Error, Result};
use crate::fourier::{dft_coefficients, sample_grid, FourierSnapshot};
use crate::gradients::mse_loss_gradient;
use crate::simcore::{evaluate_circuit, Observable};
use crate::stats::mean;
use crate::util::{derived_seed, fmt_f64};

/// Normalized sum of sines h(x) = (1/Σ A_ω) Σ A_ω sin(ωx + φ_ω) with
/// seeded uniform phases; |h| ≤ 1 by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFunction {
    frequencies: Vec<i64>,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    normalizer: f64,
}

/// Build a target with i.i.d. phases drawn uniformly from [0, 2π).
pub fn make_target(frequencies: &[i64], amplitudes: &[f64], phase_seed: u64) -> Result<TargetFunction> {
    if frequencies.is_empty() {
        return Err(Error::Config("target needs at least one frequency".into()));
    }
    if frequencies.len() != amplitudes.len() {
        return Err(Error::Config(format!(
            "{} frequencies but {} amplitudes",
            frequencies.len(),
            amplitudes.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &f in frequencies {
        if f <= 0 {
            return Err(Error::Config(format!(
                "target frequencies must be positive integers, got {f}"
            )));
        }
        if !seen.insert(f) {
            return Err(Error::Config(format!("duplicate target frequency {f}")));
        }
    }
    if amplitudes.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(Error::Config("amplitudes must be finite and positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(phase_seed);
    let phases: Vec<f64> = frequencies
        .iter()
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    Ok(TargetFunction {
        frequencies: frequencies.to_vec(),
        amplitudes: amplitudes.to_vec(),
        phases,
        normalizer: amplitudes.iter().sum(),
    })
}

impl TargetFunction {
    pub fn frequencies(&self) -> &[i64] {
        &self.frequencies
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for ((&f, &a), &phi) in self
            .frequencies
            .iter()
            .zip(&self.amplitudes)
            .zip(&self.phases)
        {
            acc += a * (f as f64 * x + phi).sin();
        }
        acc / self.normalizer
    }

    pub fn samples(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&x| self.eval(x)).collect()
    }

    /// Exact coefficients on the window |ω| ≤ W: each sine contributes
    /// c_{±ω} = ∓(i/2)(A_ω/N) e^{±iφ_ω}; zero elsewhere on the window.
    pub fn snapshot(&self, window: i64) -> FourierSnapshot {
        let mut coefficients: BTreeMap<i64, Complex64> = (-window..=window)
            .map(|w| (w, Complex64::new(0.0, 0.0)))
            .collect();
        for ((&f, &a), &phi) in self
            .frequencies
            .iter()
            .zip(&self.amplitudes)
            .zip(&self.phases)
        {
            let scale = a / self.normalizer / 2.0;
            let plus = Complex64::new(0.0, -scale) * Complex64::from_polar(1.0, phi);
            if f <= window {
                *coefficients.get_mut(&f).unwrap() += plus;
                *coefficients.get_mut(&-f).unwrap() += plus.conj();
            }
        }
        FourierSnapshot::from_coefficients(coefficients, 0)
    }

    /// |c_ω| of the target at one of its own frequencies: A_ω/(2N).
    pub fn coefficient_magnitude(&self, omega: i64) -> f64 {
        self.frequencies
            .iter()
            .position(|&f| f == omega)
            .map(|i| self.amplitudes[i] / self.normalizer / 2.0)
            .unwrap_or(0.0)
    }
}

/// Training hyperparameters. `eval_every` controls the (constant) interval
/// between recorded trace entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub epochs: usize,
    pub eval_every: usize,
    pub grid_size: usize,
    pub omega_max_track: i64,
    /// Stop once total grid loss falls below this value.
    pub early_stop_loss: Option<f64>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            learning_rate: 5e-4,
            epochs: 3000,
            eval_every: 5,
            grid_size: 2048,
            omega_max_track: 100,
            early_stop_loss: Some(1e-5),
        }
    }
}

/// Per-evaluation-epoch record of the loss, the coefficient snapshot, and
/// the per-target-frequency magnitudes normalized by the target amplitude.
#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub eval_epochs: Vec<usize>,
    pub losses: Vec<f64>,
    /// Σ_ω |c_Dω|² at each evaluation (the Parseval counterpart of the loss).
    pub spectral_totals: Vec<f64>,
    pub snapshots: Vec<FourierSnapshot>,
    /// Rows per evaluation epoch, columns per target frequency:
    /// |c_ω(model)| / |c_ω(target)|.
    pub normalized: Vec<Vec<f64>>,
    pub target_frequencies: Vec<i64>,
    pub eval_every: usize,
    pub diverged: bool,
    pub final_params: ParameterTable,
}

impl TrainingTrace {
    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(f64::NAN)
    }

    /// Long-format CSV of the normalized magnitudes (epoch, omega, value).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,omega,normalized_magnitude\n");
        for (row, &epoch) in self.normalized.iter().zip(&self.eval_epochs) {
            for (&omega, &value) in self.target_frequencies.iter().zip(row) {
                out.push_str(&format!("{epoch},{omega},{}\n", fmt_f64(value)));
            }
        }
        out
    }

    pub fn loss_csv(&self) -> String {
        let mut out = String::from("epoch,loss,spectral_total,parseval_residual\n");
        for ((&epoch, &loss), &spectral) in self
            .eval_epochs
            .iter()
            .zip(&self.losses)
            .zip(&self.spectral_totals)
        {
            out.push_str(&format!(
                "{epoch},{},{},{}\n",
                fmt_f64(loss),
                fmt_f64(spectral),
                fmt_f64((loss - spectral).abs())
            ));
        }
        out
    }
}

/// Full-batch Adam on the grid MSE against the target, evaluating the loss
/// and coefficient snapshot every `eval_every` epochs (including epoch 0).
/// A non-finite loss aborts and returns the trace recorded so far with
/// `diverged` set.
pub fn train(
    circuit: &ReuploaderCircuit,
    params0: &ParameterTable,
    target: &TargetFunction,
    options: &TrainOptions,
) -> Result<TrainingTrace> {
    if options.eval_every == 0 {
        return Err(Error::Config("eval_every must be at least 1".into()));
    }
    if !(options.learning_rate.is_finite() && options.learning_rate > 0.0) {
        return Err(Error::Config(format!(
            "learning rate must be positive, got {}",
            options.learning_rate
        )));
    }
    if options.grid_size as i64 <= 2 * options.omega_max_track {
        return Err(Error::Config(format!(
            "grid size {} must exceed twice the tracking window {}",
            options.grid_size, options.omega_max_track
        )));
    }
    for &f in target.frequencies() {
        if f > options.omega_max_track {
            return Err(Error::Config(format!(
                "target frequency {f} outside the tracking window {}",
                options.omega_max_track
            )));
        }
    }

    let grid = sample_grid(options.grid_size)?;
    let target_values = target.samples(&grid);
    let target_snapshot = target.snapshot(options.omega_max_track);

    let mut params = params0.clone();
    let count = circuit.parameter_count();
    let mut first_moment = vec![0.0; count];
    let mut second_moment = vec![0.0; count];
    let (beta1, beta2, epsilon): (f64, f64, f64) = (0.9, 0.999, 1e-8);

    let mut trace = TrainingTrace {
        eval_epochs: Vec::new(),
        losses: Vec::new(),
        spectral_totals: Vec::new(),
        snapshots: Vec::new(),
        normalized: Vec::new(),
        target_frequencies: target.frequencies().to_vec(),
        eval_every: options.eval_every,
        diverged: false,
        final_params: params.clone(),
    };

    let mut step = 0usize;
    for epoch in 0..=options.epochs {
        if epoch % options.eval_every == 0 {
            let samples: Vec<f64> = grid
                .par_iter()
                .map(|&x| evaluate_circuit(circuit, &params, x))
                .collect::<Result<Vec<_>>>()?;
            let loss = samples
                .iter()
                .zip(&target_values)
                .map(|(f, h)| (f - h) * (f - h))
                .sum::<f64>()
                / samples.len() as f64;
            let snapshot = dft_coefficients(&samples, options.omega_max_track)?;
            let spectral_total: f64 = snapshot
                .iter()
                .map(|(w, c)| (c - target_snapshot.get(w)).norm_sqr())
                .sum();
            let normalized: Vec<f64> = target
                .frequencies()
                .iter()
                .map(|&f| snapshot.get(f).norm() / target.coefficient_magnitude(f))
                .collect();
            trace.eval_epochs.push(epoch);
            trace.losses.push(loss);
            trace.spectral_totals.push(spectral_total);
            trace.snapshots.push(snapshot);
            trace.normalized.push(normalized);

            if !loss.is_finite() {
                trace.diverged = true;
                break;
            }
            if let Some(threshold) = options.early_stop_loss {
                if loss < threshold {
                    break;
                }
            }
        }
        if epoch == options.epochs {
            break;
        }

        let (loss, grad) = mse_loss_gradient(circuit, &params, &grid, &target_values)?;
        if !loss.is_finite() {
            trace.diverged = true;
            break;
        }
        step += 1;
        let bias1 = 1.0 - beta1.powi(step as i32);
        let bias2 = 1.0 - beta2.powi(step as i32);
        for ((theta, g), (m, v)) in params
            .values_mut()
            .iter_mut()
            .zip(&grad.values)
            .zip(first_moment.iter_mut().zip(second_moment.iter_mut()))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *theta -= options.learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    trace.final_params = params;
    Ok(trace)
}

/// First evaluation epoch at which the normalized magnitude at `omega`
/// reaches `threshold` and stays there for `hold` consecutive evaluations.
pub fn epochs_to_threshold(
    trace: &TrainingTrace,
    omega: i64,
    threshold: f64,
    hold: usize,
) -> Result<Option<usize>> {
    if hold == 0 {
        return Err(Error::Config("hold must be at least 1".into()));
    }
    let column = trace
        .target_frequencies
        .iter()
        .position(|&f| f == omega)
        .ok_or_else(|| Error::Config(format!("frequency {omega} is not tracked by the trace")))?;
    let values: Vec<f64> = trace.normalized.iter().map(|row| row[column]).collect();
    for start in 0..values.len() {
        if start + hold > values.len() {
            break;
        }
        if values[start..start + hold].iter().all(|v| *v >= threshold) {
            return Ok(Some(trace.eval_epochs[start]));
        }
    }
    Ok(None)
}

/// Mean normalized coefficient magnitudes under isotropic parameter
/// perturbations θ* + δ·û of increasing magnitude δ.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub deltas: Vec<f64>,
    pub omegas: Vec<i64>,
    /// Rows per δ, columns per ω: mean |c_ω(θ* + δû)| / |c_ω(θ*)|;
    /// `None` marks baselines too small to divide by.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub samples_per_delta: usize,
}

impl PerturbationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,omega,normalized_magnitude\n");
        for (row, &delta) in self.matrix.iter().zip(&self.deltas) {
            for (&omega, value) in self.omegas.iter().zip(row) {
                let cell = match value {
                    Some(v) => fmt_f64(*v),
                    None => "nan".to_string(),
                };
                out.push_str(&format!("{},{omega},{cell}\n", fmt_f64(delta)));
            }
        }
        out
    }

    pub fn value(&self, delta_index: usize, omega: i64) -> Option<f64> {
        let column = self.omegas.iter().position(|&w| w == omega)?;
        self.matrix[delta_index][column]
    }
}

/// Twenty perturbation magnitudes linearly spaced over [0, π].
pub fn default_deltas() -> Vec<f64> {
    (0..20)
        .map(|i| std::f64::consts::PI * i as f64 / 19.0)
        .collect()
}

/// Perturb a trained table along `n_directions` uniform unit directions per
/// δ and average the tracked coefficient magnitudes. The same direction set
/// is reused for every δ so rows differ only by the magnitude.
pub fn perturbation_report(
    circuit: &ReuploaderCircuit,
    params_star: &ParameterTable,
    deltas: &[f64],
    n_directions: usize,
    tracked: &[i64],
    grid_size: usize,
    seed: u64,
) -> Result<PerturbationReport> {
    if n_directions == 0 {
        return Err(Error::Config("need at least one direction".into()));
    }
    if tracked.is_empty() {
        return Err(Error::Config("no tracked frequencies".into()));
    }
    let window = tracked.iter().map(|w| w.abs()).max().unwrap();
    let count = circuit.parameter_count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions: Vec<Vec<f64>> = (0..n_directions)
        .map(|_| {
            let raw: Vec<f64> = (0..count)
                .map(|_| {
                    rand_distr::Distribution::sample(
                        &rand_distr::StandardNormal,
                        &mut rng,
                    )
                })
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            raw.iter().map(|v| v / norm).collect()
        })
        .collect();

    let grid = sample_grid(grid_size)?;
    let snapshot_at = |params: &ParameterTable| -> Result<FourierSnapshot> {
        let samples: Vec<f64> = grid
            .par_iter()
            .map(|&x| evaluate_circuit(circuit, params, x))
            .collect::<Result<Vec<_>>>()?;
        dft_coefficients(&samples, window)
    };

    let baseline = snapshot_at(params_star)?;
    let baseline_abs: Vec<f64> = tracked.iter().map(|&w| baseline.get(w).norm()).collect();

    let mut matrix = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let per_direction: Vec<Vec<f64>> = directions
            .par_iter()
            .map(|direction| -> Result<Vec<f64>> {
                let mut shifted = params_star.clone();
                for (theta, d) in shifted.values_mut().iter_mut().zip(direction) {
                    *theta += delta * d;
                }
                let snapshot = snapshot_at(&shifted)?;
                Ok(tracked.iter().map(|&w| snapshot.get(w).norm()).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let row: Vec<Option<f64>> = (0..tracked.len())
            .map(|col| {
                if baseline_abs[col] < 1e-12 {
                    None
                } else {
                    let avg = per_direction.iter().map(|d| d[col]).sum::<f64>()
                        / n_directions as f64;
                    Some(avg / baseline_abs[col])
                }
            })
            .collect();
        matrix.push(row);
    }
    Ok(PerturbationReport {
        deltas: deltas.to_vec(),
        omegas: tracked.to_vec(),
        matrix,
        samples_per_delta: n_directions,
    })
}

/// Shared base configuration for the sweep experiments: one training run is
/// a (circuit layout, init seed, target phase draw) triple.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub qubits: usize,
    pub layers: usize,
    pub encoding: EncodingScheme,
    pub observable: Observable,
    pub init_sigma: f64,
    pub target_frequencies: Vec<i64>,
    pub target_amplitudes: Vec<f64>,
    pub options: TrainOptions,
    pub threshold: f64,
    pub hold: usize,
}

impl SweepBase {
    fn run_one(
        &self,
        entanglement: EntanglementGenerator,
        seed: u64,
    ) -> Result<(ReuploaderCircuit, TrainingTrace)> {
        let circuit = build_circuit(
            self.qubits,
            self.layers,
            self.encoding.clone(),
            entanglement,
            self.observable,
        )?;
        let params = init_params(&circuit, self.init_sigma, derived_seed(seed, 1))?;
        let target = make_target(
            &self.target_frequencies,
            &self.target_amplitudes,
            derived_seed(seed, 2),
        )?;
        let trace = train(&circuit, &params, &target, &self.options)?;
        Ok((circuit, trace))
    }
}

/// One (layout, seed, frequency) convergence measurement.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub layout: String,
    pub cnots_per_block: usize,
    pub omega: i64,
    pub seed: u64,
    /// Eval epoch of convergence, or `None` for did-not-converge.
    pub epochs: Option<usize>,
}

/// Per-run convergence data for an entanglement comparison.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub epochs_budget: usize,
}

impl ConvergenceTable {
    /// Mean epochs per (layout, ω) with did-not-converge runs counted at the
    /// epochs budget.
    pub fn mean_epochs(&self, layout: &str, omega: i64) -> f64 {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.layout == layout && r.omega == omega)
            .map(|r| r.epochs.unwrap_or(self.epochs_budget) as f64)
            .collect();
        mean(&values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("layout,cnots_per_block,omega,seed,epochs_to_threshold\n");
        for row in &self.rows {
            let epochs = match row.epochs {
                Some(e) => e.to_string(),
                None => "did-not-converge".to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{},{epochs}\n",
                row.layout, row.cnots_per_block, row.omega, row.seed
            ));
        }
        out
    }
}

/// Train one model per (layout, seed) and record epochs-to-threshold per
/// target frequency.
pub fn entanglement_sweep(
    base: &SweepBase,
    layouts: &[EntanglementGenerator],
    seeds: &[u64],
) -> Result<ConvergenceTable> {
    if layouts.is_empty() {
        return Err(Error::Config("no layouts to sweep".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("no seeds to sweep".into()));
    }
    let combos: Vec<(EntanglementGenerator, u64)> = layouts
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    let per_run: Vec<Vec<ConvergenceRow>> = combos
        .par_iter()
        .map(|&(layout, seed)| -> Result<Vec<ConvergenceRow>> {
            let (circuit, trace) = base.run_one(layout, seed)?;
            base.target_frequencies
                .iter()
                .map(|&omega| {
                    Ok(ConvergenceRow {
                        layout: layout.label(),
                        cnots_per_block: circuit.cnots_per_block(),
                        omega,
                        seed,
                        epochs: epochs_to_threshold(&trace, omega, base.threshold, base.hold)?,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable {
        rows: per_run.into_iter().flatten().collect(),
        epochs_budget: base.options.epochs,
    })
}

/// One (σ, ω) cell of the initialization sweep.
#[derive(Debug, Clone)]
pub struct InitRow {
    pub sigma: f64,
    pub omega: i64,
    /// Mean over seeds of |c_ω|² at epoch 0.
    pub mean_sq_coefficient: f64,
}

#[derive(Debug, Clone)]
pub struct InitSweep {
    pub rows: Vec<InitRow>,
    /// Present when the sweep also trained each (σ, seed) pair.
    pub traces: Vec<(f64, u64, TrainingTrace)>,
}

impl InitSweep {
    pub fn mean_sq(&self, sigma: f64, omega: i64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.sigma == sigma && r.omega == omega)
            .map(|r| r.mean_sq_coefficient)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,omega,mean_sq_coefficient\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(row.sigma),
                row.omega,
                fmt_f64(row.mean_sq_coefficient)
            ));
        }
        out
    }
}

/// Initial coefficient magnitudes (and optionally full training runs) as a
/// function of the initialization scale σ.
pub fn init_sweep(
    base: &SweepBase,
    entanglement: EntanglementGenerator,
    sigmas: &[f64],
    seeds: &[u64],
    with_training: bool,
) -> Result<InitSweep> {
    if sigmas.is_empty() {
        return Err(Error::Config("no sigma values to sweep".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("no seeds to sweep".into()));
    }
    let circuit = build_circuit(
        base.qubits,
        base.layers,
        base.encoding.clone(),
        entanglement,
        base.observable,
    )?;
    let window = (circuit.max_frequency().round() as i64).min(base.options.omega_max_track);
    let grid = sample_grid(base.options.grid_size)?;

    let mut rows = Vec::new();
    for &sigma in sigmas {
        let per_seed: Vec<FourierSnapshot> = seeds
            .par_iter()
            .map(|&seed| -> Result<FourierSnapshot> {
                let params = init_params(&circuit, sigma, derived_seed(seed, 1))?;
                let samples: Vec<f64> = grid
                    .iter()
                    .map(|&x| evaluate_circuit(&circuit, &params, x))
                    .collect::<Result<Vec<_>>>()?;
                dft_coefficients(&samples, window)
            })
            .collect::<Result<Vec<_>>>()?;
        for omega in 0..=window {
            let mean_sq = per_seed
                .iter()
                .map(|s| s.get(omega).norm_sqr())
                .sum::<f64>()
                / per_seed.len() as f64;
            rows.push(InitRow {
                sigma,
                omega,
                mean_sq_coefficient: mean_sq,
            });
        }
    }

    let mut traces = Vec::new();
    if with_training {
        let combos: Vec<(f64, u64)> = sigmas
            .iter()
            .flat_map(|&sg| seeds.iter().map(move |&s| (sg, s)))
            .collect();
        traces = combos
            .par_iter()
            .map(|&(sigma, seed)| -> Result<(f64, u64, TrainingTrace)> {
                let mut scaled = base.clone();
                scaled.init_sigma = sigma;
                let (_, trace) = scaled.run_one(entanglement, seed)?;
                Ok((sigma, seed, trace))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(InitSweep { rows, traces })
}
