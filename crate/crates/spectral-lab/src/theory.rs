//! Numeric verification of the gradient bounds and the supporting
//! closed-form helpers.
//!
//! For every (parameter, frequency) pair the reports evaluate both sides of
//! the relevant inequality and record the slack rhs − lhs; a negative slack
//! beyond tolerance counts as a violation. The per-frequency loss gradient
//! is taken from coefficient gradients by the chain rule on |c_Dω|² rather
//! than by differencing loss spectra, which is ill-conditioned near zeros.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::circuit::{
    build_circuit, init_params, EncodingKind, EncodingScheme, EntanglementGenerator,
    ParameterTable, ReuploaderCircuit,
};
use crate::error::{Error, Result};
use crate::fourier::{coefficient_gradients, dft_coefficients, sample_grid, sinc, FourierSnapshot};
use crate::simcore::{evaluate_circuit, Observable};
use crate::spectrum::redundancy_profile;
use crate::stats::linear_fit;
use crate::util::{derived_seed, fmt_f64, fmt_omega};

/// Default absolute slack tolerance for bound checks.
pub const DEFAULT_BOUND_TOLERANCE: f64 = 1e-9;

/// One evaluated inequality instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub parameter: usize,
    pub omega: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// All rows of a bound check plus the violation count under `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub tolerance: f64,
    pub violations: usize,
    pub min_slack: f64,
}

impl BoundReport {
    pub fn from_rows(rows: Vec<BoundRow>, tolerance: f64) -> Self {
        let violations = rows.iter().filter(|r| r.slack < -tolerance).count();
        let min_slack = rows
            .iter()
            .map(|r| r.slack)
            .fold(f64::INFINITY, f64::min);
        BoundReport {
            rows,
            tolerance,
            violations,
            min_slack,
        }
    }

    pub fn passes(&self) -> bool {
        self.violations == 0
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,omega,lhs,rhs,slack\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.parameter,
                fmt_omega(row.omega),
                fmt_f64(row.lhs),
                fmt_f64(row.rhs),
                fmt_f64(row.slack)
            ));
        }
        out
    }
}

/// Aggregate over a suite of reports, serialized as the run summary.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSummary {
    pub instances: usize,
    pub rows: usize,
    pub violations: usize,
    pub min_slack: f64,
}

impl BoundSummary {
    pub fn from_reports(reports: &[BoundReport]) -> Self {
        BoundSummary {
            instances: reports.len(),
            rows: reports.iter().map(|r| r.rows.len()).sum(),
            violations: reports.iter().map(|r| r.violations).sum(),
            min_slack: reports
                .iter()
                .map(|r| r.min_slack)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Trace norm of the observable: 2^n eigenvalues of magnitude 1 for a
/// single-qubit Pauli-Z on n qubits.
pub fn trace_norm(_obs: &Observable, n: usize) -> f64 {
    2f64.powi(n as i32)
}

fn difference_coefficient(
    model: &FourierSnapshot,
    target: &FourierSnapshot,
    omega: i64,
) -> Complex64 {
    model.get(omega) - target.get(omega)
}

/// Bound check for integer-frequency models:
/// |∂_θ L(ω)| ≤ 4 R(ω) ‖O‖_tr |c_Dω| per (parameter, ω ≥ 0).
pub fn integer_bound_report(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    target: &FourierSnapshot,
    grid_size: usize,
    tolerance: f64,
) -> Result<BoundReport> {
    let window = target
        .support()
        .iter()
        .map(|w| w.abs())
        .max()
        .ok_or_else(|| Error::Config("target snapshot is empty".into()))?;
    let spectrum = redundancy_profile(
        circuit.encoding(),
        circuit.qubit_count(),
        circuit.layer_count(),
    )
    .map_err(|e| match e {
        Error::UnsupportedLattice(msg) => Error::UnsupportedLattice(format!(
            "{msg}; non-integer spectra are handled by the sinc-weighted bound report"
        )),
        other => other,
    })?;
    let norm = trace_norm(circuit.observable(), circuit.qubit_count());

    let grid = sample_grid(grid_size)?;
    let samples: Vec<f64> = grid
        .iter()
        .map(|&x| evaluate_circuit(circuit, params, x))
        .collect::<Result<Vec<_>>>()?;
    let model = dft_coefficients(&samples, window)?;
    let grads = coefficient_gradients(circuit, params, grid_size, window)?;

    let mut rows = Vec::new();
    for omega in 0..=window {
        let c_d = difference_coefficient(&model, target, omega);
        let redundancy = spectrum.redundancy_at_f64(omega);
        let rhs = 4.0 * redundancy * norm * c_d.norm();
        for (k, dc) in grads.at(omega).iter().enumerate() {
            let lhs = (2.0 * (c_d.conj() * dc).re).abs();
            rows.push(BoundRow {
                parameter: k,
                omega: omega as f64,
                lhs,
                rhs,
                slack: rhs - lhs,
            });
        }
    }
    Ok(BoundReport::from_rows(rows, tolerance))
}

/// The sinc-weighted bound evaluated from explicit parts. `derivatives[j][k]`
/// is ∂c_{ω_j}/∂θ_k of the model; redundancies align with `frequencies`.
/// The loss share at ω is Re(c_Dω Σ_{ω'} conj(c_Dω') e^{iπ(ω−ω')} sinc(π(ω−ω'))),
/// and the bound is 2‖O‖_tr Σ_{ω'} |sinc(π(ω−ω'))| (|c_Dω'| R(ω) + |c_Dω| R(ω')).
pub fn sinc_bound_report_from_parts(
    frequencies: &[f64],
    diff_coefficients: &[Complex64],
    derivatives: &[Vec<Complex64>],
    redundancies: &[f64],
    observable_trace_norm: f64,
    tolerance: f64,
) -> Result<BoundReport> {
    let count = frequencies.len();
    if diff_coefficients.len() != count
        || derivatives.len() != count
        || redundancies.len() != count
    {
        return Err(Error::Config(
            "frequency, coefficient, derivative and redundancy lists must align".into(),
        ));
    }
    let parameter_count = derivatives.first().map(|d| d.len()).unwrap_or(0);
    if derivatives.iter().any(|d| d.len() != parameter_count) {
        return Err(Error::Config("ragged derivative table".into()));
    }

    let mut rows = Vec::new();
    for (j, &omega) in frequencies.iter().enumerate() {
        let c_j = diff_coefficients[j];
        for k in 0..parameter_count {
            // d/dθ Re(Σ_{ω'} e^{iπΔ} sinc(πΔ) c_Dω conj(c_Dω'))
            let mut lhs_acc = Complex64::new(0.0, 0.0);
            let mut rhs = 0.0;
            for (jp, &omega_p) in frequencies.iter().enumerate() {
                let gap = std::f64::consts::PI * (omega - omega_p);
                let weight = sinc(gap);
                let (s, c) = gap.sin_cos();
                let phase = Complex64::new(c, s);
                let c_p = diff_coefficients[jp];
                lhs_acc += phase
                    * weight
                    * (derivatives[j][k] * c_p.conj() + c_j * derivatives[jp][k].conj());
                rhs += weight.abs()
                    * (c_p.norm() * redundancies[j] + c_j.norm() * redundancies[jp]);
            }
            let lhs = lhs_acc.re.abs();
            let rhs = 2.0 * observable_trace_norm * rhs;
            rows.push(BoundRow {
                parameter: k,
                omega,
                lhs,
                rhs,
                slack: rhs - lhs,
            });
        }
    }
    Ok(BoundReport::from_rows(rows, tolerance))
}

/// Circuit-driven sinc-weighted bound over the target snapshot's support;
/// rows are reported for ω ≥ 0 while sums range over the signed support.
pub fn sinc_bound_report(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    target: &FourierSnapshot,
    grid_size: usize,
    tolerance: f64,
) -> Result<BoundReport> {
    let window = target
        .support()
        .iter()
        .map(|w| w.abs())
        .max()
        .ok_or_else(|| Error::Config("target snapshot is empty".into()))?;
    let spectrum = redundancy_profile(
        circuit.encoding(),
        circuit.qubit_count(),
        circuit.layer_count(),
    )?;
    let norm = trace_norm(circuit.observable(), circuit.qubit_count());

    let grid = sample_grid(grid_size)?;
    let samples: Vec<f64> = grid
        .iter()
        .map(|&x| evaluate_circuit(circuit, params, x))
        .collect::<Result<Vec<_>>>()?;
    let model = dft_coefficients(&samples, window)?;
    let grads = coefficient_gradients(circuit, params, grid_size, window)?;

    let frequencies: Vec<f64> = (-window..=window).map(|w| w as f64).collect();
    let diffs: Vec<Complex64> = (-window..=window)
        .map(|w| difference_coefficient(&model, target, w))
        .collect();
    let derivatives: Vec<Vec<Complex64>> = (-window..=window).map(|w| grads.at(w)).collect();
    let redundancies: Vec<f64> = (-window..=window)
        .map(|w| spectrum.redundancy_at_f64(w))
        .collect();

    let mut report = sinc_bound_report_from_parts(
        &frequencies,
        &diffs,
        &derivatives,
        &redundancies,
        norm,
        tolerance,
    )?;
    report.rows.retain(|row| row.omega >= 0.0);
    Ok(BoundReport::from_rows(report.rows, tolerance))
}

// ---------------------------------------------------------------------------
// Gaussian absolute moments
// ---------------------------------------------------------------------------

/// E|θ|^r for θ ~ N(0, σ²): σ^r 2^{r/2} Γ((r+1)/2) / √π.
pub fn gaussian_abs_moment(r: u32, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Config(format!(
            "std-dev must be finite and >= 0, got {sigma}"
        )));
    }
    if r == 0 {
        return Ok(1.0);
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let rf = r as f64;
    let log_moment = rf * sigma.ln()
        + (rf / 2.0) * std::f64::consts::LN_2
        + statrs::function::gamma::ln_gamma((rf + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln();
    Ok(log_moment.exp())
}

/// M_0 … M_r for a fixed σ; satisfies M_{r+2}/M_r = σ²(r+1).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub sigma: f64,
    pub entries: Vec<f64>,
}

pub fn moment_table(r_max: u32, sigma: f64) -> Result<MomentTable> {
    let entries = (0..=r_max)
        .map(|r| gaussian_abs_moment(r, sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable { sigma, entries })
}

// ---------------------------------------------------------------------------
// Small-angle Monte Carlo statistics
// ---------------------------------------------------------------------------

/// Per-frequency statistics of |∂c_ω/∂θ_k| under θ ~ N(0, σ²I).
#[derive(Debug, Clone)]
pub struct SmallAngleStats {
    pub sigma: f64,
    pub n_samples: usize,
    /// ω ≥ 0 → (mean |∂c_ω/∂θ_k| over samples and parameters, RMS).
    pub per_omega: BTreeMap<i64, (f64, f64)>,
    /// Set when fewer than 30 samples make the statistics unreliable.
    pub low_sample_warning: bool,
}

impl SmallAngleStats {
    pub fn mean_abs(&self, omega: i64) -> f64 {
        self.per_omega.get(&omega).map(|v| v.0).unwrap_or(0.0)
    }
}

/// Monte Carlo estimate of the per-frequency gradient statistics at
/// initialization scale σ, with per-sample seeds derived from `seed` + index.
pub fn small_angle_gradient_stats(
    circuit: &ReuploaderCircuit,
    sigma: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SmallAngleStats> {
    if n_samples == 0 {
        return Err(Error::Config("need at least one Monte Carlo sample".into()));
    }
    let window = circuit.max_frequency().round() as i64;
    let grid_size = usize::max(16, (2 * window as usize + 2).next_power_of_two());
    let parameter_count = circuit.parameter_count();

    use rayon::prelude::*;
    let per_sample: Vec<BTreeMap<i64, (f64, f64)>> = (0..n_samples)
        .into_par_iter()
        .map(|s| -> Result<BTreeMap<i64, (f64, f64)>> {
            let params = init_params(circuit, sigma, seed.wrapping_add(s as u64))?;
            let grads = coefficient_gradients(circuit, &params, grid_size, window)?;
            let mut acc = BTreeMap::new();
            for omega in 0..=window {
                let vec = grads.at(omega);
                let sum_abs: f64 = vec.iter().map(|c| c.norm()).sum();
                let sum_sqr: f64 = vec.iter().map(|c| c.norm_sqr()).sum();
                acc.insert(omega, (sum_abs, sum_sqr));
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let denom = (n_samples * parameter_count) as f64;
    let mut per_omega = BTreeMap::new();
    for omega in 0..=window {
        let mut abs_total = 0.0;
        let mut sqr_total = 0.0;
        for sample in &per_sample {
            let (a, q) = sample[&omega];
            abs_total += a;
            sqr_total += q;
        }
        per_omega.insert(omega, (abs_total / denom, (sqr_total / denom).sqrt()));
    }
    Ok(SmallAngleStats {
        sigma,
        n_samples,
        per_omega,
        low_sample_warning: n_samples < 30,
    })
}

/// Log-log slope of the mean absolute coefficient gradient against σ,
/// per frequency. Frequencies whose statistics underflow are skipped.
pub fn sigma_scaling_slopes(
    circuit: &ReuploaderCircuit,
    sigmas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<BTreeMap<i64, f64>> {
    if sigmas.len() < 2 {
        return Err(Error::Config("need at least two σ values for a slope".into()));
    }
    let stats = sigmas
        .iter()
        .map(|&sigma| small_angle_gradient_stats(circuit, sigma, n_samples, seed))
        .collect::<Result<Vec<_>>>()?;
    let window = circuit.max_frequency().round() as i64;
    let log_sigmas: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let mut slopes = BTreeMap::new();
    for omega in 0..=window {
        let means: Vec<f64> = stats.iter().map(|s| s.mean_abs(omega)).collect();
        if means.iter().any(|m| *m < 1e-280) {
            continue;
        }
        let log_means: Vec<f64> = means.iter().map(|m| m.ln()).collect();
        let (slope, _) = linear_fit(&log_sigmas, &log_means)?;
        slopes.insert(omega, slope);
    }
    Ok(slopes)
}

// ---------------------------------------------------------------------------
// Robustness bound
// ---------------------------------------------------------------------------

/// Closed-form bound on the normalized RMS deviation of a coefficient that
/// is a sum of `r_count` terms under isotropic perturbations:
/// (σ_a / (κ·ā)) · √((1 + (R−1)ρ) / R).
pub fn robustness_bound(
    sigma_a: f64,
    a_bar: f64,
    kappa: f64,
    rho: f64,
    r_count: u64,
) -> Result<f64> {
    if !(sigma_a.is_finite() && sigma_a >= 0.0) {
        return Err(Error::Config(format!("σ_a out of range: {sigma_a}")));
    }
    if !(a_bar.is_finite() && a_bar > 0.0) {
        return Err(Error::Config(format!("ā must be positive, got {a_bar}")));
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Config(format!("κ must lie in (0, 1], got {kappa}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Config(format!("ρ must lie in [0, 1], got {rho}")));
    }
    if r_count < 1 {
        return Err(Error::Config("redundancy count must be at least 1".into()));
    }
    let r = r_count as f64;
    Ok(sigma_a / (kappa * a_bar) * ((1.0 + (r - 1.0) * rho) / r).sqrt())
}

// ---------------------------------------------------------------------------
// Randomized verification suite
// ---------------------------------------------------------------------------

/// Configuration of the randomized bound-check suite.
#[derive(Debug, Clone)]
pub struct BoundSuiteConfig {
    pub instances: usize,
    pub seed: u64,
    pub max_qubits: usize,
    pub max_layers: usize,
    pub theta_sigma: f64,
    pub tolerance: f64,
}

impl Default for BoundSuiteConfig {
    fn default() -> Self {
        BoundSuiteConfig {
            instances: 100,
            seed: 20_240_501,
            max_qubits: 3,
            max_layers: 3,
            theta_sigma: 0.5,
            tolerance: DEFAULT_BOUND_TOLERANCE,
        }
    }
}

fn random_instance(
    rng: &mut ChaCha8Rng,
    config: &BoundSuiteConfig,
    instance_seed: u64,
) -> Result<(ReuploaderCircuit, ParameterTable, FourierSnapshot, usize)> {
    let n = rng.gen_range(1..=config.max_qubits);
    let layers = rng.gen_range(1..=config.max_layers);
    let kind = match rng.gen_range(0..4) {
        0 => EncodingKind::Constant,
        1 => EncodingKind::Linear,
        2 => EncodingKind::Binary,
        _ => EncodingKind::Ternary,
    };
    let entanglement = if n == 1 {
        EntanglementGenerator::None
    } else {
        match rng.gen_range(0..5) {
            0 => EntanglementGenerator::None,
            1 => EntanglementGenerator::Ladder,
            2 => EntanglementGenerator::OneDHop,
            3 => EntanglementGenerator::AllToAll,
            _ => EntanglementGenerator::Random {
                count: rng.gen_range(1..=(n * (n - 1) / 2)),
                seed: instance_seed,
            },
        }
    };
    let observable = Observable {
        qubit: rng.gen_range(0..n),
    };
    let circuit = build_circuit(
        n,
        layers,
        EncodingScheme::named(kind, n)?,
        entanglement,
        observable,
    )?;
    let params = init_params(
        &circuit,
        config.theta_sigma,
        derived_seed(instance_seed, 1),
    )?;

    let window = circuit.max_frequency().round() as i64;
    let grid_size = usize::max(64, (2 * window as usize + 2).next_power_of_two());
    let target_count = rng.gen_range(1..=3.min(window.max(1)) as usize);
    let mut target_frequencies = Vec::new();
    while target_frequencies.len() < target_count {
        let f = rng.gen_range(1..=window);
        if !target_frequencies.contains(&f) {
            target_frequencies.push(f);
        }
    }
    let amplitudes = vec![1.0; target_frequencies.len()];
    let target = crate::experiments::make_target(
        &target_frequencies,
        &amplitudes,
        derived_seed(instance_seed, 2),
    )?;
    Ok((circuit, params, target.snapshot(window), grid_size))
}

/// Run the integer bound over randomized circuits, parameters and targets.
pub fn random_instance_bound_suite(
    config: &BoundSuiteConfig,
) -> Result<(Vec<BoundReport>, BoundSummary)> {
    let mut reports = Vec::with_capacity(config.instances);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for instance in 0..config.instances {
        let instance_seed = derived_seed(config.seed, 1000 + instance as u64);
        let (circuit, params, target, grid_size) =
            random_instance(&mut rng, config, instance_seed)?;
        let report =
            integer_bound_report(&circuit, &params, &target, grid_size, config.tolerance)?;
        reports.push(report);
    }
    let summary = BoundSummary::from_reports(&reports);
    Ok((reports, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_circuit, EncodingKind, EncodingScheme, EntanglementGenerator};
    use crate::simcore::Observable;

    fn small_circuit(n: usize, layers: usize) -> ReuploaderCircuit {
        build_circuit(
            n,
            layers,
            EncodingScheme::named(EncodingKind::Constant, n).unwrap(),
            if n > 1 {
                EntanglementGenerator::Ladder
            } else {
                EntanglementGenerator::None
            },
            Observable { qubit: 0 },
        )
        .unwrap()
    }

    #[test]
    fn trace_norm_is_two_to_the_n() {
        assert_eq!(trace_norm(&Observable { qubit: 0 }, 1), 2.0);
        assert_eq!(trace_norm(&Observable { qubit: 1 }, 5), 32.0);
        assert_eq!(trace_norm(&Observable { qubit: 0 }, 3), 8.0);
    }

    #[test]
    fn bound_is_tight_and_zero_at_the_exact_target() {
        let circuit = small_circuit(2, 2);
        let params = init_params(&circuit, 0.4, 5).unwrap();
        let window = circuit.max_frequency() as i64;
        let grid = sample_grid(64).unwrap();
        let samples: Vec<f64> = grid
            .iter()
            .map(|&x| evaluate_circuit(&circuit, &params, x).unwrap())
            .collect();
        let self_target = dft_coefficients(&samples, window).unwrap();
        let report =
            integer_bound_report(&circuit, &params, &self_target, 64, 1e-9).unwrap();
        for row in &report.rows {
            assert!(row.lhs.abs() < 1e-10);
            assert!(row.rhs.abs() < 1e-10);
            assert!(row.slack.abs() < 1e-10);
        }
        assert!(report.passes());
    }

    #[test]
    fn random_instances_satisfy_the_integer_bound() {
        let config = BoundSuiteConfig {
            instances: 10,
            seed: 7,
            ..BoundSuiteConfig::default()
        };
        let (reports, summary) = random_instance_bound_suite(&config).unwrap();
        assert_eq!(reports.len(), 10);
        assert_eq!(summary.violations, 0, "min slack {}", summary.min_slack);
    }

    #[test]
    fn sinc_bound_collapses_to_integer_bound_on_integer_spectra() {
        let circuit = small_circuit(2, 2);
        let params = init_params(&circuit, 0.6, 9).unwrap();
        let window = circuit.max_frequency() as i64;
        let target = crate::experiments::make_target(&[1, 3], &[1.0, 1.0], 4)
            .unwrap()
            .snapshot(window);
        let a = integer_bound_report(&circuit, &params, &target, 64, 1e-9).unwrap();
        let b = sinc_bound_report(&circuit, &params, &target, 64, 1e-9).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.parameter, rb.parameter);
            assert_eq!(ra.omega, rb.omega);
            assert!((ra.lhs - rb.lhs).abs() < 1e-9, "lhs {} vs {}", ra.lhs, rb.lhs);
            assert!((ra.rhs - rb.rhs).abs() < 1e-9, "rhs {} vs {}", ra.rhs, rb.rhs);
        }
        assert!(b.passes());
    }

    #[test]
    fn synthetic_half_integer_pairs_satisfy_the_sinc_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let norm = 4.0;
        for _ in 0..50 {
            let base: f64 = rng.gen_range(0.5..8.0);
            let frequencies = [base, base + 0.5];
            let redundancies = [rng.gen_range(1.0..20.0f64).round(), rng.gen_range(1.0..20.0f64).round()];
            let coeff = |rng: &mut ChaCha8Rng| {
                Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
            };
            let diffs = [coeff(&mut rng), coeff(&mut rng)];
            // derivative magnitudes respect |∂c_ω| ≤ 2 R(ω) ‖O‖_tr
            let derivs: Vec<Vec<Complex64>> = (0..2)
                .map(|j| {
                    (0..3)
                        .map(|_| {
                            Complex64::from_polar(
                                rng.gen_range(0.0..1.0) * 2.0 * redundancies[j] * norm,
                                rng.gen_range(0.0..std::f64::consts::TAU),
                            )
                        })
                        .collect()
                })
                .collect();
            let report = sinc_bound_report_from_parts(
                &frequencies,
                &diffs,
                &derivs,
                &redundancies,
                norm,
                1e-9,
            )
            .unwrap();
            assert!(report.passes(), "min slack {}", report.min_slack);
        }
    }

    #[test]
    fn widely_separated_frequencies_recover_the_orthogonal_rhs() {
        // rhs with a far-away companion stays within 1% of the isolated rhs
        let frequencies = [0.0, 100.5];
        let diffs = [Complex64::new(0.4, 0.1), Complex64::new(0.2, -0.3)];
        let derivs = vec![
            vec![Complex64::new(0.5, 0.0)],
            vec![Complex64::new(0.1, 0.2)],
        ];
        let redundancies = [3.0, 2.0];
        let norm = 2.0;
        let paired = sinc_bound_report_from_parts(
            &frequencies,
            &diffs,
            &derivs,
            &redundancies,
            norm,
            1e-9,
        )
        .unwrap();
        let isolated_rhs = 4.0 * redundancies[0] * norm * diffs[0].norm();
        let rhs = paired.rows[0].rhs;
        assert!(
            (rhs - isolated_rhs).abs() / isolated_rhs < 0.01,
            "rhs {rhs} vs isolated {isolated_rhs}"
        );
    }

    #[test]
    fn gaussian_moment_closed_forms() {
        assert!((gaussian_abs_moment(1, 1.0).unwrap() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        for sigma in [0.3, 1.0, 2.5] {
            assert!((gaussian_abs_moment(2, sigma).unwrap() - sigma * sigma).abs() < 1e-12);
            assert_eq!(gaussian_abs_moment(0, sigma).unwrap(), 1.0);
        }
    }

    #[test]
    fn moment_recurrence_holds_to_machine_precision() {
        for sigma in [0.1, 1.0, 2.0] {
            let table = moment_table(22, sigma).unwrap();
            for r in 0..=20usize {
                let ratio = table.entries[r + 2] / table.entries[r];
                let expected = sigma * sigma * (r as f64 + 1.0);
                assert!(
                    (ratio - expected).abs() <= 1e-12 * expected,
                    "σ={sigma} r={r}: {ratio} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn robustness_bound_values_and_monotonicity() {
        assert!((robustness_bound(0.1, 1.0, 1.0, 0.0, 4).unwrap() - 0.05).abs() < 1e-12);
        for r in [1u64, 2, 7, 100] {
            assert!((robustness_bound(0.1, 1.0, 1.0, 1.0, r).unwrap() - 0.1).abs() < 1e-12);
        }
        assert!((robustness_bound(0.1, 1.0, 0.5, 0.0, 1).unwrap() - 0.2).abs() < 1e-12);
        // non-increasing in R for ρ < 1
        let mut previous = f64::INFINITY;
        for r in 1..=32 {
            let value = robustness_bound(0.3, 1.0, 0.8, 0.2, r).unwrap();
            assert!(value <= previous + 1e-15);
            previous = value;
        }
        assert!(robustness_bound(0.1, 1.0, 0.0, 0.0, 1).is_err());
        assert!(robustness_bound(0.1, 1.0, 1.0, 1.5, 1).is_err());
        assert!(robustness_bound(0.1, 0.0, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn small_angle_statistics_are_seeded_and_flag_low_samples() {
        let circuit = small_circuit(2, 2);
        let a = small_angle_gradient_stats(&circuit, 0.1, 10, 3).unwrap();
        let b = small_angle_gradient_stats(&circuit, 0.1, 10, 3).unwrap();
        assert!(a.low_sample_warning);
        for (omega, (mean_a, rms_a)) in &a.per_omega {
            let (mean_b, rms_b) = b.per_omega[omega];
            assert_eq!(mean_a.to_bits(), mean_b.to_bits());
            assert_eq!(rms_a.to_bits(), rms_b.to_bits());
        }
    }

    #[test]
    fn gradient_mass_concentrates_on_low_frequencies_at_small_sigma() {
        let circuit = small_circuit(2, 2);
        let stats = small_angle_gradient_stats(&circuit, 0.05, 200, 11).unwrap();
        let spectrum = redundancy_profile(circuit.encoding(), 2, 2).unwrap();
        let window = circuit.max_frequency() as i64;
        let means: Vec<f64> = (0..=window).map(|o| stats.mean_abs(o)).collect();
        let redundancies: Vec<f64> = (0..=window)
            .map(|o| spectrum.redundancy_at_f64(o))
            .collect();
        let rho = crate::stats::spearman(&means, &redundancies).unwrap();
        assert!(rho > 0.0, "spearman {rho}");
    }

    #[test]
    fn deep_frequencies_scale_faster_in_sigma() {
        // In this layout ω = 5 is reachable only through higher sine-degree
        // paths (its gradient vanishes as θ → 0, mean |∂c_5| ∝ σ), while
        // ω = 1 keeps a single-sine path with an O(1) gradient. The log-log
        // slope against σ separates the two regimes.
        let circuit = small_circuit(2, 3);
        let slopes =
            sigma_scaling_slopes(&circuit, &[0.02, 0.05, 0.1, 0.2], 80, 17).unwrap();
        let deep = circuit.max_frequency() as i64 - 1;
        assert!(
            slopes[&deep] > slopes[&1] + 0.5,
            "slope(ω={deep}) = {} vs slope(ω=1) = {}",
            slopes[&deep],
            slopes[&1]
        );
    }
}
