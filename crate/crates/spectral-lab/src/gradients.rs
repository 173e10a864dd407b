//! Exact gradients of circuit outputs and losses.
//!
//! `parameter_shift_gradient` is the contract: values[k] =
//! (f(θ_k + π/2) − f(θ_k − π/2)) / 2, exact for Pauli-rotation generators.
//! `adjoint_gradient` computes the same derivatives in a single
//! forward/backward sweep and is used on hot paths; the two agree to
//! floating-point rounding and are tested against each other.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;

use crate::circuit::{ParameterTable, ReuploaderCircuit};
use crate::error::{Error, Result};
use crate::simcore::{
    apply_gate, apply_gate_inverse, evaluate_circuit, expectation, resolve_angle, AngleSource,
    Gate, StateVector,
};

/// d⟨O⟩/dθ aligned with the parameter table indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub values: Vec<f64>,
}

impl GradientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_difference(&self, other: &GradientVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact gradient of f(x, θ) by ±π/2 parameter shifts.
pub fn parameter_shift_gradient(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    x: f64,
) -> Result<GradientVector> {
    let count = circuit.parameter_count();
    if params.len() != count {
        return Err(Error::Config(format!(
            "parameter table has {} entries, circuit expects {count}",
            params.len()
        )));
    }
    let values = (0..count)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut shifted = params.clone();
            shifted.values_mut()[k] += FRAC_PI_2;
            let plus = evaluate_circuit(circuit, &shifted, x)?;
            shifted.values_mut()[k] -= std::f64::consts::PI;
            let minus = evaluate_circuit(circuit, &shifted, x)?;
            Ok((plus - minus) / 2.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GradientVector { values })
}

/// Central finite differences (f(θ_k+h) − f(θ_k−h)) / 2h; the oracle the
/// shift rule is checked against.
pub fn finite_difference_gradient(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    x: f64,
    h: f64,
) -> Result<GradientVector> {
    if !(h > 0.0 && h < 0.1) {
        return Err(Error::Config(format!(
            "finite-difference step must satisfy 0 < h < 0.1, got {h}"
        )));
    }
    let count = circuit.parameter_count();
    if params.len() != count {
        return Err(Error::Config(format!(
            "parameter table has {} entries, circuit expects {count}",
            params.len()
        )));
    }
    let values = (0..count)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut shifted = params.clone();
            shifted.values_mut()[k] += h;
            let plus = evaluate_circuit(circuit, &shifted, x)?;
            shifted.values_mut()[k] -= 2.0 * h;
            let minus = evaluate_circuit(circuit, &shifted, x)?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GradientVector { values })
}

fn pauli_inner_product(
    gate: &Gate,
    lam: &StateVector,
    ket: &StateVector,
) -> Option<Complex64> {
    let Gate::Rotation { axis, qubit, .. } = *gate else {
        return None;
    };
    let n = ket.qubit_count();
    let mask = 1usize << (n - 1 - qubit);
    let la = lam.amplitudes();
    let ka = ket.amplitudes();
    let dim = ka.len();
    let mut acc = Complex64::new(0.0, 0.0);
    match axis {
        crate::simcore::RotationAxis::X => {
            for i in 0..dim {
                acc += la[i].conj() * ka[i ^ mask];
            }
        }
        crate::simcore::RotationAxis::Y => {
            // Y: (a0, a1) -> (-i a1, i a0)
            let ipos = Complex64::new(0.0, 1.0);
            for base in (0..dim).step_by(mask << 1) {
                for i0 in base..base + mask {
                    let i1 = i0 | mask;
                    acc += la[i0].conj() * (-ipos * ka[i1]);
                    acc += la[i1].conj() * (ipos * ka[i0]);
                }
            }
        }
        crate::simcore::RotationAxis::Z => {
            for i in 0..dim {
                let term = la[i].conj() * ka[i];
                if i & mask == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
        }
    }
    Some(acc)
}

/// f(x, θ) together with its full gradient from one forward pass and one
/// reverse sweep. Matches `parameter_shift_gradient` to rounding error.
pub fn value_and_adjoint_gradient(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    x: f64,
) -> Result<(f64, GradientVector)> {
    let count = circuit.parameter_count();
    if params.len() != count {
        return Err(Error::Config(format!(
            "parameter table has {} entries, circuit expects {count}",
            params.len()
        )));
    }
    if !x.is_finite() {
        return Err(Error::Numeric(format!("non-finite input x = {x}")));
    }
    let program = circuit.gate_program();
    let mut ket = StateVector::zero(circuit.qubit_count());
    let mut angles = Vec::with_capacity(program.len());
    for gate in program {
        let angle = resolve_angle(gate, params, x)?;
        angles.push(angle);
        apply_gate(&mut ket, gate, angle)?;
    }
    let value = expectation(&ket, circuit.observable())?;

    // lam starts as O|ψ⟩; Z flips the sign of the observed qubit's |1⟩ half
    let mut lam = ket.clone();
    {
        let n = lam.qubit_count();
        let mask = 1usize << (n - 1 - circuit.observable().qubit);
        for (i, a) in lam.amplitudes_mut().iter_mut().enumerate() {
            if i & mask != 0 {
                *a = -*a;
            }
        }
    }

    // d/dθ exp(-iθP/2) inserts -(i/2)P; the derivative is Im⟨λ_g|P|ψ_g⟩
    let mut grad = vec![0.0; count];
    for (gate, &angle) in program.iter().zip(&angles).rev() {
        if let Gate::Rotation {
            angle: AngleSource::Parameter(k),
            ..
        } = gate
        {
            let inner = pauli_inner_product(gate, &lam, &ket).expect("rotation gate");
            grad[*k] += inner.im;
        }
        apply_gate_inverse(&mut ket, gate, angle)?;
        apply_gate_inverse(&mut lam, gate, angle)?;
    }
    Ok((value, GradientVector { values: grad }))
}

/// Full-batch mean-squared-error loss and its gradient over a grid:
/// loss = (1/M) Σ_m (f(x_m) − h(x_m))², gradient = (2/M) Σ_m (f−h)·∇f(x_m).
/// Grid contributions are reduced left-to-right for bit-reproducibility.
pub fn mse_loss_gradient(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    x_grid: &[f64],
    target_values: &[f64],
) -> Result<(f64, GradientVector)> {
    if x_grid.is_empty() {
        return Err(Error::Config("empty evaluation grid".into()));
    }
    if x_grid.len() != target_values.len() {
        return Err(Error::Config(format!(
            "grid has {} points but {} target values were given",
            x_grid.len(),
            target_values.len()
        )));
    }
    let per_point: Vec<(f64, GradientVector)> = x_grid
        .par_iter()
        .map(|&x| value_and_adjoint_gradient(circuit, params, x))
        .collect::<Result<Vec<_>>>()?;

    let m = x_grid.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; circuit.parameter_count()];
    for ((f, g), &h) in per_point.iter().zip(target_values) {
        let resid = f - h;
        loss += resid * resid;
        for (acc, gv) in grad.iter_mut().zip(&g.values) {
            *acc += resid * gv;
        }
    }
    loss /= m;
    for g in &mut grad {
        *g *= 2.0 / m;
    }
    Ok((loss, GradientVector { values: grad }))
}
