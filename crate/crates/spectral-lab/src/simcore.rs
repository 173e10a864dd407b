//! Dense complex statevector simulation.
//!
//! States hold all 2^n amplitudes in computational-basis order with **qubit 0
//! as the most significant bit** of the basis index. Rotations follow the
//! convention G(φ) = exp(−iφP/2) for P ∈ {X, Y, Z}, so the eigen-angles of a
//! rotation by φ are ±φ/2.

use num_complex::Complex64;

use crate::circuit::{ParameterTable, ReuploaderCircuit};
use crate::error::{Error, Result};

/// Rotation generator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

/// Where a rotation gate takes its angle from when the circuit is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    /// Index into the circuit's parameter table.
    Parameter(usize),
    /// Data-encoding gate: angle = scale * x.
    Encoding(f64),
    /// Constant angle in radians.
    Fixed(f64),
}

/// A single gate of the supported set {RX, RY, RZ, CNOT}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rotation {
        axis: RotationAxis,
        qubit: usize,
        angle: AngleSource,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// Single-qubit Pauli-Z observable on one named qubit (diagonal in the
/// computational basis, eigenvalues ±1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable {
    pub qubit: usize,
}

/// Dense statevector over `qubit_count` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    qubit_count: usize,
}

impl StateVector {
    /// The all-zeros basis state |0…0⟩.
    pub fn zero(qubit_count: usize) -> Self {
        assert!(
            (1..=28).contains(&qubit_count),
            "qubit count must be in 1..=28"
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            amplitudes,
            qubit_count,
        }
    }

    /// Build a state from explicit amplitudes; length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        Ok(StateVector {
            qubit_count: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        // qubit 0 is the most significant bit
        1 << (self.qubit_count - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.qubit_count {
            Err(Error::Config(format!(
                "qubit index {qubit} out of range for {} qubits",
                self.qubit_count
            )))
        } else {
            Ok(())
        }
    }
}

/// Apply `gate` to `state` in place, resolving rotation angles to
/// `resolved_angle` radians. CNOT ignores the angle.
pub fn apply_gate(state: &mut StateVector, gate: &Gate, resolved_angle: f64) -> Result<()> {
    match *gate {
        Gate::Rotation { axis, qubit, .. } => {
            state.check_qubit(qubit)?;
            if !resolved_angle.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite rotation angle {resolved_angle}"
                )));
            }
            let (s, c) = (resolved_angle / 2.0).sin_cos();
            let mask = state.mask(qubit);
            let dim = state.amplitudes.len();
            let amps = &mut state.amplitudes;
            match axis {
                RotationAxis::X => {
                    // [[c, -is], [-is, c]]
                    let is = Complex64::new(0.0, s);
                    for base in (0..dim).step_by(mask << 1) {
                        for i0 in base..base + mask {
                            let i1 = i0 | mask;
                            let a = amps[i0];
                            let b = amps[i1];
                            amps[i0] = c * a - is * b;
                            amps[i1] = c * b - is * a;
                        }
                    }
                }
                RotationAxis::Y => {
                    // [[c, -s], [s, c]]
                    for base in (0..dim).step_by(mask << 1) {
                        for i0 in base..base + mask {
                            let i1 = i0 | mask;
                            let a = amps[i0];
                            let b = amps[i1];
                            amps[i0] = c * a - s * b;
                            amps[i1] = s * a + c * b;
                        }
                    }
                }
                RotationAxis::Z => {
                    // diag(e^{-iφ/2}, e^{+iφ/2})
                    let e0 = Complex64::new(c, -s);
                    let e1 = Complex64::new(c, s);
                    for base in (0..dim).step_by(mask << 1) {
                        for i0 in base..base + mask {
                            let i1 = i0 | mask;
                            amps[i0] *= e0;
                            amps[i1] *= e1;
                        }
                    }
                }
            }
            Ok(())
        }
        Gate::Cnot { control, target } => {
            state.check_qubit(control)?;
            state.check_qubit(target)?;
            if control == target {
                return Err(Error::Config(format!(
                    "CNOT control and target coincide on qubit {control}"
                )));
            }
            let cmask = state.mask(control);
            let tmask = state.mask(target);
            let dim = state.amplitudes.len();
            for i in 0..dim {
                // swap each |c=1, t=0⟩ amplitude with its |c=1, t=1⟩ partner once
                if i & cmask != 0 && i & tmask == 0 {
                    state.amplitudes.swap(i, i | tmask);
                }
            }
            Ok(())
        }
    }
}

/// Inverse of `apply_gate`: rotations with negated angle, CNOT is self-inverse.
pub fn apply_gate_inverse(state: &mut StateVector, gate: &Gate, resolved_angle: f64) -> Result<()> {
    apply_gate(state, gate, -resolved_angle)
}

/// ⟨Z_q⟩ of a (normalized) state: Σ_i ±|a_i|² with the sign set by the parity
/// of the observed qubit's bit.
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    state.check_qubit(obs.qubit)?;
    let mask = state.mask(obs.qubit);
    let mut value = 0.0;
    for (i, a) in state.amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if i & mask == 0 {
            value += p;
        } else {
            value -= p;
        }
    }
    Ok(value)
}

/// Resolve a gate's angle against a parameter table and input value.
pub fn resolve_angle(gate: &Gate, params: &ParameterTable, x: f64) -> Result<f64> {
    match *gate {
        Gate::Rotation { angle, .. } => match angle {
            AngleSource::Parameter(idx) => params.values().get(idx).copied().ok_or_else(|| {
                Error::Config(format!(
                    "parameter index {idx} out of range for table of length {}",
                    params.len()
                ))
            }),
            AngleSource::Encoding(scale) => Ok(scale * x),
            AngleSource::Fixed(a) => Ok(a),
        },
        Gate::Cnot { .. } => Ok(0.0),
    }
}

/// Evaluate f(x, θ) = ⟨0| U†(x,θ) O U(x,θ) |0⟩ for the circuit's gate program.
pub fn evaluate_circuit(
    circuit: &ReuploaderCircuit,
    params: &ParameterTable,
    x: f64,
) -> Result<f64> {
    if params.len() != circuit.parameter_count() {
        return Err(Error::Config(format!(
            "parameter table has {} entries, circuit expects {}",
            params.len(),
            circuit.parameter_count()
        )));
    }
    if !x.is_finite() {
        return Err(Error::Numeric(format!("non-finite input x = {x}")));
    }
    let mut state = StateVector::zero(circuit.qubit_count());
    for gate in circuit.gate_program() {
        let angle = resolve_angle(gate, params, x)?;
        apply_gate(&mut state, gate, angle)?;
    }
    expectation(&state, circuit.observable())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_circuit, EncodingScheme, EntanglementGenerator};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rx_pi_on_zero_gives_minus_i_one() {
        let mut state = StateVector::zero(1);
        let gate = Gate::Rotation {
            axis: RotationAxis::X,
            qubit: 0,
            angle: AngleSource::Fixed(PI),
        };
        apply_gate(&mut state, &gate, PI).unwrap();
        assert!((state.amplitudes()[0] - c(0.0, 0.0)).norm() < 1e-12);
        assert!((state.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn cnot_is_a_basis_permutation() {
        // |10⟩ (qubit 0 = 1, qubit 1 = 0) is index 2 with qubit 0 as MSB
        let mut state = StateVector::from_amplitudes(vec![
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap();
        let gate = Gate::Cnot {
            control: 0,
            target: 1,
        };
        apply_gate(&mut state, &gate, 0.0).unwrap();
        assert_eq!(state.amplitudes()[3], c(1.0, 0.0));
        assert_eq!(state.amplitudes()[2], c(0.0, 0.0));
    }

    #[test]
    fn ry_zero_is_identity_bitwise() {
        let mut state = StateVector::from_amplitudes(vec![c(0.6, 0.1), c(0.2, -0.77)]).unwrap();
        let before = state.clone();
        let gate = Gate::Rotation {
            axis: RotationAxis::Y,
            qubit: 0,
            angle: AngleSource::Fixed(0.0),
        };
        apply_gate(&mut state, &gate, 0.0).unwrap();
        assert_eq!(state, before);
    }

    #[test]
    fn expectation_on_basis_and_superposition_states() {
        let zero = StateVector::zero(1);
        assert_eq!(expectation(&zero, &Observable { qubit: 0 }).unwrap(), 1.0);

        let inv = 1.0 / 2f64.sqrt();
        let plus = StateVector::from_amplitudes(vec![c(inv, 0.0), c(inv, 0.0)]).unwrap();
        assert!(expectation(&plus, &Observable { qubit: 0 }).unwrap().abs() < 1e-15);

        // |01⟩: qubit 1 is |1⟩ → index 1
        let state = StateVector::from_amplitudes(vec![
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(expectation(&state, &Observable { qubit: 1 }).unwrap(), -1.0);
    }

    #[test]
    fn single_layer_circuit_with_zero_angles_is_cos_x() {
        let circuit = build_circuit(
            1,
            1,
            EncodingScheme::named(crate::circuit::EncodingKind::Constant, 1).unwrap(),
            EntanglementGenerator::None,
            Observable { qubit: 0 },
        )
        .unwrap();
        let params = ParameterTable::zeros(circuit.parameter_count());
        for &x in &[0.0, 0.3, 1.0, 2.5, -1.2] {
            let f = evaluate_circuit(&circuit, &params, x).unwrap();
            assert!(
                (f - x.cos()).abs() < 1e-12,
                "f({x}) = {f}, expected cos = {}",
                x.cos()
            );
        }
        assert!((evaluate_circuit(&circuit, &params, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_then_inverse_restores_amplitudes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut state = StateVector::zero(3);
        // scramble a little first
        for q in 0..3 {
            let g = Gate::Rotation {
                axis: RotationAxis::Y,
                qubit: q,
                angle: AngleSource::Fixed(0.0),
            };
            apply_gate(&mut state, &g, rng.gen_range(-3.0..3.0)).unwrap();
        }
        let before = state.clone();
        for _ in 0..200 {
            let q = rng.gen_range(0..3);
            let angle: f64 = rng.gen_range(-3.0..3.0);
            let gate = match rng.gen_range(0..4) {
                0 => Gate::Rotation {
                    axis: RotationAxis::X,
                    qubit: q,
                    angle: AngleSource::Fixed(angle),
                },
                1 => Gate::Rotation {
                    axis: RotationAxis::Y,
                    qubit: q,
                    angle: AngleSource::Fixed(angle),
                },
                2 => Gate::Rotation {
                    axis: RotationAxis::Z,
                    qubit: q,
                    angle: AngleSource::Fixed(angle),
                },
                _ => Gate::Cnot {
                    control: q,
                    target: (q + 1) % 3,
                },
            };
            apply_gate(&mut state, &gate, angle).unwrap();
            apply_gate_inverse(&mut state, &gate, angle).unwrap();
        }
        let max_dev = state
            .amplitudes()
            .iter()
            .zip(before.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-12, "max deviation {max_dev}");
    }

    #[test]
    fn norm_survives_long_gate_sequences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut state = StateVector::zero(3);
        for _ in 0..10_000 {
            let q = rng.gen_range(0..3);
            let angle: f64 = rng.gen_range(-3.0..3.0);
            let gate = match rng.gen_range(0..4) {
                0 => Gate::Rotation {
                    axis: RotationAxis::X,
                    qubit: q,
                    angle: AngleSource::Fixed(angle),
                },
                1 => Gate::Rotation {
                    axis: RotationAxis::Y,
                    qubit: q,
                    angle: AngleSource::Fixed(angle),
                },
                2 => Gate::Rotation {
                    axis: RotationAxis::Z,
                    qubit: q,
                    angle: AngleSource::Fixed(angle),
                },
                _ => Gate::Cnot {
                    control: q,
                    target: (q + 2) % 3,
                },
            };
            apply_gate(&mut state, &gate, angle).unwrap();
        }
        assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_and_non_finite_inputs_are_rejected() {
        let mut state = StateVector::zero(2);
        let bad_qubit = Gate::Rotation {
            axis: RotationAxis::X,
            qubit: 5,
            angle: AngleSource::Fixed(0.1),
        };
        assert!(matches!(
            apply_gate(&mut state, &bad_qubit, 0.1),
            Err(Error::Config(_))
        ));
        let gate = Gate::Rotation {
            axis: RotationAxis::X,
            qubit: 0,
            angle: AngleSource::Fixed(0.0),
        };
        assert!(matches!(
            apply_gate(&mut state, &gate, f64::NAN),
            Err(Error::Numeric(_))
        ));
        let self_cnot = Gate::Cnot {
            control: 1,
            target: 1,
        };
        assert!(matches!(
            apply_gate(&mut state, &self_cnot, 0.0),
            Err(Error::Config(_))
        ));
    }
}
