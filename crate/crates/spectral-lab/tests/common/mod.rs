//! Shared test oracles, deliberately independent of the library's
//! simulation and transform paths: explicit dense-matrix products for
//! circuit evaluation and adaptive quadrature for integrals.

use num_complex::Complex64;
use spectral_lab::circuit::{ParameterTable, ReuploaderCircuit};
use spectral_lab::simcore::{AngleSource, Gate, RotationAxis};

pub type Matrix = Vec<Vec<Complex64>>;

fn zeros(dim: usize) -> Matrix {
    vec![vec![Complex64::new(0.0, 0.0); dim]; dim]
}

fn identity(dim: usize) -> Matrix {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn single_qubit(axis: RotationAxis, angle: f64) -> Matrix {
    let (s, c) = (angle / 2.0).sin_cos();
    match axis {
        RotationAxis::X => vec![
            vec![Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            vec![Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        RotationAxis::Y => vec![
            vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        RotationAxis::Z => vec![
            vec![Complex64::new(c, -s), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(c, s)],
        ],
    }
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let dim = ra * rb;
    let mut out = zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out[i][j] = a[i / rb][j / rb] * b[i % rb][j % rb];
        }
    }
    out
}

fn embedded_gate(gate: &Gate, params: &ParameterTable, x: f64, n: usize) -> Matrix {
    match *gate {
        Gate::Rotation { axis, qubit, angle } => {
            let resolved = match angle {
                AngleSource::Parameter(idx) => params.values()[idx],
                AngleSource::Encoding(scale) => scale * x,
                AngleSource::Fixed(a) => a,
            };
            let u = single_qubit(axis, resolved);
            let mut acc = identity(1);
            for q in 0..n {
                let factor = if q == qubit { u.clone() } else { identity(2) };
                acc = kron(&acc, &factor);
            }
            acc
        }
        Gate::Cnot { control, target } => {
            let dim = 1 << n;
            let cmask = 1usize << (n - 1 - control);
            let tmask = 1usize << (n - 1 - target);
            let mut m = zeros(dim);
            for col in 0..dim {
                let row = if col & cmask != 0 { col ^ tmask } else { col };
                m[row][col] = Complex64::new(1.0, 0.0);
            }
            m
        }
    }
}

/// ⟨0| U† O U |0⟩ by explicit 2^n × 2^n matrix products.
pub fn dense_expectation(circuit: &ReuploaderCircuit, params: &ParameterTable, x: f64) -> f64 {
    let n = circuit.qubit_count();
    let dim = 1 << n;
    let mut unitary = identity(dim);
    for gate in circuit.gate_program() {
        unitary = matmul(&embedded_gate(gate, params, x, n), &unitary);
    }
    let obs_mask = 1usize << (n - 1 - circuit.observable().qubit);
    let mut value = 0.0;
    for (i, row) in unitary.iter().enumerate() {
        let amp = row[0];
        let sign = if i & obs_mask == 0 { 1.0 } else { -1.0 };
        value += sign * amp.norm_sqr();
    }
    value
}

/// Adaptive Simpson quadrature on [a, b]. The range is pre-split into
/// panels so oscillatory integrands cannot cancel across the first
/// subdivision and terminate the recursion early.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tolerance: f64) -> f64 {
    let panels = 32;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * width;
            adaptive_simpson_panel(f, lo, lo + width, tolerance / panels as f64)
        })
        .sum()
}

fn adaptive_simpson_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tolerance: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = (a + b) / 2.0;
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tolerance: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tolerance {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tolerance / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tolerance / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tolerance, 28)
}

/// (1/2π) ∫₀^{2π} f(x) e^{−iωx} dx by adaptive quadrature of the real and
/// imaginary parts.
pub fn quadrature_coefficient(f: &dyn Fn(f64) -> f64, omega: f64, tolerance: f64) -> Complex64 {
    let tau = std::f64::consts::TAU;
    let re = adaptive_simpson(&|x| f(x) * (omega * x).cos(), 0.0, tau, tolerance);
    let im = adaptive_simpson(&|x| -f(x) * (omega * x).sin(), 0.0, tau, tolerance);
    Complex64::new(re / tau, im / tau)
}
