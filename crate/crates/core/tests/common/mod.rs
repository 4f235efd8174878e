//! Dense-matrix oracle for cross-checking the strided statevector kernels.
//!
//! Builds explicit gate matrices and full 2^N x 2^N circuit unitaries via
//! Kronecker embedding, then multiplies them against amplitude vectors.
//! Deliberately independent of the simulator's update kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qlm_core::sim::Gate;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Explicit 2x2 matrix of a single-qubit gate.
pub fn one_qubit_matrix(gate: &Gate) -> Option<DMatrix<C>> {
    let m = match *gate {
        Gate::PauliX { .. } => {
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
        }
        Gate::Rx { angle, .. } => DMatrix::from_row_slice(
            2,
            2,
            &[
                c(angle.cos(), 0.0),
                c(0.0, -angle.sin()),
                c(0.0, -angle.sin()),
                c(angle.cos(), 0.0),
            ],
        ),
        Gate::Rz { angle, .. } => DMatrix::from_row_slice(
            2,
            2,
            &[
                C::from_polar(1.0, -angle),
                c(0.0, 0.0),
                c(0.0, 0.0),
                C::from_polar(1.0, angle),
            ],
        ),
        _ => return None,
    };
    Some(m)
}

/// Explicit 4x4 matrix of a two-qubit gate, in the basis indexed by
/// m = (second_target_bit << 1) | first_target_bit.
pub fn two_qubit_matrix(gate: &Gate) -> Option<DMatrix<C>> {
    let zero = c(0.0, 0.0);
    let m = match *gate {
        Gate::Rxx { angle, .. } => {
            let d = c(angle.cos(), 0.0);
            let o = c(0.0, -angle.sin());
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    d, zero, zero, o, //
                    zero, d, o, zero, //
                    zero, o, d, zero, //
                    o, zero, zero, d,
                ],
            )
        }
        Gate::Ryy { angle, .. } => {
            let d = c(angle.cos(), 0.0);
            let plus = c(0.0, angle.sin());
            let minus = c(0.0, -angle.sin());
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    d, zero, zero, plus, //
                    zero, d, minus, zero, //
                    zero, minus, d, zero, //
                    plus, zero, zero, d,
                ],
            )
        }
        Gate::Rzz { angle, .. } => {
            let same = C::from_polar(1.0, -angle);
            let diff = C::from_polar(1.0, angle);
            DMatrix::from_diagonal(&DVector::from_vec(vec![same, diff, diff, same]))
        }
        Gate::Cry { angle, .. } => {
            // targets = (control, target): m bit 0 = control, bit 1 = target.
            let h = angle / 2.0;
            let one = c(1.0, 0.0);
            let cos = c(h.cos(), 0.0);
            let sin = c(h.sin(), 0.0);
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    one, zero, zero, zero, //
                    zero, cos, zero, -sin, //
                    zero, zero, one, zero, //
                    zero, sin, zero, cos,
                ],
            )
        }
        _ => return None,
    };
    Some(m)
}

/// Embed a gate into the full 2^n x 2^n unitary (qubit 0 = least significant
/// index bit).
pub fn full_matrix(gate: &Gate, num_qubits: usize) -> DMatrix<C> {
    let dim = 1usize << num_qubits;
    if let Some(u) = one_qubit_matrix(gate) {
        let q = gate.targets()[0];
        // I_{2^{n-q-1}} (x) U (x) I_{2^q}
        let low = DMatrix::<C>::identity(1 << q, 1 << q);
        let high = DMatrix::<C>::identity(1 << (num_qubits - q - 1), 1 << (num_qubits - q - 1));
        return high.kronecker(&u.kronecker(&low));
    }
    let m4 = two_qubit_matrix(gate).expect("every gate is 1- or 2-qubit");
    let targets = gate.targets();
    let (q1, q2) = (targets[0], targets[1]);
    let mask = (1usize << q1) | (1usize << q2);
    let mut full = DMatrix::<C>::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            if row & !mask == col & !mask {
                let mr = (((row >> q2) & 1) << 1) | ((row >> q1) & 1);
                let mc = (((col >> q2) & 1) << 1) | ((col >> q1) & 1);
                full[(row, col)] = m4[(mr, mc)];
            }
        }
    }
    full
}

/// Multiply the full circuit matrix into an amplitude vector.
pub fn apply_dense(gates: &[Gate], num_qubits: usize, amps: &[C]) -> Vec<C> {
    let mut v = DVector::from_column_slice(amps);
    for gate in gates {
        v = full_matrix(gate, num_qubits) * v;
    }
    v.iter().copied().collect()
}

/// Marginal over `qubits` by direct enumeration of all basis states.
pub fn marginal_by_enumeration(amps: &[C], qubits: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << qubits.len()];
    for j in 0..out.len() {
        for (k, amp) in amps.iter().enumerate() {
            let matches = qubits
                .iter()
                .enumerate()
                .all(|(i, &q)| (k >> q) & 1 == (j >> i) & 1);
            if matches {
                out[j] += amp.norm_sqr();
            }
        }
    }
    out
}

/// A random gate over `num_qubits` qubits, drawn from the full gate set.
pub fn random_gate<R: rand::Rng>(rng: &mut R, num_qubits: usize) -> Gate {
    use std::f64::consts::PI;
    let angle = rng.gen_range(-PI..PI);
    let q1 = rng.gen_range(0..num_qubits);
    let mut q2 = rng.gen_range(0..num_qubits);
    while q2 == q1 {
        q2 = rng.gen_range(0..num_qubits);
    }
    match rng.gen_range(0..7) {
        0 => Gate::PauliX { target: q1 },
        1 => Gate::Rx { target: q1, angle },
        2 => Gate::Rz { target: q1, angle },
        3 => Gate::Rxx {
            a: q1,
            b: q2,
            angle,
        },
        4 => Gate::Ryy {
            a: q1,
            b: q2,
            angle,
        },
        5 => Gate::Rzz {
            a: q1,
            b: q2,
            angle,
        },
        _ => Gate::Cry {
            control: q1,
            target: q2,
            angle,
        },
    }
}
