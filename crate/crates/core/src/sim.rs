//! Dense statevector simulation.
//!
//! Conventions used everywhere in this crate:
//!
//! - Qubit 0 is the least-significant bit of a basis-state index; bit strings
//!   are written most-significant qubit first (see [`BitString`]).
//! - Pauli rotations use the full-angle convention
//!   `Rx(theta) = exp(-i theta X)` and `Rxx(theta) = exp(-i theta X⊗X)`
//!   (matrix entries `cos theta`, `-i sin theta`), so every rotation is
//!   pi-periodic up to global phase. The trainer's closed-form coordinate
//!   update depends on this.
//! - `CRY` is the single half-angle exception: the conventional controlled-RY
//!   with `RY(theta) = exp(-i theta Y / 2)`. It is never used inside
//!   trainable models.
//!
//! Gates are applied by striding over amplitude pairs/quadruples with index
//! bit masks; no `2^N x 2^N` matrix is ever materialized.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{BitString, MAX_BITS};
use crate::error::{Error, Result};

/// Largest simulable register (2^24 amplitudes = 256 MiB).
pub const MAX_QUBITS: usize = MAX_BITS;

/// A pure quantum state over `num_qubits` qubits as 2^n complex amplitudes.
#[derive(Clone, Debug)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// One gate from the fixed gate set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    PauliX { target: usize },
    Rx { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    Rxx { a: usize, b: usize, angle: f64 },
    Ryy { a: usize, b: usize, angle: f64 },
    Rzz { a: usize, b: usize, angle: f64 },
    Cry { control: usize, target: usize, angle: f64 },
}

impl Gate {
    /// Target qubit indices (1 or 2, depending on the gate kind).
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::PauliX { target } | Gate::Rx { target, .. } | Gate::Rz { target, .. } => {
                vec![target]
            }
            Gate::Rxx { a, b, .. } | Gate::Ryy { a, b, .. } | Gate::Rzz { a, b, .. } => {
                vec![a, b]
            }
            Gate::Cry {
                control, target, ..
            } => vec![control, target],
        }
    }
}

impl Statevector {
    /// The all-zeros basis state |0...0>.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { num_qubits, amps })
    }

    /// Computational basis state |bits>, with the textual convention of
    /// [`BitString`] (leftmost character = highest qubit index).
    pub fn basis_state(num_qubits: usize, bits: &str) -> Result<Self> {
        if bits.len() != num_qubits {
            return Err(Error::invalid(format!(
                "bit string length {} does not match num_qubits {num_qubits}",
                bits.len()
            )));
        }
        let z = BitString::parse(bits)?;
        Self::from_basis_index(num_qubits, z.value())
    }

    /// Basis state by index.
    pub fn from_basis_index(num_qubits: usize, index: u64) -> Result<Self> {
        let mut state = Self::zero(num_qubits)?;
        if index >> num_qubits != 0 {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |amplitude|^2 for every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_targets(&self, gate: &Gate) -> Result<()> {
        let targets = gate.targets();
        for &t in &targets {
            if t >= self.num_qubits {
                return Err(Error::invalid(format!(
                    "gate target {t} out of range for {} qubits",
                    self.num_qubits
                )));
            }
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::invalid(format!(
                "two-qubit gate targets must be distinct, got {} twice",
                targets[0]
            )));
        }
        Ok(())
    }

    /// Apply one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        self.check_targets(gate)?;
        match *gate {
            Gate::PauliX { target } => apply_pauli_x(&mut self.amps, target),
            Gate::Rx { target, angle } => apply_rx(&mut self.amps, target, angle),
            Gate::Rz { target, angle } => apply_rz(&mut self.amps, target, angle),
            Gate::Rxx { a, b, angle } => apply_rxx(&mut self.amps, a, b, angle),
            Gate::Ryy { a, b, angle } => apply_ryy(&mut self.amps, a, b, angle),
            Gate::Rzz { a, b, angle } => apply_rzz(&mut self.amps, a, b, angle),
            Gate::Cry {
                control,
                target,
                angle,
            } => apply_cry(&mut self.amps, control, target, angle),
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        for gate in gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Marginal distribution over the listed qubits.
    ///
    /// Entry `j` sums |amplitude|^2 over all basis states whose restriction
    /// to `qubits` reads `j`, with `qubits[i]` supplying bit `i` of `j`.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(Error::invalid("marginal requires at least one qubit"));
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::invalid(format!(
                    "marginal qubit {q} out of range for {} qubits",
                    self.num_qubits
                )));
            }
            if qubits[..i].contains(&q) {
                return Err(Error::invalid(format!("duplicate marginal qubit {q}")));
            }
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (k, amp) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (i, &q) in qubits.iter().enumerate() {
                j |= ((k >> q) & 1) << i;
            }
            out[j] += amp.norm_sqr();
        }
        Ok(out)
    }

    /// Multinomial sample of the marginal over `qubits`.
    ///
    /// Deterministic for a fixed seed. Keys are bit strings over the listed
    /// qubits, rendered most-significant-first (`qubits[i]` = bit `i`).
    pub fn sample(
        &self,
        qubits: &[usize],
        shots: u64,
        seed: u64,
    ) -> Result<BTreeMap<String, u64>> {
        if shots == 0 {
            return Err(Error::invalid("shots must be >= 1"));
        }
        let probs = self.marginal_probabilities(qubits)?;
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::invalid(format!("cannot sample marginal: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..shots {
            let j = dist.sample(&mut rng) as u64;
            let key = BitString::new(j, qubits.len())?.to_string();
            *histogram.entry(key).or_insert(0) += 1;
        }
        Ok(histogram)
    }
}

/// Strided single-qubit update: for every amplitude pair (index with target
/// bit 0, index with target bit 1) apply the 2x2 matrix [[u00 u01],[u10 u11]].
fn apply_one_qubit(
    amps: &mut [Complex64],
    target: usize,
    u00: Complex64,
    u01: Complex64,
    u10: Complex64,
    u11: Complex64,
) {
    let step = 1usize << target;
    let mut base = 0;
    while base < amps.len() {
        for offset in 0..step {
            let j = base + offset;
            let k = j + step;
            let a = amps[j];
            let b = amps[k];
            amps[j] = u00 * a + u01 * b;
            amps[k] = u10 * a + u11 * b;
        }
        base += 2 * step;
    }
}

fn apply_pauli_x(amps: &mut [Complex64], target: usize) {
    let step = 1usize << target;
    let mut base = 0;
    while base < amps.len() {
        for offset in 0..step {
            amps.swap(base + offset, base + offset + step);
        }
        base += 2 * step;
    }
}

/// Rx(theta) = exp(-i theta X) = [[cos, -i sin], [-i sin, cos]].
fn apply_rx(amps: &mut [Complex64], target: usize, angle: f64) {
    let c = Complex64::new(angle.cos(), 0.0);
    let s = Complex64::new(0.0, -angle.sin());
    apply_one_qubit(amps, target, c, s, s, c);
}

/// Rz(theta) = exp(-i theta Z) = diag(e^{-i theta}, e^{i theta}).
fn apply_rz(amps: &mut [Complex64], target: usize, angle: f64) {
    let phase0 = Complex64::from_polar(1.0, -angle);
    let phase1 = Complex64::from_polar(1.0, angle);
    let mask = 1usize << target;
    for (k, amp) in amps.iter_mut().enumerate() {
        *amp *= if k & mask == 0 { phase0 } else { phase1 };
    }
}

/// Rxx(theta) = exp(-i theta X⊗X): couples |00>↔|11> and |01>↔|10> with
/// coefficients (cos theta, -i sin theta). Symmetric in the two targets.
fn apply_rxx(amps: &mut [Complex64], a: usize, b: usize, angle: f64) {
    let c = Complex64::new(angle.cos(), 0.0);
    let ms = Complex64::new(0.0, -angle.sin());
    let mask_a = 1usize << a;
    let mask_b = 1usize << b;
    let both = mask_a | mask_b;
    for i in 0..amps.len() {
        if i & both == 0 {
            let i00 = i;
            let i01 = i | mask_a;
            let i10 = i | mask_b;
            let i11 = i | both;
            let a00 = amps[i00];
            let a01 = amps[i01];
            let a10 = amps[i10];
            let a11 = amps[i11];
            amps[i00] = c * a00 + ms * a11;
            amps[i01] = c * a01 + ms * a10;
            amps[i10] = c * a10 + ms * a01;
            amps[i11] = c * a11 + ms * a00;
        }
    }
}

/// Ryy(theta) = exp(-i theta Y⊗Y): like Rxx but the |00>↔|11> coupling picks
/// up +i sin theta (Y⊗Y|00> = -|11>). Symmetric in the two targets.
fn apply_ryy(amps: &mut [Complex64], a: usize, b: usize, angle: f64) {
    let c = Complex64::new(angle.cos(), 0.0);
    let ps = Complex64::new(0.0, angle.sin());
    let ms = Complex64::new(0.0, -angle.sin());
    let mask_a = 1usize << a;
    let mask_b = 1usize << b;
    let both = mask_a | mask_b;
    for i in 0..amps.len() {
        if i & both == 0 {
            let i00 = i;
            let i01 = i | mask_a;
            let i10 = i | mask_b;
            let i11 = i | both;
            let a00 = amps[i00];
            let a01 = amps[i01];
            let a10 = amps[i10];
            let a11 = amps[i11];
            amps[i00] = c * a00 + ps * a11;
            amps[i01] = c * a01 + ms * a10;
            amps[i10] = c * a10 + ms * a01;
            amps[i11] = c * a11 + ps * a00;
        }
    }
}

/// Rzz(theta) = exp(-i theta Z⊗Z): diagonal, phase e^{-i theta} when the two
/// bits agree and e^{+i theta} when they differ.
fn apply_rzz(amps: &mut [Complex64], a: usize, b: usize, angle: f64) {
    let same = Complex64::from_polar(1.0, -angle);
    let diff = Complex64::from_polar(1.0, angle);
    let mask_a = 1usize << a;
    let mask_b = 1usize << b;
    for (k, amp) in amps.iter_mut().enumerate() {
        let bit_a = k & mask_a != 0;
        let bit_b = k & mask_b != 0;
        *amp *= if bit_a == bit_b { same } else { diff };
    }
}

/// Controlled-RY with the conventional half-angle RY(theta) = exp(-i theta Y/2).
fn apply_cry(amps: &mut [Complex64], control: usize, target: usize, angle: f64) {
    let c = (angle / 2.0).cos();
    let s = (angle / 2.0).sin();
    let mask_c = 1usize << control;
    let mask_t = 1usize << target;
    for i in 0..amps.len() {
        // Visit each controlled pair once, from its target-bit-0 member.
        if i & mask_c != 0 && i & mask_t == 0 {
            let j = i | mask_t;
            let a0 = amps[i];
            let a1 = amps[j];
            amps[i] = c * a0 - s * a1;
            amps[j] = s * a0 + c * a1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const TOL: f64 = 1e-12;

    fn assert_close(a: Complex64, b: Complex64) {
        assert!((a - b).norm() < TOL, "{a} != {b}");
    }

    #[test]
    fn basis_state_examples() {
        let s = Statevector::basis_state(2, "00").unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        for k in 1..4 {
            assert_close(s.amplitudes()[k], Complex64::new(0.0, 0.0));
        }

        // "10" means qubit1 = 1, qubit0 = 0 -> index 2.
        let s = Statevector::basis_state(2, "10").unwrap();
        assert_close(s.amplitudes()[2], Complex64::new(1.0, 0.0));

        let s = Statevector::basis_state(1, "1").unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(0.0, 0.0));
        assert_close(s.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn basis_state_length_mismatch_errors() {
        assert!(Statevector::basis_state(2, "101").is_err());
        assert!(Statevector::basis_state(3, "10").is_err());
    }

    #[test]
    fn rzz_phases_basis_state() {
        let theta = 0.7;
        let mut s = Statevector::basis_state(2, "00").unwrap();
        s.apply(&Gate::Rzz {
            a: 0,
            b: 1,
            angle: theta,
        })
        .unwrap();
        assert_close(s.amplitudes()[0], Complex64::from_polar(1.0, -theta));
        let probs = s.probabilities();
        assert!((probs[0] - 1.0).abs() < TOL);
    }

    #[test]
    fn rx_is_full_angle() {
        // Rx(pi/2)|0> = [cos(pi/2), -i sin(pi/2)] = [0, -i].
        let mut s = Statevector::zero(1).unwrap();
        s.apply(&Gate::Rx {
            target: 0,
            angle: FRAC_PI_2,
        })
        .unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(0.0, 0.0));
        assert_close(s.amplitudes()[1], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn rx_pi_periodic_up_to_global_phase() {
        let theta = 0.321;
        let gates = |angle| {
            vec![
                Gate::Rx { target: 0, angle },
                Gate::Rz {
                    target: 0,
                    angle: 0.5,
                },
            ]
        };
        let mut s1 = Statevector::zero(1).unwrap();
        s1.apply_all(&gates(theta)).unwrap();
        let mut s2 = Statevector::zero(1).unwrap();
        s2.apply_all(&gates(theta + PI)).unwrap();
        for (p1, p2) in s1.probabilities().iter().zip(s2.probabilities().iter()) {
            assert!((p1 - p2).abs() < TOL);
        }
        // Global phase is exactly -1.
        for (a1, a2) in s1.amplitudes().iter().zip(s2.amplitudes().iter()) {
            assert_close(*a1, -*a2);
        }
    }

    #[test]
    fn rz_composition_adds_angles() {
        let mut s = Statevector::zero(2).unwrap();
        s.apply(&Gate::Rx {
            target: 0,
            angle: 0.4,
        })
        .unwrap();
        let mut s1 = s.clone();
        s1.apply(&Gate::Rz {
            target: 0,
            angle: 0.3,
        })
        .unwrap();
        s1.apply(&Gate::Rz {
            target: 0,
            angle: 0.9,
        })
        .unwrap();
        let mut s2 = s;
        s2.apply(&Gate::Rz {
            target: 0,
            angle: 1.2,
        })
        .unwrap();
        for (a1, a2) in s1.amplitudes().iter().zip(s2.amplitudes().iter()) {
            assert_close(*a1, *a2);
        }
    }

    #[test]
    fn marginal_examples() {
        let s = Statevector::basis_state(2, "10").unwrap();
        let m = s.marginal_probabilities(&[1]).unwrap();
        assert!((m[0]).abs() < TOL && (m[1] - 1.0).abs() < TOL);

        // Bell-like state (|00> + |11>)/sqrt(2), marginal over qubit 0.
        let mut bell = Statevector::zero(2).unwrap();
        {
            // Build it directly; entangling gate tests live in the oracle suite.
            let amps = vec![
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ];
            bell.amps.copy_from_slice(&amps);
        }
        let m = bell.marginal_probabilities(&[0]).unwrap();
        assert!((m[0] - 0.5).abs() < TOL && (m[1] - 0.5).abs() < TOL);
    }

    #[test]
    fn marginal_rejects_duplicates_and_out_of_range() {
        let s = Statevector::zero(2).unwrap();
        assert!(s.marginal_probabilities(&[0, 0]).is_err());
        assert!(s.marginal_probabilities(&[2]).is_err());
    }

    #[test]
    fn gate_target_validation() {
        let mut s = Statevector::zero(2).unwrap();
        assert!(s
            .apply(&Gate::Rx {
                target: 2,
                angle: 0.1
            })
            .is_err());
        assert!(s
            .apply(&Gate::Rxx {
                a: 1,
                b: 1,
                angle: 0.1
            })
            .is_err());
    }

    #[test]
    fn sample_deterministic_state() {
        let s = Statevector::basis_state(1, "1").unwrap();
        let hist = s.sample(&[0], 100, 7).unwrap();
        assert_eq!(hist.len(), 1);
        assert_eq!(hist["1"], 100);
    }

    #[test]
    fn sample_same_seed_same_histogram() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply(&Gate::Rx {
            target: 0,
            angle: 0.6,
        })
        .unwrap();
        let h1 = s.sample(&[0], 1000, 42).unwrap();
        let h2 = s.sample(&[0], 1000, 42).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn sample_matches_binomial_statistics() {
        // Even superposition: each count within 5 sigma of shots/2.
        let mut s = Statevector::zero(1).unwrap();
        s.apply(&Gate::Rx {
            target: 0,
            angle: std::f64::consts::FRAC_PI_4,
        })
        .unwrap();
        let shots = 100_000u64;
        let hist = s.sample(&[0], shots, 11).unwrap();
        let sigma = (0.25 * shots as f64).sqrt();
        for key in ["0", "1"] {
            let count = *hist.get(key).unwrap_or(&0) as f64;
            assert!(
                (count - 50_000.0).abs() < 5.0 * sigma,
                "count {count} outside 5 sigma"
            );
        }
    }

    #[test]
    fn sample_zero_shots_errors() {
        let s = Statevector::zero(1).unwrap();
        assert!(s.sample(&[0], 0, 1).is_err());
    }

    #[test]
    fn cry_rotates_only_when_control_set() {
        let theta = 1.1;
        // Control clear: nothing happens.
        let mut s = Statevector::basis_state(2, "00").unwrap();
        s.apply(&Gate::Cry {
            control: 0,
            target: 1,
            angle: theta,
        })
        .unwrap();
        assert_close(s.amplitudes()[0], Complex64::new(1.0, 0.0));

        // Control set: |01> -> cos(t/2)|01> + sin(t/2)|11> (qubit 0 = control).
        let mut s = Statevector::basis_state(2, "01").unwrap();
        s.apply(&Gate::Cry {
            control: 0,
            target: 1,
            angle: theta,
        })
        .unwrap();
        assert_close(s.amplitudes()[1], Complex64::new((theta / 2.0).cos(), 0.0));
        assert_close(s.amplitudes()[3], Complex64::new((theta / 2.0).sin(), 0.0));
    }

    #[test]
    fn norm_preserved_under_long_random_sequence() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let nq = 5;
        let mut s = Statevector::zero(nq).unwrap();
        for _ in 0..1000 {
            let angle = rng.gen_range(-PI..PI);
            let q1 = rng.gen_range(0..nq);
            let mut q2 = rng.gen_range(0..nq);
            while q2 == q1 {
                q2 = rng.gen_range(0..nq);
            }
            let gate = match rng.gen_range(0..7) {
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
            };
            s.apply(&gate).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }
}
