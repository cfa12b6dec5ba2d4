//! Dense statevector simulation.
//!
//! Qubit `q` of an `n`-qubit state maps to bit `n - 1 - q` of the basis
//! index, so qubit 0 is the most significant. Every qubit list handed to
//! the simulator (index registers, outcome lists, kept subsystems) is read
//! most-significant first in the same way.

mod density;
mod gate;

pub use density::{trace_distance, von_neumann_entropy, DensityMatrix};
pub use gate::{Circuit, Gate, GateKind, IndexCondition, IndexPredicate};

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Norm tolerance accepted when building a state from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Largest state simulated when `QBC_MAX_QUBITS` is unset.
pub const DEFAULT_MAX_QUBITS: usize = 22;

/// Qubit cap from `QBC_MAX_QUBITS`, falling back to [`DEFAULT_MAX_QUBITS`].
pub fn qubit_cap() -> usize {
    std::env::var("QBC_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

pub fn check_qubit_cap(required: usize, available: usize) -> Result<()> {
    if required > available {
        return Err(Error::QubitCapExceeded {
            required,
            available,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::BadDimension(dim));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest per-amplitude deviation from `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1usize << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_distinct(&self, qubits: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.num_qubits];
        for &q in qubits {
            self.check_qubit(q)?;
            if seen[q] {
                return Err(Error::DuplicateQubit(q));
            }
            seen[q] = true;
        }
        Ok(())
    }

    /// Value of `register` (most significant first) in basis state `k`.
    #[inline]
    fn register_value(&self, k: usize, register: &[usize]) -> usize {
        register.iter().fold(0usize, |acc, &q| {
            (acc << 1) | usize::from(k & self.mask(q) != 0)
        })
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        for g in gate.decompose() {
            self.apply_elementary(&g);
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        for g in circuit.gates() {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Applies `kind` to `target` on exactly those components whose
    /// `index_reg` value satisfies `pred`.
    pub fn apply_indexed_gate(
        &mut self,
        index_reg: &[usize],
        target: usize,
        pred: &IndexPredicate,
        kind: GateKind,
    ) -> Result<()> {
        if pred.width() != index_reg.len() {
            return Err(Error::WidthMismatch {
                what: "index predicate",
                expected: index_reg.len(),
                got: pred.width(),
            });
        }
        let gate = Gate::new(kind, vec![target]).with_condition(index_reg, pred.clone());
        self.apply(&gate)
    }

    fn apply_elementary(&mut self, gate: &Gate) {
        let ctrl_mask = gate
            .controls
            .iter()
            .fold(0usize, |m, &q| m | self.mask(q));
        let cond = gate.condition.as_ref().map(|c| {
            let reg: Vec<usize> = c.index_reg.to_vec();
            (reg, c.predicate.clone())
        });
        let enabled = |sv: &StateVector, k: usize| -> bool {
            if k & ctrl_mask != ctrl_mask {
                return false;
            }
            match &cond {
                Some((reg, pred)) => pred.get(sv.register_value(k, reg)),
                None => true,
            }
        };

        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match gate.kind {
            GateKind::H => self.apply_1q([[h, h], [h, -h]], gate.targets[0], &enabled),
            GateKind::X => self.apply_1q([[zero, one], [one, zero]], gate.targets[0], &enabled),
            GateKind::Cnot => {
                let ctrl = self.mask(gate.targets[0]);
                let with_ctrl = |sv: &StateVector, k: usize| k & ctrl != 0 && enabled(sv, k);
                self.apply_1q([[zero, one], [one, zero]], gate.targets[1], &with_ctrl)
            }
            GateKind::Z => {
                let m = self.mask(gate.targets[0]);
                self.apply_diagonal(m, -one, &enabled)
            }
            GateKind::Phase(theta) => {
                let m = self.mask(gate.targets[0]);
                self.apply_diagonal(m, Complex64::from_polar(1.0, theta), &enabled)
            }
            GateKind::Cz => {
                let m = self.mask(gate.targets[0]) | self.mask(gate.targets[1]);
                self.apply_diagonal(m, -one, &enabled)
            }
            GateKind::Swap => {
                let a = self.mask(gate.targets[0]);
                let b = self.mask(gate.targets[1]);
                for k in 0..self.dim() {
                    if k & a != 0 && k & b == 0 && enabled(self, k) {
                        self.amplitudes.swap(k, k ^ a ^ b);
                    }
                }
            }
            GateKind::ReflectAboutZero => {
                let reg_mask = gate
                    .targets
                    .iter()
                    .fold(0usize, |m, &q| m | self.mask(q));
                for k in 0..self.dim() {
                    if k & reg_mask != 0 && enabled(self, k) {
                        self.amplitudes[k] = -self.amplitudes[k];
                    }
                }
            }
            GateKind::Qft | GateKind::Iqft => unreachable!("register gates are decomposed"),
        }
    }

    fn apply_1q<F>(&mut self, m: [[Complex64; 2]; 2], target: usize, enabled: &F)
    where
        F: Fn(&StateVector, usize) -> bool,
    {
        let t = self.mask(target);
        for k0 in 0..self.dim() {
            if k0 & t != 0 || !enabled(self, k0) {
                continue;
            }
            let k1 = k0 | t;
            let a0 = self.amplitudes[k0];
            let a1 = self.amplitudes[k1];
            self.amplitudes[k0] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[k1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_diagonal<F>(&mut self, mask: usize, factor: Complex64, enabled: &F)
    where
        F: Fn(&StateVector, usize) -> bool,
    {
        for k in 0..self.dim() {
            if k & mask == mask && enabled(self, k) {
                self.amplitudes[k] *= factor;
            }
        }
    }

    /// Probability that every qubit in `qubits` reads 0.
    pub fn prob_all_zero(&self, qubits: &[usize]) -> Result<f64> {
        self.check_distinct(qubits)?;
        let mask = qubits.iter().fold(0usize, |m, &q| m | self.mask(q));
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| k & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Probability mass on components where any of `qubits` is excited.
    pub fn leakage(&self, qubits: &[usize]) -> Result<f64> {
        Ok((1.0 - self.prob_all_zero(qubits)?).max(0.0))
    }

    /// Amplitudes of the remaining qubits on the subspace where all of
    /// `qubits` are `|0⟩`, unnormalized.
    pub fn project_zero(&self, qubits: &[usize]) -> Result<Vec<Complex64>> {
        self.check_distinct(qubits)?;
        let mask = qubits.iter().fold(0usize, |m, &q| m | self.mask(q));
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| k & mask == 0)
            .map(|(_, a)| *a)
            .collect())
    }

    /// Born-rule measurement in the computational basis; collapses and
    /// renormalizes in place.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<bool> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        let p1: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| k & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = rng.random::<f64>() < p1;
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep.sqrt();
        for (k, a) in self.amplitudes.iter_mut().enumerate() {
            if (k & m != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Measures `register` qubit by qubit and returns its value, most
    /// significant first.
    pub fn measure_register<R: Rng + ?Sized>(
        &mut self,
        register: &[usize],
        rng: &mut R,
    ) -> Result<usize> {
        let mut value = 0usize;
        for &q in register {
            value = (value << 1) | usize::from(self.measure(q, rng)?);
        }
        Ok(value)
    }

    /// Exact marginal distribution over `qubits`; outcome index reads the
    /// first listed qubit as most significant.
    pub fn outcome_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(Error::EmptyQubitList);
        }
        self.check_distinct(qubits)?;
        let mut probs = vec![0.0; 1usize << qubits.len()];
        for (k, a) in self.amplitudes.iter().enumerate() {
            probs[self.register_value(k, qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Partial trace over every qubit not in `keep`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyQubitList);
        }
        self.check_distinct(keep)?;
        let rest: Vec<usize> = (0..self.num_qubits).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let de = 1usize << rest.len();
        // psi[e][a] = amplitude with kept value a and environment value e
        let mut psi = vec![vec![Complex64::new(0.0, 0.0); dk]; de];
        for (k, amp) in self.amplitudes.iter().enumerate() {
            psi[self.register_value(k, &rest)][self.register_value(k, keep)] = *amp;
        }
        let mut rho = nalgebra::DMatrix::<Complex64>::zeros(dk, dk);
        for row in &psi {
            for a in 0..dk {
                if row[a] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..dk {
                    rho[(a, b)] += row[a] * row[b].conj();
                }
            }
        }
        DensityMatrix::new(rho)
    }
}


#[cfg(test)]
mod tests {
    use super::tests_support::random_state;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &StateVector, b: &[Complex64], tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::new(1);
        s.apply(&Gate::h(0)).unwrap();
        assert!(close(&s, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], 1e-15));
    }

    #[test]
    fn cz_on_11() {
        let mut s = StateVector::basis(2, 0b11);
        s.apply(&Gate::cz(0, 1)).unwrap();
        assert!(close(&s, &[c(0.0), c(0.0), c(0.0), c(-1.0)], 1e-15));
    }

    #[test]
    fn reflect_about_zero_flips_nonzero_components() {
        let r = FRAC_1_SQRT_2;
        let mut s = StateVector::from_amplitudes(vec![c(r), c(r), c(0.0), c(0.0)]).unwrap();
        s.apply(&Gate::reflect_about_zero(&[0, 1])).unwrap();
        assert!(close(&s, &[c(r), c(-r), c(0.0), c(0.0)], 1e-15));
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = StateVector::new(3);
        s.apply(&Gate::x(0)).unwrap();
        assert_eq!(s.amplitude(0b100), c(1.0));
    }

    #[test]
    fn cnot_reads_control_then_target() {
        let mut s = StateVector::basis(2, 0b10);
        s.apply(&Gate::cnot(0, 1)).unwrap();
        assert_eq!(s.amplitude(0b11), c(1.0));
        let mut s = StateVector::basis(2, 0b01);
        s.apply(&Gate::cnot(0, 1)).unwrap();
        assert_eq!(s.amplitude(0b01), c(1.0));
    }

    #[test]
    fn gate_errors() {
        let mut s = StateVector::new(2);
        assert!(matches!(
            s.apply(&Gate::x(2)),
            Err(Error::QubitOutOfRange { qubit: 2, .. })
        ));
        assert!(matches!(
            s.apply(&Gate::x(0).with_control(0)),
            Err(Error::DuplicateQubit(0))
        ));
        assert!(matches!(
            s.apply(&Gate::cz(1, 1)),
            Err(Error::DuplicateQubit(1))
        ));
        assert!(matches!(
            s.apply(&Gate::new(GateKind::H, vec![0, 1])),
            Err(Error::TargetArity { .. })
        ));
    }

    #[test]
    fn indexed_gate_matches_definition() {
        // (|0⟩+|1⟩)_n |0⟩ / √2 with x = (0,1) → (|0⟩|0⟩ + |1⟩|1⟩)/√2
        let mut s = StateVector::new(2);
        s.apply(&Gate::h(0)).unwrap();
        let pred = IndexPredicate::from_bits(&[false, true], 1).unwrap();
        s.apply_indexed_gate(&[0], 1, &pred, GateKind::X).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(close(&s, &[c(r), c(0.0), c(0.0), c(r)], 1e-15));
    }

    #[test]
    fn indexed_gate_all_false_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s0 = random_state(3, &mut rng);
        let mut s = s0.clone();
        let pred = IndexPredicate::all(2, false);
        s.apply_indexed_gate(&[0, 1], 2, &pred, GateKind::H).unwrap();
        assert!(s.max_abs_diff(&s0) < 1e-15);
    }

    #[test]
    fn indexed_gate_width_mismatch() {
        let mut s = StateVector::new(3);
        let pred = IndexPredicate::all(1, true);
        assert!(matches!(
            s.apply_indexed_gate(&[0, 1], 2, &pred, GateKind::X),
            Err(Error::WidthMismatch { .. })
        ));
        let pred = IndexPredicate::all(1, true);
        assert!(matches!(
            s.apply_indexed_gate(&[0], 0, &pred, GateKind::X),
            Err(Error::DuplicateQubit(0))
        ));
    }

    #[test]
    fn measure_basis_state_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::basis(1, 1);
        assert!(s.measure(0, &mut rng).unwrap());
        assert_eq!(s.amplitude(1), c(1.0));
    }

    #[test]
    fn measure_plus_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ones = 0;
        for _ in 0..10_000 {
            let mut s = StateVector::new(1);
            s.apply(&Gate::h(0)).unwrap();
            if s.measure(0, &mut rng).unwrap() {
                ones += 1;
            }
        }
        let p = ones as f64 / 10_000.0;
        assert!((p - 0.5).abs() < 0.02, "p = {p}");
    }

    #[test]
    fn measure_collapses_partner() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = StateVector::new(2);
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::cnot(0, 1)).unwrap();
        let a = s.measure(0, &mut rng).unwrap();
        let b = s.measure(1, &mut rng).unwrap();
        assert_eq!(a, b);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distributions() {
        let mut s = StateVector::new(1);
        s.apply(&Gate::h(0)).unwrap();
        let p = s.outcome_distribution(&[0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);

        let mut ghz = StateVector::new(2);
        ghz.apply(&Gate::h(0)).unwrap();
        ghz.apply(&Gate::cnot(0, 1)).unwrap();
        let p = ghz.outcome_distribution(&[0, 1]).unwrap();
        let want = [0.5, 0.0, 0.0, 0.5];
        assert!(p.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));

        assert!(matches!(
            ghz.outcome_distribution(&[0, 0]),
            Err(Error::DuplicateQubit(0))
        ));
    }

    #[test]
    fn outcome_order_follows_list_order() {
        let s = StateVector::basis(2, 0b10);
        assert_eq!(s.outcome_distribution(&[1, 0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn qft_matches_dft_matrix() {
        let m = 3;
        let dim = 1usize << m;
        let reg: Vec<usize> = (0..m).collect();
        for j in 0..dim {
            let mut s = StateVector::basis(m, j);
            s.apply(&Gate::qft(&reg)).unwrap();
            for k in 0..dim {
                let want = Complex64::from_polar(
                    1.0 / (dim as f64).sqrt(),
                    2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64,
                );
                assert!((s.amplitude(k) - want).norm() < 1e-12, "j={j} k={k}");
            }
        }
    }

    #[test]
    fn iqft_undoes_qft() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for width in 1..=8 {
            let s0 = random_state(width, &mut rng);
            let reg: Vec<usize> = (0..width).collect();
            let mut s = s0.clone();
            s.apply(&Gate::qft(&reg)).unwrap();
            s.apply(&Gate::iqft(&reg)).unwrap();
            assert!(s.max_abs_diff(&s0) < 1e-10, "width {width}");
        }
    }

    #[test]
    fn project_zero_and_leakage() {
        let mut s = StateVector::new(2);
        s.apply(&Gate::h(1)).unwrap();
        assert!((s.leakage(&[1]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(s.project_zero(&[1]).unwrap().len(), 2);
        assert!(s.leakage(&[0]).unwrap() < 1e-15);
    }

    #[test]
    fn from_amplitudes_rejects_bad_input() {
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0); 3]),
            Err(Error::BadDimension(3))
        ));
        assert!(matches!(
            StateVector::from_amplitudes(vec![c(1.0), c(1.0)]),
            Err(Error::NotNormalized(_))
        ));
    }
}
