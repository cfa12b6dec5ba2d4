//! Data and phase oracles as index-conditioned gate lists.
//!
//! Every builder returns a [`Circuit`] so callers can add counting
//! controls, check ownership and count calls before applying it. The
//! `apply_*` wrappers run a builder directly against a state.
//!
//! Blind-client pipeline per Grover application (all on `o1` unless noted):
//!
//! | step        | R_i = 0 branch            | R_i = 1 branch            |
//! |-------------|---------------------------|---------------------------|
//! | `U_X1`      | `|x⟩`                     | `H|x⟩`                    |
//! | client CZ   | `(−1)^{xy} |x⟩`           | `H|x⊕y⟩`                  |
//! | `U_X2`      | `(−1)^{xy} |0⟩`           | `(−1)^{xy} H|x⊕y⟩`        |
//! | `U_X3`      | adds `(−1)^{h}`           | adds `(−1)^{h}`           |
//! | client CZ   | unchanged                 | `H|x⟩`                    |
//! | `U_X4`      | `(−1)^{xy} |0⟩`           | `(−1)^{xy} |0⟩`           |
//!
//! On Z-basis branches `U_X2` uncomputes `o1` (`H·CZ(o1,oa)·H` acts as
//! `X^{x_i}`), so the second client CZ cannot cancel the phase already
//! written by the first.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Circuit, Gate, IndexPredicate, StateVector};

/// Residual excitation tolerated on a qubit that should be back in `|0⟩`.
pub const ANCILLA_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn hamming_distance(&self, other: &Bitstring) -> usize {
        self.iter().zip(other.iter()).filter(|(a, b)| a != b).count()
    }

    /// `Σ a_i b_i` over the common length.
    pub fn and_count(&self, other: &Bitstring) -> usize {
        self.iter().zip(other.iter()).filter(|(a, b)| *a && *b).count()
    }

    pub fn and(&self, other: &Bitstring) -> Bitstring {
        Bitstring(self.iter().zip(other.iter()).map(|(a, b)| a && b).collect())
    }

    pub fn xor(&self, other: &Bitstring) -> Bitstring {
        Bitstring(self.iter().zip(other.iter()).map(|(a, b)| a ^ b).collect())
    }

    /// Index register width `max(1, ⌈log₂ N⌉)`.
    pub fn index_width(&self) -> usize {
        index_width(self.len())
    }

    /// Truth table over a `width`-qubit register, zero-padded past N.
    pub fn predicate(&self, width: usize) -> Result<IndexPredicate> {
        IndexPredicate::from_bits(&self.0, width)
    }
}

/// `max(1, ⌈log₂ N⌉)`.
pub fn index_width(n_items: usize) -> usize {
    let mut width = 1;
    while (1usize << width) < n_items {
        width += 1;
    }
    width
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(col, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected character {other:?} at column {}", col + 1),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}

impl From<Bitstring> for String {
    fn from(b: Bitstring) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Bitstring {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parses ASCII `0`/`1` vectors, one per non-empty line. With `width` set,
/// every vector must have exactly that many bits.
pub fn parse_bitstrings(text: &str, width: Option<usize>) -> Result<Vec<Bitstring>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let bits: Bitstring = trimmed.parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line, message },
            other => other,
        })?;
        let expected = width.or_else(|| out.first().map(Bitstring::len));
        if let Some(expected) = expected {
            if bits.len() != expected {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {expected} bits, found {}", bits.len()),
                });
            }
        }
        out.push(bits);
    }
    Ok(out)
}

pub fn read_bitstrings(path: &Path, width: Option<usize>) -> Result<Vec<Bitstring>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_bitstrings(&text, width)
}

/// Correlation written into the phase by the client's two-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMode {
    /// `(−1)^{x_i y_i}` via CZ.
    And,
    /// `(−1)^{x_i ⊕ y_i}` via CNOT, Z, CNOT.
    Xor,
}

impl CorrelationMode {
    pub fn combine(self, x: bool, y: bool) -> bool {
        match self {
            CorrelationMode::And => x && y,
            CorrelationMode::Xor => x ^ y,
        }
    }
}

/// Named oracle families tracked by the channel ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OracleName {
    #[serde(rename = "U_x")]
    Ux,
    #[serde(rename = "U_y")]
    Uy,
    #[serde(rename = "U_g")]
    Ug,
    #[serde(rename = "U_X1")]
    Ux1,
    #[serde(rename = "U_X2")]
    Ux2,
    #[serde(rename = "U_X3")]
    Ux3,
    #[serde(rename = "U_X4")]
    Ux4,
}

impl OracleName {
    pub fn label(self) -> &'static str {
        match self {
            OracleName::Ux => "U_x",
            OracleName::Uy => "U_y",
            OracleName::Ug => "U_g",
            OracleName::Ux1 => "U_X1",
            OracleName::Ux2 => "U_X2",
            OracleName::Ux3 => "U_X3",
            OracleName::Ux4 => "U_X4",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadRule {
    /// `g_i = 0` where `y_i = 1`, uniform elsewhere.
    BlindServerG,
    /// Every `h_i` uniform.
    BlindClientH,
}

/// Per-index basis choice for `U_X1` (`false` = Z basis, `true` = X basis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisAssignment {
    pub bases: Bitstring,
    pub round: u64,
}

impl BasisAssignment {
    pub fn draw<R: Rng + ?Sized>(len: usize, round: u64, rng: &mut R) -> Self {
        Self {
            bases: Bitstring::random(len, rng),
            round,
        }
    }

    pub fn fixed(bases: Bitstring, round: u64) -> Self {
        Self { bases, round }
    }
}

pub fn gen_pad<R: Rng + ?Sized>(rule: PadRule, y: &Bitstring, rng: &mut R) -> Bitstring {
    match rule {
        PadRule::BlindServerG => Bitstring(y.iter().map(|yi| !yi && rng.random::<bool>()).collect()),
        PadRule::BlindClientH => Bitstring::random(y.len(), rng),
    }
}

fn check_len(what: &'static str, data: &Bitstring, index_reg: &[usize]) -> Result<()> {
    let capacity = 1usize << index_reg.len();
    if data.len() > capacity || index_reg.is_empty() {
        return Err(Error::WidthMismatch {
            what,
            expected: capacity,
            got: data.len(),
        });
    }
    Ok(())
}

fn conditioned(gate: Gate, index_reg: &[usize], data: &Bitstring) -> Result<Gate> {
    Ok(gate.with_condition(index_reg, data.predicate(index_reg.len())?))
}

/// `U_data: |i⟩|b⟩ ↦ |i⟩|b ⊕ data_i⟩`.
pub fn data_oracle(index_reg: &[usize], target: usize, data: &Bitstring) -> Result<Circuit> {
    check_len("data", data, index_reg)?;
    Ok(Circuit(vec![conditioned(Gate::x(target), index_reg, data)?]))
}

pub fn correlation_gate(o1: usize, o2: usize, mode: CorrelationMode) -> Result<Circuit> {
    if o1 == o2 {
        return Err(Error::DuplicateQubit(o1));
    }
    Ok(match mode {
        CorrelationMode::And => Circuit(vec![Gate::cz(o1, o2)]),
        CorrelationMode::Xor => Circuit(vec![
            Gate::cnot(o1, o2),
            Gate::z(o2),
            Gate::cnot(o1, o2),
        ]),
    })
}

/// Branch phase `(−1)^{pad_i}` via `U_pad`, Z on the ancilla, `U_pad`.
pub fn phase_pad(index_reg: &[usize], ancilla: usize, pad: &Bitstring) -> Result<Circuit> {
    let mut c = data_oracle(index_reg, ancilla, pad)?;
    c.push(Gate::z(ancilla));
    c.extend(data_oracle(index_reg, ancilla, pad)?);
    Ok(c)
}

/// `U_X1`: `x_i` in the Z basis where `R_i = 0`, in the X basis where `R_i = 1`.
pub fn ux1(index_reg: &[usize], o1: usize, x: &Bitstring, basis: &BasisAssignment) -> Result<Circuit> {
    check_len("x", x, index_reg)?;
    check_len("basis", &basis.bases, index_reg)?;
    Ok(Circuit(vec![
        conditioned(Gate::x(o1), index_reg, x)?,
        conditioned(Gate::h(o1), index_reg, &basis.bases)?,
    ]))
}

/// `U_X2`: writes `(−1)^{x_i y_i}` into the branch phase using the ancilla
/// `oa`, which is returned to `|0⟩`.
pub fn ux2(
    index_reg: &[usize],
    o1: usize,
    oa: usize,
    x: &Bitstring,
    basis: &BasisAssignment,
) -> Result<Circuit> {
    check_len("basis", &basis.bases, index_reg)?;
    if o1 == oa {
        return Err(Error::DuplicateQubit(o1));
    }
    let load = data_oracle(index_reg, oa, x)?;
    let flip = conditioned(Gate::x(o1), index_reg, &basis.bases)?;
    let mut c = load.clone();
    c.push(Gate::h(o1));
    c.push(flip.clone());
    c.push(Gate::cz(o1, oa));
    c.push(flip);
    c.push(Gate::h(o1));
    c.extend(load);
    Ok(c)
}

/// `U_X3`: phase pad `(−1)^{h_i}` through the server ancilla.
pub fn ux3(index_reg: &[usize], oa: usize, h: &Bitstring) -> Result<Circuit> {
    phase_pad(index_reg, oa, h)
}

/// `U_X4`: removes the `h` pad and resets `o1` on X-basis branches
/// (`H`, then `X` where `x_i = 1`).
pub fn ux4(
    index_reg: &[usize],
    o1: usize,
    oa: usize,
    x: &Bitstring,
    basis: &BasisAssignment,
    h: &Bitstring,
) -> Result<Circuit> {
    check_len("x", x, index_reg)?;
    check_len("basis", &basis.bases, index_reg)?;
    let mut c = ux3(index_reg, oa, h)?;
    c.push(conditioned(Gate::h(o1), index_reg, &basis.bases)?);
    c.push(conditioned(Gate::x(o1), index_reg, &x.and(&basis.bases))?);
    Ok(c)
}

pub fn apply_data_oracle(
    state: &mut StateVector,
    index_reg: &[usize],
    target: usize,
    data: &Bitstring,
) -> Result<()> {
    state.apply_circuit(&data_oracle(index_reg, target, data)?)
}

pub fn apply_correlation_gate(
    state: &mut StateVector,
    o1: usize,
    o2: usize,
    mode: CorrelationMode,
) -> Result<()> {
    state.apply_circuit(&correlation_gate(o1, o2, mode)?)
}

pub fn apply_phase_pad(
    state: &mut StateVector,
    index_reg: &[usize],
    ancilla: usize,
    pad: &Bitstring,
) -> Result<()> {
    state.apply_circuit(&phase_pad(index_reg, ancilla, pad)?)
}

pub fn apply_ux1(
    state: &mut StateVector,
    index_reg: &[usize],
    o1: usize,
    x: &Bitstring,
    basis: &BasisAssignment,
) -> Result<()> {
    state.apply_circuit(&ux1(index_reg, o1, x, basis)?)
}

pub fn apply_ux2(
    state: &mut StateVector,
    index_reg: &[usize],
    o1: usize,
    oa: usize,
    x: &Bitstring,
    basis: &BasisAssignment,
) -> Result<()> {
    let leak = state.leakage(&[oa])?;
    if leak > ANCILLA_TOLERANCE {
        return Err(Error::WorkQubitLeakage(leak));
    }
    state.apply_circuit(&ux2(index_reg, o1, oa, x, basis)?)
}

pub fn apply_ux3(
    state: &mut StateVector,
    index_reg: &[usize],
    oa: usize,
    h: &Bitstring,
) -> Result<()> {
    state.apply_circuit(&ux3(index_reg, oa, h)?)
}

pub fn apply_ux4(
    state: &mut StateVector,
    index_reg: &[usize],
    o1: usize,
    oa: usize,
    x: &Bitstring,
    basis: &BasisAssignment,
    h: &Bitstring,
) -> Result<()> {
    state.apply_circuit(&ux4(index_reg, o1, oa, x, basis, h)?)?;
    let leak = state.leakage(&[o1])?;
    if leak > ANCILLA_TOLERANCE {
        return Err(Error::WorkQubitLeakage(leak));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    /// Uniform superposition over an `n`-qubit index register followed by
    /// `extra` work qubits in `|0⟩`.
    fn uniform(n: usize, extra: usize) -> StateVector {
        let mut s = StateVector::new(n + extra);
        for q in 0..n {
            s.apply(&Gate::h(q)).unwrap();
        }
        s
    }

    #[test]
    fn parse_and_display() {
        let b = bits("1010");
        assert_eq!(b.to_string(), "1010");
        assert_eq!(b.weight(), 2);
        assert!("10a1".parse::<Bitstring>().is_err());
    }

    #[test]
    fn parse_lines_reports_line_number() {
        let text = "0101\n\n1100\n111\n";
        match parse_bitstrings(text, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_bitstrings("01\n0x\n", Some(2)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse_bitstrings("01\n10\n", Some(2)).unwrap().len(), 2);
    }

    #[test]
    fn index_width_rounds_up() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(16), 4);
        assert_eq!(index_width(17), 5);
    }

    #[test]
    fn data_oracle_all_ones() {
        let mut s = uniform(2, 1);
        apply_data_oracle(&mut s, &[0, 1], 2, &bits("1111")).unwrap();
        for i in 0..4 {
            assert!((s.amplitude(i << 1 | 1).re - 0.5).abs() < 1e-12);
            assert!(s.amplitude(i << 1).norm() < 1e-12);
        }
    }

    #[test]
    fn data_oracle_is_involution() {
        let mut s = uniform(2, 1);
        let s0 = s.clone();
        apply_data_oracle(&mut s, &[0, 1], 2, &bits("1011")).unwrap();
        apply_data_oracle(&mut s, &[0, 1], 2, &bits("1011")).unwrap();
        assert!(s.max_abs_diff(&s0) < 1e-12);
    }

    #[test]
    fn data_oracle_width_error() {
        assert!(matches!(
            data_oracle(&[0], 1, &bits("101")),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn data_oracle_pads_short_vectors_with_zero() {
        // N = 3 on a 2-qubit register: index 3 acts as x_3 = 0
        let mut s = uniform(2, 1);
        apply_data_oracle(&mut s, &[0, 1], 2, &bits("111")).unwrap();
        assert!((s.amplitude(0b110).re - 0.5).abs() < 1e-12);
        assert!(s.amplitude(0b111).norm() < 1e-12);
    }

    #[test]
    fn correlation_truth_tables() {
        for (mode, x, y, flips) in [
            (CorrelationMode::And, true, true, true),
            (CorrelationMode::And, true, false, false),
            (CorrelationMode::Xor, true, false, true),
            (CorrelationMode::Xor, true, true, false),
            (CorrelationMode::Xor, false, true, true),
        ] {
            let k = (usize::from(x) << 1) | usize::from(y);
            let mut s = StateVector::basis(2, k);
            apply_correlation_gate(&mut s, 0, 1, mode).unwrap();
            let want = if flips { -1.0 } else { 1.0 };
            assert!((s.amplitude(k).re - want).abs() < 1e-12, "{mode:?} {x} {y}");
        }
        assert!(matches!(
            correlation_gate(1, 1, CorrelationMode::And),
            Err(Error::DuplicateQubit(1))
        ));
    }

    #[test]
    fn full_uxy_phases() {
        // x=(1,1,0,0), y=(1,0,1,0): branch phases (−1,1,1,1)
        let (x, y) = (bits("1100"), bits("1010"));
        let reg = [0, 1];
        let mut s = uniform(2, 2);
        apply_data_oracle(&mut s, &reg, 2, &x).unwrap();
        apply_data_oracle(&mut s, &reg, 3, &y).unwrap();
        apply_correlation_gate(&mut s, 2, 3, CorrelationMode::And).unwrap();
        apply_data_oracle(&mut s, &reg, 3, &y).unwrap();
        apply_data_oracle(&mut s, &reg, 2, &x).unwrap();
        let signs: Vec<f64> = (0..4).map(|i| (s.amplitude(i << 2).re / 0.5).round()).collect();
        assert_eq!(signs, vec![-1.0, 1.0, 1.0, 1.0]);
        assert!(s.leakage(&[2, 3]).unwrap() < 1e-15);
    }

    #[test]
    fn pad_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(gen_pad(PadRule::BlindServerG, &bits("1111"), &mut rng), bits("0000"));
        for _ in 0..100 {
            let g = gen_pad(PadRule::BlindServerG, &bits("1001"), &mut rng);
            assert!(!g.get(0) && !g.get(3));
        }
        let zeros = Bitstring::zeros(1);
        let ones = (0..10_000)
            .filter(|_| gen_pad(PadRule::BlindServerG, &zeros, &mut rng).get(0))
            .count();
        assert!((ones as f64 / 1e4 - 0.5).abs() < 0.02);
        let h = gen_pad(PadRule::BlindClientH, &Bitstring::ones(4000), &mut rng);
        assert!((h.weight() as f64 / 4000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn phase_pad_signs() {
        let mut s = uniform(2, 1);
        apply_phase_pad(&mut s, &[0, 1], 2, &bits("0110")).unwrap();
        let signs: Vec<f64> = (0..4).map(|i| (s.amplitude(i << 1).re / 0.5).round()).collect();
        assert_eq!(signs, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(s.leakage(&[2]).unwrap() < 1e-15);

        let mut s = uniform(2, 1);
        apply_phase_pad(&mut s, &[0, 1], 2, &bits("1111")).unwrap();
        assert!((0..4).all(|i| (s.amplitude(i << 1).re + 0.5).abs() < 1e-12));

        let mut s = uniform(2, 1);
        let s0 = s.clone();
        apply_phase_pad(&mut s, &[0, 1], 2, &bits("0000")).unwrap();
        assert!(s.max_abs_diff(&s0) < 1e-15);
    }

    #[test]
    fn ux1_branches() {
        let x = bits("10");
        // R all zero reduces to U_x
        let mut a = uniform(1, 1);
        let mut b = a.clone();
        apply_ux1(&mut a, &[0], 1, &x, &BasisAssignment::fixed(bits("00"), 0)).unwrap();
        apply_data_oracle(&mut b, &[0], 1, &x).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);

        // R all one, x all zero: o1 = |+⟩ on every branch
        let mut s = uniform(1, 1);
        apply_ux1(&mut s, &[0], 1, &bits("00"), &BasisAssignment::fixed(bits("11"), 0)).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-12));

        // x=(1,0), R=(1,0): |0⟩|−⟩ and |1⟩|0⟩
        let mut s = uniform(1, 1);
        apply_ux1(&mut s, &[0], 1, &x, &BasisAssignment::fixed(bits("10"), 0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = [0.5, -0.5, r, 0.0];
        for (k, w) in want.iter().enumerate() {
            assert!((s.amplitude(k).re - w).abs() < 1e-12, "k={k}");
        }
    }

    /// Layout for blind-client checks: index [0, n), o1 = n, o2 = n+1, oa = n+2.
    fn client_cz(s: &mut StateVector, reg: &[usize], o1: usize, o2: usize, y: &Bitstring) {
        apply_data_oracle(s, reg, o2, y).unwrap();
        apply_correlation_gate(s, o1, o2, CorrelationMode::And).unwrap();
        apply_data_oracle(s, reg, o2, y).unwrap();
    }

    fn sign(b: bool) -> f64 {
        if b {
            -1.0
        } else {
            1.0
        }
    }

    #[test]
    fn ux2_single_branch_x_basis() {
        // one index value, R=1, x=1, y=1: phase −1 appears
        let reg = [0];
        let (x, y, r) = (bits("1"), bits("1"), BasisAssignment::fixed(bits("1"), 0));
        let mut s = StateVector::new(4);
        apply_ux1(&mut s, &reg, 1, &x, &r).unwrap();
        client_cz(&mut s, &reg, 1, 2, &y);
        let before = s.clone();
        apply_ux2(&mut s, &reg, 1, 3, &x, &r).unwrap();
        for k in 0..s.dim() {
            assert!((s.amplitude(k) + before.amplitude(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn ux2_matches_branch_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 2;
        let reg: Vec<usize> = (0..n).collect();
        let (o1, o2, oa) = (n, n + 1, n + 2);
        for _ in 0..50 {
            let x = Bitstring::random(4, &mut rng);
            let y = Bitstring::random(4, &mut rng);
            let r = BasisAssignment::draw(4, 0, &mut rng);
            let mut s = uniform(n, 3);
            apply_ux1(&mut s, &reg, o1, &x, &r).unwrap();
            client_cz(&mut s, &reg, o1, o2, &y);
            apply_ux2(&mut s, &reg, o1, oa, &x, &r).unwrap();
            // X-basis branches: (−1)^{xy} (a|0⟩ + b(−1)^y|1⟩) with a,b from H|x⟩
            // Z-basis branches: (−1)^{xy} |0⟩ (o1 uncomputed)
            let amp = 0.5;
            let r2 = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..4 {
                let (xi, yi, ri) = (x.get(i), y.get(i), r.bases.get(i));
                let phase = sign(xi && yi);
                let (want0, want1) = if ri {
                    (amp * phase * r2, amp * phase * r2 * sign(xi) * sign(yi))
                } else {
                    (amp * phase, 0.0)
                };
                let base = i << 3;
                assert!((s.amplitude(base).re - want0).abs() < 1e-10);
                assert!((s.amplitude(base | 0b100).re - want1).abs() < 1e-10);
            }
            assert!(s.leakage(&[o2, oa]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ux2_rejects_dirty_ancilla() {
        let mut s = StateVector::new(3);
        s.apply(&Gate::x(2)).unwrap();
        let r = BasisAssignment::fixed(bits("00"), 0);
        assert!(matches!(
            apply_ux2(&mut s, &[0], 1, 2, &bits("00"), &r),
            Err(Error::WorkQubitLeakage(_))
        ));
    }

    #[test]
    fn ux3_examples() {
        let reg = [0, 1];
        let mut s = uniform(2, 1);
        let s0 = s.clone();
        apply_ux3(&mut s, &reg, 2, &bits("0000")).unwrap();
        assert!(s.max_abs_diff(&s0) < 1e-15);
        apply_ux3(&mut s, &reg, 2, &bits("1000")).unwrap();
        assert!((s.amplitude(0).re + 0.5).abs() < 1e-12);
        assert!((1..4).all(|i| (s.amplitude(i << 1).re - 0.5).abs() < 1e-12));
        apply_ux3(&mut s, &reg, 2, &bits("1000")).unwrap();
        assert!(s.max_abs_diff(&s0) < 1e-12);
    }

    /// Runs U_X1 → client CZ → U_X2 → U_X3 → client CZ → U_X4 on `s`.
    fn o_f(
        s: &mut StateVector,
        reg: &[usize],
        x: &Bitstring,
        y: &Bitstring,
        r: &BasisAssignment,
        h: &Bitstring,
    ) -> Result<()> {
        let n = reg.len();
        let (o1, o2, oa) = (n, n + 1, n + 2);
        apply_ux1(s, reg, o1, x, r)?;
        client_cz(s, reg, o1, o2, y);
        apply_ux2(s, reg, o1, oa, x, r)?;
        apply_ux3(s, reg, oa, h)?;
        client_cz(s, reg, o1, o2, y);
        apply_ux4(s, reg, o1, oa, x, r, h)
    }

    fn assert_phase_oracle(s: &StateVector, n: usize, x: &Bitstring, y: &Bitstring) {
        let amp = 1.0 / ((1usize << n) as f64).sqrt();
        for i in 0..(1usize << n) {
            let want = amp * sign(i < x.len() && x.get(i) && y.get(i));
            let got = s.amplitude(i << 3);
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-10, "i={i}");
        }
        assert!(s.leakage(&[n, n + 1, n + 2]).unwrap() < 1e-12);
    }

    #[test]
    fn blind_client_pipeline_exhaustive_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reg = [0];
        for code in 0..64u32 {
            let b = |k: u32| Bitstring::new(vec![code >> k & 1 == 1, code >> (k + 1) & 1 == 1]);
            let (x, y, rb) = (b(0), b(2), b(4));
            let h = Bitstring::random(2, &mut rng);
            let mut s = uniform(1, 3);
            o_f(&mut s, &reg, &x, &y, &BasisAssignment::fixed(rb, 0), &h).unwrap();
            assert_phase_oracle(&s, 1, &x, &y);
        }
    }

    #[test]
    fn blind_client_pipeline_random_n8() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let reg = [0, 1, 2];
        for _ in 0..200 {
            let x = Bitstring::random(8, &mut rng);
            let y = Bitstring::random(8, &mut rng);
            let r = BasisAssignment::draw(8, 0, &mut rng);
            let h = Bitstring::random(8, &mut rng);
            let mut s = uniform(3, 3);
            o_f(&mut s, &reg, &x, &y, &r, &h).unwrap();
            assert_phase_oracle(&s, 3, &x, &y);
        }
    }

    #[test]
    fn ux4_cancels_pad_and_resets() {
        // state prepared directly in the U_X4 precondition form
        let reg = [0, 1];
        let (o1, oa) = (2, 3);
        let x = bits("1010");
        let y = bits("1100");
        let r = BasisAssignment::fixed(bits("0110"), 0);
        let h = bits("1100");
        let mut s = uniform(2, 2);
        // X-basis branches carry H|x⟩, Z-basis branches |0⟩
        s.apply(&Gate::x(o1).with_condition(&reg, x.and(&r.bases).predicate(2).unwrap()))
            .unwrap();
        s.apply(&Gate::h(o1).with_condition(&reg, r.bases.predicate(2).unwrap()))
            .unwrap();
        let xy = x.and(&y);
        apply_phase_pad(&mut s, &reg, oa, &xy).unwrap();
        apply_phase_pad(&mut s, &reg, oa, &h).unwrap();
        apply_ux4(&mut s, &reg, o1, oa, &x, &r, &h).unwrap();
        for i in 0..4 {
            let want = 0.5 * sign(xy.get(i));
            assert!((s.amplitude(i << 2).re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ux4_detects_bad_precondition() {
        let reg = [0];
        let mut s = uniform(1, 2);
        s.apply(&Gate::x(1)).unwrap();
        let r = BasisAssignment::fixed(bits("00"), 0);
        assert!(matches!(
            apply_ux4(&mut s, &reg, 1, 2, &bits("00"), &r, &bits("00")),
            Err(Error::WorkQubitLeakage(_))
        ));
    }

    #[test]
    fn oracles_invert_through_reversed_lists() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let reg = [0, 1];
        for _ in 0..20 {
            let x = Bitstring::random(4, &mut rng);
            let r = BasisAssignment::draw(4, 0, &mut rng);
            let h = Bitstring::random(4, &mut rng);
            let s0 = crate::sim::tests_support::random_state(5, &mut rng);
            for c in [
                ux1(&reg, 2, &x, &r).unwrap(),
                ux2(&reg, 2, 4, &x, &r).unwrap(),
                ux3(&reg, 4, &h).unwrap(),
                ux4(&reg, 2, 4, &x, &r, &h).unwrap(),
                phase_pad(&reg, 3, &h).unwrap(),
                data_oracle(&reg, 3, &x).unwrap(),
            ] {
                let mut s = s0.clone();
                s.apply_circuit(&c).unwrap();
                s.apply_circuit(&c.inverse()).unwrap();
                assert!(s.max_abs_diff(&s0) < 1e-10);
            }
        }
    }

    #[test]
    fn blind_server_composite_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=4usize {
            let size = 1usize << n;
            let reg: Vec<usize> = (0..n).collect();
            let (o1, o2, o3) = (n, n + 1, n + 2);
            for _ in 0..10 {
                let x = Bitstring::random(size, &mut rng);
                let y = Bitstring::random(size, &mut rng);
                let g = gen_pad(PadRule::BlindServerG, &y, &mut rng);
                let mut s = uniform(n, 3);
                apply_data_oracle(&mut s, &reg, o1, &x).unwrap();
                client_cz(&mut s, &reg, o1, o2, &y);
                apply_phase_pad(&mut s, &reg, o3, &g).unwrap();
                apply_data_oracle(&mut s, &reg, o1, &x).unwrap();
                let amp = 1.0 / (size as f64).sqrt();
                for i in 0..size {
                    let bit = (x.get(i) && y.get(i)) as u8 + g.get(i) as u8;
                    assert!(bit <= 1);
                    let want = amp * sign(bit == 1);
                    assert!((s.amplitude(i << 3).re - want).abs() < 1e-10);
                }
            }
        }
    }
}
