use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Elementary operations understood by the simulator.
///
/// Two-qubit kinds take their qubits in `targets`: `Cz` is symmetric,
/// `Cnot` reads `[control, target]`, `Swap` exchanges both. Register kinds
/// (`ReflectAboutZero`, `Qft`, `Iqft`) act on every qubit in `targets`, the
/// first listed being the most significant.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    Phase(f64),
    Cz,
    Cnot,
    Swap,
    /// `2|0⟩⟨0| − I` over the target register.
    ReflectAboutZero,
    Qft,
    Iqft,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Phase(_) => "Phase",
            GateKind::Cz => "CZ",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::ReflectAboutZero => "ReflectAboutZero",
            GateKind::Qft => "QFT",
            GateKind::Iqft => "IQFT",
        }
    }

    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::H | GateKind::X | GateKind::Z | GateKind::Phase(_) => Some(1),
            GateKind::Cz | GateKind::Cnot | GateKind::Swap => Some(2),
            GateKind::ReflectAboutZero | GateKind::Qft | GateKind::Iqft => None,
        }
    }

    pub fn inverse(&self) -> GateKind {
        match self {
            GateKind::Phase(theta) => GateKind::Phase(-theta),
            GateKind::Qft => GateKind::Iqft,
            GateKind::Iqft => GateKind::Qft,
            other => other.clone(),
        }
    }
}

/// Truth table over the basis values of an index register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPredicate {
    table: Arc<[bool]>,
    width: usize,
}

impl IndexPredicate {
    /// Builds a predicate over a `width`-qubit register. Entries past the
    /// end of `bits` (indices ≥ N when N < 2^width) are false.
    pub fn from_bits(bits: &[bool], width: usize) -> Result<Self> {
        let size = 1usize << width;
        if bits.len() > size {
            return Err(Error::WidthMismatch {
                what: "predicate table",
                expected: size,
                got: bits.len(),
            });
        }
        let mut table = vec![false; size];
        table[..bits.len()].copy_from_slice(bits);
        Ok(Self {
            table: table.into(),
            width,
        })
    }

    pub fn all(width: usize, value: bool) -> Self {
        Self {
            table: vec![value; 1usize << width].into(),
            width,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, index: usize) -> bool {
        self.table[index]
    }

    pub fn is_all_false(&self) -> bool {
        self.table.iter().all(|b| !b)
    }

    pub fn and(&self, other: &IndexPredicate) -> Result<IndexPredicate> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                what: "predicate",
                expected: self.width,
                got: other.width,
            });
        }
        let table: Vec<bool> = self
            .table
            .iter()
            .zip(other.table.iter())
            .map(|(a, b)| *a && *b)
            .collect();
        Ok(Self {
            table: table.into(),
            width: self.width,
        })
    }
}

/// Classical data condition: the gate fires on basis components whose index
/// register value `i` satisfies `predicate(i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexCondition {
    pub index_reg: Arc<[usize]>,
    pub predicate: IndexPredicate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
    pub condition: Option<IndexCondition>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            controls: Vec::new(),
            condition: None,
        }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }

    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, vec![q])
    }

    pub fn phase(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Phase(theta), vec![q])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b])
    }

    pub fn reflect_about_zero(register: &[usize]) -> Self {
        Self::new(GateKind::ReflectAboutZero, register.to_vec())
    }

    pub fn qft(register: &[usize]) -> Self {
        Self::new(GateKind::Qft, register.to_vec())
    }

    pub fn iqft(register: &[usize]) -> Self {
        Self::new(GateKind::Iqft, register.to_vec())
    }

    pub fn with_control(mut self, control: usize) -> Self {
        self.controls.push(control);
        self
    }

    pub fn with_condition(mut self, index_reg: &[usize], predicate: IndexPredicate) -> Self {
        self.condition = Some(IndexCondition {
            index_reg: index_reg.into(),
            predicate,
        });
        self
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            ..self.clone()
        }
    }

    /// Every qubit the gate reads or writes, including controls and the
    /// index register of its condition.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets
            .iter()
            .chain(self.controls.iter())
            .chain(self.condition.iter().flat_map(|c| c.index_reg.iter()))
            .copied()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if let Some(arity) = self.kind.arity() {
            if self.targets.len() != arity {
                return Err(Error::TargetArity {
                    gate: self.kind.name(),
                    expected: arity,
                    got: self.targets.len(),
                });
            }
        } else if self.targets.is_empty() {
            return Err(Error::EmptyQubitList);
        }
        let mut seen = vec![false; num_qubits];
        for &q in self.targets.iter().chain(self.controls.iter()) {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
            }
            if seen[q] {
                return Err(Error::DuplicateQubit(q));
            }
            seen[q] = true;
        }
        if let Some(cond) = &self.condition {
            if cond.index_reg.len() != cond.predicate.width() {
                return Err(Error::WidthMismatch {
                    what: "index predicate",
                    expected: cond.index_reg.len(),
                    got: cond.predicate.width(),
                });
            }
            for &q in cond.index_reg.iter() {
                if q >= num_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
                }
                if self.targets.contains(&q) {
                    return Err(Error::DuplicateQubit(q));
                }
            }
        }
        Ok(())
    }

    /// Expands register-level kinds into elementary gates. The expansion
    /// inherits this gate's controls and condition.
    pub fn decompose(&self) -> Vec<Gate> {
        let elementary = match self.kind {
            GateKind::Qft => qft_gates(&self.targets),
            GateKind::Iqft => Circuit::from(qft_gates(&self.targets)).inverse().0,
            _ => return vec![self.clone()],
        };
        elementary
            .into_iter()
            .map(|mut g| {
                g.controls.extend_from_slice(&self.controls);
                g.condition = self.condition.clone();
                g
            })
            .collect()
    }
}

/// Textbook QFT: `|j⟩ ↦ 2^{-m/2} Σ_k e^{2πi jk/2^m} |k⟩` with `register[0]`
/// as the most significant bit, built from H, controlled phases and swaps.
fn qft_gates(register: &[usize]) -> Vec<Gate> {
    let m = register.len();
    let mut gates = Vec::with_capacity(m * (m + 1) / 2 + m / 2);
    for i in 0..m {
        gates.push(Gate::h(register[i]));
        for j in (i + 1)..m {
            let theta = 2.0 * PI / (1u64 << (j - i + 1)) as f64;
            gates.push(Gate::phase(register[i], theta).with_control(register[j]));
        }
    }
    for i in 0..m / 2 {
        gates.push(Gate::swap(register[i], register[m - 1 - i]));
    }
    gates
}

/// Ordered gate list.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit(pub Vec<Gate>);

impl Circuit {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn push(&mut self, gate: Gate) {
        self.0.push(gate);
    }

    pub fn extend(&mut self, other: Circuit) {
        self.0.extend(other.0);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.0
    }

    /// Reversed list of inverted gates.
    pub fn inverse(&self) -> Circuit {
        Circuit(self.0.iter().rev().map(Gate::inverse).collect())
    }

    /// Adds `control` to every gate.
    pub fn controlled_by(mut self, control: usize) -> Circuit {
        for g in &mut self.0 {
            g.controls.push(control);
        }
        self
    }
}

impl From<Vec<Gate>> for Circuit {
    fn from(gates: Vec<Gate>) -> Self {
        Circuit(gates)
    }
}

impl IntoIterator for Circuit {
    type Item = Gate;
    type IntoIter = std::vec::IntoIter<Gate>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}
