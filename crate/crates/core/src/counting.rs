//! Quantum counting over an arbitrary phase oracle.
//!
//! The Grover operator is `Ĝ = H^{⊗n}(2|0⟩⟨0| − I)H^{⊗n} · Û`. Phase
//! estimation drives controlled powers of `Ĝ` by repetition, so an
//! execution makes exactly `2^t − 1` oracle calls, and finishes with an
//! inverse QFT on the counting register.
//!
//! Qubit layout: index register `[0, n)`, counting register `[n, n + t)`
//! (most significant first), then the oracle's work qubits.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{self, Bitstring, CorrelationMode};
use crate::sim::{check_qubit_cap, Circuit, Gate, StateVector};

/// Work-qubit leakage tolerated after each Grover application.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingConfig {
    /// Index register width.
    pub n: usize,
    /// Counting register width.
    pub t: u32,
}

impl CountingConfig {
    pub fn new(n: usize, t: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("index width n must be at least 1".into()));
        }
        if t == 0 || t > 30 {
            return Err(Error::InvalidParameter(format!("counting width t={t} outside 1..=30")));
        }
        Ok(Self { n, t })
    }

    pub fn grover_applications(&self) -> u64 {
        (1u64 << self.t) - 1
    }
}

/// Concrete qubit positions for one counting execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingLayout {
    pub n: usize,
    pub t: u32,
    pub work: usize,
}

impl CountingLayout {
    pub fn new(cfg: CountingConfig, work: usize) -> Self {
        Self {
            n: cfg.n,
            t: cfg.t,
            work,
        }
    }

    pub fn index_reg(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn t_reg(&self) -> Vec<usize> {
        (self.n..self.n + self.t as usize).collect()
    }

    pub fn work_qubit(&self, k: usize) -> usize {
        assert!(k < self.work, "work qubit {k} of {}", self.work);
        self.n + self.t as usize + k
    }

    pub fn work_reg(&self) -> Vec<usize> {
        (0..self.work).map(|k| self.work_qubit(k)).collect()
    }

    pub fn total_qubits(&self) -> usize {
        self.n + self.t as usize + self.work
    }
}

/// A phase oracle `Û|i⟩|0…0⟩ = (−1)^{f(i)}|i⟩|0…0⟩` expressed as gates.
///
/// `circuit` is called once per Grover application, in order, and must
/// return gates already conditioned on `control`. Implementations may keep
/// per-round state (fresh pads, ledgers).
pub trait PhaseOracle {
    fn work_qubits(&self) -> usize;

    fn circuit(&mut self, layout: &CountingLayout, control: usize, round: u64) -> Result<Circuit>;
}

/// `(−1)^{f_i}` from a single bitstring, via one ancilla.
#[derive(Clone, Debug)]
pub struct BitOracle {
    pub f: Bitstring,
}

impl PhaseOracle for BitOracle {
    fn work_qubits(&self) -> usize {
        1
    }

    fn circuit(&mut self, layout: &CountingLayout, control: usize, _round: u64) -> Result<Circuit> {
        Ok(oracle::phase_pad(&layout.index_reg(), layout.work_qubit(0), &self.f)?.controlled_by(control))
    }
}

/// `(−1)^{x_i ∘ y_i}` built from both data oracles and the correlation gate,
/// without any party bookkeeping.
#[derive(Clone, Debug)]
pub struct XyOracle {
    pub x: Bitstring,
    pub y: Bitstring,
    pub mode: CorrelationMode,
}

impl PhaseOracle for XyOracle {
    fn work_qubits(&self) -> usize {
        2
    }

    fn circuit(&mut self, layout: &CountingLayout, control: usize, _round: u64) -> Result<Circuit> {
        let reg = layout.index_reg();
        let (o1, o2) = (layout.work_qubit(0), layout.work_qubit(1));
        let ux = oracle::data_oracle(&reg, o1, &self.x)?;
        let uy = oracle::data_oracle(&reg, o2, &self.y)?;
        let mut c = ux.clone();
        c.extend(uy.clone());
        c.extend(oracle::correlation_gate(o1, o2, self.mode)?);
        c.extend(uy);
        c.extend(ux);
        Ok(c.controlled_by(control))
    }
}

/// Counting-register qubit controlling each Grover application, in order:
/// `t_reg[l]` controls `2^{t−1−l}` consecutive applications.
pub fn grover_schedule(layout: &CountingLayout) -> Vec<usize> {
    let t = layout.t as usize;
    layout
        .t_reg()
        .into_iter()
        .enumerate()
        .flat_map(|(l, q)| std::iter::repeat_n(q, 1usize << (t - 1 - l)))
        .collect()
}

/// `H^{⊗n}(2|0⟩⟨0| − I)H^{⊗n}` on the index register, conditioned on `control`.
pub fn diffusion(layout: &CountingLayout, control: usize) -> Circuit {
    let reg = layout.index_reg();
    let mut c = Circuit::new();
    for &q in &reg {
        c.push(Gate::h(q).with_control(control));
    }
    c.push(Gate::reflect_about_zero(&reg).with_control(control));
    for &q in &reg {
        c.push(Gate::h(q).with_control(control));
    }
    c
}

fn preparation(layout: &CountingLayout) -> Circuit {
    layout
        .index_reg()
        .into_iter()
        .chain(layout.t_reg())
        .map(Gate::h)
        .collect::<Vec<_>>()
        .into()
}

/// Full gate list: Hadamards on index and counting registers, `2^t − 1`
/// controlled Grover applications, inverse QFT.
pub fn build_counting_circuit<O: PhaseOracle + ?Sized>(cfg: CountingConfig, oracle: &mut O) -> Result<Circuit> {
    let layout = CountingLayout::new(cfg, oracle.work_qubits());
    let mut c = preparation(&layout);
    for (round, control) in grover_schedule(&layout).into_iter().enumerate() {
        let u = oracle.circuit(&layout, control, round as u64)?;
        check_width(&u, &layout)?;
        c.extend(u);
        c.extend(diffusion(&layout, control));
    }
    c.push(Gate::iqft(&layout.t_reg()));
    Ok(c)
}

fn check_width(c: &Circuit, layout: &CountingLayout) -> Result<()> {
    let total = layout.total_qubits();
    for g in c.gates() {
        if let Some(q) = g.qubits().find(|&q| q >= total) {
            return Err(Error::WidthMismatch {
                what: "oracle circuit",
                expected: total,
                got: q + 1,
            });
        }
    }
    Ok(())
}

/// Simulates a counting execution up to (not including) the readout.
/// `observe` sees the state after every oracle call, before diffusion.
pub fn evolve<O, F>(cfg: CountingConfig, oracle: &mut O, cap: usize, mut observe: F) -> Result<(CountingLayout, StateVector)>
where
    O: PhaseOracle + ?Sized,
    F: FnMut(u64, &StateVector) -> Result<()>,
{
    let layout = CountingLayout::new(cfg, oracle.work_qubits());
    check_qubit_cap(layout.total_qubits(), cap)?;
    let mut state = StateVector::new(layout.total_qubits());
    state.apply_circuit(&preparation(&layout))?;
    let work = layout.work_reg();
    for (round, control) in grover_schedule(&layout).into_iter().enumerate() {
        let round = round as u64;
        let u = oracle.circuit(&layout, control, round)?;
        check_width(&u, &layout)?;
        state.apply_circuit(&u)?;
        if !work.is_empty() {
            let leak = state.leakage(&work)?;
            if leak > LEAKAGE_TOLERANCE {
                return Err(Error::WorkQubitLeakage(leak));
            }
        }
        observe(round, &state)?;
        state.apply_circuit(&diffusion(&layout, control))?;
    }
    state.apply(&Gate::iqft(&layout.t_reg()))?;
    Ok((layout, state))
}

/// Exact Born distribution of the counting register.
pub fn counting_distribution<O: PhaseOracle + ?Sized>(cfg: CountingConfig, oracle: &mut O, cap: usize) -> Result<Vec<f64>> {
    let (layout, state) = evolve(cfg, oracle, cap, |_, _| Ok(()))?;
    state.outcome_distribution(&layout.t_reg())
}

/// Simulates one execution and samples `j` once.
pub fn run_counting<O, R>(cfg: CountingConfig, oracle: &mut O, cap: usize, rng: &mut R) -> Result<EstimateResult>
where
    O: PhaseOracle + ?Sized,
    R: Rng + ?Sized,
{
    let (layout, mut state) = evolve(cfg, oracle, cap, |_, _| Ok(()))?;
    let j = state.measure_register(&layout.t_reg(), rng)? as u64;
    EstimateResult::from_outcome(j, cfg.t)
}

/// Draws `j` from an exact distribution.
pub fn sample_outcome<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return j as u64;
        }
    }
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub j: u64,
    pub t: u32,
    pub theta_hat: f64,
    /// `sin²(πj/2^t)`, an estimate of the (padded) mean.
    pub estimate: f64,
    /// `Δθ̂ = 2^{−t+1}` radians.
    pub std_bound: f64,
    pub grover_applications: u64,
}

impl EstimateResult {
    pub fn from_outcome(j: u64, t: u32) -> Result<Self> {
        let (theta_hat, estimate) = estimate_from_outcome(j, t)?;
        Ok(Self {
            j,
            t,
            theta_hat,
            estimate,
            std_bound: 2f64.powi(1 - t as i32),
            grover_applications: (1u64 << t) - 1,
        })
    }
}

/// `(θ̂, sin²(θ̂/2))` with `θ̂ = 2πj/2^t`. Outcomes `j` and `2^t − j` give
/// the same estimate.
pub fn estimate_from_outcome(j: u64, t: u32) -> Result<(f64, f64)> {
    if t == 0 || t > 62 || j >= 1u64 << t {
        return Err(Error::OutcomeOutOfRange { j, t });
    }
    let frac = j as f64 / (1u64 << t) as f64;
    let s = (PI * frac).sin();
    Ok((2.0 * PI * frac, s * s))
}

/// `θ = 2 arcsin √a` for a mean `a ∈ [0, 1]`.
pub fn theta_from_mean(a: f64) -> f64 {
    2.0 * a.clamp(0.0, 1.0).sqrt().asin()
}

/// The two outcomes bracketing `2^tθ/2π` and their mirrors `2^t − j`,
/// deduplicated and sorted.
pub fn nearest_outcomes(theta: f64, t: u32) -> Vec<u64> {
    let size = 1u64 << t;
    let x = size as f64 * theta / (2.0 * PI);
    let lo = x.floor() as u64;
    let mut out: Vec<u64> = [lo, lo + 1]
        .into_iter()
        .flat_map(|j| [j % size, (size - j % size) % size])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Worst-case estimate spread between the two bracketing outcomes, plus
/// `2·2^{−t}` slack.
pub fn modal_error_bound(theta: f64, t: u32) -> f64 {
    let size = (1u64 << t) as f64;
    let lo = (size * theta / (2.0 * PI)).floor();
    let s = |j: f64| (PI * j / size).sin().powi(2);
    (s(lo + 1.0) - s(lo)).abs() + 2.0 / size
}
