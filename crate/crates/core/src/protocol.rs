//! Parties, channel accounting and the four end-to-end protocols.
//!
//! A [`Session`] is the phase oracle handed to the counting layer. Each
//! Grover application it emits the gates of every party in order, moving
//! the index register and `o1` between parties and checking that every
//! gate only touches qubits its party currently holds. The counting
//! control qubit is exempt from that check: every gate of a round carries
//! it, including client gates (see [`ControlPolicy`]).
//!
//! Work qubit roles, in layout order after the counting register:
//!
//! | variant      | work qubits                                   |
//! |--------------|-----------------------------------------------|
//! | baseline     | `o1` (S), `o2` (C1)                           |
//! | blind-server | `o1` (S), `o2` (C1), `o3` (C1)                |
//! | blind-client | `o1` (S), `o2` (C1), `oa` (S)                 |
//! | multiparty   | `o1` (S), `o2` per client, optional `o3` (C1) |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counting::{self, CountingConfig, CountingLayout, EstimateResult, PhaseOracle};
use crate::error::{Error, Result};
use crate::oracle::{self, BasisAssignment, Bitstring, CorrelationMode, OracleName, PadRule};
use crate::sim::{qubit_cap, Circuit, Gate, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Party {
    Server,
    Client(usize),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Server => f.write_str("S"),
            Party::Client(k) => write!(f, "C{k}"),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" => Ok(Party::Server),
            _ => s
                .strip_prefix('C')
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 1)
                .map(Party::Client)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown party {s:?}"))),
        }
    }
}

impl From<Party> for String {
    fn from(p: Party) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Party {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Baseline,
    BlindServer,
    BlindClient,
    Multiparty,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Baseline,
        Variant::BlindServer,
        Variant::BlindClient,
        Variant::Multiparty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::BlindServer => "blind-server",
            Variant::BlindClient => "blind-client",
            Variant::Multiparty => "multiparty",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown protocol variant {s:?}")))
    }
}

/// Which gates of a round carry the counting control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlPolicy {
    /// Every gate, client gates included.
    AllGates,
    /// Server gates only. Correct for the AND-mode baseline, where an
    /// uncomputed `o1` makes the client sandwich act trivially, but not for
    /// pads or XOR mode.
    ServerGatesOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PadSchedule {
    /// One `g` for the whole counting execution; exact recovery.
    PerExecution,
    /// Fresh `g` every Grover application; recovery subtracts the mean pad.
    PerRound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolOptions {
    pub mode: CorrelationMode,
    pub control: ControlPolicy,
    pub pad_schedule: PadSchedule,
    /// Fixes the blind-server pad instead of drawing it.
    pub fixed_g: Option<Bitstring>,
    /// Fixes the blind-client bases for every round.
    pub fixed_bases: Option<Bitstring>,
    /// Fixes the blind-client `h` pad for every round.
    pub fixed_h: Option<Bitstring>,
    /// Blind-server client reveals `Σg` to the server after the run.
    pub disclose_pad_sum: bool,
    /// First multiparty client adds a uniform phase pad. The pad mixes
    /// into the parity mod 2, so the true value is then not recoverable.
    pub multiparty_pad: bool,
    pub max_qubits: usize,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            mode: CorrelationMode::And,
            control: ControlPolicy::AllGates,
            pad_schedule: PadSchedule::PerExecution,
            fixed_g: None,
            fixed_bases: None,
            fixed_h: None,
            disclose_pad_sum: false,
            multiparty_pad: false,
            max_qubits: qubit_cap(),
        }
    }
}

/// Current holder of every qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnershipMap {
    owners: Vec<Party>,
}

impl OwnershipMap {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            owners: vec![Party::Server; num_qubits],
        }
    }

    pub fn assign(&mut self, qubit: usize, party: Party) {
        self.owners[qubit] = party;
    }

    pub fn owner(&self, qubit: usize) -> Party {
        self.owners[qubit]
    }

    pub fn transfer(&mut self, qubits: &[usize], from: Party, to: Party) -> Result<()> {
        for &q in qubits {
            self.require(from, q)?;
        }
        for &q in qubits {
            self.owners[q] = to;
        }
        Ok(())
    }

    fn require(&self, party: Party, qubit: usize) -> Result<()> {
        let owner = *self.owners.get(qubit).ok_or(Error::QubitOutOfRange {
            qubit,
            num_qubits: self.owners.len(),
        })?;
        if owner != party {
            return Err(Error::OwnershipViolation {
                party: party.to_string(),
                owner: owner.to_string(),
                qubit,
            });
        }
        Ok(())
    }

    /// Every qubit `gate` touches must belong to `party`, except `exempt`.
    pub fn check_gate(&self, party: Party, gate: &Gate, exempt: Option<usize>) -> Result<()> {
        gate.qubits()
            .filter(|&q| Some(q) != exempt)
            .try_for_each(|q| self.require(party, q))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLedger {
    pub quantum_qubits_sent: u64,
    pub classical_bits_sent: u64,
    pub oracle_calls: BTreeMap<OracleName, u64>,
    pub grover_rounds: u64,
}

impl ChannelLedger {
    pub fn calls(&self, name: OracleName) -> u64 {
        self.oracle_calls.get(&name).copied().unwrap_or(0)
    }

    /// `U_x` plus `U_y` calls.
    pub fn data_oracle_calls(&self) -> u64 {
        self.calls(OracleName::Ux) + self.calls(OracleName::Uy)
    }

    pub fn total_oracle_calls(&self) -> u64 {
        self.oracle_calls.values().sum()
    }

    fn record(&mut self, name: OracleName, count: u64) {
        *self.oracle_calls.entry(name).or_insert(0) += count;
    }
}

/// One channel use: a quantum hop of `qubits` or a classical message of
/// `classical_bits`, with the oracle calls made since the previous record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub round: u64,
    pub from: Party,
    pub to: Party,
    pub qubits: usize,
    pub classical_bits: u64,
    pub oracle_calls: u64,
}

impl TranscriptRecord {
    pub fn to_line(&self) -> String {
        format!(
            "round={} hop={}->{} qubits={} bits={} oracle_calls={}",
            self.round, self.from, self.to, self.qubits, self.classical_bits, self.oracle_calls
        )
    }
}

pub fn export_transcript(records: &[TranscriptRecord]) -> String {
    records.iter().map(|r| r.to_line() + "\n").collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub variant: Variant,
    pub mode: CorrelationMode,
    /// Vector length before padding to `2^n`.
    pub n_items: usize,
    pub n: usize,
    pub t: u32,
    pub m: usize,
    pub result: EstimateResult,
    /// Mean over the true `N` as measured by the server (padded for blind-server).
    pub server_estimate: f64,
    /// Client-side estimate of the target quantity after any pad recovery.
    /// `None` when the pad cannot be removed.
    pub estimate: Option<f64>,
    pub truth: f64,
    /// `(Σ x_i y_i + Σ g_i)/N` for padded runs.
    pub server_view_truth: Option<f64>,
    pub pad_sum: Option<f64>,
    pub ledger: ChannelLedger,
    pub transcript: Vec<TranscriptRecord>,
}

/// One protocol execution in progress. Implements [`PhaseOracle`]; drive it
/// through [`Session::evolve`], [`Session::distribution`] or [`Session::run`].
pub struct Session {
    variant: Variant,
    opts: ProtocolOptions,
    n_items: usize,
    cfg: CountingConfig,
    x: Bitstring,
    ys: Vec<Bitstring>,
    rng: ChaCha8Rng,
    g: Option<Bitstring>,
    pad_sums: Vec<usize>,
    ownership: OwnershipMap,
    ledger: ChannelLedger,
    transcript: Vec<TranscriptRecord>,
    calls_since_record: u64,
    started: bool,
}

fn pad_to(b: &Bitstring, size: usize) -> Bitstring {
    let mut bits = b.bits().to_vec();
    bits.resize(size, false);
    Bitstring::new(bits)
}

impl Session {
    pub fn new(
        variant: Variant,
        x: &Bitstring,
        ys: &[Bitstring],
        t: u32,
        opts: ProtocolOptions,
        seed: u64,
    ) -> Result<Self> {
        let n_items = x.len();
        if n_items == 0 {
            return Err(Error::InvalidParameter("empty input vectors".into()));
        }
        if let Some(y) = ys.iter().find(|y| y.len() != n_items) {
            return Err(Error::WidthMismatch {
                what: "y",
                expected: n_items,
                got: y.len(),
            });
        }
        match (variant, ys.len()) {
            (Variant::Multiparty, m) if m < 2 => {
                return Err(Error::InvalidParameter(format!("multiparty needs m ≥ 2 clients, got {m}")))
            }
            (Variant::Multiparty, _) | (_, 1) => {}
            (_, m) => {
                return Err(Error::InvalidParameter(format!("{variant} takes one client vector, got {m}")))
            }
        }
        if opts.mode == CorrelationMode::Xor && matches!(variant, Variant::BlindServer | Variant::BlindClient) {
            return Err(Error::InvalidParameter(format!("{variant} supports AND mode only")));
        }
        let n = oracle::index_width(n_items);
        let cfg = CountingConfig::new(n, t)?;
        let size = 1usize << n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let g = match variant {
            Variant::BlindServer => Some(match &opts.fixed_g {
                Some(g) => {
                    if g.len() != n_items {
                        return Err(Error::WidthMismatch {
                            what: "g",
                            expected: n_items,
                            got: g.len(),
                        });
                    }
                    if g.and_count(&ys[0]) != 0 {
                        return Err(Error::InvalidParameter("g must be zero wherever y is one".into()));
                    }
                    pad_to(g, size)
                }
                None => pad_to(&oracle::gen_pad(PadRule::BlindServerG, &ys[0], &mut rng), size),
            }),
            Variant::Multiparty if opts.multiparty_pad => {
                Some(pad_to(&oracle::gen_pad(PadRule::BlindClientH, &ys[0], &mut rng), size))
            }
            _ => None,
        };
        for (what, fixed) in [("bases", &opts.fixed_bases), ("h", &opts.fixed_h)] {
            if let Some(b) = fixed {
                if b.len() != n_items && b.len() != size {
                    return Err(Error::WidthMismatch {
                        what,
                        expected: size,
                        got: b.len(),
                    });
                }
            }
        }

        let mut session = Self {
            variant,
            opts,
            n_items,
            cfg,
            x: pad_to(x, size),
            ys: ys.iter().map(|y| pad_to(y, size)).collect(),
            rng,
            g,
            pad_sums: Vec::new(),
            ownership: OwnershipMap::new(0),
            ledger: ChannelLedger::default(),
            transcript: Vec::new(),
            calls_since_record: 0,
            started: false,
        };
        let layout = CountingLayout::new(cfg, session.work_qubits());
        session.ownership = session.initial_ownership(&layout);
        Ok(session)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn config(&self) -> CountingConfig {
        self.cfg
    }

    pub fn m(&self) -> usize {
        self.ys.len()
    }

    pub fn layout(&self) -> CountingLayout {
        CountingLayout::new(self.cfg, self.work_qubits())
    }

    pub fn ledger(&self) -> &ChannelLedger {
        &self.ledger
    }

    pub fn transcript(&self) -> &[TranscriptRecord] {
        &self.transcript
    }

    pub fn ownership(&self) -> &OwnershipMap {
        &self.ownership
    }

    /// Current blind-server or multiparty pad, zero-extended to `2^n`.
    pub fn pad(&self) -> Option<&Bitstring> {
        self.g.as_ref()
    }

    fn has_o3(&self) -> bool {
        self.g.is_some()
    }

    fn o3(&self, layout: &CountingLayout) -> usize {
        layout.work_qubit(self.ys.len() + 1)
    }

    fn initial_ownership(&self, layout: &CountingLayout) -> OwnershipMap {
        let mut own = OwnershipMap::new(layout.total_qubits());
        for k in 1..=self.ys.len() {
            own.assign(layout.work_qubit(k), Party::Client(k));
        }
        if self.has_o3() {
            own.assign(self.o3(layout), Party::Client(1));
        }
        own
    }

    fn emit(
        &mut self,
        out: &mut Circuit,
        party: Party,
        gates: Circuit,
        control: usize,
        calls: &[(OracleName, u64)],
    ) -> Result<()> {
        let gates = match (self.opts.control, party) {
            (ControlPolicy::ServerGatesOnly, Party::Client(_)) => gates,
            _ => gates.controlled_by(control),
        };
        for g in gates.gates() {
            self.ownership.check_gate(party, g, Some(control))?;
        }
        out.extend(gates);
        for &(name, count) in calls {
            self.ledger.record(name, count);
            self.calls_since_record += count;
        }
        Ok(())
    }

    fn hop(&mut self, round: u64, from: Party, to: Party, block: &[usize]) -> Result<()> {
        self.ownership.transfer(block, from, to)?;
        self.ledger.quantum_qubits_sent += block.len() as u64;
        self.transcript.push(TranscriptRecord {
            round,
            from,
            to,
            qubits: block.len(),
            classical_bits: 0,
            oracle_calls: std::mem::take(&mut self.calls_since_record),
        });
        Ok(())
    }

    fn message(&mut self, from: Party, to: Party, bits: u64) {
        self.ledger.classical_bits_sent += bits;
        self.transcript.push(TranscriptRecord {
            round: self.ledger.grover_rounds,
            from,
            to,
            qubits: 0,
            classical_bits: bits,
            oracle_calls: std::mem::take(&mut self.calls_since_record),
        });
    }

    /// Client `k`'s sandwich `U_y, correlation, U_y`, plus client 1's pad.
    fn client_sandwich(&mut self, out: &mut Circuit, layout: &CountingLayout, k: usize, control: usize) -> Result<()> {
        let reg = layout.index_reg();
        let (o1, o2) = (layout.work_qubit(0), layout.work_qubit(k));
        let party = Party::Client(k);
        let uy = oracle::data_oracle(&reg, o2, &self.ys[k - 1])?;
        let mode = self.opts.mode;
        self.emit(out, party, uy.clone(), control, &[(OracleName::Uy, 1)])?;
        self.emit(out, party, oracle::correlation_gate(o1, o2, mode)?, control, &[])?;
        if k == 1 && self.variant != Variant::BlindClient {
            if let Some(g) = self.g.clone() {
                let pad = oracle::phase_pad(&reg, self.o3(layout), &g)?;
                self.emit(out, party, pad, control, &[(OracleName::Ug, 2)])?;
            }
        }
        self.emit(out, party, uy, control, &[(OracleName::Uy, 1)])
    }

    fn draw_round_pads(&mut self, size: usize, round: u64) -> (BasisAssignment, Bitstring) {
        let bases = match &self.opts.fixed_bases {
            Some(b) => BasisAssignment::fixed(pad_to(b, size), round),
            None => BasisAssignment::draw(size, round, &mut self.rng),
        };
        let h = match &self.opts.fixed_h {
            Some(h) => pad_to(h, size),
            None => Bitstring::random(size, &mut self.rng),
        };
        (bases, h)
    }

    fn refresh_pad(&mut self) {
        if self.variant == Variant::BlindServer
            && self.opts.pad_schedule == PadSchedule::PerRound
            && self.opts.fixed_g.is_none()
        {
            let g = oracle::gen_pad(PadRule::BlindServerG, &self.ys[0], &mut self.rng);
            let size = self.x.len();
            let mut bits = g.bits()[..self.n_items].to_vec();
            bits.resize(size, false);
            self.g = Some(Bitstring::new(bits));
        }
        if let Some(g) = &self.g {
            self.pad_sums.push(g.weight());
        }
    }

    fn check_fresh(&mut self) -> Result<()> {
        if self.started {
            return Err(Error::InvalidParameter("session already executed".into()));
        }
        self.started = true;
        Ok(())
    }

    /// Runs the counting evolution; `observe` sees the state after every
    /// oracle call.
    pub fn evolve<F>(&mut self, observe: F) -> Result<(CountingLayout, StateVector)>
    where
        F: FnMut(u64, &StateVector) -> Result<()>,
    {
        self.check_fresh()?;
        let cap = self.opts.max_qubits;
        let cfg = self.cfg;
        let out = counting::evolve(cfg, self, cap, observe)?;
        self.finish_channel();
        Ok(out)
    }

    /// Exact counting-register distribution of this execution.
    pub fn distribution(&mut self) -> Result<Vec<f64>> {
        let (layout, state) = self.evolve(|_, _| Ok(()))?;
        state.outcome_distribution(&layout.t_reg())
    }

    fn finish_channel(&mut self) {
        self.message(Party::Server, Party::Client(1), self.cfg.t as u64);
        if self.variant == Variant::BlindServer && self.opts.disclose_pad_sum {
            self.message(Party::Client(1), Party::Server, disclosure_bits(self.n_items));
        }
    }

    /// Mean pad weight over the execution's rounds.
    pub fn pad_sum(&self) -> Option<f64> {
        if self.pad_sums.is_empty() {
            return None;
        }
        Some(self.pad_sums.iter().sum::<usize>() as f64 / self.pad_sums.len() as f64)
    }

    /// Simulates the execution and samples the counting register once.
    pub fn run<R: Rng + ?Sized>(mut self, rng: &mut R) -> Result<ProtocolRun> {
        let (layout, mut state) = self.evolve(|_, _| Ok(()))?;
        let j = state.measure_register(&layout.t_reg(), rng)? as u64;
        let result = EstimateResult::from_outcome(j, self.cfg.t)?;
        Ok(self.into_run(result))
    }

    fn into_run(self, result: EstimateResult) -> ProtocolRun {
        let big_n = self.n_items as f64;
        let scale = self.x.len() as f64 / big_n;
        let server_estimate = result.estimate * scale;
        let truth = truth(&self.x, &self.ys, self.opts.mode, self.n_items);
        let pad_sum = self.pad_sum();
        let (estimate, server_view_truth) = match (self.variant, pad_sum) {
            (Variant::BlindServer, Some(s)) => (Some(server_estimate - s / big_n), Some(truth + s / big_n)),
            (Variant::Multiparty, Some(_)) => {
                let g = self.g.as_ref().expect("pad present");
                let padded = (0..self.n_items)
                    .filter(|&i| parity(&self.x, &self.ys, self.opts.mode, i) ^ g.get(i))
                    .count() as f64;
                (None, Some(padded / big_n))
            }
            _ => (Some(server_estimate), None),
        };
        ProtocolRun {
            variant: self.variant,
            mode: self.opts.mode,
            n_items: self.n_items,
            n: self.cfg.n,
            t: self.cfg.t,
            m: self.ys.len(),
            result,
            server_estimate,
            estimate,
            truth,
            server_view_truth,
            pad_sum,
            ledger: self.ledger,
            transcript: self.transcript,
        }
    }
}

impl PhaseOracle for Session {
    fn work_qubits(&self) -> usize {
        let extra = match self.variant {
            Variant::BlindClient => 1,
            _ => usize::from(self.has_o3()),
        };
        1 + self.ys.len() + extra
    }

    fn circuit(&mut self, layout: &CountingLayout, control: usize, round: u64) -> Result<Circuit> {
        self.refresh_pad();
        let reg = layout.index_reg();
        let o1 = layout.work_qubit(0);
        let block: Vec<usize> = reg.iter().copied().chain([o1]).collect();
        let mut c = Circuit::new();
        let s = Party::Server;
        let c1 = Party::Client(1);
        match self.variant {
            Variant::Baseline | Variant::BlindServer | Variant::Multiparty => {
                let ux = oracle::data_oracle(&reg, o1, &self.x)?;
                self.emit(&mut c, s, ux.clone(), control, &[(OracleName::Ux, 1)])?;
                let mut at = s;
                for k in 1..=self.ys.len() {
                    self.hop(round, at, Party::Client(k), &block)?;
                    self.client_sandwich(&mut c, layout, k, control)?;
                    at = Party::Client(k);
                }
                self.hop(round, at, s, &block)?;
                self.emit(&mut c, s, ux, control, &[(OracleName::Ux, 1)])?;
            }
            Variant::BlindClient => {
                let oa = layout.work_qubit(2);
                let (bases, h) = self.draw_round_pads(self.x.len(), round);
                let x = self.x.clone();
                self.emit(&mut c, s, oracle::ux1(&reg, o1, &x, &bases)?, control, &[(OracleName::Ux1, 1)])?;
                self.hop(round, s, c1, &block)?;
                self.client_sandwich(&mut c, layout, 1, control)?;
                self.hop(round, c1, s, &block)?;
                let ux2 = oracle::ux2(&reg, o1, oa, &x, &bases)?;
                self.emit(&mut c, s, ux2, control, &[(OracleName::Ux2, 1), (OracleName::Ux, 2)])?;
                self.emit(&mut c, s, oracle::ux3(&reg, oa, &h)?, control, &[(OracleName::Ux3, 1)])?;
                self.hop(round, s, c1, &block)?;
                self.client_sandwich(&mut c, layout, 1, control)?;
                self.hop(round, c1, s, &block)?;
                let ux4 = oracle::ux4(&reg, o1, oa, &x, &bases, &h)?;
                self.emit(&mut c, s, ux4, control, &[(OracleName::Ux4, 1)])?;
            }
        }
        self.ledger.grover_rounds += 1;
        Ok(c)
    }
}

/// Bits needed to disclose a pad sum in `[0, N]`.
pub fn disclosure_bits(n_items: usize) -> u64 {
    (usize::BITS - n_items.leading_zeros()) as u64
}

fn parity(x: &Bitstring, ys: &[Bitstring], mode: CorrelationMode, i: usize) -> bool {
    ys.iter().fold(false, |acc, y| acc ^ mode.combine(x.get(i), y.get(i)))
}

/// `(1/N) Σ_i (Σ_k x_i ∘ y_i^{(k)} mod 2)`; the plain mean for one client.
pub fn truth(x: &Bitstring, ys: &[Bitstring], mode: CorrelationMode, n_items: usize) -> f64 {
    (0..n_items).filter(|&i| parity(x, ys, mode, i)).count() as f64 / n_items as f64
}

pub fn run_protocol<R: Rng + ?Sized>(
    variant: Variant,
    x: &Bitstring,
    ys: &[Bitstring],
    t: u32,
    opts: ProtocolOptions,
    rng: &mut R,
) -> Result<ProtocolRun> {
    let seed = rng.random::<u64>();
    Session::new(variant, x, ys, t, opts, seed)?.run(rng)
}

/// Exact counting-register distribution for one execution whose pads are
/// drawn from `seed`.
pub fn protocol_distribution(
    variant: Variant,
    x: &Bitstring,
    ys: &[Bitstring],
    t: u32,
    opts: ProtocolOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    Session::new(variant, x, ys, t, opts, seed)?.distribution()
}

pub fn run_qbc_baseline<R: Rng + ?Sized>(
    x: &Bitstring,
    y: &Bitstring,
    t: u32,
    mode: CorrelationMode,
    rng: &mut R,
) -> Result<ProtocolRun> {
    let opts = ProtocolOptions {
        mode,
        ..ProtocolOptions::default()
    };
    run_protocol(Variant::Baseline, x, std::slice::from_ref(y), t, opts, rng)
}

pub fn run_blind_server<R: Rng + ?Sized>(x: &Bitstring, y: &Bitstring, t: u32, rng: &mut R) -> Result<ProtocolRun> {
    run_protocol(Variant::BlindServer, x, std::slice::from_ref(y), t, ProtocolOptions::default(), rng)
}

pub fn run_blind_client<R: Rng + ?Sized>(x: &Bitstring, y: &Bitstring, t: u32, rng: &mut R) -> Result<ProtocolRun> {
    run_protocol(Variant::BlindClient, x, std::slice::from_ref(y), t, ProtocolOptions::default(), rng)
}

pub fn run_multiparty<R: Rng + ?Sized>(x: &Bitstring, ys: &[Bitstring], t: u32, rng: &mut R) -> Result<ProtocolRun> {
    run_protocol(Variant::Multiparty, x, ys, t, ProtocolOptions::default(), rng)
}

/// Closed-form ledger for default options.
pub fn expected_ledger(variant: Variant, n: usize, t: u32, m: usize) -> Result<ChannelLedger> {
    expected_ledger_with(variant, 1usize << n, t, m, &ProtocolOptions::default())
}

/// Closed-form ledger for a run over `n_items` entries.
pub fn expected_ledger_with(
    variant: Variant,
    n_items: usize,
    t: u32,
    m: usize,
    opts: &ProtocolOptions,
) -> Result<ChannelLedger> {
    let n = oracle::index_width(n_items) as u64;
    let cfg = CountingConfig::new(n as usize, t)?;
    let rounds = cfg.grover_applications();
    let m = match variant {
        Variant::Multiparty if m < 2 => {
            return Err(Error::InvalidParameter(format!("multiparty needs m ≥ 2 clients, got {m}")))
        }
        Variant::Multiparty => m as u64,
        _ => 1,
    };
    let block = n + 1;
    let mut ledger = ChannelLedger {
        grover_rounds: rounds,
        classical_bits_sent: t as u64,
        ..ChannelLedger::default()
    };
    let calls: Vec<(OracleName, u64)> = match variant {
        Variant::Baseline => {
            ledger.quantum_qubits_sent = 2 * block * rounds;
            vec![(OracleName::Ux, 2), (OracleName::Uy, 2)]
        }
        Variant::BlindServer => {
            ledger.quantum_qubits_sent = 2 * block * rounds;
            if opts.disclose_pad_sum {
                ledger.classical_bits_sent += disclosure_bits(n_items);
            }
            vec![(OracleName::Ux, 2), (OracleName::Uy, 2), (OracleName::Ug, 2)]
        }
        Variant::BlindClient => {
            ledger.quantum_qubits_sent = 4 * block * rounds;
            vec![
                (OracleName::Ux, 2),
                (OracleName::Uy, 4),
                (OracleName::Ux1, 1),
                (OracleName::Ux2, 1),
                (OracleName::Ux3, 1),
                (OracleName::Ux4, 1),
            ]
        }
        Variant::Multiparty => {
            ledger.quantum_qubits_sent = (m + 1) * block * rounds;
            let mut v = vec![(OracleName::Ux, 2), (OracleName::Uy, 2 * m)];
            if opts.multiparty_pad {
                v.push((OracleName::Ug, 2));
            }
            v
        }
    };
    for (name, per_round) in calls {
        ledger.record(name, per_round * rounds);
    }
    Ok(ledger)
}
