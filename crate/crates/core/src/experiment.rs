//! Batch runs, bit-plane regression, privacy tables and ledger checks.
//!
//! Seeding: the master seed keys one ChaCha8 generator per purpose, told
//! apart by stream number. Stream 0 generates random inputs, stream `i + 1`
//! drives trial `i`, so a trial's record does not depend on how many
//! threads ran or in what order they finished.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{self, RedundancyRule, RedundantEncoding};
use crate::error::{Error, Result};
use crate::oracle::{self, Bitstring, CorrelationMode};
use crate::protocol::{self, ChannelLedger, ProtocolOptions, Session, Variant};
use crate::sim::qubit_cap;

/// Generator `stream` under the master seed.
pub fn derived_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    /// `x` on one line; one `y` line per client.
    Files { x: PathBuf, y: PathBuf },
    /// Uniform random bits of the configured length from the master seed.
    Random { n_items: usize },
    Given { x: Bitstring, ys: Vec<Bitstring> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub t: u32,
    /// Clients in a multiparty run.
    pub m: usize,
    /// Redundant encoding factor; `None` runs on the raw vectors.
    pub redundancy_m: Option<usize>,
    pub mode: CorrelationMode,
    pub trials: usize,
    pub seed: u64,
    pub inputs: InputSpec,
    pub max_qubits: usize,
}

impl ExperimentConfig {
    pub fn new(variant: Variant, inputs: InputSpec, t: u32, trials: usize, seed: u64) -> Self {
        Self {
            variant,
            t,
            m: if variant == Variant::Multiparty { 2 } else { 1 },
            redundancy_m: None,
            mode: CorrelationMode::And,
            trials,
            seed,
            inputs,
            max_qubits: qubit_cap(),
        }
    }

    /// Resolves the input vectors.
    pub fn load_inputs(&self) -> Result<(Bitstring, Vec<Bitstring>)> {
        let clients = if self.variant == Variant::Multiparty { self.m } else { 1 };
        let (x, ys) = match &self.inputs {
            InputSpec::Given { x, ys } => (x.clone(), ys.clone()),
            InputSpec::Random { n_items } => {
                let mut rng = derived_rng(self.seed, 0);
                let x = Bitstring::random(*n_items, &mut rng);
                let ys = (0..clients).map(|_| Bitstring::random(*n_items, &mut rng)).collect();
                (x, ys)
            }
            InputSpec::Files { x, y } => {
                let xs = oracle::read_bitstrings(x, None)?;
                if xs.len() != 1 {
                    return Err(Error::Parse {
                        line: xs.len().min(2),
                        message: format!("{}: expected exactly one x vector, found {}", x.display(), xs.len()),
                    });
                }
                let ys = oracle::read_bitstrings(y, Some(xs[0].len()))?;
                (xs.into_iter().next().expect("one vector"), ys)
            }
        };
        if ys.len() != clients {
            return Err(Error::InvalidParameter(format!(
                "{} expects {clients} client vector(s), got {}",
                self.variant,
                ys.len()
            )));
        }
        Ok((x, ys))
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.variant == Variant::Multiparty && self.m < 2 {
            return Err(Error::InvalidParameter(format!("multiparty needs m ≥ 2, got {}", self.m)));
        }
        if let Some(m) = self.redundancy_m {
            if m < 2 {
                return Err(Error::InvalidParameter(format!("redundancy M must be at least 2, got {m}")));
            }
            if self.variant == Variant::Multiparty || self.mode == CorrelationMode::Xor {
                return Err(Error::InvalidParameter(
                    "redundant encoding applies to two-party AND runs".into(),
                ));
            }
        }
        Ok(())
    }

    fn options(&self) -> ProtocolOptions {
        ProtocolOptions {
            mode: self.mode,
            max_qubits: self.max_qubits,
            ..ProtocolOptions::default()
        }
    }
}

/// Rule a client picks for its data: hide among zeros when most of `y` is
/// one, among ones otherwise.
pub fn redundancy_rule_for(y: &Bitstring) -> RedundancyRule {
    if 2 * y.weight() > y.len() {
        RedundancyRule::HideAmongZeros
    } else {
        RedundancyRule::HideAmongOnes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub variant: Variant,
    pub mode: CorrelationMode,
    pub n_items: usize,
    pub n: usize,
    pub t: u32,
    pub m: usize,
    pub redundancy_m: Option<usize>,
    pub j: u64,
    pub server_estimate: f64,
    pub estimate: Option<f64>,
    pub truth: f64,
    pub abs_error: Option<f64>,
    pub ledger: ChannelLedger,
    pub timing_ms: f64,
}

/// Flat CSV row for a [`RunRecord`].
#[derive(Serialize)]
struct CsvRecord<'a> {
    run_id: usize,
    variant: &'a str,
    mode: &'a str,
    n_items: usize,
    n: usize,
    t: u32,
    m: usize,
    redundancy_m: Option<usize>,
    j: u64,
    server_estimate: f64,
    estimate: Option<f64>,
    truth: f64,
    abs_error: Option<f64>,
    quantum_qubits_sent: u64,
    classical_bits_sent: u64,
    data_oracle_calls: u64,
    total_oracle_calls: u64,
    grover_rounds: u64,
    timing_ms: f64,
}

/// Qubits one execution of `cfg` simulates.
pub fn required_qubits(cfg: &ExperimentConfig, x: &Bitstring, ys: &[Bitstring]) -> Result<usize> {
    let len = x.len() * cfg.redundancy_m.unwrap_or(1);
    let (xe, ye): (Bitstring, Vec<Bitstring>) = (Bitstring::zeros(len), ys.iter().map(|_| Bitstring::zeros(len)).collect());
    let opts = ProtocolOptions {
        max_qubits: usize::MAX,
        ..cfg.options()
    };
    Ok(Session::new(cfg.variant, &xe, &ye, cfg.t, opts, 0)?.layout().total_qubits())
}

/// Runs `cfg.trials` independent executions in parallel; records come back
/// in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let (x, ys) = cfg.load_inputs()?;
    let required = required_qubits(cfg, &x, &ys)?;
    crate::sim::check_qubit_cap(required, cfg.max_qubits)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &x, &ys, trial))
        .collect()
}

fn run_trial(cfg: &ExperimentConfig, x: &Bitstring, ys: &[Bitstring], trial: usize) -> Result<RunRecord> {
    let start = Instant::now();
    let mut rng = derived_rng(cfg.seed, trial as u64 + 1);
    let opts = cfg.options();
    let (run, estimate, truth) = match cfg.redundancy_m {
        None => {
            let run = protocol::run_protocol(cfg.variant, x, ys, cfg.t, opts, &mut rng)?;
            let (e, t) = (run.estimate, run.truth);
            (run, e, t)
        }
        Some(m) => {
            let rule = redundancy_rule_for(&ys[0]);
            let enc = RedundantEncoding::random(x.len(), m, rule, &mut rng)?;
            let (xe, ye) = enc.encode(x, &ys[0])?;
            let run = protocol::run_protocol(cfg.variant, &xe, &[ye], cfg.t, opts, &mut rng)?;
            // the decoded value may stray outside [0, 1] on unlucky outcomes
            let decoded = run.estimate.map(|raw| adversary::redundant_decode_unchecked(raw, m, rule, x.weight(), x.len()));
            let truth = x.and_count(&ys[0]) as f64 / x.len() as f64;
            (run, decoded, truth)
        }
    };
    Ok(RunRecord {
        run_id: trial,
        variant: cfg.variant,
        mode: cfg.mode,
        n_items: x.len(),
        n: run.n,
        t: run.t,
        m: run.m,
        redundancy_m: cfg.redundancy_m,
        j: run.result.j,
        server_estimate: run.server_estimate,
        estimate,
        truth,
        abs_error: estimate.map(|e| (e - truth).abs()),
        ledger: run.ledger,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv output: {e}"))
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("output: {e}"))
}

pub fn write_records<W: Write>(records: &[RunRecord], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(records, out),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(CsvRecord {
                    run_id: r.run_id,
                    variant: r.variant.name(),
                    mode: match r.mode {
                        CorrelationMode::And => "and",
                        CorrelationMode::Xor => "xor",
                    },
                    n_items: r.n_items,
                    n: r.n,
                    t: r.t,
                    m: r.m,
                    redundancy_m: r.redundancy_m,
                    j: r.j,
                    server_estimate: r.server_estimate,
                    estimate: r.estimate,
                    truth: r.truth,
                    abs_error: r.abs_error,
                    quantum_qubits_sent: r.ledger.quantum_qubits_sent,
                    classical_bits_sent: r.ledger.classical_bits_sent,
                    data_oracle_calls: r.ledger.data_oracle_calls(),
                    total_oracle_calls: r.ledger.total_oracle_calls(),
                    grover_rounds: r.ledger.grover_rounds,
                    timing_ms: r.timing_ms,
                })
                .map_err(csv_error)?;
            }
            w.flush().map_err(io_error)
        }
    }
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::InvalidParameter(format!("json output: {e}")))?;
    writeln!(out).map_err(io_error)
}

/// `value ≈ Σ_k 2^{u−k} planes[k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BitPlaneDecomposition {
    pub value: f64,
    pub u: i32,
    pub planes: Vec<bool>,
}

impl BitPlaneDecomposition {
    pub fn reconstruct(&self) -> f64 {
        self.planes
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(k, _)| 2f64.powi(self.u - k as i32))
            .sum()
    }
}

/// Greedy binary expansion of `value` from exponent `u` down, `k` planes.
pub fn decompose_bitplanes(value: f64, u: i32, k: usize) -> Result<BitPlaneDecomposition> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one bit-plane".into()));
    }
    if value.is_nan() || value < 0.0 {
        return Err(Error::InvalidParameter(format!("value {value} is negative or NaN")));
    }
    if value >= 2f64.powi(u + 1) {
        return Err(Error::InvalidParameter(format!("value {value} needs an exponent above u={u}")));
    }
    let mut rest = value;
    let planes = (0..k)
        .map(|i| {
            let w = 2f64.powi(u - i as i32);
            let bit = rest >= w;
            if bit {
                rest -= w;
            }
            bit
        })
        .collect();
    Ok(BitPlaneDecomposition { value, u, planes })
}

/// Highest exponent needed for values in `[0, max]`.
pub fn top_exponent(max: f64) -> i32 {
    max.log2().floor() as i32
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    pub lambda_hat: f64,
    pub exact: f64,
    pub u: i32,
    /// Protocol executions actually run (non-empty planes).
    pub runs: usize,
    pub plane_estimates: Vec<Option<f64>>,
}

/// Estimates `Σ_i X_i y_i` for real `X_i ∈ [0, 1]` and binary `y` by one
/// protocol execution per non-empty bit-plane of `X`.
pub fn regression_demo<R: Rng + ?Sized>(
    x_column: &[f64],
    y: &Bitstring,
    t: u32,
    k: usize,
    variant: Variant,
    rng: &mut R,
) -> Result<RegressionResult> {
    if x_column.len() != y.len() || y.is_empty() {
        return Err(Error::WidthMismatch {
            what: "regression column",
            expected: y.len(),
            got: x_column.len(),
        });
    }
    if !matches!(variant, Variant::Baseline | Variant::BlindClient) {
        return Err(Error::InvalidParameter(format!("regression runs baseline or blind-client, not {variant}")));
    }
    if let Some(v) = x_column.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!("regression value {v} outside [0, 1]")));
    }
    let exact = x_column.iter().zip(y.iter()).filter(|(_, b)| *b).map(|(v, _)| v).sum();
    let max = x_column.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(RegressionResult {
            lambda_hat: 0.0,
            exact,
            u: 0,
            runs: 0,
            plane_estimates: vec![None; k],
        });
    }
    let u = top_exponent(max);
    let decomps = x_column
        .iter()
        .map(|&v| decompose_bitplanes(v, u, k))
        .collect::<Result<Vec<_>>>()?;
    let big_n = y.len() as f64;
    let mut lambda_hat = 0.0;
    let mut runs = 0;
    let mut plane_estimates = Vec::with_capacity(k);
    for plane in 0..k {
        let bits = Bitstring::new(decomps.iter().map(|d| d.planes[plane]).collect());
        if bits.weight() == 0 {
            plane_estimates.push(None);
            continue;
        }
        let run = protocol::run_protocol(variant, &bits, std::slice::from_ref(y), t, ProtocolOptions::default(), rng)?;
        let mean = run.estimate.expect("two-party runs recover their estimate");
        runs += 1;
        lambda_hat += 2f64.powi(u - plane as i32) * big_n * mean;
        plane_estimates.push(Some(mean));
    }
    Ok(RegressionResult {
        lambda_hat,
        exact,
        u,
        runs,
        plane_estimates,
    })
}

/// `N·(2^{−K+1} + K·π·2^{−t})`.
pub fn regression_error_bound(n_items: usize, k: usize, t: u32) -> f64 {
    n_items as f64 * (2f64.powi(1 - k as i32) + k as f64 * std::f64::consts::PI * 2f64.powi(-(t as i32)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapRow {
    #[serde(rename = "N")]
    pub n_items: usize,
    pub d_y: usize,
    pub t: u32,
    pub d0: usize,
    pub formula: f64,
    pub mc: f64,
    pub trials: usize,
    pub z_score: f64,
}

pub const OVERLAP_HEADER: [&str; 8] = ["N", "d_y", "t", "d0", "formula", "mc", "trials", "z_score"];

/// Sampled-overlap distribution for every `(N, d_y, t)` in `grid`.
pub fn overlap_table(grid: &[(usize, usize, u32)], trials: usize, seed: u64) -> Result<Vec<OverlapRow>> {
    let mut rows = Vec::new();
    for (g, &(n_items, d_y, t)) in grid.iter().enumerate() {
        let formula = adversary::hamming_overlap_pmf(n_items, d_y, t)?;
        let mc = adversary::hamming_overlap_mc(n_items, d_y, t, trials, seed.wrapping_add(g as u64))?;
        for (d0, (&f, &m)) in formula.iter().zip(&mc).enumerate() {
            rows.push(OverlapRow {
                n_items,
                d_y,
                t,
                d0,
                formula: f,
                mc: m,
                trials,
                z_score: adversary::z_score(f, m, trials),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactRecoveryRow {
    #[serde(rename = "N")]
    pub n_items: usize,
    pub d_x: usize,
    pub count: usize,
    /// Printed closed form; exceeds 1 for some inputs.
    pub formula: f64,
    /// Combinatorial model `1/(C(d_x, count)·2^{N−d_x})`.
    pub model: f64,
    /// Model value by enumerating every consistent `y`, for `N ≤ 12`.
    pub enumerated: Option<f64>,
}

pub const EXACT_RECOVERY_HEADER: [&str; 6] = ["N", "d_x", "count", "formula", "model", "enumerated"];

/// Every `(d_x, count)` pair for each `N` in `sizes`.
pub fn exact_recovery_table(sizes: &[usize]) -> Result<Vec<ExactRecoveryRow>> {
    let mut rows = Vec::new();
    for &n_items in sizes {
        for d_x in 0..=n_items {
            for count in 0..=d_x {
                let (formula, model) = adversary::pr_exact_recovery(n_items, d_x, count)?;
                let enumerated = (n_items <= 12).then(|| 1.0 / consistent_inputs(n_items, d_x, count) as f64);
                rows.push(ExactRecoveryRow {
                    n_items,
                    d_x,
                    count,
                    formula,
                    model,
                    enumerated,
                });
            }
        }
    }
    Ok(rows)
}

/// Number of `y ∈ {0,1}^N` with `Σ_{i<d_x} y_i = count`, by brute force.
fn consistent_inputs(n_items: usize, d_x: usize, count: usize) -> u64 {
    let support = (1u64 << d_x) - 1;
    (0..1u64 << n_items)
        .filter(|y| (y & support).count_ones() as usize == count)
        .count() as u64
}

/// CSV with `header` first; an empty `rows` gives the header alone.
pub fn write_csv_table<T: Serialize, W: Write>(header: &[&str], rows: &[T], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(io_error)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerCheck {
    pub variant: Variant,
    pub n: usize,
    pub t: u32,
    pub m: usize,
    pub measured: ChannelLedger,
    pub expected: ChannelLedger,
    pub matches: bool,
}

/// Runs every variant over `n ∈ 1..=n_max`, `t ∈ 1..=t_max` (and each `m`
/// for multiparty) and compares the measured ledger with the closed form.
pub fn ledger_check(n_max: usize, t_max: u32, ms: &[usize], seed: u64) -> Result<Vec<LedgerCheck>> {
    let mut cases = Vec::new();
    for variant in Variant::ALL {
        let clients: Vec<usize> = if variant == Variant::Multiparty { ms.to_vec() } else { vec![1] };
        for n in 1..=n_max {
            for t in 1..=t_max {
                for &m in &clients {
                    cases.push((variant, n, t, m));
                }
            }
        }
    }
    cases
        .into_par_iter()
        .enumerate()
        .map(|(i, (variant, n, t, m))| {
            let mut rng = derived_rng(seed, i as u64);
            let size = 1usize << n;
            let x = Bitstring::random(size, &mut rng);
            let ys: Vec<Bitstring> = (0..m).map(|_| Bitstring::random(size, &mut rng)).collect();
            let opts = ProtocolOptions {
                max_qubits: usize::MAX,
                ..ProtocolOptions::default()
            };
            let run = protocol::run_protocol(variant, &x, &ys, t, opts, &mut rng)?;
            let expected = protocol::expected_ledger(variant, n, t, m)?;
            Ok(LedgerCheck {
                variant,
                n,
                t,
                m,
                matches: run.ledger == expected,
                measured: run.ledger,
                expected,
            })
        })
        .collect()
}

/// Reads real values, one per non-empty line.
pub fn read_real_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{:?}: {e}", l.trim()),
            })
        })
        .collect()
}
