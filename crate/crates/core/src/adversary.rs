//! Attacks on the protocols and the privacy quantities they are measured by.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{self, Bitstring, CorrelationMode, PadRule};
use crate::sim::{trace_distance, DensityMatrix, Gate, StateVector};

/// Monte Carlo trials per independent RNG stream.
const MC_CHUNK: usize = 4096;

/// Runs `trials` draws of `f` and returns the frequency of each bin in
/// `[0, bins)`. Trials are split into fixed chunks, each with its own
/// ChaCha stream, so the result does not depend on the thread count.
pub fn monte_carlo_pmf<F>(trials: usize, bins: usize, seed: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<usize> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut counts = vec![0u64; bins];
            for _ in 0..len {
                let b = f(&mut rng)?;
                if b >= bins {
                    return Err(Error::InvalidParameter(format!("bin {b} outside 0..{bins}")));
                }
                counts[b] += 1;
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(counts.into_iter().map(|c| c as f64 / trials as f64).collect())
}

/// Formula and Monte Carlo distributions over the same support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub formula_pmf: Vec<f64>,
    pub mc_pmf: Vec<f64>,
    pub trials: usize,
}

impl PrivacyReport {
    /// Binomial z-score of each Monte Carlo frequency.
    pub fn z_scores(&self) -> Vec<f64> {
        self.formula_pmf
            .iter()
            .zip(&self.mc_pmf)
            .map(|(&p, &f)| z_score(p, f, self.trials))
            .collect()
    }

    pub fn max_abs_z(&self) -> f64 {
        self.z_scores().into_iter().map(f64::abs).fold(0.0, f64::max)
    }
}

/// `(f − p)/√(p(1−p)/trials)`; zero when a degenerate `p` is matched exactly.
pub fn z_score(p: f64, freq: f64, trials: usize) -> f64 {
    let var = p * (1.0 - p) / trials as f64;
    if var <= 0.0 {
        if (freq - p).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (freq - p) / var.sqrt()
    }
}

/// `C(n, k)` as a float, zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// What a single attack execution revealed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackOutcome {
    /// `Some(bit)` for every position the server determined, `None` elsewhere.
    pub guessed: Vec<Option<bool>>,
    /// Positions not correctly determined (unknown or wrong).
    pub hamming_to_truth: usize,
    /// `(index, observed bit)` per round.
    pub observations: Vec<(usize, bool)>,
}

impl AttackOutcome {
    pub fn learned(&self) -> usize {
        self.guessed.iter().filter(|g| g.is_some()).count()
    }

    fn score(mut self, truth: &Bitstring) -> Self {
        self.hamming_to_truth = (0..truth.len())
            .filter(|&i| self.guessed[i] != Some(truth.get(i)))
            .count();
        self
    }
}

/// One plus-probe round: the server sends `Σ|i⟩ ⊗ |+⟩_{o1}`, the client
/// runs its honest sandwich (plus its phase pad when `g` is given), the
/// server measures the index in Z and `o1` in X. Returns `(j, bit)` where
/// bit 1 is the `|−⟩` outcome, and the probability of that X outcome.
pub fn plus_probe_round<R: Rng + ?Sized>(
    y: &Bitstring,
    g: Option<&Bitstring>,
    rng: &mut R,
) -> Result<(usize, bool, f64)> {
    let n = y.index_width();
    let reg: Vec<usize> = (0..n).collect();
    let (o1, o2, o3) = (n, n + 1, n + 2);
    let mut s = StateVector::new(n + 3);
    for &q in reg.iter().chain([&o1]) {
        s.apply(&Gate::h(q))?;
    }
    oracle::apply_data_oracle(&mut s, &reg, o2, y)?;
    oracle::apply_correlation_gate(&mut s, o1, o2, CorrelationMode::And)?;
    if let Some(g) = g {
        oracle::apply_phase_pad(&mut s, &reg, o3, g)?;
    }
    oracle::apply_data_oracle(&mut s, &reg, o2, y)?;
    let j = s.measure_register(&reg, rng)?;
    s.apply(&Gate::h(o1))?;
    let p1 = s.outcome_distribution(&[o1])?[1];
    let bit = s.measure(o1, rng)?;
    Ok((j, bit, if bit { p1 } else { 1.0 - p1 }))
}

/// Plus-probe attack over `rounds` rounds. Positions never
/// sampled stay unknown. Fails if an X outcome is not deterministic.
pub fn attack_plus_probe<R: Rng + ?Sized>(y: &Bitstring, rounds: usize, rng: &mut R) -> Result<AttackOutcome> {
    plus_probe(y, None, rounds, rng)
}

/// Plus-probe against a blind-server client. The pad is a global phase on
/// each collapsed branch and does not hide `y_j`.
pub fn attack_plus_probe_padded<R: Rng + ?Sized>(y: &Bitstring, rounds: usize, rng: &mut R) -> Result<AttackOutcome> {
    let g = oracle::gen_pad(PadRule::BlindServerG, y, rng);
    plus_probe(y, Some(&g), rounds, rng)
}

fn plus_probe<R: Rng + ?Sized>(y: &Bitstring, g: Option<&Bitstring>, rounds: usize, rng: &mut R) -> Result<AttackOutcome> {
    let mut out = AttackOutcome {
        guessed: vec![None; y.len()],
        hamming_to_truth: 0,
        observations: Vec::with_capacity(rounds),
    };
    for _ in 0..rounds {
        let (j, bit, p) = plus_probe_round(y, g, rng)?;
        if (p - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("X outcome not deterministic (p = {p})")));
        }
        if j < y.len() {
            out.guessed[j] = Some(bit);
        }
        out.observations.push((j, bit));
    }
    Ok(out.score(y))
}

/// Probability that `rounds` uniform draws over `n_items` positions hit
/// exactly `d` distinct positions, for `d = 0..=rounds`.
pub fn occupancy_pmf(n_items: usize, rounds: usize) -> Vec<f64> {
    let mut p = vec![0.0; rounds + 1];
    p[0] = 1.0;
    let big_n = n_items as f64;
    for r in 0..rounds {
        for d in (0..=r + 1).rev() {
            let stay = if d <= r { p[d] * d as f64 / big_n } else { 0.0 };
            let grow = if d >= 1 { p[d - 1] * (big_n - (d - 1) as f64) / big_n } else { 0.0 };
            p[d] = stay + grow;
        }
    }
    p
}

/// Learned-set size after `rounds` plus-probe rounds: occupancy formula
/// against full statevector attacks on random `y`.
pub fn plus_probe_study(n_items: usize, rounds: usize, trials: usize, seed: u64) -> Result<PrivacyReport> {
    let mc_pmf = monte_carlo_pmf(trials, rounds + 1, seed, |rng| {
        let y = Bitstring::random(n_items, rng);
        Ok(attack_plus_probe(&y, rounds, rng)?.learned())
    })?;
    Ok(PrivacyReport {
        formula_pmf: occupancy_pmf(n_items, rounds),
        mc_pmf,
        trials,
    })
}

/// Probability that an X-basis check on every index qubit reads `+`.
pub fn index_acceptance_probability(state: &StateVector, index_reg: &[usize]) -> Result<f64> {
    let mut s = state.clone();
    for &q in index_reg {
        s.apply(&Gate::h(q))?;
    }
    s.prob_all_zero(index_reg)
}

/// Measures every index qubit in the X basis; accepts iff all read `+`.
pub fn verify_index_uniformity<R: Rng + ?Sized>(state: &StateVector, index_reg: &[usize], rng: &mut R) -> Result<bool> {
    let mut s = state.clone();
    for &q in index_reg {
        s.apply(&Gate::h(q))?;
    }
    Ok(s.measure_register(index_reg, rng)? == 0)
}

/// Index register biased toward `target`: amplitude `√weight` there and
/// equal amplitudes elsewhere.
pub fn biased_index_state(n: usize, target: usize, weight: f64) -> Result<StateVector> {
    let size = 1usize << n;
    if target >= size || !(0.0..=1.0).contains(&weight) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "biased state needs target < {size} and weight in [0, 1]"
        )));
    }
    let rest = ((1.0 - weight) / (size - 1) as f64).sqrt();
    let amps = (0..size)
        .map(|i| Complex64::new(if i == target { weight.sqrt() } else { rest }, 0.0))
        .collect();
    StateVector::from_amplitudes(amps)
}

/// `S(ρ) − (1/N) Σ S(ρ_i)` for the ensemble `ρ_i = |i⟩⟨i| ⊗ |a_i⟩⟨a_i|`,
/// `|a_i⟩ = (|0⟩ + (−1)^{y_i}|1⟩)/√2`, built by copying the index into an
/// environment register and tracing it out.
pub fn holevo_quantity(y: &Bitstring) -> Result<f64> {
    let big_n = y.len();
    if big_n < 2 || !big_n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "Holevo construction needs N a power of two, got {big_n}"
        )));
    }
    let n = y.index_width();
    let reg: Vec<usize> = (0..n).collect();
    let o1 = 2 * n;
    let mut s = StateVector::new(2 * n + 1);
    for q in 0..n {
        s.apply(&Gate::h(q))?;
        s.apply(&Gate::cnot(q, n + q))?;
    }
    s.apply(&Gate::h(o1))?;
    s.apply(&Gate::z(o1).with_condition(&reg, y.predicate(n)?))?;
    let keep: Vec<usize> = reg.iter().copied().chain([o1]).collect();
    let rho = s.reduced_density(&keep)?;
    let mut conditional = 0.0;
    for i in 0..big_n {
        let sign = if y.get(i) { -1.0 } else { 1.0 };
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * big_n];
        amps[2 * i] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[2 * i + 1] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
        conditional += crate::sim::von_neumann_entropy(&DensityMatrix::pure(&amps)?) / big_n as f64;
    }
    Ok(crate::sim::von_neumann_entropy(&rho) - conditional)
}

/// `log₂(2N)`, the commonly quoted value for this ensemble; the
/// construction above gives `log₂ N` because every `ρ_i` is pure.
pub fn holevo_stated_value(n_items: usize) -> f64 {
    (2.0 * n_items as f64).log2()
}

/// Exact-recovery probability for a server that knows `count = Σ_{x_i=1} y_i`.
/// Returns `(printed, model)`: the printed expression `C(d_x, count)/2^{N−d_x}`
/// and the combinatorial value `1/(C(d_x, count)·2^{N−d_x})`.
pub fn pr_exact_recovery(n_items: usize, d_x: usize, count: usize) -> Result<(f64, f64)> {
    if count > d_x || d_x > n_items {
        return Err(Error::InvalidParameter(format!(
            "need count ≤ d_x ≤ N, got count={count} d_x={d_x} N={n_items}"
        )));
    }
    let c = binomial(d_x as i64, count as i64);
    let free = 2f64.powi((n_items - d_x) as i32);
    Ok((c / free, 1.0 / (c * free)))
}

/// Exact model value of [`pr_exact_recovery`] as a fraction.
pub fn pr_exact_recovery_ratio(n_items: usize, d_x: usize, count: usize) -> Result<Ratio<u64>> {
    if count > d_x || d_x > n_items || n_items > 62 {
        return Err(Error::InvalidParameter(format!(
            "need count ≤ d_x ≤ N ≤ 62, got count={count} d_x={d_x} N={n_items}"
        )));
    }
    Ok(Ratio::new(1, binomial_u64(d_x as u64, count as u64) << (n_items - d_x)))
}

/// `k = min(2^t − 1, d_y)` sampled indices.
pub fn sample_size(d_y: usize, t: u32) -> usize {
    let rounds = (1usize << t.min(62)) - 1;
    rounds.min(d_y)
}

/// Hypergeometric `C(d_y, d_0)·C(N−d_y, k−d_0)/C(N, k)` for `d_0 = 0..=d_y`.
pub fn hamming_overlap_pmf(n_items: usize, d_y: usize, t: u32) -> Result<Vec<f64>> {
    if d_y > n_items || t == 0 {
        return Err(Error::InvalidParameter(format!("need d_y ≤ N and t ≥ 1, got d_y={d_y} N={n_items} t={t}")));
    }
    let k = sample_size(d_y, t) as i64;
    let (n, dy) = (n_items as i64, d_y as i64);
    let total = binomial(n, k);
    Ok((0..=dy).map(|d0| binomial(dy, d0) * binomial(n - dy, k - d0) / total).collect())
}

/// Overlap of `k` distinct uniform indices with a weight-`d_y` support.
pub fn hamming_overlap_mc(n_items: usize, d_y: usize, t: u32, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if d_y > n_items || t == 0 {
        return Err(Error::InvalidParameter(format!("need d_y ≤ N and t ≥ 1, got d_y={d_y} N={n_items} t={t}")));
    }
    let k = sample_size(d_y, t);
    monte_carlo_pmf(trials, d_y + 1, seed, |rng| {
        Ok(sample(rng, n_items, k).iter().filter(|&i| i < d_y).count())
    })
}

/// `(formula, mc)` probability that the sampled set overlaps `supp(y)` in
/// exactly `d_0` positions.
pub fn pr_hamming_overlap(n_items: usize, d_y: usize, t: u32, d_0: usize, trials: usize, seed: u64) -> Result<(f64, f64)> {
    if d_0 > d_y {
        return Err(Error::InvalidParameter(format!("d_0={d_0} exceeds d_y={d_y}")));
    }
    let formula = hamming_overlap_pmf(n_items, d_y, t)?;
    let mc = hamming_overlap_mc(n_items, d_y, t, trials, seed)?;
    Ok((formula[d_0], mc[d_0]))
}

/// Outcome of the blind-server worst case: the server loads `x = 1…1` and
/// reads the phase bit `y_j + g_j` of `k = min(2^t−1, d_y)` distinct indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCaseOutcome {
    pub attack: AttackOutcome,
    /// Sampled indices inside `supp(y)`.
    pub overlap: usize,
    /// Indices where a zero phase bit proved `y_j = 0`.
    pub certain_zeros: Vec<usize>,
}

pub fn attack_blind_server_worst_case<R: Rng + ?Sized>(y: &Bitstring, t: u32, rng: &mut R) -> Result<WorstCaseOutcome> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    let g = oracle::gen_pad(PadRule::BlindServerG, y, rng);
    let k = sample_size(y.weight(), t);
    let mut attack = AttackOutcome {
        guessed: vec![None; y.len()],
        hamming_to_truth: 0,
        observations: Vec::with_capacity(k),
    };
    let mut certain_zeros = Vec::new();
    let mut overlap = 0;
    for j in sample(rng, y.len(), k).iter() {
        let bit = y.get(j) ^ g.get(j);
        attack.observations.push((j, bit));
        overlap += usize::from(y.get(j));
        if !bit {
            attack.guessed[j] = Some(false);
            certain_zeros.push(j);
        }
    }
    Ok(WorstCaseOutcome {
        attack: attack.score(y),
        overlap,
        certain_zeros,
    })
}

/// Overlap distribution of the worst-case attack on random weight-`d_y`
/// inputs against the hypergeometric formula.
pub fn blind_server_worst_case_study(n_items: usize, d_y: usize, t: u32, trials: usize, seed: u64) -> Result<PrivacyReport> {
    let formula_pmf = hamming_overlap_pmf(n_items, d_y, t)?;
    let mc_pmf = monte_carlo_pmf(trials, d_y + 1, seed, |rng| {
        let mut bits = vec![false; n_items];
        for i in sample(rng, n_items, d_y).iter() {
            bits[i] = true;
        }
        Ok(attack_blind_server_worst_case(&Bitstring::new(bits), t, rng)?.overlap)
    })?;
    Ok(PrivacyReport {
        formula_pmf,
        mc_pmf,
        trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedundancyRule {
    /// True bit at `J_i`, zeros elsewhere.
    HideAmongZeros,
    /// True bit at `J_i`, ones elsewhere.
    HideAmongOnes,
    /// `y'_{i,j} = (1 − δ_{j,J_i})·y_i` taken literally: zero at `J_i`,
    /// `y_i` elsewhere.
    LiteralComplement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundantEncoding {
    pub m: usize,
    pub rule: RedundancyRule,
    /// Secret position of each true bit, `0..m`.
    pub positions: Vec<usize>,
}

impl RedundantEncoding {
    pub fn random<R: Rng + ?Sized>(n_items: usize, m: usize, rule: RedundancyRule, rng: &mut R) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("redundancy M must be at least 2, got {m}")));
        }
        Ok(Self {
            m,
            rule,
            positions: (0..n_items).map(|_| rng.random_range(0..m)).collect(),
        })
    }

    /// Expands `x` and `y` to length `N·M`, entry `(i, j)` at `i·M + j`.
    pub fn encode(&self, x: &Bitstring, y: &Bitstring) -> Result<(Bitstring, Bitstring)> {
        if x.len() != y.len() || x.len() != self.positions.len() {
            return Err(Error::WidthMismatch {
                what: "redundant encoding input",
                expected: self.positions.len(),
                got: x.len().max(y.len()),
            });
        }
        let m = self.m;
        let xs = (0..x.len() * m).map(|k| x.get(k / m)).collect();
        let ys = (0..y.len() * m)
            .map(|k| {
                let (i, j) = (k / m, k % m);
                let here = j == self.positions[i];
                match self.rule {
                    RedundancyRule::HideAmongZeros => here && y.get(i),
                    RedundancyRule::HideAmongOnes => !here || y.get(i),
                    RedundancyRule::LiteralComplement => !here && y.get(i),
                }
            })
            .collect();
        Ok((Bitstring::new(xs), Bitstring::new(ys)))
    }
}

pub fn redundant_encode<R: Rng + ?Sized>(
    x: &Bitstring,
    y: &Bitstring,
    m: usize,
    rule: RedundancyRule,
    rng: &mut R,
) -> Result<(Bitstring, Bitstring, RedundantEncoding)> {
    let enc = RedundantEncoding::random(x.len(), m, rule, rng)?;
    let (xs, ys) = enc.encode(x, y)?;
    Ok((xs, ys, enc))
}

/// Recovers `x̄y` from the server's mean over the encoded vectors.
pub fn redundant_decode(raw_mean: f64, m: usize, rule: RedundancyRule, sum_x: usize, n_items: usize) -> Result<f64> {
    if m < 2 || n_items == 0 {
        return Err(Error::InvalidParameter(format!("need M ≥ 2 and N ≥ 1, got M={m} N={n_items}")));
    }
    let value = redundant_decode_unchecked(raw_mean, m, rule, sum_x, n_items);
    if !(-1e-9..=1.0 + 1e-9).contains(&value) {
        return Err(Error::InvalidParameter(format!("decoded mean {value} outside [0, 1]")));
    }
    Ok(value)
}

/// [`redundant_decode`] without the range check; an unlucky outcome can
/// decode outside `[0, 1]`.
pub fn redundant_decode_unchecked(raw_mean: f64, m: usize, rule: RedundancyRule, sum_x: usize, n_items: usize) -> f64 {
    let mf = m as f64;
    match rule {
        RedundancyRule::HideAmongZeros => mf * raw_mean,
        RedundancyRule::HideAmongOnes => mf * raw_mean - (mf - 1.0) * sum_x as f64 / n_items as f64,
        RedundancyRule::LiteralComplement => mf * raw_mean / (mf - 1.0),
    }
}

/// [`redundant_decode`] in exact arithmetic.
pub fn redundant_decode_exact(raw_mean: Ratio<i64>, m: usize, rule: RedundancyRule, sum_x: usize, n_items: usize) -> Result<Ratio<i64>> {
    if m < 2 || n_items == 0 {
        return Err(Error::InvalidParameter(format!("need M ≥ 2 and N ≥ 1, got M={m} N={n_items}")));
    }
    let mr = Ratio::from_integer(m as i64);
    let one = Ratio::from_integer(1);
    let value = match rule {
        RedundancyRule::HideAmongZeros => mr * raw_mean,
        RedundancyRule::HideAmongOnes => mr * raw_mean - (mr - one) * Ratio::new(sum_x as i64, n_items as i64),
        RedundancyRule::LiteralComplement => mr * raw_mean / (mr - one),
    };
    if value < Ratio::from_integer(0) || value > one {
        return Err(Error::InvalidParameter(format!("decoded mean {value} outside [0, 1]")));
    }
    Ok(value)
}

/// One plus-probe round against a redundantly encoded `y`: whether the
/// server's sampled position is the secret slot of item `target`.
pub fn redundant_index_hit<R: Rng + ?Sized>(y: &Bitstring, m: usize, target: usize, rng: &mut R) -> Result<bool> {
    let x = Bitstring::ones(y.len());
    let (_, ys, enc) = redundant_encode(&x, y, m, RedundancyRule::HideAmongZeros, rng)?;
    let (j, _, _) = plus_probe_round(&ys, None, rng)?;
    Ok(j == target * m + enc.positions[target])
}

/// Client-visible `o1` state for one data bit, averaged over the basis:
/// `½|x⟩⟨x| + ½ H|x⟩⟨x|H`.
pub fn blind_client_distinguishability(x_bit: bool) -> Result<DensityMatrix> {
    let mut z = StateVector::new(1);
    if x_bit {
        z.apply(&Gate::x(0))?;
    }
    let mut xb = z.clone();
    xb.apply(&Gate::h(0))?;
    let rz = DensityMatrix::pure(z.amplitudes())?;
    let rx = DensityMatrix::pure(xb.amplitudes())?;
    DensityMatrix::mixture(&[(0.5, &rz), (0.5, &rx)])
}

/// Optimal single-copy guessing probability `½(1 + D(ρ₀, ρ₁))`.
pub fn helstrom_success(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    Ok(0.5 * (1.0 + trace_distance(rho0, rho1)?))
}
