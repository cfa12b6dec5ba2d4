use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbc::counting::{counting_distribution, estimate_from_outcome, BitOracle, CountingConfig};
use qbc::experiment::decompose_bitplanes;
use qbc::oracle::Bitstring;
use qbc::sim::{Circuit, Gate, StateVector};

const QUBITS: usize = 5;

fn gate_strategy() -> impl Strategy<Value = Gate> {
    let q = 0..QUBITS;
    let pair = (0..QUBITS, 0..QUBITS).prop_filter("distinct", |(a, b)| a != b);
    prop_oneof![
        q.clone().prop_map(Gate::h),
        q.clone().prop_map(Gate::x),
        q.clone().prop_map(Gate::z),
        (q.clone(), -3.2f64..3.2).prop_map(|(q, th)| Gate::phase(q, th)),
        pair.clone().prop_map(|(a, b)| Gate::cz(a, b)),
        pair.clone().prop_map(|(a, b)| Gate::cnot(a, b)),
        pair.clone().prop_map(|(a, b)| Gate::swap(a, b)),
        (1usize..=3).prop_map(|w| Gate::qft(&(0..w).collect::<Vec<_>>())),
        (2usize..=4).prop_map(|w| Gate::iqft(&(1..w + 1).collect::<Vec<_>>())),
        pair.prop_map(|(c, t)| Gate::h(t).with_control(c)),
    ]
}

fn random_state(seed: u64) -> StateVector {
    let mut s = StateVector::basis(QUBITS, (seed % 32) as usize);
    for q in 0..QUBITS {
        s.apply(&Gate::h(q)).unwrap();
        s.apply(&Gate::phase(q, seed as f64 * 0.37 + q as f64)).unwrap();
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_sequences_preserve_norm_and_invert(gates in prop::collection::vec(gate_strategy(), 1..30), seed in 0u64..1000) {
        let start = random_state(seed);
        let circuit: Circuit = gates.into();
        let mut s = start.clone();
        s.apply_circuit(&circuit).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        s.apply_circuit(&circuit.inverse()).unwrap();
        prop_assert!(s.max_abs_diff(&start) < 1e-10);
    }

    #[test]
    fn decomposition_matches_direct_application(gate in gate_strategy(), seed in 0u64..1000) {
        let mut a = random_state(seed);
        let mut b = a.clone();
        a.apply(&gate).unwrap();
        for g in gate.decompose() {
            b.apply(&g).unwrap();
        }
        prop_assert!(a.max_abs_diff(&b) < 1e-10);
    }
}

proptest! {
    #[test]
    fn self_inverse_gates(q in 0..QUBITS, r in 0..QUBITS, seed in 0u64..1000) {
        prop_assume!(q != r);
        let start = random_state(seed);
        for g in [Gate::h(q), Gate::x(q), Gate::z(q), Gate::cz(q, r), Gate::cnot(q, r), Gate::swap(q, r)] {
            let mut s = start.clone();
            s.apply(&g).unwrap();
            s.apply(&g).unwrap();
            prop_assert!(s.max_abs_diff(&start) < 1e-12);
        }
    }

    #[test]
    fn bitstrings_round_trip(bits in prop::collection::vec(any::<bool>(), 1..64)) {
        let b = Bitstring::new(bits);
        let back: Bitstring = b.to_string().parse().unwrap();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn bitplane_reconstruction_error(value in 0.0f64..1.0, k in 1usize..16) {
        let u = if value > 0.0 { value.log2().floor() as i32 } else { 0 };
        let d = decompose_bitplanes(value, u, k).unwrap();
        let err = value - d.reconstruct();
        prop_assert!(err >= 0.0 && err < 2f64.powi(u - k as i32 + 1));
    }

    #[test]
    fn counting_distribution_is_normalized_and_mirrored(bits in prop::collection::vec(any::<bool>(), 4), t in 1u32..6) {
        let cfg = CountingConfig::new(2, t).unwrap();
        let mut oracle = BitOracle { f: Bitstring::new(bits) };
        let d = counting_distribution(cfg, &mut oracle, 22).unwrap();
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let m = d.len();
        for j in 1..m {
            prop_assert!((d[j] - d[m - j]).abs() < 1e-10);
            let (_, e) = estimate_from_outcome(j as u64, t).unwrap();
            let (_, f) = estimate_from_outcome((m - j) as u64, t).unwrap();
            prop_assert!((e - f).abs() < 1e-12);
        }
    }
}

#[test]
fn measurement_frequencies_follow_distribution() {
    let mut s = StateVector::new(3);
    s.apply(&Gate::h(0)).unwrap();
    s.apply(&Gate::phase(0, 0.7)).unwrap();
    s.apply(&Gate::h(0)).unwrap();
    s.apply(&Gate::h(1)).unwrap();
    s.apply(&Gate::h(2).with_control(0)).unwrap();
    let reg = [0, 1, 2];
    let dist = s.outcome_distribution(&reg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 100_000;
    let mut counts = [0usize; 8];
    for _ in 0..trials {
        counts[s.clone().measure_register(&reg, &mut rng).unwrap()] += 1;
    }
    for (p, c) in dist.iter().zip(counts) {
        let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1e-12);
        let z = (c as f64 / trials as f64 - p) / sigma;
        assert!(z.abs() < 4.0 || *p == 0.0 && c == 0, "p={p} count={c}");
    }
}

#[test]
fn measurement_collapses() {
    let mut s = StateVector::new(2);
    s.apply(&Gate::h(0)).unwrap();
    s.apply(&Gate::cnot(0, 1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = s.measure(0, &mut rng).unwrap();
    let b = s.measure(1, &mut rng).unwrap();
    assert_eq!(a, b);
    assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
}
