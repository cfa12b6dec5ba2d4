//! Two parties estimate x̄y = (1/N)Σ x_i y_i without either sending its bits.
//!
//! cargo run --example baseline_correlator

use qbc::counting::{nearest_outcomes, theta_from_mean};
use qbc::oracle::{Bitstring, CorrelationMode};
use qbc::protocol::{self, ProtocolOptions, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbc::Result<()> {
    let x: Bitstring = "1101001110100101".parse()?;
    let y: Bitstring = "0111010010110001".parse()?;
    let t = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let run = protocol::run_qbc_baseline(&x, &y, t, CorrelationMode::And, &mut rng)?;
    println!("x̄y = {:.4}, estimate {:.4} (j = {})", run.truth, run.server_estimate, run.result.j);
    println!(
        "sent {} qubits, {} classical bits, {} data-oracle calls",
        run.ledger.quantum_qubits_sent,
        run.ledger.classical_bits_sent,
        run.ledger.data_oracle_calls()
    );

    // exact readout distribution and its mass on the modal outcomes
    let dist = protocol::protocol_distribution(Variant::Baseline, &x, std::slice::from_ref(&y), t, ProtocolOptions::default(), 0)?;
    let modal = nearest_outcomes(theta_from_mean(run.truth), t);
    let mass: f64 = modal.iter().map(|&j| dist[j as usize]).sum();
    println!("modal outcomes {modal:?} carry {mass:.4} of the probability");

    // CZ swapped for CNOT-sandwich: the same circuit counts Hamming distance
    let ham = protocol::run_qbc_baseline(&x, &y, t, CorrelationMode::Xor, &mut rng)?;
    println!(
        "hamming fraction {:.4}, estimate {:.4}",
        x.hamming_distance(&y) as f64 / x.len() as f64,
        ham.server_estimate
    );
    Ok(())
}
