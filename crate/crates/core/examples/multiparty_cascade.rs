//! The index register hops S → C1 → … → Cm → S each round; the result is
//! the fraction of items where Σ_k x_i y_i^(k) is odd.
//!
//! cargo run --example multiparty_cascade

use qbc::oracle::Bitstring;
use qbc::protocol::{self, ProtocolOptions, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = Bitstring::random(8, &mut rng);
    let ys: Vec<Bitstring> = (0..3).map(|_| Bitstring::random(8, &mut rng)).collect();

    let run = protocol::run_multiparty(&x, &ys, 5, &mut rng)?;
    println!("f_3 = {:.4}, estimate {:.4}", run.truth, run.server_estimate);
    println!("{} qubits over {} rounds", run.ledger.quantum_qubits_sent, run.ledger.grover_rounds);
    for rec in run.transcript.iter().take(5) {
        println!("  {}", rec.to_line());
    }

    // client 1 may pad too, but then nobody can strip it
    let opts = ProtocolOptions {
        multiparty_pad: true,
        ..ProtocolOptions::default()
    };
    let padded = protocol::run_protocol(Variant::Multiparty, &x, &ys, 5, opts, &mut rng)?;
    println!("padded run: server {:.4}, recoverable estimate {:?}", padded.server_estimate, padded.estimate);
    Ok(())
}
