//! The client pads its phases with g so the server's result is
//! (Σx_iy_i + Σg_i)/N; only the client can strip the pad.
//!
//! cargo run --example blind_server

use qbc::oracle::Bitstring;
use qbc::protocol::{self, ProtocolOptions, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbc::Result<()> {
    let x: Bitstring = "1111".parse()?;
    let y: Bitstring = "1001".parse()?;

    let opts = ProtocolOptions {
        fixed_g: Some("0100".parse()?),
        ..ProtocolOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let run = protocol::run_protocol(Variant::BlindServer, &x, std::slice::from_ref(&y), 4, opts, &mut rng)?;
    println!(
        "server sees mean {:.4} (target {:.4}); client recovers {:.4} (x̄y = {:.4})",
        run.server_estimate,
        run.server_view_truth.unwrap_or(f64::NAN),
        run.estimate.unwrap_or(f64::NAN),
        run.truth
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Bitstring::random(16, &mut rng);
    let y = Bitstring::random(16, &mut rng);
    for _ in 0..3 {
        let run = protocol::run_blind_server(&x, &y, 6, &mut rng)?;
        println!(
            "pad sum {:.4}: server {:.4}, client {:.4}, truth {:.4}",
            run.pad_sum.unwrap_or(0.0),
            run.server_estimate,
            run.estimate.unwrap_or(f64::NAN),
            run.truth
        );
    }
    println!("ledger: {} qubits, same as the unpadded protocol", protocol::expected_ledger(Variant::BlindServer, 4, 6, 1)?.quantum_qubits_sent);
    Ok(())
}
