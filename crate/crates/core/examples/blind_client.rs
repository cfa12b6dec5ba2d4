//! The server hides x_i behind random bases R_i and phases h_i; the client
//! still writes (−1)^{x_i y_i} into the index register.
//!
//! cargo run --example blind_client

use qbc::adversary;
use qbc::oracle::Bitstring;
use qbc::protocol::{self, ProtocolOptions, Session, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbc::Result<()> {
    let x: Bitstring = "10110110".parse()?;
    let y: Bitstring = "11010011".parse()?;
    let ys = [y.clone()];

    let blind = protocol::protocol_distribution(Variant::BlindClient, &x, &ys, 4, ProtocolOptions::default(), 5)?;
    let plain = protocol::protocol_distribution(Variant::Baseline, &x, &ys, 4, ProtocolOptions::default(), 5)?;
    let tv: f64 = 0.5 * blind.iter().zip(&plain).map(|(a, b)| (a - b).abs()).sum::<f64>();
    println!("total variation blind-client vs baseline: {tv:.2e}");

    let mut session = Session::new(Variant::BlindClient, &x, &ys, 3, ProtocolOptions::default(), 9)?;
    let mut rounds = 0;
    session.evolve(|_, _| {
        rounds += 1;
        Ok(())
    })?;
    println!("{rounds} rounds, every work qubit returned to |0⟩");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let run = protocol::run_blind_client(&x, &y, 6, &mut rng)?;
    println!("estimate {:.4}, truth {:.4}", run.server_estimate, run.truth);
    for name in [qbc::oracle::OracleName::Ux1, qbc::oracle::OracleName::Ux2, qbc::oracle::OracleName::Uy] {
        println!("  {} called {} times", name.label(), run.ledger.calls(name));
    }
    println!("  {} qubits sent", run.ledger.quantum_qubits_sent);

    // what one copy of o1 tells the client about x_i
    let rho0 = adversary::blind_client_distinguishability(false)?;
    let rho1 = adversary::blind_client_distinguishability(true)?;
    println!("best single-copy guess of x_i succeeds w.p. {:.5}", adversary::helstrom_success(&rho0, &rho1)?);
    Ok(())
}
