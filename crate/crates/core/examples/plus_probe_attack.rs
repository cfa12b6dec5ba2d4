//! A dishonest server sends |+⟩ on o1 instead of Û_x̄|0⟩ and reads one y_j
//! per round. Verifying index uniformity catches a biased index register.
//!
//! cargo run --example plus_probe_attack

use qbc::adversary;
use qbc::oracle::Bitstring;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y = Bitstring::random(8, &mut rng);
    let out = adversary::attack_plus_probe(&y, 7, &mut rng)?;
    println!("y = {y}, learned {} positions, observations {:?}", out.learned(), out.observations);

    let padded = adversary::attack_plus_probe_padded(&y, 7, &mut rng)?;
    println!("with the g pad the server still learns {} positions", padded.learned());

    let report = adversary::plus_probe_study(8, 7, 20_000, 1)?;
    println!("learned  formula  mc");
    for (k, (f, m)) in report.formula_pmf.iter().zip(&report.mc_pmf).enumerate() {
        println!("{k:>7}  {f:.4}  {m:.4}");
    }
    println!("max |z| = {:.2}", report.max_abs_z());

    for w in [1.0 / 8.0, 0.5, 0.9] {
        let state = adversary::biased_index_state(3, 5, w)?;
        println!(
            "index weight {w:.3} on |5⟩: verification accepts w.p. {:.4}",
            adversary::index_acceptance_probability(&state, &[0, 1, 2])?
        );
    }
    for n in [2, 4, 8] {
        let y = Bitstring::random(n, &mut rng);
        println!("N = {n}: Holevo χ = {:.4}, log2(2N) = {:.4}", adversary::holevo_quantity(&y)?, adversary::holevo_stated_value(n));
    }
    Ok(())
}
