//! Each item is spread over M slots with the true bit at a secret slot, so a
//! probing server hits a real entry w.p. 1/(NM) per round.
//!
//! cargo run --example redundant_encoding

use num_rational::Ratio;
use qbc::adversary::{self, RedundancyRule};
use qbc::oracle::Bitstring;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qbc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x: Bitstring = "1101".parse()?;
    let y: Bitstring = "1011".parse()?;
    let target = Ratio::new(x.and_count(&y) as i64, x.len() as i64);

    for rule in [RedundancyRule::HideAmongZeros, RedundancyRule::HideAmongOnes] {
        for m in 2..=4 {
            let (xs, ys, _) = adversary::redundant_encode(&x, &y, m, rule, &mut rng)?;
            let raw = Ratio::new(xs.and_count(&ys) as i64, xs.len() as i64);
            let back = adversary::redundant_decode_exact(raw, m, rule, x.weight(), x.len())?;
            println!("{rule:?} M={m}: y' = {ys}, raw {raw}, decoded {back} (x̄y = {target})");
        }
    }

    // the index register spans 2^n ≥ NM slots; padding slots are never hits
    let trials = 50_000;
    for m in [3, 4] {
        let hits = (0..trials)
            .filter(|_| adversary::redundant_index_hit(&y, m, 1, &mut rng).unwrap_or(false))
            .count();
        let slots = (y.len() * m).next_power_of_two();
        println!("M={m}: hit rate {:.5}, 1/(NM) = {:.5}, 1/2^n = {:.5}", hits as f64 / trials as f64, 1.0 / (y.len() * m) as f64, 1.0 / slots as f64);
    }
    Ok(())
}
