//! λ = Σ X_i y_i for real X_i ∈ [0, 1]: one protocol run per bit-plane of X.
//!
//! cargo run --release --example bitplane_regression

use qbc::experiment::{self, derived_rng};
use qbc::oracle::Bitstring;
use qbc::protocol::Variant;
use rand::Rng;

fn main() -> qbc::Result<()> {
    let (k, t) = (6, 7);
    let d = experiment::decompose_bitplanes(0.625, -1, 3)?;
    println!("0.625 → planes {:?} → {}", d.planes, d.reconstruct());

    let mut hits = 0;
    for seed in 0..20 {
        let mut rng = derived_rng(seed, 0);
        let x: Vec<f64> = (0..8).map(|_| rng.random()).collect();
        let y = Bitstring::random(8, &mut rng);
        let r = experiment::regression_demo(&x, &y, t, k, Variant::Baseline, &mut rng)?;
        let bound = experiment::regression_error_bound(8, k, t);
        let ok = (r.lambda_hat - r.exact).abs() <= bound;
        hits += usize::from(ok);
        println!("seed {seed:>2}: λ̂ {:.4}, λ {:.4}, {} runs{}", r.lambda_hat, r.exact, r.runs, if ok { "" } else { "  (outside bound)" });
    }
    println!("{hits}/20 within N(2^(1-K) + Kπ2^-t)");
    Ok(())
}
