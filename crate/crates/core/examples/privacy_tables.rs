//! Overlap and exact-recovery tables as CSV on stdout.
//!
//! cargo run --release --example privacy_tables

use qbc::experiment::{self, EXACT_RECOVERY_HEADER, OVERLAP_HEADER};

fn main() -> qbc::Result<()> {
    let mut grid = Vec::new();
    for n in [4, 8, 16] {
        for d_y in [n / 4, n / 2] {
            for t in [2, 3] {
                grid.push((n, d_y, t));
            }
        }
    }
    let rows = experiment::overlap_table(&grid, 100_000, 6)?;
    experiment::write_csv_table(&OVERLAP_HEADER, &rows, std::io::stdout())?;
    println!();

    let rows = experiment::exact_recovery_table(&[2, 4])?;
    experiment::write_csv_table(&EXACT_RECOVERY_HEADER, &rows, std::io::stdout())?;
    let over: Vec<_> = rows.iter().filter(|r| r.formula > 1.0).collect();
    eprintln!("{} rows where the closed form exceeds 1", over.len());
    Ok(())
}
