use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qbc::adversary;
use qbc::experiment::{self, ExperimentConfig, InputSpec, OutputFormat};
use qbc::oracle::{self, Bitstring, CorrelationMode};
use qbc::protocol::Variant;
use qbc::{Error, Result};

#[derive(Parser)]
#[command(name = "qbc", version, about = "Blind distributed inner-product estimation by quantum counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run protocol executions and emit one record per trial.
    Run {
        #[arg(long, default_value = "baseline")]
        protocol: Variant,
        /// Items per vector when generating random inputs.
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        t: u32,
        /// Clients in the multiparty cascade.
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        redundancy_m: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::And)]
        mode: Mode,
        #[arg(long, requires = "y_file")]
        x_file: Option<PathBuf>,
        #[arg(long, requires = "x_file")]
        y_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Server-side attacks on the client's data.
    Attack {
        #[arg(value_enum)]
        kind: AttackKind,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Attack rounds are 2^t - 1.
        #[arg(long, default_value_t = 3)]
        t: u32,
        /// Hamming weight of y for the worst-case study (default N/2).
        #[arg(long)]
        d_y: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Privacy probability tables, formula against simulation.
    Privacy {
        #[arg(value_enum)]
        table: Table,
        /// Overlap grid as `N,d_y,t` triples separated by `;`.
        #[arg(long, default_value = "4,1,2;4,2,2;4,1,3;4,2,3;8,2,2;8,4,2;8,2,3;8,4,3;16,4,2;16,8,2;16,4,3;16,8,3")]
        grid: String,
        /// Vector lengths for the exact-recovery table, comma separated.
        #[arg(long, default_value = "2,4,8")]
        n: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate Σ X_i y_i for a real column X through bit-plane runs.
    Regression {
        #[arg(long, default_value = "baseline")]
        protocol: Variant,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        t: u32,
        /// Retained bit-planes.
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// One real value in [0, 1] per line.
        #[arg(long, requires = "y_file")]
        x_file: Option<PathBuf>,
        #[arg(long, requires = "x_file")]
        y_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare measured channel ledgers against the closed forms.
    LedgerCheck {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 4)]
        t_max: u32,
        /// Client counts for the multiparty cascade, comma separated.
        #[arg(long, default_value = "2,3")]
        m: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    And,
    Xor,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKind {
    PlusProbe,
    WorstCase,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Overlap,
    ExactRecovery,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("qbc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::QubitCapExceeded { .. } => 3,
        Error::WorkQubitLeakage(_) | Error::OwnershipViolation { .. } | Error::NotNormalized(_) => 4,
        _ => 2,
    }
}

fn open_out(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(common: &Common, header: &[&str], rows: &[T]) -> Result<()> {
    let out = open_out(common)?;
    match common.format {
        Format::Json => experiment::write_json(rows, out),
        Format::Csv => experiment::write_csv_table(header, rows, out),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split([',', ';'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| Error::InvalidParameter(format!("bad {what} entry {p:?}"))))
        .collect()
}

fn parse_grid(s: &str) -> Result<Vec<(usize, usize, u32)>> {
    s.split(';')
        .filter(|g| !g.trim().is_empty())
        .map(|g| match parse_list::<usize>(g, "grid")?.as_slice() {
            &[n, d_y, t] => Ok((n, d_y, t as u32)),
            _ => Err(Error::InvalidParameter(format!("grid entry {g:?} is not N,d_y,t"))),
        })
        .collect()
}

#[derive(Serialize)]
struct StudyRow {
    value: usize,
    formula: f64,
    mc: f64,
    trials: usize,
    z_score: f64,
}

#[derive(Serialize)]
struct RegressionRow {
    run_id: usize,
    n_items: usize,
    t: u32,
    k: usize,
    u: i32,
    runs: usize,
    lambda_hat: f64,
    exact: f64,
    abs_error: f64,
    bound: f64,
    within_bound: bool,
}

#[derive(Serialize)]
struct LedgerRow {
    variant: Variant,
    n: usize,
    t: u32,
    m: usize,
    quantum_qubits_sent: u64,
    expected_qubits: u64,
    classical_bits_sent: u64,
    total_oracle_calls: u64,
    expected_oracle_calls: u64,
    matches: bool,
}

/// `Ok(false)` when the output was written but reports a violated invariant.
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            protocol,
            n,
            t,
            m,
            redundancy_m,
            mode,
            x_file,
            y_file,
            trials,
            common,
        } => {
            let inputs = match (x_file, y_file) {
                (Some(x), Some(y)) => InputSpec::Files { x, y },
                _ => InputSpec::Random { n_items: n },
            };
            let mut cfg = ExperimentConfig::new(protocol, inputs, t, trials, common.seed);
            cfg.m = if protocol == Variant::Multiparty { m } else { 1 };
            cfg.redundancy_m = redundancy_m;
            cfg.mode = match mode {
                Mode::And => CorrelationMode::And,
                Mode::Xor => CorrelationMode::Xor,
            };
            let records = experiment::run_experiment(&cfg)?;
            experiment::write_records(&records, common.format.into(), open_out(&common)?)?;
            Ok(true)
        }
        Command::Attack {
            kind,
            n,
            t,
            d_y,
            trials,
            common,
        } => {
            if !(1..=30).contains(&t) {
                return Err(Error::InvalidParameter(format!("t must be in 1..=30, got {t}")));
            }
            let report = match kind {
                AttackKind::PlusProbe => adversary::plus_probe_study(n, (1 << t) - 1, trials, common.seed)?,
                AttackKind::WorstCase => adversary::blind_server_worst_case_study(n, d_y.unwrap_or(n / 2), t, trials, common.seed)?,
            };
            let rows: Vec<StudyRow> = report
                .z_scores()
                .into_iter()
                .enumerate()
                .map(|(value, z_score)| StudyRow {
                    value,
                    formula: report.formula_pmf[value],
                    mc: report.mc_pmf[value],
                    trials,
                    z_score,
                })
                .collect();
            emit(&common, &["value", "formula", "mc", "trials", "z_score"], &rows)?;
            Ok(true)
        }
        Command::Privacy {
            table,
            grid,
            n,
            trials,
            common,
        } => match table {
            Table::Overlap => {
                let rows = experiment::overlap_table(&parse_grid(&grid)?, trials, common.seed)?;
                emit(&common, &experiment::OVERLAP_HEADER, &rows)?;
                Ok(true)
            }
            Table::ExactRecovery => {
                let rows = experiment::exact_recovery_table(&parse_list(&n, "N")?)?;
                emit(&common, &experiment::EXACT_RECOVERY_HEADER, &rows)?;
                Ok(true)
            }
        },
        Command::Regression {
            protocol,
            n,
            t,
            k,
            x_file,
            y_file,
            trials,
            common,
        } => {
            let (x, y) = match (x_file, y_file) {
                (Some(xp), Some(yp)) => {
                    let x = experiment::read_real_column(&xp)?;
                    let ys = oracle::read_bitstrings(&yp, Some(x.len()))?;
                    let [y] = <[Bitstring; 1]>::try_from(ys)
                        .map_err(|ys| Error::InvalidParameter(format!("expected one y vector, found {}", ys.len())))?;
                    (x, y)
                }
                _ => {
                    use rand::Rng;
                    let mut rng = experiment::derived_rng(common.seed, 0);
                    let x = (0..n).map(|_| rng.random::<f64>()).collect();
                    (x, Bitstring::random(n, &mut rng))
                }
            };
            let bound = experiment::regression_error_bound(x.len(), k, t);
            let rows = (0..trials)
                .map(|run_id| {
                    let mut rng = experiment::derived_rng(common.seed, run_id as u64 + 1);
                    let r = experiment::regression_demo(&x, &y, t, k, protocol, &mut rng)?;
                    let abs_error = (r.lambda_hat - r.exact).abs();
                    Ok(RegressionRow {
                        run_id,
                        n_items: x.len(),
                        t,
                        k,
                        u: r.u,
                        runs: r.runs,
                        lambda_hat: r.lambda_hat,
                        exact: r.exact,
                        abs_error,
                        bound,
                        within_bound: abs_error <= bound,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(
                &common,
                &["run_id", "n_items", "t", "k", "u", "runs", "lambda_hat", "exact", "abs_error", "bound", "within_bound"],
                &rows,
            )?;
            Ok(true)
        }
        Command::LedgerCheck {
            n_max,
            t_max,
            m,
            common,
        } => {
            let checks = experiment::ledger_check(n_max, t_max, &parse_list(&m, "m")?, common.seed)?;
            let rows: Vec<LedgerRow> = checks
                .iter()
                .map(|c| LedgerRow {
                    variant: c.variant,
                    n: c.n,
                    t: c.t,
                    m: c.m,
                    quantum_qubits_sent: c.measured.quantum_qubits_sent,
                    expected_qubits: c.expected.quantum_qubits_sent,
                    classical_bits_sent: c.measured.classical_bits_sent,
                    total_oracle_calls: c.measured.total_oracle_calls(),
                    expected_oracle_calls: c.expected.total_oracle_calls(),
                    matches: c.matches,
                })
                .collect();
            emit(
                &common,
                &[
                    "variant",
                    "n",
                    "t",
                    "m",
                    "quantum_qubits_sent",
                    "expected_qubits",
                    "classical_bits_sent",
                    "total_oracle_calls",
                    "expected_oracle_calls",
                    "matches",
                ],
                &rows,
            )?;
            match checks.iter().find(|c| !c.matches) {
                Some(c) => {
                    eprintln!("qbc: ledger mismatch for {} n={} t={} m={}", c.variant, c.n, c.t, c.m);
                    Ok(false)
                }
                None => Ok(true),
            }
        }
    }
}
