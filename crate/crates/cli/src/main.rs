//! `histlat` — run history-lattice verification checks from the command
//! line.
//!
//! Exit codes: 0 all requested checks pass, 1 at least one failed,
//! 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use histlat_core::suite::{
    emit_results, list_checks, run_check, run_suite, scan, CheckConfig, CheckResult, EmitFormat,
};
use histlat_core::Error;

#[derive(Parser)]
#[command(
    name = "histlat",
    about = "Verification suite for history Fock spaces on a periodic time lattice",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered checks.
    List,
    /// Run a single check.
    Run {
        /// Registered check name (see `histlat list`).
        check: String,
        /// JSON config file; the shipped default config is used if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every check matching a filter.
    Suite {
        /// Regex filter over check names.
        #[arg(long)]
        filter: Option<String>,
        /// Worker cap for parallel execution.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output file; format inferred from the extension (.json or .csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a numeric config field and rerun one check per value.
    Scan {
        /// JSON config file naming the check (field "check").
        #[arg(long)]
        config: PathBuf,
        /// Dot-separated path of the numeric field, e.g. engine.n_max.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<CheckConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    CheckConfig::from_json(&text)
}

/// Dimension-bound override from the environment, applied when the config
/// does not set one.
fn apply_env_bound(cfg: &mut CheckConfig) -> Result<(), Error> {
    if cfg.max_dim.is_none() {
        if let Ok(text) = std::env::var("HISTLAT_MAX_DIM") {
            let bound: usize = text
                .parse()
                .map_err(|_| Error::Config(format!("bad HISTLAT_MAX_DIM '{text}'")))?;
            cfg.max_dim = Some(bound);
        }
    }
    Ok(())
}

fn print_result(r: &CheckResult) {
    let status = if r.pass {
        if r.expected_nonzero {
            "FLAG"
        } else {
            "PASS"
        }
    } else {
        "FAIL"
    };
    if let Some(err) = &r.error {
        println!("{status} {} — error: {err}", r.name);
        return;
    }
    let worst = r.max_residual();
    println!(
        "{status} {} (max residual {:.3e}, {:.1} ms)",
        r.name, worst, r.metadata.runtime_ms
    );
    for e in &r.residuals {
        let rel = if e.at_least { "≥" } else { "≤" };
        let bound = if e.tolerance.is_finite() {
            format!("{rel} {:.3e}", e.tolerance)
        } else {
            "(reported)".to_string()
        };
        println!("    {:<28} {: >13.6e}  {}", e.name, e.value, bound);
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::List => {
            for (name, desc) in list_checks() {
                println!("{name:<40} {desc}");
            }
            Ok(true)
        }
        Command::Run {
            check,
            config,
            seed,
        } => {
            let result = match config {
                Some(path) => {
                    let mut cfg = load_config(&path)?;
                    if seed.is_some() {
                        cfg.seed = seed;
                    }
                    apply_env_bound(&mut cfg)?;
                    run_check(&check, &cfg)?
                }
                None => {
                    let def = histlat_core::suite::find(&check)?;
                    let mut cfg = (def.default_config)();
                    if seed.is_some() {
                        cfg.seed = seed;
                    }
                    apply_env_bound(&mut cfg)?;
                    run_check(&check, &cfg)?
                }
            };
            print_result(&result);
            Ok(result.pass)
        }
        Command::Suite { filter, jobs, out } => {
            let (results, summary) = run_suite(filter.as_deref(), jobs)?;
            for r in &results {
                print_result(r);
            }
            println!(
                "\n{} checks: {} passed, {} failed, {} flagged expected-nonzero",
                summary.total, summary.passed, summary.failed, summary.flagged
            );
            if let Some(path) = out {
                let format = match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") => EmitFormat::Csv,
                    _ => EmitFormat::Json,
                };
                emit_results(&results, format, &path)?;
                println!("results written to {}", path.display());
            }
            Ok(summary.failed == 0)
        }
        Command::Scan {
            config,
            param,
            values,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            apply_env_bound(&mut cfg)?;
            let vals: Vec<f64> = values
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad value '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            let table = scan(&cfg, &param, &vals)?;
            let csv = table.to_csv();
            print!("{csv}");
            if let Some(mono) = table.monotone_decreasing {
                println!("# monotone decreasing: {mono}");
            }
            if let Some(order) = table.fit_order {
                println!("# fitted order: {order:.3}");
            }
            if let Some(path) = out {
                std::fs::write(&path, &csv)?;
                println!("# scan written to {}", path.display());
            }
            Ok(table.rows.iter().all(|r| r.result.pass))
        }
    }
}

fn main() -> ExitCode {
    // keep BLAS single-threaded: deterministic reductions, and the suite
    // already parallelizes across checks
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
