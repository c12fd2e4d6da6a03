//! Check execution: single runs, filtered suites, parallel scheduling.

use std::time::Instant;

use rayon::prelude::*;
use regex::Regex;

use crate::error::{Error, Result};
use crate::suite::checks::{find, registry};
use crate::suite::config::CheckConfig;
use crate::suite::result::{CheckResult, Metadata, Summary};

/// Run one registered check under a config. Check errors become failed
/// results; config and lookup errors propagate.
pub fn run_check(name: &str, config: &CheckConfig) -> Result<CheckResult> {
    let def = find(name)?;
    if let Some(cfg_name) = &config.check {
        if cfg_name != name {
            return Err(Error::Config(format!(
                "config names check '{cfg_name}' but '{name}' was requested"
            )));
        }
    }
    let start = Instant::now();
    let outcome = (def.run)(config);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let metadata = |dims: Vec<usize>| Metadata {
        dims,
        runtime_ms,
        seed: config.seed,
        engine: config.engine.describe(),
    };
    Ok(match outcome {
        Ok(mut out) => {
            // per-residual tolerance overrides from the config
            for entry in &mut out.residuals {
                if let Some(&tol) = config.tolerances.get(&entry.name) {
                    entry.tolerance = tol;
                }
            }
            CheckResult::from_residuals(
                name,
                out.residuals,
                out.expected_nonzero,
                metadata(out.dims),
            )
        }
        Err(err) => CheckResult::from_error(name, &err, metadata(Vec::new())),
    })
}

/// Run a check with its shipped default configuration, `seed` overriding.
pub fn run_check_default(name: &str, seed: Option<u64>) -> Result<CheckResult> {
    let def = find(name)?;
    let mut config = (def.default_config)();
    if seed.is_some() {
        config.seed = seed;
    }
    run_check(name, &config)
}

/// All registered check names with descriptions, registry order.
pub fn list_checks() -> Vec<(&'static str, &'static str)> {
    registry().iter().map(|d| (d.name, d.description)).collect()
}

/// Run every registered check whose name matches `filter` (a regex), with
/// shipped defaults, at most `jobs` in parallel. Results are ordered by
/// name; the summary counts passes, failures and expected-nonzero flags.
pub fn run_suite(filter: Option<&str>, jobs: Option<usize>) -> Result<(Vec<CheckResult>, Summary)> {
    let re = match filter {
        Some(f) => Some(Regex::new(f).map_err(|e| Error::Config(format!("bad filter: {e}")))?),
        None => None,
    };
    let selected: Vec<&'static str> = registry()
        .iter()
        .map(|d| d.name)
        .filter(|n| re.as_ref().map_or(true, |r| r.is_match(n)))
        .collect();

    let worker = |name: &&'static str| -> CheckResult {
        match run_check_default(name, None) {
            Ok(r) => r,
            Err(e) => CheckResult::from_error(name, &e, Metadata::default()),
        }
    };

    let mut results: Vec<CheckResult> = match jobs {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(|| selected.par_iter().map(worker).collect())
        }
        None => selected.par_iter().map(worker).collect(),
    };
    results.sort_by(|a, b| a.name.cmp(&b.name));
    let summary = Summary::from_results(&results);
    Ok((results, summary))
}
