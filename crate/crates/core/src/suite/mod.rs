//! Check registry, configuration, execution engine, convergence scans and
//! result persistence — everything the CLI drives.

pub mod checks;
pub mod config;
pub mod emit;
pub mod result;
pub mod runner;
pub mod scan;

pub use checks::{find, registry, Outcome};
pub use config::{CheckConfig, EngineConfig, LatticeConfig, SpaceConfig, TheoryConfig};
pub use emit::{emit_results, read_json, to_csv, to_json, EmitFormat};
pub use result::{CheckResult, Metadata, ResidualEntry, Summary};
pub use runner::{list_checks, run_check, run_check_default, run_suite};
pub use scan::{scan, ScanTable};
