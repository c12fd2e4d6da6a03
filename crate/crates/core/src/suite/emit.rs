//! Result persistence: JSON and CSV with floats at 17 significant digits so
//! re-reading reproduces every value bit-exactly.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::suite::result::{CheckResult, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Csv,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(EmitFormat::Json),
            "csv" => Ok(EmitFormat::Csv),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly on re-parse.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no literals for these; keep a parseable marker
        format!("\"{x}\"")
    }
}

/// serde_json formatter printing every float with 17 significant digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(format_float(value as f64).as_bytes())
    }
}

#[derive(Serialize)]
struct Document<'a> {
    results: &'a [CheckResult],
    summary: Summary,
}

pub fn to_json(results: &[CheckResult]) -> Result<String> {
    let doc = Document {
        results,
        summary: Summary::from_results(results),
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    doc.serialize(&mut ser)
        .map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
}

pub const CSV_HEADER: &str =
    "name,pass,expected_nonzero,engine,seed,runtime_ms,dims,max_residual,residuals";

pub fn to_csv(results: &[CheckResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let dims = r
            .metadata
            .dims
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("x");
        let residuals = r
            .residuals
            .iter()
            .map(|e| format!("{}={}", e.name, format_float(e.value)))
            .collect::<Vec<_>>()
            .join("|");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.pass,
            r.expected_nonzero,
            r.metadata.engine,
            r.metadata.seed.map_or(String::new(), |s| s.to_string()),
            format_float(r.metadata.runtime_ms),
            dims,
            format_float(r.max_residual()),
            residuals,
        ));
    }
    out
}

/// Write results in the requested format; field order is struct order,
/// stable across runs.
pub fn emit_results(results: &[CheckResult], format: EmitFormat, path: &Path) -> Result<()> {
    let text = match format {
        EmitFormat::Json => to_json(results)?,
        EmitFormat::Csv => to_csv(results),
    };
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Parse a JSON document produced by [`emit_results`].
pub fn read_json(text: &str) -> Result<Vec<CheckResult>> {
    #[derive(serde::Deserialize)]
    struct Doc {
        results: Vec<CheckResult>,
        #[allow(dead_code)]
        summary: Summary,
    }
    let doc: Doc = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    Ok(doc.results)
}
