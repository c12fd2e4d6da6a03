//! Parameter scans: rerun one check while a numeric config field sweeps a
//! list of values, with monotonicity and convergence-order summaries.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::suite::config::CheckConfig;
use crate::suite::emit::format_float;
use crate::suite::result::CheckResult;
use crate::suite::runner::run_check;

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub value: f64,
    pub result: CheckResult,
}

#[derive(Debug, Clone)]
pub struct ScanTable {
    pub check: String,
    pub param: String,
    pub rows: Vec<ScanRow>,
    /// Whether the max residual strictly decreases along the scan.
    pub monotone_decreasing: Option<bool>,
    /// log-2 convergence order fitted between consecutive rows (geometric
    /// parameter spacing assumed), when at least two rows carry residuals.
    pub fit_order: Option<f64>,
}

/// Set a dot-separated numeric field in a JSON config tree.
fn set_numeric(root: &mut Value, path: &str, value: f64) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::BadParamPath(format!("'{path}': '{key}' is not an object")))?;
        if i + 1 == parts.len() {
            let slot = map
                .get_mut(*key)
                .ok_or_else(|| Error::BadParamPath(format!("'{path}': no field '{key}'")))?;
            match slot {
                Value::Number(n) => {
                    *slot = if n.is_u64() || n.is_i64() {
                        if value.fract() != 0.0 {
                            return Err(Error::BadParamPath(format!(
                                "'{path}' is integer-valued; got {value}"
                            )));
                        }
                        Value::from(value as i64)
                    } else {
                        Value::from(value)
                    };
                }
                _ => {
                    return Err(Error::BadParamPath(format!(
                        "'{path}' does not address a numeric field"
                    )))
                }
            }
            return Ok(());
        }
        node = map
            .get_mut(*key)
            .ok_or_else(|| Error::BadParamPath(format!("'{path}': no field '{key}'")))?;
    }
    Err(Error::BadParamPath(path.into()))
}

/// Run `check` once per value of `param`, carrying everything else from
/// `base`.
pub fn scan(base: &CheckConfig, param: &str, values: &[f64]) -> Result<ScanTable> {
    let check = base
        .check
        .clone()
        .ok_or_else(|| Error::Config("scan config must name a check".into()))?;
    let base_json = serde_json::to_value(base).map_err(|e| Error::Config(e.to_string()))?;

    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut json = base_json.clone();
        set_numeric(&mut json, param, v)?;
        let cfg: CheckConfig =
            serde_json::from_value(json).map_err(|e| Error::Config(e.to_string()))?;
        let result = run_check(&check, &cfg)?;
        rows.push(ScanRow { value: v, result });
    }

    let residuals: Vec<f64> = rows.iter().map(|r| r.result.max_residual()).collect();
    let monotone_decreasing = if residuals.len() >= 2 {
        Some(residuals.windows(2).all(|w| w[1] < w[0]))
    } else {
        None
    };
    let fit_order = if residuals.len() >= 2 && residuals.iter().all(|&r| r > 0.0) {
        let mut orders = Vec::new();
        for w in residuals.windows(2) {
            orders.push((w[0] / w[1]).log2());
        }
        Some(orders.iter().sum::<f64>() / orders.len() as f64)
    } else {
        None
    };

    Ok(ScanTable {
        check,
        param: param.to_string(),
        rows,
        monotone_decreasing,
        fit_order,
    })
}

impl ScanTable {
    /// CSV rows: value, then the per-check summary columns.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.param, crate::suite::emit::CSV_HEADER);
        for row in &self.rows {
            let body = crate::suite::emit::to_csv(std::slice::from_ref(&row.result));
            let line = body.lines().nth(1).unwrap_or("");
            out.push_str(&format!("{},{}\n", format_float(row.value), line));
        }
        out
    }
}
