//! TOML scenario files.
//!
//! ```toml
//! # spike-alloc scenario v1
//! format_version = 1
//! n_vehicles = 2
//! m_tasks = 2
//! priority = [2.0, 1.0]
//! success = [0.5, 1.0]
//! ttc = [[1.0, 8.0], [4.0, 8.0]]        # one row per vehicle
//! connectivity = [[1, 1], [1, 1]]      # optional, defaults to all ones
//! allow_unassignable = false           # optional
//!
//! [weights]                            # optional, defaults 0.45 / 0.1 / 0.5
//! w_p = 0.45
//! w_s = 0.1
//! w_t = 0.5
//! ```
//!
//! Arrays are 0-based. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{RateWeights, Scenario, ScenarioError};
use crate::scalar::Scalar;

pub const SCENARIO_HEADER: &str = "# spike-alloc scenario v1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    format_version: Option<u32>,
    n_vehicles: usize,
    m_tasks: usize,
    priority: Vec<f64>,
    success: Vec<f64>,
    ttc: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    connectivity: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_unassignable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<WeightsFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    w_p: f64,
    w_s: f64,
    w_t: f64,
}

fn parse_err(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        path: None,
        message: message.into(),
    }
}

fn matrix<V: Copy>(field: &str, rows: &[Vec<V>], n: usize, m: usize) -> Result<Array2<V>, ScenarioError> {
    if rows.len() != n {
        return Err(ScenarioError::Dimension {
            axis: format!("{field} rows"),
            expected: n,
            found: rows.len(),
        });
    }
    let mut flat = Vec::with_capacity(n * m);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(ScenarioError::Dimension {
                axis: format!("{field}[{i}] columns"),
                expected: m,
                found: row.len(),
            });
        }
        flat.extend_from_slice(row);
    }
    Ok(Array2::from_shape_vec((n, m), flat).expect("shape checked"))
}

/// Parses a scenario from TOML text.
pub fn scenario_from_str<T: Scalar>(text: &str) -> Result<Scenario<T>, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| parse_err(e.to_string().trim_end().to_string()))?;
    if let Some(v) = file.format_version {
        if v != FORMAT_VERSION {
            return Err(parse_err(format!("unsupported format_version {v} (expected {FORMAT_VERSION})")));
        }
    }
    let (n, m) = (file.n_vehicles, file.m_tasks);
    if file.priority.len() != m {
        return Err(ScenarioError::Dimension {
            axis: "priority".into(),
            expected: m,
            found: file.priority.len(),
        });
    }
    if file.success.len() != m {
        return Err(ScenarioError::Dimension {
            axis: "success".into(),
            expected: m,
            found: file.success.len(),
        });
    }
    let ttc = matrix("ttc", &file.ttc, n, m)?.mapv(T::of);
    let connectivity = match &file.connectivity {
        Some(rows) => {
            let raw = matrix("connectivity", rows, n, m)?;
            if let Some(((i, j), v)) = raw.indexed_iter().find(|(_, &v)| v > 1) {
                return Err(ScenarioError::Invalid {
                    field: format!("connectivity[{i}][{j}]"),
                    reason: format!("{v} is not 0 or 1"),
                });
            }
            raw.mapv(|v| v == 1)
        }
        None => Array2::from_elem((n, m), true),
    };
    let weights = match file.weights {
        Some(w) => RateWeights {
            w_p: T::of(w.w_p),
            w_s: T::of(w.w_s),
            w_t: T::of(w.w_t),
        },
        None => RateWeights::default(),
    };
    Scenario::with_connectivity(
        file.priority.into_iter().map(T::of).collect(),
        file.success.into_iter().map(T::of).collect(),
        ttc,
        connectivity,
        weights,
        file.allow_unassignable,
    )
}

/// Serializes a scenario to TOML text, header line included.
pub fn scenario_to_string<T: Scalar>(scenario: &Scenario<T>) -> String {
    let rows = |a: &Array2<T>| -> Vec<Vec<f64>> {
        a.rows().into_iter().map(|r| r.iter().map(|v| v.as_f64()).collect()).collect()
    };
    let w = scenario.weights();
    let file = ScenarioFile {
        format_version: Some(FORMAT_VERSION),
        n_vehicles: scenario.n_vehicles(),
        m_tasks: scenario.m_tasks(),
        priority: scenario.priority().iter().map(|v| v.as_f64()).collect(),
        success: scenario.success().iter().map(|v| v.as_f64()).collect(),
        ttc: rows(scenario.ttc()),
        connectivity: Some(
            scenario
                .connectivity()
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|&c| c as u8).collect())
                .collect(),
        ),
        allow_unassignable: scenario.allows_unassignable(),
        weights: Some(WeightsFile {
            w_p: w.w_p.as_f64(),
            w_s: w.w_s.as_f64(),
            w_t: w.w_t.as_f64(),
        }),
    };
    let body = toml::to_string(&file).expect("scenario serializes to TOML");
    format!("{SCENARIO_HEADER}\n{body}")
}

pub fn load_scenario<T: Scalar>(path: impl AsRef<Path>) -> Result<Scenario<T>, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    scenario_from_str(&text).map_err(|e| match e {
        ScenarioError::Parse { message, .. } => ScenarioError::Parse {
            path: Some(path.display().to_string()),
            message,
        },
        other => other,
    })
}

pub fn save_scenario<T: Scalar>(scenario: &Scenario<T>, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    fs::write(path, scenario_to_string(scenario)).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
