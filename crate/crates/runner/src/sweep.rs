//! One-parameter sweeps over a base configuration.
//!
//! A parameter is either a dotted path into the JSON config (`ddc.gamma`,
//! `comm.window_T`, `plant.H`, `seed`, ...) or one of the structural
//! parameters `cluster_size` (all devices CeDDC in equal clusters) and `n2`
//! (number of CeDDC devices in a DDC/CeDDC mixture).

use std::path::Path;

use ddc_core::{run, ScenarioConfig};
use serde_json::Value;

use crate::output::{write_bundle, write_table, BundleOptions, TableRow};
use crate::presets::{ceddc_clusters, mixture};
use crate::{config, Result, RunnerError};

pub fn sweep_config(base: &ScenarioConfig, param: &str, value: &str) -> Result<ScenarioConfig> {
    let bad_value = || RunnerError::InvalidValue {
        param: param.to_string(),
        value: value.to_string(),
    };
    match param {
        "cluster_size" => {
            let size: usize = value.parse().map_err(|_| bad_value())?;
            let c = ceddc_clusters(base, size);
            c.validate()?;
            Ok(c)
        }
        "n2" => {
            let n2: usize = value.parse().map_err(|_| bad_value())?;
            if n2 > base.fleet.devices {
                return Err(bad_value());
            }
            let c = mixture(base, n2);
            c.validate()?;
            Ok(c)
        }
        path => {
            let mut doc = serde_json::to_value(base).expect("config serializes");
            let pointer = format!("/{}", path.replace('.', "/"));
            let slot = doc
                .pointer_mut(&pointer)
                .filter(|v| !v.is_object())
                .ok_or_else(|| RunnerError::UnknownParameter(path.to_string()))?;
            *slot = serde_json::from_str::<Value>(value).unwrap_or_else(|_| Value::String(value.into()));
            let capacity_given = path == "plant.P_G" || !path.starts_with("fleet.");
            if !capacity_given {
                if let Some(plant) = doc.get_mut("plant").and_then(Value::as_object_mut) {
                    plant.remove("P_G");
                }
            }
            config::from_value(doc)
        }
    }
}

pub fn sweep_configs(base: &ScenarioConfig, param: &str, values: &[String]) -> Result<Vec<ScenarioConfig>> {
    values.iter().map(|v| sweep_config(base, param, v)).collect()
}

/// Runs the sweep, writing `<param>=<value>` bundles and `sweep.csv` under `out`.
pub fn run_sweep(
    base: &ScenarioConfig,
    param: &str,
    values: &[String],
    out: &Path,
    options: &BundleOptions,
) -> Result<Vec<TableRow>> {
    let configs = sweep_configs(base, param, values)?;
    let mut rows = Vec::with_capacity(configs.len());
    for (value, config) in values.iter().zip(&configs) {
        let label = format!("{param}={value}");
        let output = run::<f64>(config)?;
        let bundle = write_bundle(&out.join(&label), &label, &output, options, None)?;
        rows.push(TableRow {
            label: value.clone(),
            summary: bundle.summary,
        });
    }
    write_table(&out.join("sweep.csv"), &rows)?;
    Ok(rows)
}
