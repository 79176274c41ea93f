//! JSON scenario configuration.
//!
//! Every field is optional; missing fields take the reference parameter set.
//! When `plant.P_G` is omitted the capacity follows the fleet size as
//! `N * P0 / 2`.

use std::path::Path;

use ddc_core::ScenarioConfig;
use serde_json::Value;

use crate::{Result, RunnerError};

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| RunnerError::Schema {
        field: ".".into(),
        message: e.to_string(),
    })?;
    from_value(value)
}

/// Builds a validated config from an already parsed JSON document.
pub fn from_value(value: Value) -> Result<ScenarioConfig> {
    let explicit_capacity = value.pointer("/plant/P_G").is_some();
    let mut config: ScenarioConfig =
        serde_path_to_error::deserialize(&value).map_err(|e| RunnerError::Schema {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    if !explicit_capacity {
        config.plant.capacity = config.fleet.devices as f64 * config.fleet.rated_power / 2.0;
    }
    config.validate()?;
    Ok(config)
}

pub fn to_json(config: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ddc_core::PolicyAssignment;

    #[test]
    fn empty_config_gives_reference_parameters() {
        let c = parse_config_str("{}").unwrap();
        assert_eq!(c.fleet.devices, 1000);
        assert_eq!((c.fleet.on_rate, c.fleet.off_rate), (6.55e-4, 6.55e-4));
        assert_eq!(c.plant.inertia, 2.26);
        assert_eq!(c.plant.tau_g, 0.78);
        assert_eq!(c.plant.droop, 0.07);
        assert_eq!(c.plant.secondary_gain, 50.0);
        assert_eq!(c.plant.capacity, 500.0);
        assert_eq!(c.plant.load_sensitivity, 0.026);
        assert_eq!((c.ddc.epsilon, c.ddc.epsilon1, c.ddc.gamma), (0.05, 0.06, 1.2e-3));
        assert_eq!(c, ScenarioConfig::default());
    }

    #[test]
    fn capacity_follows_fleet_size_unless_given() {
        let c = parse_config_str(r#"{"fleet": {"N": 200}}"#).unwrap();
        assert_eq!(c.plant.capacity, 100.0);
        let c = parse_config_str(r#"{"fleet": {"N": 200}, "plant": {"P_G": 300}}"#).unwrap();
        assert_eq!(c.plant.capacity, 300.0);
    }

    #[test]
    fn four_clusters_of_250() {
        let c = parse_config_str(
            r#"{"policy_assignment": "ceddc", "comm": {"cluster_sizes": [250, 250, 250, 250]}}"#,
        )
        .unwrap();
        assert_eq!(c.policy_assignment, PolicyAssignment::Ceddc);
        assert_eq!(c.comm.cluster_sizes.len(), 4);
    }

    #[test]
    fn mixture_syntax() {
        let c = parse_config_str(r#"{"policy_assignment": {"mixed": {"n1": 800, "n2": 200}}}"#).unwrap();
        assert_eq!(c.policy_assignment, PolicyAssignment::Mixed { n1: 800, n2: 200 });
    }

    #[test]
    fn cluster_sum_mismatch_is_rejected() {
        let err = parse_config_str(
            r#"{"policy_assignment": "ceddc", "comm": {"cluster_sizes": [300, 300, 300]}}"#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "validation");
        assert_eq!(err.field(), Some("comm.cluster_sizes"));
    }

    #[test]
    fn schema_errors_carry_the_field_path() {
        let err = parse_config_str(r#"{"ddc": {"gamma": "fast"}}"#).unwrap_err();
        assert_eq!(err.field(), Some("ddc.gamma"));
        let err = parse_config_str(r#"{"comm": {"window": 3}}"#).unwrap_err();
        assert_eq!(err.field(), Some("comm.window"));
        let err = parse_config_str(r#"{"fleet": {"N": -3}}"#).unwrap_err();
        assert_eq!(err.field(), Some("fleet.N"));
        let err = parse_config_str("[1, 2").unwrap_err();
        assert_eq!(err.kind(), "validation");
    }

    #[test]
    fn serialized_config_parses_back() {
        let mut c = ScenarioConfig {
            seed: 99,
            policy_assignment: PolicyAssignment::Mixed { n1: 500, n2: 500 },
            ..ScenarioConfig::default()
        };
        c.comm.window = 12.5;
        assert_eq!(parse_config_str(&to_json(&c)).unwrap(), c);
    }
}
