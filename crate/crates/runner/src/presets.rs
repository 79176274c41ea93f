//! Named scenario sets.
//!
//! * `fig1`..`fig4`: uncontrolled, DDC, all-to-all CeDDC and four clusters of
//!   250, run as a coupled set sharing one intended-switching schedule.
//! * `fig5`, `fig6`: CeDDC with cluster sizes 1, 250, 500 and 1000.
//! * `fig7`, `fig8`: mixtures `(n1, n2)` of DDC and CeDDC devices.

use std::path::Path;

use ddc_core::{coupled_run, PolicyAssignment, ScenarioConfig};

use crate::output::{write_bundle, write_table, BundleOptions, TableRow};
use crate::{Result, RunnerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Policies,
    ClusterSizes,
    Mixtures,
}

impl Preset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "fig1" | "fig2" | "fig3" | "fig4" => Ok(Preset::Policies),
            "fig5" | "fig6" => Ok(Preset::ClusterSizes),
            "fig7" | "fig8" => Ok(Preset::Mixtures),
            other => Err(RunnerError::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedScenario {
    pub name: String,
    pub config: ScenarioConfig,
}

pub fn equal_clusters(devices: usize, size: usize) -> Vec<usize> {
    let size = size.clamp(1, devices.max(1));
    let mut sizes = vec![size; devices / size];
    if !devices.is_multiple_of(size) {
        sizes.push(devices % size);
    }
    sizes
}

pub fn ceddc_clusters(base: &ScenarioConfig, size: usize) -> ScenarioConfig {
    let mut c = base.clone();
    c.policy_assignment = PolicyAssignment::Ceddc;
    c.comm.enabled = true;
    c.comm.cluster_sizes = equal_clusters(c.fleet.devices, size);
    c
}

pub fn mixture(base: &ScenarioConfig, n2: usize) -> ScenarioConfig {
    let mut c = base.clone();
    let n = c.fleet.devices;
    c.policy_assignment = PolicyAssignment::Mixed { n1: n - n2.min(n), n2: n2.min(n) };
    c.comm.enabled = true;
    c.comm.cluster_sizes = Vec::new();
    c
}

pub fn scenarios(preset: Preset, base: &ScenarioConfig) -> Vec<NamedScenario> {
    let n = base.fleet.devices;
    let named = |name: String, config| NamedScenario { name, config };
    match preset {
        Preset::Policies => {
            let mut uncontrolled = base.clone();
            uncontrolled.policy_assignment = PolicyAssignment::Uncontrolled;
            let mut ddc = base.clone();
            ddc.policy_assignment = PolicyAssignment::Ddc;
            vec![
                named("no_ddc".into(), uncontrolled),
                named("ddc".into(), ddc),
                named("ceddc_all".into(), ceddc_clusters(base, n)),
                named("ceddc_4x250".into(), ceddc_clusters(base, n / 4)),
            ]
        }
        Preset::ClusterSizes => [1, n / 4, n / 2, n]
            .into_iter()
            .map(|size| named(format!("cluster_{size}"), ceddc_clusters(base, size)))
            .collect(),
        Preset::Mixtures => [0, n / 5, n / 2, 4 * n / 5, n]
            .into_iter()
            .map(|n2| named(format!("n1_{}_n2_{n2}", n - n2), mixture(base, n2)))
            .collect(),
    }
}

/// Runs every scenario of `preset`, writing one bundle per scenario under
/// `out` plus `comparison.csv`.
pub fn run_preset(
    preset: Preset,
    base: &ScenarioConfig,
    out: &Path,
    options: &BundleOptions,
) -> Result<Vec<TableRow>> {
    let set = scenarios(preset, base);
    for s in &set {
        s.config.validate()?;
    }
    let configs: Vec<_> = set.iter().map(|s| s.config.clone()).collect();
    let outputs = coupled_run::<f64>(&configs)?;
    let mut rows = Vec::with_capacity(set.len());
    for (s, output) in set.iter().zip(&outputs) {
        let bundle = write_bundle(&out.join(&s.name), &s.name, output, options, None)?;
        rows.push(TableRow {
            label: s.name.clone(),
            summary: bundle.summary,
        });
    }
    write_table(&out.join("comparison.csv"), &rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_map_to_presets() {
        assert_eq!(Preset::from_name("fig3").unwrap(), Preset::Policies);
        assert_eq!(Preset::from_name("fig6").unwrap(), Preset::ClusterSizes);
        assert_eq!(Preset::from_name("fig8").unwrap(), Preset::Mixtures);
        let err = Preset::from_name("fig9").unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn clusters_cover_the_fleet() {
        assert_eq!(equal_clusters(1000, 250), vec![250; 4]);
        assert_eq!(equal_clusters(10, 4), vec![4, 4, 2]);
        assert_eq!(equal_clusters(3, 1), vec![1, 1, 1]);
        assert_eq!(equal_clusters(5, 0), vec![1; 5]);
    }

    #[test]
    fn every_preset_scenario_is_valid() {
        let base = ScenarioConfig::default();
        for p in [Preset::Policies, Preset::ClusterSizes, Preset::Mixtures] {
            for s in scenarios(p, &base) {
                s.config.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            }
        }
        let mixes: Vec<_> = scenarios(Preset::Mixtures, &base)
            .into_iter()
            .map(|s| s.config.policy_assignment.split(1000))
            .collect();
        assert_eq!(mixes, vec![(1000, 0), (800, 200), (500, 500), (200, 800), (0, 1000)]);
    }
}
