//! Deterministic fixed-step simulation of the plant driven by the fleet.
//!
//! Each step runs, in this order:
//! 1. expiry of communication registers,
//! 2. intended-state sampling and switch resolution, devices in ascending id,
//! 3. recovery attempts, devices in ascending id,
//! 4. recomputation of the total load,
//! 5. one RK4 step of the plant with that load,
//! 6. advance of time and sampling.
//!
//! Every device draws exactly twice per step from its own stream, whatever
//! its policy or the outcome, so scenarios sharing a seed follow the same
//! intended schedule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comm::{CommRegistry, RegistryError};
use crate::fleet::{
    self, apply_intended_flip, attempt_recovery, sample_intended_flip, DdcParams, Device,
    FleetParams, Policy, Switch, SwitchMatcher,
};
use crate::plant::{self, IntegrationFailure, PlantParams, PlantState};
use crate::rng::{self, LazyShuffle, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("integration failure at t={t}: {source}")]
    Integration {
        t: f64,
        #[source]
        source: IntegrationFailure,
    },
    #[error("coupled scenarios differ in shared field {0}")]
    CoupledMismatch(&'static str),
}

impl SimError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// How control policies are assigned to the fleet.
///
/// In a mixture the first `n1` device ids run basic DDC and the remaining
/// `n2` communicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicyAssignment {
    Uncontrolled,
    #[default]
    Ddc,
    Ceddc,
    Mixed { n1: usize, n2: usize },
}

impl PolicyAssignment {
    /// Number of basic-DDC and communicating devices in a fleet of `devices`.
    pub fn split(&self, devices: usize) -> (usize, usize) {
        match *self {
            PolicyAssignment::Uncontrolled => (0, 0),
            PolicyAssignment::Ddc => (devices, 0),
            PolicyAssignment::Ceddc => (0, devices),
            PolicyAssignment::Mixed { n1, n2 } => (n1, n2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommConfig {
    pub enabled: bool,
    /// Register lifetime (s).
    #[serde(rename = "window_T")]
    pub window: f64,
    /// Partition of the communicating devices, in id order. Empty means a
    /// single cluster holding all of them.
    pub cluster_sizes: Vec<usize>,
}

impl Default for CommConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            window: 30.0,
            cluster_sizes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub dt: f64,
    pub t_total: f64,
    /// Samples before this time are excluded from statistics.
    pub t_transient: f64,
    pub plant: PlantParams<f64>,
    pub fleet: FleetParams<f64>,
    pub ddc: DdcParams<f64>,
    pub comm: CommConfig,
    pub policy_assignment: PolicyAssignment,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dt: 0.01,
            t_total: 2e4,
            t_transient: 200.0,
            plant: PlantParams::default(),
            fleet: FleetParams::default(),
            ddc: DdcParams::default(),
            comm: CommConfig::default(),
            policy_assignment: PolicyAssignment::default(),
        }
    }
}

impl ScenarioConfig {
    /// Number of integration steps of a full run.
    pub fn steps(&self) -> u64 {
        (self.t_total / self.dt).round() as u64
    }

    pub fn transient_steps(&self) -> u64 {
        (self.t_transient / self.dt).ceil() as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        if !finite_positive(self.dt) {
            return Err(SimError::invalid("dt", "must be positive"));
        }
        if !finite_positive(self.t_total) {
            return Err(SimError::invalid("t_total", "must be positive"));
        }
        if !(self.t_transient >= 0.0 && self.t_transient < self.t_total) {
            return Err(SimError::invalid("t_transient", "must lie in [0, t_total)"));
        }
        if let Some(field) = self.plant.violation() {
            return Err(SimError::invalid(format!("plant.{field}"), "out of range"));
        }
        let fleet = &self.fleet;
        if fleet.devices == 0 {
            return Err(SimError::invalid("fleet.N", "must be at least 1"));
        }
        for (name, rate) in [("fleet.p", fleet.on_rate), ("fleet.q", fleet.off_rate)] {
            if !finite_positive(rate) {
                return Err(SimError::invalid(name, "must be positive"));
            }
            if rate * self.dt >= 0.1 {
                return Err(SimError::invalid(name, "rate * dt must stay below 0.1"));
            }
        }
        if !finite_positive(fleet.rated_power) {
            return Err(SimError::invalid("fleet.P0", "must be positive"));
        }
        let ddc = &self.ddc;
        if !(ddc.epsilon > 0.0 && ddc.epsilon < ddc.epsilon1 && ddc.epsilon1.is_finite()) {
            return Err(SimError::invalid("ddc", "thresholds must satisfy 0 < epsilon < epsilon1"));
        }
        if !(ddc.gamma >= 0.0 && ddc.gamma * self.dt <= 1.0) {
            return Err(SimError::invalid("ddc.gamma", "gamma * dt must lie in [0, 1]"));
        }

        let (n1, n2) = self.policy_assignment.split(fleet.devices);
        if let PolicyAssignment::Mixed { .. } = self.policy_assignment {
            if n1 + n2 != fleet.devices {
                return Err(SimError::invalid(
                    "policy_assignment.mixed",
                    format!("n1 + n2 = {} but N = {}", n1 + n2, fleet.devices),
                ));
            }
        }
        if n2 > 0 {
            if !self.comm.enabled {
                return Err(SimError::invalid(
                    "comm.enabled",
                    format!("{n2} communicating devices assigned but communication is disabled"),
                ));
            }
            if !(self.comm.window >= 0.0 && self.comm.window.is_finite()) {
                return Err(SimError::invalid("comm.window_T", "must be non-negative"));
            }
            let sizes = &self.comm.cluster_sizes;
            if sizes.contains(&0) {
                return Err(SimError::invalid("comm.cluster_sizes", "cluster sizes must be positive"));
            }
            let sum: usize = sizes.iter().sum();
            if !sizes.is_empty() && sum != n2 {
                return Err(SimError::invalid(
                    "comm.cluster_sizes",
                    format!("sizes sum to {sum} but {n2} devices communicate"),
                ));
            }
        }
        Ok(())
    }

    /// Per-device policies and the cluster partition of communicating devices.
    fn layout(&self) -> (Vec<Policy>, Vec<Vec<usize>>) {
        let n = self.fleet.devices;
        let (n1, n2) = self.policy_assignment.split(n);
        if let PolicyAssignment::Uncontrolled = self.policy_assignment {
            return (vec![Policy::Uncontrolled; n], Vec::new());
        }
        let sizes = if self.comm.cluster_sizes.is_empty() && n2 > 0 {
            vec![n2]
        } else if n2 > 0 {
            self.comm.cluster_sizes.clone()
        } else {
            Vec::new()
        };
        let mut policies = vec![Policy::Ddc; n1];
        let mut clusters = Vec::with_capacity(sizes.len());
        let mut next = n1;
        for (c, size) in sizes.into_iter().enumerate() {
            clusters.push((next..next + size).collect());
            policies.extend(std::iter::repeat_n(Policy::Ceddc(c), size));
            next += size;
        }
        (policies, clusters)
    }
}

/// Recorded change of a device's intended state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntendedFlip {
    /// Step during which the flip was sampled (0-based).
    pub step: u64,
    pub device: u32,
}

/// Sampled trajectories, one entry per step boundary including `t = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries<S> {
    pub t: Vec<S>,
    pub omega: Vec<S>,
    /// On-count, i.e. `P / P0`.
    pub load: Vec<u32>,
    /// Electric load `P_e / P0`.
    pub electric_load: Vec<S>,
    pub mech_power: Vec<S>,
    pub reserve_power: Vec<S>,
    pub pending_consuming: Vec<u32>,
    pub pending_saving: Vec<u32>,
    /// Pending tasks held by basic-DDC devices.
    pub pending_ddc: Vec<u32>,
    /// Pending tasks held by communicating devices.
    pub pending_ceddc: Vec<u32>,
}

impl<S> TimeSeries<S> {
    fn with_capacity(n: usize) -> Self {
        Self {
            t: Vec::with_capacity(n),
            omega: Vec::with_capacity(n),
            load: Vec::with_capacity(n),
            electric_load: Vec::with_capacity(n),
            mech_power: Vec::with_capacity(n),
            reserve_power: Vec::with_capacity(n),
            pending_consuming: Vec::with_capacity(n),
            pending_saving: Vec::with_capacity(n),
            pending_ddc: Vec::with_capacity(n),
            pending_ceddc: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Sizes of the policy groups of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subpopulations {
    pub uncontrolled: usize,
    pub ddc: usize,
    pub ceddc: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput<S> {
    pub config: ScenarioConfig,
    pub series: TimeSeries<S>,
    pub subpopulations: Subpopulations,
    pub intended_flips: Vec<IntendedFlip>,
    /// Draws taken from each device stream.
    pub device_draws: Vec<u64>,
    pub steps: u64,
}

impl<S: Scalar> RunOutput<S> {
    /// Index of the first sample used for statistics.
    pub fn first_statistic_index(&self) -> usize {
        (self.config.transient_steps() as usize).min(self.series.len())
    }

    /// Post-transient frequency samples.
    pub fn statistic_omega(&self) -> &[S] {
        &self.series.omega[self.first_statistic_index()..]
    }

    /// Post-transient absolute deviations `|omega - omega_ref|`.
    pub fn deviations(&self) -> Vec<S> {
        let omega_ref = S::lit(self.config.plant.omega_ref);
        self.statistic_omega()
            .iter()
            .map(|&w| (w - omega_ref).abs())
            .collect()
    }

    /// Whether every device stream was drawn exactly twice per step.
    pub fn draw_budget_exact(&self) -> bool {
        self.device_draws.iter().all(|&d| d == 2 * self.steps)
    }
}

/// Matcher backed by the registry; search orders are lazy shuffles of
/// per-cluster buffers using the scenario stream.
struct ClusterMatcher<'a, S> {
    registry: &'a mut CommRegistry<S>,
    orders: &'a mut [Vec<usize>],
    rng: &'a mut Stream,
}

impl<S: Scalar> SwitchMatcher for ClusterMatcher<'_, S> {
    fn try_match(&mut self, device: &Device, direction: Switch) -> bool {
        let Policy::Ceddc(cluster) = device.policy else {
            return false;
        };
        let order = LazyShuffle::new(&mut self.orders[cluster], self.rng);
        self.registry
            .find_and_consume(cluster, device.id, direction, order)
            .is_some()
    }
}

/// State of a run in progress.
pub struct Simulation<S> {
    config: ScenarioConfig,
    plant_params: PlantParams<S>,
    fleet_params: FleetParams<S>,
    ddc: DdcParams<S>,
    omega_ref: S,
    dt: S,
    step: u64,
    plant: PlantState<S>,
    devices: Vec<Device>,
    streams: Vec<Stream>,
    scenario_rng: Stream,
    registry: Option<CommRegistry<S>>,
    orders: Vec<Vec<usize>>,
    subpopulations: Subpopulations,
    series: TimeSeries<S>,
    intended_flips: Vec<IntendedFlip>,
}

impl<S: Scalar> Simulation<S> {
    pub fn new(config: &ScenarioConfig) -> Result<Self, SimError> {
        config.validate()?;
        let n = config.fleet.devices;
        let (policies, clusters) = config.layout();
        let subpopulations = Subpopulations {
            uncontrolled: policies.iter().filter(|p| **p == Policy::Uncontrolled).count(),
            ddc: policies.iter().filter(|p| **p == Policy::Ddc).count(),
            ceddc: policies.iter().filter(|p| matches!(p, Policy::Ceddc(_))).count(),
        };

        let mut scenario_rng = rng::scenario_stream(config.seed, n);
        let on_probability = config.fleet.on_probability();
        let devices: Vec<Device> = policies
            .into_iter()
            .enumerate()
            .map(|(id, policy)| Device::new(id, scenario_rng.uniform() < on_probability, policy))
            .collect();
        let streams = (0..n).map(|id| rng::device_stream(config.seed, id)).collect();

        let registry = if clusters.is_empty() {
            None
        } else {
            let registry = CommRegistry::new(n, clusters.clone(), S::lit(config.comm.window))
                .map_err(|e: RegistryError| SimError::invalid("comm.cluster_sizes", e.to_string()))?;
            Some(registry)
        };

        let plant_params: PlantParams<S> = config.plant.cast();
        let fleet_params: FleetParams<S> = config.fleet.cast();
        let load = fleet::total_load(&devices, fleet_params.rated_power);
        let plant = plant::equilibrium_state(load, &plant_params);

        let capacity = config.steps() as usize + 1;
        let mut sim = Self {
            config: config.clone(),
            omega_ref: plant_params.omega_ref,
            plant_params,
            fleet_params,
            ddc: config.ddc.cast(),
            dt: S::lit(config.dt),
            step: 0,
            plant,
            devices,
            streams,
            scenario_rng,
            registry,
            orders: clusters,
            subpopulations,
            series: TimeSeries::with_capacity(capacity),
            intended_flips: Vec::new(),
        };
        sim.sample(load);
        Ok(sim)
    }

    pub fn time(&self) -> S {
        S::lit(self.step as f64 * self.config.dt)
    }

    pub fn plant(&self) -> &PlantState<S> {
        &self.plant
    }

    pub fn plant_params(&self) -> &PlantParams<S> {
        &self.plant_params
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn registry(&self) -> Option<&CommRegistry<S>> {
        self.registry.as_ref()
    }

    pub fn series(&self) -> &TimeSeries<S> {
        &self.series
    }

    pub fn step(&mut self) -> Result<(), SimError> {
        let now = self.time();
        let omega = self.plant.omega;
        let (omega_ref, dt) = (self.omega_ref, self.dt);

        if let Some(registry) = self.registry.as_mut() {
            registry.expire(now);
        }

        for id in 0..self.devices.len() {
            let draw = S::lit(self.streams[id].uniform());
            let device = &mut self.devices[id];
            if !sample_intended_flip(device, &self.fleet_params, dt, draw) {
                continue;
            }
            self.intended_flips.push(IntendedFlip {
                step: self.step,
                device: id as u32,
            });
            match (device.policy, self.registry.as_mut()) {
                (Policy::Ceddc(_), Some(registry)) => {
                    let mut matcher = ClusterMatcher {
                        registry,
                        orders: &mut self.orders,
                        rng: &mut self.scenario_rng,
                    };
                    if apply_intended_flip(device, omega, &self.ddc, omega_ref, Some(&mut matcher)) {
                        matcher.registry.record_switch(id, Switch::towards(device.actual), now);
                    }
                }
                _ => {
                    apply_intended_flip(device, omega, &self.ddc, omega_ref, None::<&mut fleet::NoMatch>);
                }
            }
        }

        for id in 0..self.devices.len() {
            let draw = S::lit(self.streams[id].uniform());
            let device = &mut self.devices[id];
            if device.pending().is_none() {
                continue;
            }
            match (device.policy, self.registry.as_mut()) {
                (Policy::Ceddc(_), Some(registry)) => {
                    let mut matcher = ClusterMatcher {
                        registry,
                        orders: &mut self.orders,
                        rng: &mut self.scenario_rng,
                    };
                    if attempt_recovery(device, omega, &self.ddc, omega_ref, dt, draw, Some(&mut matcher)) {
                        matcher.registry.record_switch(id, Switch::towards(device.actual), now);
                    }
                }
                _ => {
                    attempt_recovery(device, omega, &self.ddc, omega_ref, dt, draw, None::<&mut fleet::NoMatch>);
                }
            }
        }

        let load = fleet::total_load(&self.devices, self.fleet_params.rated_power);
        self.plant = plant::rk4_step(&self.plant, load, &self.plant_params, dt).map_err(|source| {
            SimError::Integration {
                t: (self.step + 1) as f64 * self.config.dt,
                source,
            }
        })?;
        self.step += 1;
        self.sample(load);
        Ok(())
    }

    fn sample(&mut self, load: S) {
        let now = self.time();
        let s = &mut self.series;
        let rated = self.fleet_params.rated_power;
        let mut consuming = 0u32;
        let mut saving = 0u32;
        let mut ddc = 0u32;
        let mut ceddc = 0u32;
        for d in &self.devices {
            if let Some(task) = d.pending() {
                match task {
                    fleet::TaskKind::Consuming => consuming += 1,
                    fleet::TaskKind::Saving => saving += 1,
                }
                match d.policy {
                    Policy::Ddc => ddc += 1,
                    Policy::Ceddc(_) => ceddc += 1,
                    Policy::Uncontrolled => {}
                }
            }
        }
        s.t.push(now);
        s.omega.push(self.plant.omega);
        s.load.push((load / rated).round().to_u32().unwrap_or(u32::MAX));
        s.electric_load
            .push(plant::electric_load(self.plant.omega, load, &self.plant_params) / rated);
        s.mech_power.push(self.plant.mech_power / rated);
        s.reserve_power.push(self.plant.reserve_power / rated);
        s.pending_consuming.push(consuming);
        s.pending_saving.push(saving);
        s.pending_ddc.push(ddc);
        s.pending_ceddc.push(ceddc);
    }

    pub fn finish(self) -> RunOutput<S> {
        RunOutput {
            device_draws: self.streams.iter().map(Stream::draws).collect(),
            config: self.config,
            series: self.series,
            subpopulations: self.subpopulations,
            intended_flips: self.intended_flips,
            steps: self.step,
        }
    }
}

/// Initializes and runs a scenario to completion.
pub fn run<S: Scalar>(config: &ScenarioConfig) -> Result<RunOutput<S>, SimError> {
    let mut sim = Simulation::<S>::new(config)?;
    for _ in 0..config.steps() {
        sim.step()?;
    }
    Ok(sim.finish())
}

/// Runs several policies on one intended schedule. All configs must agree on
/// the seed, the fleet and the time grid.
pub fn coupled_run<S: Scalar>(configs: &[ScenarioConfig]) -> Result<Vec<RunOutput<S>>, SimError> {
    if let Some(first) = configs.first() {
        for c in &configs[1..] {
            if c.seed != first.seed {
                return Err(SimError::CoupledMismatch("seed"));
            }
            if c.fleet != first.fleet {
                return Err(SimError::CoupledMismatch("fleet"));
            }
            if c.dt != first.dt {
                return Err(SimError::CoupledMismatch("dt"));
            }
            if c.t_total != first.t_total {
                return Err(SimError::CoupledMismatch("t_total"));
            }
        }
    }
    configs.iter().map(run).collect()
}
