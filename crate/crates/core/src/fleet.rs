//! Two-state appliance fleet with frequency-gated switching.
//!
//! Each device follows an intended on/off schedule driven by independent
//! Markov switching rates. Controlled devices may defer the actual switch;
//! a deferred switch is a pending task and exists exactly while the actual
//! state differs from the intended one.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Switching direction of a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    /// Direction that brings a device into state `on`.
    pub fn towards(on: bool) -> Self {
        if on {
            Switch::On
        } else {
            Switch::Off
        }
    }
}

/// Kind of a pending task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// A deferred switch-on: energy still to be consumed.
    Consuming,
    /// A deferred switch-off: energy consumed in excess.
    Saving,
}

impl TaskKind {
    /// Switch that resolves the task.
    pub fn resolving_switch(self) -> Switch {
        match self {
            TaskKind::Consuming => Switch::On,
            TaskKind::Saving => Switch::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Uncontrolled,
    Ddc,
    /// Frequency-gated control with fallback to a match inside the given cluster.
    Ceddc(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct FleetParams<S> {
    #[serde(rename = "N")]
    pub devices: usize,
    /// Off to on rate of the intended state (1/s).
    #[serde(rename = "p")]
    pub on_rate: S,
    /// On to off rate of the intended state (1/s).
    #[serde(rename = "q")]
    pub off_rate: S,
    #[serde(rename = "P0")]
    pub rated_power: S,
}

impl<S: Scalar> FleetParams<S> {
    pub fn cast<T: Scalar>(&self) -> FleetParams<T> {
        FleetParams {
            devices: self.devices,
            on_rate: T::lit(self.on_rate.to_f64_lossy()),
            off_rate: T::lit(self.off_rate.to_f64_lossy()),
            rated_power: T::lit(self.rated_power.to_f64_lossy()),
        }
    }

    /// Stationary probability of the intended state being on.
    pub fn on_probability(&self) -> S {
        self.on_rate / (self.on_rate + self.off_rate)
    }
}

impl<S: Scalar> Default for FleetParams<S> {
    fn default() -> Self {
        Self {
            devices: 1000,
            on_rate: S::lit(6.55e-4),
            off_rate: S::lit(6.55e-4),
            rated_power: S::one(),
        }
    }
}

/// Thresholds and recovery rate of the frequency-gated protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct DdcParams<S> {
    /// Switching threshold (Hz).
    pub epsilon: S,
    /// Recovery threshold (Hz).
    pub epsilon1: S,
    /// Recovery attempt rate per pending task (1/s).
    pub gamma: S,
}

impl<S: Scalar> DdcParams<S> {
    pub fn cast<T: Scalar>(&self) -> DdcParams<T> {
        DdcParams {
            epsilon: T::lit(self.epsilon.to_f64_lossy()),
            epsilon1: T::lit(self.epsilon1.to_f64_lossy()),
            gamma: T::lit(self.gamma.to_f64_lossy()),
        }
    }
}

impl<S: Scalar> Default for DdcParams<S> {
    fn default() -> Self {
        Self {
            epsilon: S::lit(0.05),
            epsilon1: S::lit(0.06),
            gamma: S::lit(1.2e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Device {
    pub id: usize,
    pub actual: bool,
    pub intended: bool,
    pub policy: Policy,
}

impl Device {
    pub fn new(id: usize, on: bool, policy: Policy) -> Self {
        Self {
            id,
            actual: on,
            intended: on,
            policy,
        }
    }

    pub fn pending(&self) -> Option<TaskKind> {
        match (self.intended, self.actual) {
            (true, false) => Some(TaskKind::Consuming),
            (false, true) => Some(TaskKind::Saving),
            _ => None,
        }
    }

    fn switch_to_intended(&mut self) {
        self.actual = self.intended;
    }
}

/// Fallback consulted by communicating devices when the frequency gate is closed.
pub trait SwitchMatcher {
    /// Looks for a counterpart in the device's cluster that released a slot for
    /// `direction`, consuming it on success.
    fn try_match(&mut self, device: &Device, direction: Switch) -> bool;
}

/// Matcher that never finds a counterpart.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoMatch;

impl SwitchMatcher for NoMatch {
    fn try_match(&mut self, _device: &Device, _direction: Switch) -> bool {
        false
    }
}

/// Samples the intended-state process for one step, flipping `intended` when
/// the event fires. `draw` is uniform on [0, 1).
pub fn sample_intended_flip<S: Scalar>(
    device: &mut Device,
    params: &FleetParams<S>,
    dt: S,
    draw: S,
) -> bool {
    let rate = if device.intended {
        params.off_rate
    } else {
        params.on_rate
    };
    let flipped = draw < rate * dt;
    if flipped {
        device.intended = !device.intended;
    }
    flipped
}

/// Whether a regular switch in `direction` is allowed at frequency `omega`.
pub fn ddc_gate<S: Scalar>(direction: Switch, omega: S, params: &DdcParams<S>, omega_ref: S) -> bool {
    match direction {
        Switch::On => omega > omega_ref - params.epsilon,
        Switch::Off => omega < omega_ref + params.epsilon,
    }
}

/// Whether a pending task of kind `task` may be recovered at frequency `omega`.
pub fn recovery_gate<S: Scalar>(task: TaskKind, omega: S, params: &DdcParams<S>, omega_ref: S) -> bool {
    match task {
        TaskKind::Consuming => omega > omega_ref + params.epsilon1,
        TaskKind::Saving => omega < omega_ref - params.epsilon1,
    }
}

/// One recovery opportunity for a pending device. Returns whether the device
/// switched.
pub fn attempt_recovery<S: Scalar, M: SwitchMatcher + ?Sized>(
    device: &mut Device,
    omega: S,
    params: &DdcParams<S>,
    omega_ref: S,
    dt: S,
    draw: S,
    matcher: Option<&mut M>,
) -> bool {
    let Some(task) = device.pending() else {
        return false;
    };
    if draw >= params.gamma * dt {
        return false;
    }
    let allowed = recovery_gate(task, omega, params, omega_ref)
        || fallback(device, task.resolving_switch(), matcher);
    if allowed {
        device.switch_to_intended();
    }
    allowed
}

/// Resolves the actual state after the intended state flipped. Returns whether
/// the device switched.
pub fn apply_intended_flip<S: Scalar, M: SwitchMatcher + ?Sized>(
    device: &mut Device,
    omega: S,
    params: &DdcParams<S>,
    omega_ref: S,
    matcher: Option<&mut M>,
) -> bool {
    if device.intended == device.actual {
        // Opposite pending task annihilated.
        return false;
    }
    let direction = Switch::towards(device.intended);
    let allowed = match device.policy {
        Policy::Uncontrolled => true,
        Policy::Ddc | Policy::Ceddc(_) => {
            ddc_gate(direction, omega, params, omega_ref) || fallback(device, direction, matcher)
        }
    };
    if allowed {
        device.switch_to_intended();
    }
    allowed
}

fn fallback<M: SwitchMatcher + ?Sized>(device: &Device, direction: Switch, matcher: Option<&mut M>) -> bool {
    match (device.policy, matcher) {
        (Policy::Ceddc(_), Some(m)) => m.try_match(device, direction),
        _ => false,
    }
}

/// Load of the fleet at the reference frequency.
pub fn total_load<S: Scalar>(devices: &[Device], rated_power: S) -> S {
    rated_power * S::lit(on_count(devices) as f64)
}

pub fn on_count(devices: &[Device]) -> usize {
    devices.iter().filter(|d| d.actual).count()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PendingCounts {
    pub consuming: usize,
    pub saving: usize,
}

impl PendingCounts {
    pub fn total(&self) -> usize {
        self.consuming + self.saving
    }
}

pub fn pending_counts(devices: &[Device]) -> PendingCounts {
    devices
        .iter()
        .fold(PendingCounts::default(), |mut acc, d| {
            match d.pending() {
                Some(TaskKind::Consuming) => acc.consuming += 1,
                Some(TaskKind::Saving) => acc.saving += 1,
                None => {}
            }
            acc
        })
}
