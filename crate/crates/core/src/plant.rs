//! Aggregate power plant: swing equation, droop governor, integral
//! secondary control and the frequency-sensitive electric load.
//!
//! Powers are expressed in units of the appliance rated power `P0`,
//! frequencies in Hz.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Physical parameters of the plant and of the load's frequency sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct PlantParams<S> {
    /// Reference frequency (Hz).
    pub omega_ref: S,
    /// Inertia constant (s).
    #[serde(rename = "H")]
    pub inertia: S,
    /// Governor time constant (s).
    pub tau_g: S,
    /// Droop coefficient (dimensionless).
    #[serde(rename = "R_droop")]
    pub droop: S,
    /// Secondary control gain (P0 / s).
    #[serde(rename = "K")]
    pub secondary_gain: S,
    /// Nominal generator capacity (P0).
    #[serde(rename = "P_G")]
    pub capacity: S,
    /// Frequency-sensitive load fraction.
    #[serde(rename = "D")]
    pub load_sensitivity: S,
}

impl<S: Scalar> PlantParams<S> {
    /// Reference plant for a fleet of `devices` appliances: capacity is half the
    /// fleet's rated power.
    pub fn for_fleet(devices: usize) -> Self {
        Self {
            omega_ref: S::lit(50.0),
            inertia: S::lit(2.26),
            tau_g: S::lit(0.78),
            droop: S::lit(0.07),
            secondary_gain: S::lit(50.0),
            capacity: S::lit(devices as f64 / 2.0),
            load_sensitivity: S::lit(0.026),
        }
    }

    /// Returns the name of the first violated parameter constraint, if any.
    pub fn violation(&self) -> Option<&'static str> {
        let positive = [
            (self.omega_ref, "omega_ref"),
            (self.inertia, "H"),
            (self.tau_g, "tau_g"),
            (self.droop, "R_droop"),
            (self.secondary_gain, "K"),
            (self.capacity, "P_G"),
        ];
        for (value, name) in positive {
            if !(value.is_finite() && value > S::zero()) {
                return Some(name);
            }
        }
        if !(self.load_sensitivity.is_finite() && self.load_sensitivity >= S::zero()) {
            return Some("D");
        }
        None
    }

    pub fn cast<T: Scalar>(&self) -> PlantParams<T> {
        let c = |v: S| T::lit(v.to_f64_lossy());
        PlantParams {
            omega_ref: c(self.omega_ref),
            inertia: c(self.inertia),
            tau_g: c(self.tau_g),
            droop: c(self.droop),
            secondary_gain: c(self.secondary_gain),
            capacity: c(self.capacity),
            load_sensitivity: c(self.load_sensitivity),
        }
    }
}

impl<S: Scalar> Default for PlantParams<S> {
    fn default() -> Self {
        Self::for_fleet(1000)
    }
}

/// Continuous plant state. Also used to carry time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState<S> {
    /// Grid frequency (Hz).
    pub omega: S,
    /// Mechanical power (P0).
    pub mech_power: S,
    /// Spinning-reserve setpoint (P0).
    pub reserve_power: S,
}

impl<S: Scalar> PlantState<S> {
    fn offset(&self, rate: &Self, h: S) -> Self {
        Self {
            omega: self.omega + h * rate.omega,
            mech_power: self.mech_power + h * rate.mech_power,
            reserve_power: self.reserve_power + h * rate.reserve_power,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.omega.is_finite() && self.mech_power.is_finite() && self.reserve_power.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("plant integration failed: frequency became {omega}")]
pub struct IntegrationFailure {
    pub omega: f64,
}

/// Electric load drawn at frequency `omega` by a fleet whose load at the
/// reference frequency is `load`.
pub fn electric_load<S: Scalar>(omega: S, load: S, params: &PlantParams<S>) -> S {
    (S::one() + params.load_sensitivity * (omega - params.omega_ref) / params.omega_ref) * load
}

/// Right-hand side of the plant equations for a frequency-insensitive load `load`.
pub fn plant_derivatives<S: Scalar>(
    state: &PlantState<S>,
    load: S,
    params: &PlantParams<S>,
) -> PlantState<S> {
    let two = S::lit(2.0);
    let p_e = electric_load(state.omega, load, params);
    let deviation = state.omega - params.omega_ref;
    let d_omega =
        state.omega / (two * params.inertia * params.capacity) * (state.mech_power - p_e);
    let droop_response = params.capacity / (params.droop * params.omega_ref) * deviation;
    let d_mech = (state.reserve_power - state.mech_power - droop_response) / params.tau_g;
    let d_reserve = -params.secondary_gain / params.omega_ref * deviation;
    PlantState {
        omega: d_omega,
        mech_power: d_mech,
        reserve_power: d_reserve,
    }
}

/// Advances the plant by `dt` with classical fourth-order Runge-Kutta,
/// holding `load` fixed over the step.
pub fn rk4_step<S: Scalar>(
    state: &PlantState<S>,
    load: S,
    params: &PlantParams<S>,
    dt: S,
) -> Result<PlantState<S>, IntegrationFailure> {
    let half = dt / S::lit(2.0);
    let k1 = plant_derivatives(state, load, params);
    let k2 = plant_derivatives(&state.offset(&k1, half), load, params);
    let k3 = plant_derivatives(&state.offset(&k2, half), load, params);
    let k4 = plant_derivatives(&state.offset(&k3, dt), load, params);

    let two = S::lit(2.0);
    let sixth = dt / S::lit(6.0);
    let combine = |a: S, b: S, c: S, d: S| sixth * (a + two * b + two * c + d);
    let next = PlantState {
        omega: state.omega + combine(k1.omega, k2.omega, k3.omega, k4.omega),
        mech_power: state.mech_power
            + combine(k1.mech_power, k2.mech_power, k3.mech_power, k4.mech_power),
        reserve_power: state.reserve_power
            + combine(
                k1.reserve_power,
                k2.reserve_power,
                k3.reserve_power,
                k4.reserve_power,
            ),
    };
    if !next.is_finite() || next.omega <= S::zero() {
        return Err(IntegrationFailure {
            omega: next.omega.to_f64_lossy(),
        });
    }
    Ok(next)
}

/// Fixed point of the plant equations for a constant load at the reference frequency.
pub fn equilibrium_state<S: Scalar>(load: S, params: &PlantParams<S>) -> PlantState<S> {
    PlantState {
        omega: params.omega_ref,
        mech_power: load,
        reserve_power: load,
    }
}
