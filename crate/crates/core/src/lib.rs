//! Power-grid frequency simulation under a stochastic appliance fleet with
//! frequency-gated demand control (DDC) and its cluster-communicating
//! extension (CeDDC).
//!
//! The numerical core is generic over [`Scalar`]; the `*F64` and `*F32`
//! aliases below fix the precision.

pub mod analytics;
pub mod comm;
pub mod engine;
pub mod fleet;
pub mod plant;
pub mod rng;
pub mod scalar;

pub use analytics::{ccdf, exceedance, summarize, variance, AnalyticsError, CcdfCurve, RunSummary};
pub use comm::{CommRegistry, PowerReleased};
pub use engine::{
    coupled_run, run, CommConfig, PolicyAssignment, RunOutput, ScenarioConfig, SimError,
    Simulation, TimeSeries,
};
pub use fleet::{DdcParams, Device, FleetParams, Policy, Switch, TaskKind};
pub use plant::{PlantParams, PlantState};
pub use scalar::Scalar;

pub type PlantParamsF64 = plant::PlantParams<f64>;
pub type PlantStateF64 = plant::PlantState<f64>;
pub type SimulationF64 = engine::Simulation<f64>;
pub type RunOutputF64 = engine::RunOutput<f64>;
pub type CcdfCurveF64 = analytics::CcdfCurve<f64>;
pub type CommRegistryF64 = comm::CommRegistry<f64>;

pub type PlantParamsF32 = plant::PlantParams<f32>;
pub type PlantStateF32 = plant::PlantState<f32>;
pub type SimulationF32 = engine::Simulation<f32>;
pub type RunOutputF32 = engine::RunOutput<f32>;
pub type CcdfCurveF32 = analytics::CcdfCurve<f32>;
pub type CommRegistryF32 = comm::CommRegistry<f32>;
