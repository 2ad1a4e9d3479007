//! Measurement and classification of passage-time scaling near saddle-node
//! bottlenecks of one-dimensional flows.
//!
//! A flow `x' = R(r) + F(x)` that loses a pair of equilibria at `r = 0`
//! keeps a slow "ghost" region where trajectories linger. This crate
//! measures the time spent crossing that region, sweeps it against the
//! parameter `r`, fits the resulting scaling law, and classifies the law as
//! constant, logarithmic, or power-law depending on the local shape of `F`.
//!
//! The crate is organized around four concepts:
//!
//! * [`fields`] - the family of fields `R(r) + F(x)` under study.
//! * [`passage`] - two independent passage-time engines (adaptive
//!   Gauss-Kronrod quadrature of `dx / rate`, and an embedded Runge-Kutta
//!   integration of the flow with event detection), plus closed forms.
//! * [`scaling`] - parameter sweeps, least-squares fits, model selection,
//!   and predicted laws per field family.
//! * [`pendulum`] - a driven pendulum with an angle-dependent wave term,
//!   the model application whose bottleneck reproduces the same laws.

pub mod csvio;
pub mod fields;
mod ode;
pub mod passage;
pub mod pendulum;
mod quad;
pub mod scaling;

#[cfg(doctest)]
pub mod book;

pub use fields::{BifurcationClass, FieldError, ParamMap, PhaseFn, VectorField1D};
pub use passage::{
    ClosedFormKind, Engine, EngineConfig, Interval, OdeConfig, PassageError, PassageResult,
    QuadratureConfig,
};
pub use scaling::{
    PredictedLaw, RegimeMap, ScalingError, ScalingFit, ScalingModel, ScalingSample, SelectConfig,
    SweepEngine, SweepSpec,
};
