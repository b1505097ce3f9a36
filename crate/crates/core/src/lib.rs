//! Quantum state flip games played by measuring a resonant two-level search
//! system.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see
//! [`Real`]); the aliases below fix it to `f64`, with `*32` variants where
//! single precision is useful.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collapse;
pub mod error;
pub mod export;
pub mod game;
pub mod quadrature;
pub mod resonance;
pub mod rng;
pub mod scalar;
pub mod strategy;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Spectrum = resonance::SpectrumConfig<f64>;
pub type Coupling = resonance::CouplingPotential<f64>;
pub type Params = resonance::ResonanceParams<f64>;
pub type Params32 = resonance::ResonanceParams<f32>;
pub type Probabilities = resonance::ProbabilityPair<f64>;
pub type Schedule = collapse::MeasurementSchedule<f64>;
pub type Schedule32 = collapse::MeasurementSchedule<f32>;
pub type Mixing = collapse::MixingCoefficients<f64>;
pub type Mixing32 = collapse::MixingCoefficients<f32>;
pub type Game = game::GameSpec<f64>;
pub type Game32 = game::GameSpec<f32>;
pub type Strategy = game::StrategyProfile<f64>;
pub type Strategy32 = game::StrategyProfile<f32>;
pub type Round = game::RoundResult<f64>;
pub type Payoff = game::PayoffReport<f64>;
pub type Heatmap = strategy::HeatmapGrid<f64>;
