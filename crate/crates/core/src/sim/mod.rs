//! Simulation study: data generation, amputation, metrics and the study runner.

pub mod amputation;
pub mod generate;
pub mod metrics;
pub mod study;
