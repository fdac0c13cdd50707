//! Multiple imputation by chained equations with principal component
//! regression predictors, plus the simulation harness used to evaluate it.

pub mod cli;
pub mod data;
pub mod engine;
pub mod error;
pub mod imputers;
pub mod pca;
pub mod pooling;
pub mod rng;
pub mod sim;
