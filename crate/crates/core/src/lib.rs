//! Quantum neural network regressors for wind-power prediction.
//!
//! A 4-qubit statevector simulator runs Z / ZZ feature maps composed with
//! RY ansatze under six CX entanglement layouts. Models train with L-BFGS
//! on an MSE objective and are benchmarked against kNN, CART and OLS
//! baselines. The `windqnn` binary drives the full experiment and writes
//! CSV, markdown and SVG reports.

pub mod baselines;
pub mod circuit;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod optimizer;
pub mod par;
pub mod qnn;
pub mod report;
pub mod statevector;
pub mod svg;

pub use error::{Error, Result};
