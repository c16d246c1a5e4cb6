//! Univariate time-series classification baselines built from scratch:
//! MLP, fully convolutional and residual networks, their training protocol,
//! multi-dataset comparison statistics, class activation maps and Gramian
//! angular summation fields.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod interpret;
pub mod network;
pub mod numerics;
pub mod optim;
pub mod trainer;

pub use error::{Error, Result};
