//! Recession-signal modelling on monthly macro panels.

pub mod arima;
pub mod cli;
pub mod dataset;
pub mod ensembles;
pub mod eval;
pub mod featsel;
mod linalg;
pub mod linmodels;
pub mod models;
pub mod neural;
pub mod pipeline;
pub mod sim;
pub mod stattests;
pub mod synthetic;
