//! Crude oil direction forecasting: file formats, experiment runners and the
//! `oilcast` command line on top of `oilcast-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod netio;
pub mod pipeline;
pub mod reference;
pub mod report;
pub mod study;

pub use error::{Error, Result};
