//! Numerical core for direction-of-change forecasting of daily commodity prices.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! - [`series`]: dated price series, date-axis alignment, chronological splits
//!   and seeded synthetic generators,
//! - [`transform`]: trailing moving averages, first/second order relative
//!   change ("momentum" and "force") and `[-1, 1]` min-max scaling,
//! - [`supervised`]: causal lagged design matrices with multi-horizon targets,
//! - [`network`]: a single-hidden-layer feedforward network with an analytic
//!   Jacobian,
//! - [`trainer`]: Levenberg-Marquardt and batch gradient descent fitting plus
//!   multi-seed trial averaging,
//! - [`metrics`]: hit rate, error statistics, correlation and the information
//!   coefficient.
//!
//! File formats, experiment orchestration and the command line live in the
//! `oilcast` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod metrics;
pub mod network;
pub mod series;
pub mod supervised;
pub mod trainer;
pub mod transform;

pub use error::{Error, Result};
pub use metrics::{MetricBundle, MetricSummary};
pub use network::{Activation, Layout, Network};
pub use series::{AlignedPanel, PriceSeries, SeriesId, SyntheticKind};
pub use supervised::{FeatureSpec, SupervisedSet};
pub use trainer::{Algorithm, StopReason, TrainOptions, TrainReport};
pub use transform::{ScaleParams, Step, TransformedSeries};
