//! Cryptocurrency price-high forecasting from social signals.
//!
//! The crate covers the whole pipeline: parsing price, Reddit and GitHub
//! archives ([`ingest`]), turning them into daily signal matrices
//! ([`signals`]), vetting signals against price ([`stats`]), windowing and
//! normalization ([`dataset`]), the two forecasters ([`arima`], [`lstm`]),
//! error metrics ([`metrics`]) and the ablation engine that ties them
//! together ([`harness`]).

pub mod arima;
pub mod calendar;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod lstm;
pub mod metrics;
pub mod signals;
pub mod stats;

pub use calendar::DateRange;
pub use dataset::{NormParams, Sample, SplitPlan, WindowedDataset};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentResult, ModelKind};
pub use ingest::{CommentRecord, EventKind, EventRecord, PriceSeries};
pub use lstm::{Network, TrainConfig, TrainedModel};
pub use metrics::MetricsReport;
pub use signals::{SentimentLexicon, SignalFamily, SignalMatrix, Vocabulary};
