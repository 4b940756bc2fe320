//! Information-theoretic analysis of classifier ensembles: relevance,
//! redundancy and combination loss, error-rate lower bounds built from
//! them, and the combiners and synthetic systems used to exercise them.

pub mod bounds;
pub mod combiners;
pub mod error;
pub mod info;
pub mod metrics;
pub mod mti;
pub mod rng;
pub mod study;
pub mod synth;
pub mod table;

pub use bounds::{bound_loose, bound_tight, BoundConfig, BoundResult};
pub use combiners::CombinerSpec;
pub use error::{Error, Result};
pub use metrics::{analyze, MetricReport};
pub use mti::EstimationMode;
pub use table::{Label, PredictionTable, Var};
