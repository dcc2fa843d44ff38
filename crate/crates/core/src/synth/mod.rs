//! Synthetic order flow with known ground truth.
//!
//! [`model`] holds the idealized power-law spread and its analytic mean.
//! [`scenario`] plants spread curves on random change instants, and
//! [`stream`] turns a planted series into an event file whose replay
//! reproduces it exactly.

pub mod model;
pub mod scenario;
pub mod stream;

use std::io::{self, Write};

use thiserror::Error;

pub use model::{IdealMean, IdealizedSpreadModel, ModelError};
pub use scenario::{
    generate_spread_series, FlowParams, FlowTruth, RateModel, ScenarioKind, SyntheticScenario,
    SyntheticTruth,
};
pub use stream::{generate_event_stream, SyntheticDay};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Writes the ground truth as pretty-printed JSON.
pub fn write_truth_json<W: Write>(truth: &SyntheticTruth, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, truth)?;
    out.write_all(b"\n")
}
