//! Limit order book reconstruction and intraday bid-ask spread analysis.
//!
//! The pipeline runs from normalized order-flow text files ([`ingest`]) through
//! book replay ([`book`]) to the spread-change series ([`series`]), its
//! geometric-window moving averages ([`smooth`]) and the per stock-day
//! statistics ([`analysis`]). [`synth`] generates order flow with known ground
//! truth.

pub mod analysis;
pub mod book;
pub mod error;
pub mod ingest;
pub mod series;
pub mod smooth;
pub mod synth;

pub use error::AnalysisError;
pub use ingest::{IngestError, MarketEvent, TradingDayBounds};
