use serde::{Deserialize, Serialize};

use super::{BookError, OrderBook, Quote};
use crate::ingest::{EventKind, MarketEvent, TradingDayBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayMode {
    /// Log integrity errors and skip the offending event.
    #[default]
    Lenient,
    /// Abort on the first integrity error.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityIssue {
    pub seq: u64,
    pub time_ms: i64,
    pub error: BookError,
}

/// A submission and whether it landed strictly inside the quotes in force
/// immediately before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub time_ms: i64,
    pub price: i64,
    pub in_spread: bool,
}

#[derive(Debug, Clone, Default)]
pub struct DayReplay {
    /// Book quote after every change of best bid or best ask, in event order.
    pub quotes: Vec<Quote>,
    pub submissions: Vec<SubmissionRecord>,
    pub issues: Vec<IntegrityIssue>,
    /// Quote in force at the session open, after all pre-market events.
    pub open_quote: Option<Quote>,
    pub crossed_events: u64,
    pub event_counts: [u64; 5],
    pub book: OrderBook,
}

impl DayReplay {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn one_sided_at_open(&self) -> bool {
        !self.open_quote.is_some_and(|q| q.is_two_sided())
    }

    pub fn count(&self, kind: EventKind) -> u64 {
        self.event_counts[kind.code() as usize - 1]
    }
}

fn strictly_inside(quote: &Quote, price: i64) -> bool {
    matches!((quote.best_bid, quote.best_ask), (Some(bid), Some(ask)) if bid < price && price < ask)
}

/// Replays a full stock-day stream through a fresh book.
pub fn replay_day(
    events: &[MarketEvent],
    bounds: TradingDayBounds,
    mode: ReplayMode,
) -> Result<DayReplay, IntegrityIssue> {
    let mut out = DayReplay {
        quotes: Vec::with_capacity(events.len() / 2),
        ..DayReplay::default()
    };
    let mut book = OrderBook::new();
    let mut current = book.quote(0);
    let mut open_seen = false;

    for event in events {
        if !open_seen && event.time_ms >= bounds.t0_ms {
            out.open_quote = Some(Quote {
                time_ms: bounds.t0_ms,
                ..current
            });
            open_seen = true;
        }
        out.event_counts[event.kind.code() as usize - 1] += 1;
        let in_spread = strictly_inside(&current, event.price);
        match book.apply(event) {
            Ok(change) => {
                if event.kind == EventKind::Submit {
                    out.submissions.push(SubmissionRecord {
                        time_ms: event.time_ms,
                        price: event.price,
                        in_spread,
                    });
                }
                if let Some(quote) = change {
                    current = quote;
                    out.quotes.push(quote);
                }
            }
            Err(error) => {
                let issue = IntegrityIssue {
                    seq: event.seq,
                    time_ms: event.time_ms,
                    error,
                };
                match mode {
                    ReplayMode::Strict => return Err(issue),
                    ReplayMode::Lenient => {
                        log::warn!("skipping event {}: {}", issue.seq, issue.error);
                        out.issues.push(issue);
                    }
                }
            }
        }
    }
    if !open_seen {
        out.open_quote = Some(Quote {
            time_ms: bounds.t0_ms,
            ..current
        });
    }
    out.crossed_events = book.crossed_count();
    out.book = book;
    Ok(out)
}

/// Step function of the midpoint built from quote changes. The value at `t`
/// is the state after every change stamped at or before `t`.
#[derive(Debug, Clone, Default)]
pub struct MidpointPath {
    times: Vec<i64>,
    values: Vec<Option<f64>>,
}

impl MidpointPath {
    pub fn from_quotes(quotes: &[Quote]) -> Self {
        Self {
            times: quotes.iter().map(|q| q.time_ms).collect(),
            values: quotes.iter().map(|q| q.midpoint().ok()).collect(),
        }
    }

    /// Builds a path from explicit `(time, midpoint)` points.
    pub fn from_points(points: impl IntoIterator<Item = (i64, Option<f64>)>) -> Self {
        let (times, values) = points.into_iter().unzip();
        Self { times, values }
    }

    pub fn at(&self, time_ms: i64) -> Option<f64> {
        let idx = self.times.partition_point(|t| *t <= time_ms);
        if idx == 0 {
            None
        } else {
            self.values[idx - 1]
        }
    }

    /// Applies `f` to every defined value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }
}
