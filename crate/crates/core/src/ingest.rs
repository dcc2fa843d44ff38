//! Normalized order-flow event files.
//!
//! One event per line, six comma-separated columns:
//!
//! ```text
//! time,kind,order_id,size,price,direction
//! 34200123,1,17,100,1001400,1
//! ```
//!
//! `kind` is 1 = submit, 2 = partial cancel, 3 = delete, 4 = visible execution,
//! 5 = hidden execution. `direction` is 1 for buy and -1 for sell. Prices are
//! integers in units of 1e-4 dollars. The time column is either integer
//! milliseconds since midnight or decimal seconds since midnight, selected by
//! [`TimeFormat`].

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Price units per dollar.
pub const UNITS_PER_DOLLAR: i64 = 10_000;

/// One cent.
pub const DEFAULT_TICK_SIZE: i64 = 100;

pub const MARKET_OPEN_MS: i64 = 34_200_000;
pub const MARKET_CLOSE_MS: i64 = 57_600_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Submit,
    PartialCancel,
    Delete,
    ExecuteVisible,
    ExecuteHidden,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::Submit,
        EventKind::PartialCancel,
        EventKind::Delete,
        EventKind::ExecuteVisible,
        EventKind::ExecuteHidden,
    ];

    pub fn code(self) -> u8 {
        match self {
            EventKind::Submit => 1,
            EventKind::PartialCancel => 2,
            EventKind::Delete => 3,
            EventKind::ExecuteVisible => 4,
            EventKind::ExecuteHidden => 5,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        Some(match code {
            1 => EventKind::Submit,
            2 => EventKind::PartialCancel,
            3 => EventKind::Delete,
            4 => EventKind::ExecuteVisible,
            5 => EventKind::ExecuteHidden,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn code(self) -> i8 {
        match self {
            Side::Buy => 1,
            Side::Sell => -1,
        }
    }
}

/// One normalized order-flow message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketEvent {
    /// Milliseconds since midnight.
    pub time_ms: i64,
    /// Position within the source file.
    pub seq: u64,
    pub kind: EventKind,
    /// Zero for hidden executions.
    pub order_id: u64,
    pub size: u64,
    /// Units of 1e-4 dollars.
    pub price: i64,
    pub direction: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFormat {
    #[default]
    Millis,
    /// Decimal seconds, rounded half-up to the nearest millisecond.
    DecimalSeconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingDayBounds {
    pub t0_ms: i64,
    pub te_ms: i64,
}

impl Default for TradingDayBounds {
    fn default() -> Self {
        Self {
            t0_ms: MARKET_OPEN_MS,
            te_ms: MARKET_CLOSE_MS,
        }
    }
}

impl TradingDayBounds {
    pub fn new(t0_ms: i64, te_ms: i64) -> Result<Self, IngestError> {
        if t0_ms >= te_ms {
            return Err(IngestError::InvalidBounds { t0_ms, te_ms });
        }
        Ok(Self { t0_ms, te_ms })
    }

    pub fn day_length_ms(&self) -> i64 {
        self.te_ms - self.t0_ms
    }

    pub fn contains(&self, time_ms: i64) -> bool {
        self.t0_ms <= time_ms && time_ms <= self.te_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatConfig {
    pub time_format: TimeFormat,
    pub tick_size: i64,
}

impl Default for FormatConfig {
    fn default() -> Self {
        Self {
            time_format: TimeFormat::Millis,
            tick_size: DEFAULT_TICK_SIZE,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: time {time_ms} ms precedes previous event at {previous_ms} ms")]
    Backwards {
        line: usize,
        time_ms: i64,
        previous_ms: i64,
    },
    #[error("line {line}: unknown event kind code {code}")]
    UnknownKind { line: usize, code: i64 },
    #[error("invalid trading-day bounds: open {t0_ms} ms is not before close {te_ms} ms")]
    InvalidBounds { t0_ms: i64, te_ms: i64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl IngestError {
    /// Source line of a content error, 1-based.
    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Malformed { line, .. }
            | IngestError::Backwards { line, .. }
            | IngestError::UnknownKind { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Reads a whole event file. See [`parse_events`].
pub fn parse_event_file<R: Read>(
    mut input: R,
    config: &FormatConfig,
) -> Result<Vec<MarketEvent>, IngestError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_events(&text, config)
}

/// Parses event text. Blank lines are skipped; `seq` counts events, not lines.
pub fn parse_events(text: &str, config: &FormatConfig) -> Result<Vec<MarketEvent>, IngestError> {
    let mut events = Vec::with_capacity(text.len() / 32);
    let mut previous_ms = i64::MIN;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let event = parse_line(raw, line, events.len() as u64, config.time_format)?;
        if event.time_ms < previous_ms {
            return Err(IngestError::Backwards {
                line,
                time_ms: event.time_ms,
                previous_ms,
            });
        }
        previous_ms = event.time_ms;
        events.push(event);
    }
    Ok(events)
}

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn parse_line(
    raw: &str,
    line: usize,
    seq: u64,
    time_format: TimeFormat,
) -> Result<MarketEvent, IngestError> {
    let mut fields = [""; 6];
    let mut count = 0;
    for field in raw.split(',') {
        if count < 6 {
            fields[count] = field.trim();
        }
        count += 1;
    }
    if count != 6 {
        return Err(malformed(line, format!("expected 6 columns, found {count}")));
    }

    let time_ms = match time_format {
        TimeFormat::Millis => parse_int(fields[0], line, "time")?,
        TimeFormat::DecimalSeconds => parse_decimal_seconds(fields[0])
            .ok_or_else(|| malformed(line, format!("invalid decimal seconds {:?}", fields[0])))?,
    };
    if time_ms < 0 {
        return Err(malformed(line, "negative time"));
    }
    let code = parse_int(fields[1], line, "kind")?;
    let kind = EventKind::from_code(code).ok_or(IngestError::UnknownKind { line, code })?;
    let order_id = parse_int(fields[2], line, "order id")?;
    if order_id < 0 {
        return Err(malformed(line, "negative order id"));
    }
    let size = parse_int(fields[3], line, "size")?;
    if size <= 0 {
        return Err(malformed(line, format!("size must be positive, got {size}")));
    }
    let price = parse_int(fields[4], line, "price")?;
    if price <= 0 {
        return Err(malformed(line, format!("price must be positive, got {price}")));
    }
    let direction = match parse_int(fields[5], line, "direction")? {
        1 => Side::Buy,
        -1 => Side::Sell,
        other => return Err(malformed(line, format!("direction must be 1 or -1, got {other}"))),
    };

    Ok(MarketEvent {
        time_ms,
        seq,
        kind,
        order_id: order_id as u64,
        size: size as u64,
        price,
        direction,
    })
}

fn parse_int(field: &str, line: usize, name: &str) -> Result<i64, IngestError> {
    field
        .parse::<i64>()
        .map_err(|_| malformed(line, format!("non-numeric {name} {field:?}")))
}

/// Exact decimal conversion; avoids binary floating point so that
/// `x.xxx5` always rounds up.
fn parse_decimal_seconds(field: &str) -> Option<i64> {
    let (whole, frac) = match field.split_once('.') {
        Some((w, f)) => (w, f),
        None => (field, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let seconds: i64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
    let digits = frac.as_bytes();
    let mut millis = 0i64;
    for i in 0..3 {
        millis = millis * 10 + digits.get(i).map_or(0, |d| (d - b'0') as i64);
    }
    if digits.get(3).is_some_and(|d| *d >= b'5') {
        millis += 1;
    }
    seconds.checked_mul(1000)?.checked_add(millis)
}

pub fn format_event(event: &MarketEvent, time_format: TimeFormat, out: &mut String) {
    match time_format {
        TimeFormat::Millis => {
            let _ = write!(out, "{}", event.time_ms);
        }
        TimeFormat::DecimalSeconds => {
            let _ = write!(out, "{}.{:03}", event.time_ms / 1000, event.time_ms % 1000);
        }
    }
    let _ = writeln!(
        out,
        ",{},{},{},{},{}",
        event.kind.code(),
        event.order_id,
        event.size,
        event.price,
        event.direction.code()
    );
}

pub fn write_event_file<W: Write>(
    events: &[MarketEvent],
    time_format: TimeFormat,
    mut out: W,
) -> io::Result<()> {
    let mut buf = String::with_capacity(events.len() * 32);
    for event in events {
        format_event(event, time_format, &mut buf);
    }
    out.write_all(buf.as_bytes())
}

/// Events split around the trading session. All three slices borrow from the
/// input and concatenate back to it.
#[derive(Debug, Clone, Copy)]
pub struct SessionSplit<'a> {
    pub pre_market: &'a [MarketEvent],
    pub in_hours: &'a [MarketEvent],
    pub after_close: &'a [MarketEvent],
}

/// Partitions time-ordered events into pre-market, `[t0, te]` and after-close.
pub fn clip_to_trading_hours(events: &[MarketEvent], bounds: TradingDayBounds) -> SessionSplit<'_> {
    let open = events.partition_point(|e| e.time_ms < bounds.t0_ms);
    let close = open + events[open..].partition_point(|e| e.time_ms <= bounds.te_ms);
    SessionSplit {
        pre_market: &events[..open],
        in_hours: &events[open..close],
        after_close: &events[close..],
    }
}
