//! Visible limit order book.
//!
//! The book replays outcomes reported by the exchange; it never matches.
//! Each side is a price ladder of aggregate visible size, and an order index
//! maps live order ids to their remaining size.

mod replay;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EventKind, MarketEvent, Side};

pub use replay::{replay_day, DayReplay, IntegrityIssue, MidpointPath, ReplayMode, SubmissionRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum BookError {
    #[error("order {order_id} is not live")]
    UnknownOrder { order_id: u64 },
    #[error("order {order_id} is already live")]
    DuplicateOrder { order_id: u64 },
    #[error("order {order_id}: reduction of {requested} exceeds remaining {remaining}")]
    ExcessReduction {
        order_id: u64,
        requested: u64,
        remaining: u64,
    },
    #[error("midpoint undefined: book is one-sided or empty")]
    UndefinedMidpoint,
    #[error("spread undefined: book is one-sided or empty")]
    UndefinedSpread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub order_id: u64,
    pub direction: Side,
    pub price: i64,
    pub remaining_size: u64,
}

/// Best bid and ask at an instant. Absent sides are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quote {
    pub time_ms: i64,
    pub best_bid: Option<i64>,
    pub best_ask: Option<i64>,
}

impl Quote {
    pub fn is_two_sided(&self) -> bool {
        self.best_bid.is_some() && self.best_ask.is_some()
    }

    /// Mean of best bid and best ask, in price units.
    pub fn midpoint(&self) -> Result<f64, BookError> {
        match (self.best_bid, self.best_ask) {
            (Some(bid), Some(ask)) => Ok((bid + ask) as f64 / 2.0),
            _ => Err(BookError::UndefinedMidpoint),
        }
    }

    /// Best ask minus best bid, in price units. Non-positive when crossed or locked.
    pub fn spread(&self) -> Result<i64, BookError> {
        match (self.best_bid, self.best_ask) {
            (Some(bid), Some(ask)) => Ok(ask - bid),
            _ => Err(BookError::UndefinedSpread),
        }
    }

    pub fn is_crossed(&self) -> bool {
        matches!(self.spread(), Ok(s) if s <= 0)
    }

    fn same_prices(&self, other: &Quote) -> bool {
        self.best_bid == other.best_bid && self.best_ask == other.best_ask
    }
}

#[derive(Debug, Clone, Default)]
pub struct OrderBook {
    bids: BTreeMap<i64, u64>,
    asks: BTreeMap<i64, u64>,
    orders: HashMap<u64, OrderRecord>,
    crossed_count: u64,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<i64> {
        self.bids.last_key_value().map(|(p, _)| *p)
    }

    pub fn best_ask(&self) -> Option<i64> {
        self.asks.first_key_value().map(|(p, _)| *p)
    }

    pub fn quote(&self, time_ms: i64) -> Quote {
        Quote {
            time_ms,
            best_bid: self.best_bid(),
            best_ask: self.best_ask(),
        }
    }

    pub fn order(&self, order_id: u64) -> Option<&OrderRecord> {
        self.orders.get(&order_id)
    }

    pub fn live_orders(&self) -> usize {
        self.orders.len()
    }

    pub fn live_shares(&self) -> u64 {
        self.bids.values().chain(self.asks.values()).sum()
    }

    /// Aggregate size at a price level.
    pub fn level_size(&self, side: Side, price: i64) -> u64 {
        self.ladder(side).get(&price).copied().unwrap_or(0)
    }

    /// Bid levels best-first.
    pub fn bid_levels(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.bids.iter().rev().map(|(p, s)| (*p, *s))
    }

    /// Ask levels best-first.
    pub fn ask_levels(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.asks.iter().map(|(p, s)| (*p, *s))
    }

    pub fn is_crossed(&self) -> bool {
        matches!((self.best_bid(), self.best_ask()), (Some(b), Some(a)) if a <= b)
    }

    /// Number of applied events that left the book crossed or locked.
    pub fn crossed_count(&self) -> u64 {
        self.crossed_count
    }

    fn ladder(&self, side: Side) -> &BTreeMap<i64, u64> {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn ladder_mut(&mut self, side: Side) -> &mut BTreeMap<i64, u64> {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }

    /// Applies one event. Returns the new quote when best bid or best ask moved.
    ///
    /// On error the book is left unchanged.
    pub fn apply(&mut self, event: &MarketEvent) -> Result<Option<Quote>, BookError> {
        let before = self.quote(event.time_ms);
        match event.kind {
            EventKind::Submit => self.insert(event)?,
            EventKind::PartialCancel | EventKind::ExecuteVisible => {
                self.reduce(event.order_id, event.size)?
            }
            EventKind::Delete => self.remove(event.order_id)?,
            EventKind::ExecuteHidden => return Ok(None),
        }
        if self.is_crossed() {
            self.crossed_count += 1;
        }
        let after = self.quote(event.time_ms);
        Ok((!after.same_prices(&before)).then_some(after))
    }

    fn insert(&mut self, event: &MarketEvent) -> Result<(), BookError> {
        if self.orders.contains_key(&event.order_id) {
            return Err(BookError::DuplicateOrder {
                order_id: event.order_id,
            });
        }
        self.orders.insert(
            event.order_id,
            OrderRecord {
                order_id: event.order_id,
                direction: event.direction,
                price: event.price,
                remaining_size: event.size,
            },
        );
        *self.ladder_mut(event.direction).entry(event.price).or_insert(0) += event.size;
        Ok(())
    }

    /// An exact-size cancel or execution removes the order.
    fn reduce(&mut self, order_id: u64, size: u64) -> Result<(), BookError> {
        let record = self
            .orders
            .get_mut(&order_id)
            .ok_or(BookError::UnknownOrder { order_id })?;
        if size > record.remaining_size {
            return Err(BookError::ExcessReduction {
                order_id,
                requested: size,
                remaining: record.remaining_size,
            });
        }
        record.remaining_size -= size;
        let (side, price, emptied) = (record.direction, record.price, record.remaining_size == 0);
        if emptied {
            self.orders.remove(&order_id);
        }
        self.take_from_level(side, price, size);
        Ok(())
    }

    fn remove(&mut self, order_id: u64) -> Result<(), BookError> {
        let record = self
            .orders
            .remove(&order_id)
            .ok_or(BookError::UnknownOrder { order_id })?;
        self.take_from_level(record.direction, record.price, record.remaining_size);
        Ok(())
    }

    fn take_from_level(&mut self, side: Side, price: i64, size: u64) {
        let ladder = self.ladder_mut(side);
        if let Some(level) = ladder.get_mut(&price) {
            *level -= size;
            if *level == 0 {
                ladder.remove(&price);
            }
        }
    }

    pub fn snapshot(&self, time_ms: i64) -> BookSnapshot {
        BookSnapshot {
            time_ms,
            bids: self.bid_levels().collect(),
            asks: self.ask_levels().collect(),
        }
    }
}

/// Ladders at one instant, best level first. Debugging aid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookSnapshot {
    pub time_ms: i64,
    pub bids: Vec<(i64, u64)>,
    pub asks: Vec<(i64, u64)>,
}
