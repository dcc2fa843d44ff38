//! Reference implementations used as independent oracles by the integration
//! and acceptance tests. Nothing here calls into the library's algorithms;
//! only its data types are shared.
#![allow(dead_code)]

use std::collections::BTreeMap;

use lobspread::ingest::{EventKind, Side, MARKET_CLOSE_MS, MARKET_OPEN_MS};
use lobspread::series::{SpreadObservation, SpreadSeries};
use lobspread::{MarketEvent, TradingDayBounds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Limit order book that stores only the live orders, unsorted, and answers
/// every query by scanning all of them.
#[derive(Debug, Default)]
pub struct NaiveBook {
    orders: Vec<(u64, Side, i64, u64)>,
}

impl NaiveBook {
    fn position(&self, order_id: u64) -> usize {
        self.orders
            .iter()
            .position(|o| o.0 == order_id)
            .expect("live order")
    }

    /// Panics on events that are not well formed for the current state.
    pub fn apply(&mut self, event: &MarketEvent) {
        match event.kind {
            EventKind::Submit => {
                assert!(
                    self.orders.iter().all(|o| o.0 != event.order_id),
                    "duplicate order {}",
                    event.order_id
                );
                self.orders
                    .push((event.order_id, event.direction, event.price, event.size));
            }
            EventKind::PartialCancel | EventKind::ExecuteVisible => {
                let i = self.position(event.order_id);
                let order = &mut self.orders[i];
                order.3 = order.3.checked_sub(event.size).expect("size within remaining");
                if order.3 == 0 {
                    self.orders.swap_remove(i);
                }
            }
            EventKind::Delete => {
                let i = self.position(event.order_id);
                self.orders.swap_remove(i);
            }
            EventKind::ExecuteHidden => {}
        }
    }

    pub fn best_bid(&self) -> Option<i64> {
        self.orders
            .iter()
            .filter(|o| o.1 == Side::Buy)
            .map(|o| o.2)
            .max()
    }

    pub fn best_ask(&self) -> Option<i64> {
        self.orders
            .iter()
            .filter(|o| o.1 == Side::Sell)
            .map(|o| o.2)
            .min()
    }

    /// Aggregate size per price level, best level first.
    pub fn levels(&self, side: Side) -> Vec<(i64, u64)> {
        let mut levels = BTreeMap::new();
        for (_, s, price, size) in &self.orders {
            if *s == side {
                *levels.entry(*price).or_insert(0u64) += size;
            }
        }
        match side {
            Side::Buy => levels.into_iter().rev().collect(),
            Side::Sell => levels.into_iter().collect(),
        }
    }

    pub fn level_size(&self, side: Side, price: i64) -> u64 {
        self.orders
            .iter()
            .filter(|o| o.1 == side && o.2 == price)
            .map(|o| o.3)
            .sum()
    }

    pub fn live_shares(&self) -> u64 {
        self.orders.iter().map(|o| o.3).sum()
    }
}

struct LiveOrder {
    id: u64,
    side: Side,
    price: i64,
    remaining: u64,
}

/// Random well-formed event stream starting shortly before the open. Every
/// cancel, delete and execution refers to a live order with enough size.
/// The live order count hovers around `target_live`.
pub fn random_stream(seed: u64, len: usize, target_live: usize) -> Vec<MarketEvent> {
    let mut rng = rng(seed);
    let mut live: Vec<LiveOrder> = Vec::new();
    let mut events = Vec::with_capacity(len);
    let mut time_ms = MARKET_OPEN_MS - 5_000;
    let mut next_id = 1u64;
    let mid = 1_000_000i64;
    for seq in 0..len as u64 {
        time_ms += rng.random_range(0..3);
        let submit_p = if live.len() < target_live { 0.7 } else { 0.3 };
        let event = if live.is_empty() || rng.random_bool(submit_p) {
            let side = if rng.random_bool(0.5) { Side::Buy } else { Side::Sell };
            // Mostly on the own side of the midpoint, occasionally crossing.
            let offset = rng.random_range(-3..=25) * 100;
            let price = match side {
                Side::Buy => mid - offset,
                Side::Sell => mid + offset,
            };
            let size = rng.random_range(1..=500);
            live.push(LiveOrder {
                id: next_id,
                side,
                price,
                remaining: size,
            });
            next_id += 1;
            MarketEvent {
                time_ms,
                seq,
                kind: EventKind::Submit,
                order_id: next_id - 1,
                size,
                price,
                direction: side,
            }
        } else if rng.random_bool(0.05) {
            let o = &live[rng.random_range(0..live.len())];
            MarketEvent {
                time_ms,
                seq,
                kind: EventKind::ExecuteHidden,
                order_id: 0,
                size: rng.random_range(1..=200),
                price: o.price,
                direction: o.side,
            }
        } else {
            let idx = rng.random_range(0..live.len());
            let roll: f64 = rng.random();
            let o = &mut live[idx];
            let (kind, size) = if roll < 0.3 && o.remaining > 1 {
                (EventKind::PartialCancel, rng.random_range(1..o.remaining))
            } else if roll < 0.6 {
                (EventKind::ExecuteVisible, rng.random_range(1..=o.remaining))
            } else {
                // Delete carries the remaining size, as in the source feeds.
                (EventKind::Delete, o.remaining)
            };
            let event = MarketEvent {
                time_ms,
                seq,
                kind,
                order_id: o.id,
                size,
                price: o.price,
                direction: o.side,
            };
            o.remaining -= size;
            if o.remaining == 0 {
                live.swap_remove(idx);
            }
            event
        };
        events.push(event);
    }
    events
}

/// Composite Simpson rule for `f` on `[a, b]`, 0 < a < b, evaluated on a
/// logarithmic grid so that integrands steep near `a` stay accurate.
pub fn integrate_log(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let (u0, u1) = (a.ln(), b.ln());
    let h = (u1 - u0) / n as f64;
    let g = |u: f64| f(u.exp()) * u.exp();
    let mut sum = g(u0) + g(u1);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(u0 + i as f64 * h);
    }
    sum * h / 3.0
}

pub fn default_bounds() -> TradingDayBounds {
    TradingDayBounds::new(MARKET_OPEN_MS, MARKET_CLOSE_MS).unwrap()
}

/// Series with the given elapsed times (ms after the open) and values taken
/// from `curve`. Duplicate times are dropped.
pub fn sampled_series(elapsed_ms: &[i64], curve: impl Fn(f64) -> f64, bounds: TradingDayBounds) -> SpreadSeries {
    let mut times: Vec<i64> = elapsed_ms.to_vec();
    times.sort_unstable();
    times.dedup();
    let observations = times
        .into_iter()
        .map(|e| SpreadObservation {
            time_ms: bounds.t0_ms + e,
            spread: curve(e as f64),
        })
        .collect();
    SpreadSeries::from_observations(bounds, observations).unwrap()
}

/// `n` sorted elapsed times on `[start_ms, day_ms)`, drawn uniformly except
/// that the first `burst_ms` are `burst_factor` times denser.
pub fn bursty_times(seed: u64, n: usize, start_ms: f64, day_ms: f64, burst_ms: f64, burst_factor: f64) -> Vec<i64> {
    let mut rng = rng(seed);
    let burst_end = burst_ms.clamp(start_ms, day_ms);
    let burst_mass = burst_factor * (burst_end - start_ms);
    let total = burst_mass + (day_ms - burst_end);
    let mut times: Vec<i64> = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let t = if u < burst_mass {
                start_ms + u / burst_factor
            } else {
                burst_end + (u - burst_mass)
            };
            t as i64
        })
        .collect();
    times.sort_unstable();
    times
}

/// Time-weighted mean of the step function defined by `series` over the
/// observations `first..=last` (0-based), each value holding until the next
/// observation or the close.
fn step_mean(series: &SpreadSeries, first: usize, last: usize) -> f64 {
    let obs = &series.observations;
    let mut area = 0.0;
    let mut span = 0.0;
    for i in first..=last {
        let until = obs.get(i + 1).map_or(series.te_ms, |o| o.time_ms);
        let hold = (until - obs[i].time_ms) as f64;
        area += obs[i].spread * hold;
        span += hold;
    }
    if span > 0.0 {
        area / span
    } else {
        obs[first..=last].iter().map(|o| o.spread).sum::<f64>() / (last + 1 - first) as f64
    }
}

/// End of the opening period computed straight from the definition: build
/// every overlapping window (64 changes, then bounds grown by 1.1 per step,
/// clamped at the series end while at least a quarter of the series remains
/// inside), average each over time, and return the largest window time whose
/// average exceeds `factor` times the time-weighted daily mean. Returns the
/// elapsed milliseconds, zero when no window qualifies.
pub fn brute_force_opening_ms(series: &SpreadSeries, factor: f64) -> f64 {
    let n = series.observations.len();
    let daily = step_mean(series, 0, n - 1);
    let mut windows = vec![(1usize, 64usize)];
    for k in 2.. {
        let (start, end) = if k == 2 {
            (65, 128)
        } else {
            let grow = 1.1f64.powi(k - 2);
            ((64.0 * grow).round() as usize, (128.0 * grow).round() as usize)
        };
        if start > n || (end > n && ((n + 1 - start) as f64) < n as f64 / 4.0) {
            break;
        }
        windows.push((start, end.min(n)));
    }
    let elapsed = |i: usize| ((series.observations[i].time_ms - series.t0_ms).max(1)) as f64;
    windows
        .iter()
        .filter(|(s, e)| step_mean(series, s - 1, e - 1) > factor * daily)
        .map(|(s, e)| (elapsed(s - 1) * elapsed(e - 1)).sqrt())
        .fold(0.0, f64::max)
}

/// Relative midpoint changes sampled every minute from `start` to `end`
/// with the last known value carried forward.
pub fn minute_returns(points: &[(i64, f64)], start: i64, end: i64) -> Vec<f64> {
    let value_at = |t: i64| {
        points
            .iter()
            .take_while(|(pt, _)| *pt <= t)
            .last()
            .map(|(_, v)| *v)
    };
    let mut out = Vec::new();
    let mut t = start;
    while t + 60_000 <= end {
        if let (Some(a), Some(b)) = (value_at(t), value_at(t + 60_000)) {
            out.push((b - a) / a);
        }
        t += 60_000;
    }
    out
}

pub fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Geometric random walk sampled once a minute over the session, with
/// normally distributed log increments of standard deviation `log_std`.
pub fn geometric_walk(seed: u64, start_price: f64, log_std: f64, minutes: usize) -> Vec<(i64, f64)> {
    let mut rng = rng(seed);
    let mut price = start_price;
    let mut out = vec![(MARKET_OPEN_MS, price)];
    for i in 1..=minutes {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        price *= (log_std * z).exp();
        out.push((MARKET_OPEN_MS + i as i64 * 60_000, price));
    }
    out
}
