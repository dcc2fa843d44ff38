use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{plan, FlowTruth, SyntheticScenario, SyntheticTruth};
use super::SynthError;
use crate::ingest::{EventKind, MarketEvent, Side};
use crate::series::SpreadSeries;

const QUOTE_SIZE: u64 = 1_000;
const PRE_MARKET_LEAD_MS: i64 = 60_000;
const AFTER_CLOSE_LAG_MS: i64 = 1_000;

/// A generated stock-day: events, the series their replay must reproduce, and
/// the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDay {
    pub events: Vec<MarketEvent>,
    pub series: SpreadSeries,
    pub truth: SyntheticTruth,
}

#[derive(Debug, Clone, Copy)]
struct QuotePair {
    time_ms: i64,
    bid: i64,
    ask: i64,
    bid_id: u64,
    ask_id: u64,
}

/// Events at one millisecond; `rank` orders groups sharing a timestamp so that
/// quote changes come first.
struct Group {
    time_ms: i64,
    rank: u8,
    events: Vec<Draft>,
}

#[derive(Clone, Copy)]
struct Draft {
    kind: EventKind,
    order_id: u64,
    size: u64,
    price: i64,
    direction: Side,
}

impl Draft {
    fn new(kind: EventKind, order_id: u64, size: u64, price: i64, direction: Side) -> Self {
        Self {
            kind,
            order_id,
            size,
            price,
            direction,
        }
    }
}

fn random_side<R: Rng>(rng: &mut R) -> Side {
    if rng.random::<bool>() {
        Side::Buy
    } else {
        Side::Sell
    }
}

/// Builds an order-flow stream whose replay yields exactly the scenario's
/// spread series.
///
/// Every spread change removes both quote orders and submits a new pair
/// around a drifting midpoint. Filler orders, in-spread submissions included,
/// are submitted and removed within a single millisecond, so they never show
/// up in the end-of-millisecond quote.
pub fn generate_event_stream(scenario: &SyntheticScenario) -> Result<SyntheticDay, SynthError> {
    let planned = plan(scenario)?;
    let mut rng = planned.rng;
    let series = planned.series;
    let mut truth = planned.truth;
    let tick = scenario.tick_size;
    let flow = scenario.flow;
    let bounds = scenario.bounds;

    let mut next_id = 1u64;
    let mut fresh_id = || {
        let id = next_id;
        next_id += 1;
        id
    };

    let mut anchor = flow.base_price.div_euclid(tick);
    let mut make_pair = |time_ms: i64, spread: i64, rng: &mut rand_chacha::ChaCha8Rng, ids: (u64, u64)| {
        if rng.random::<f64>() < flow.drift {
            anchor += if rng.random::<bool>() { 1 } else { -1 };
        }
        let bid = (anchor - spread / tick / 2) * tick;
        QuotePair {
            time_ms,
            bid,
            ask: bid + spread,
            bid_id: ids.0,
            ask_id: ids.1,
        }
    };

    let mut pairs = Vec::with_capacity(series.len() + 1);
    let open_ms = bounds.t0_ms - PRE_MARKET_LEAD_MS;
    let ids = (fresh_id(), fresh_id());
    pairs.push(make_pair(open_ms, planned.carry, &mut rng, ids));
    for obs in &series.observations {
        let ids = (fresh_id(), fresh_id());
        pairs.push(make_pair(obs.time_ms, obs.spread as i64, &mut rng, ids));
    }
    let lowest = pairs.iter().map(|p| p.bid).min().unwrap_or(1);
    if lowest - 5 * tick <= 0 {
        return Err(SynthError::InvalidScenario(
            "base price too low for the planted spreads".into(),
        ));
    }
    let pair_times: Vec<i64> = pairs.iter().map(|p| p.time_ms).collect();
    let live_pair = |t: i64| pair_times.partition_point(|&pt| pt <= t) - 1;
    let in_hours_time = |rng: &mut rand_chacha::ChaCha8Rng| rng.random_range(bounds.t0_ms..=bounds.te_ms);

    let mut groups: Vec<Group> = Vec::new();

    // partial executions first: they decide the quote orders' remaining size
    let mut executed: HashMap<u64, u64> = HashMap::new();
    for _ in 0..flow.partial_executions {
        let t = in_hours_time(&mut rng);
        let pair = pairs[live_pair(t)];
        let (id, price, side) = if rng.random::<bool>() {
            (pair.bid_id, pair.bid, Side::Buy)
        } else {
            (pair.ask_id, pair.ask, Side::Sell)
        };
        let size = rng.random_range(1..=10);
        let done = executed.entry(id).or_default();
        if *done + size < QUOTE_SIZE {
            *done += size;
            groups.push(Group {
                time_ms: t,
                rank: 1,
                events: vec![Draft::new(EventKind::ExecuteVisible, id, size, price, side)],
            });
        }
    }

    let remaining = |id: u64| QUOTE_SIZE - executed.get(&id).copied().unwrap_or(0);
    let submit_pair = |p: &QuotePair| {
        [
            Draft::new(EventKind::Submit, p.bid_id, QUOTE_SIZE, p.bid, Side::Buy),
            Draft::new(EventKind::Submit, p.ask_id, QUOTE_SIZE, p.ask, Side::Sell),
        ]
    };
    groups.push(Group {
        time_ms: open_ms,
        rank: 0,
        events: submit_pair(&pairs[0]).to_vec(),
    });
    for w in pairs.windows(2) {
        let (old, new) = (&w[0], &w[1]);
        let remove = |id: u64, price: i64, side: Side, full_fill: bool| {
            if full_fill {
                Draft::new(EventKind::ExecuteVisible, id, remaining(id), price, side)
            } else {
                Draft::new(EventKind::Delete, id, remaining(id), price, side)
            }
        };
        let mut events = vec![
            remove(old.bid_id, old.bid, Side::Buy, rng.random::<f64>() < 0.2),
            remove(old.ask_id, old.ask, Side::Sell, rng.random::<f64>() < 0.2),
        ];
        events.extend(submit_pair(new));
        groups.push(Group {
            time_ms: new.time_ms,
            rank: 0,
            events,
        });
    }

    // fillers: in-spread ones need a spread of at least two ticks
    let filler_times: Vec<i64> = (0..flow.fillers).map(|_| in_hours_time(&mut rng)).collect();
    let eligible: Vec<usize> = (0..flow.fillers)
        .filter(|&i| {
            let p = pairs[live_pair(filler_times[i])];
            p.ask - p.bid >= 2 * tick
        })
        .collect();
    let submissions = 2 * series.len() + flow.fillers;
    let wanted = (flow.in_spread_fraction * submissions as f64).round() as usize;
    let planted = wanted.min(eligible.len());
    if planted < wanted {
        log::warn!("only {planted} of {wanted} in-spread submissions could be planted");
    }
    let mut in_spread = vec![false; flow.fillers];
    for k in sample(&mut rng, eligible.len(), planted) {
        in_spread[eligible[k]] = true;
    }
    for (i, &t) in filler_times.iter().enumerate() {
        let pair = pairs[live_pair(t)];
        let id = fresh_id();
        let size = 100 * rng.random_range(1..=5u64);
        let (price, side) = if in_spread[i] {
            let side = random_side(&mut rng);
            let price = match side {
                Side::Buy => pair.bid + tick,
                Side::Sell => pair.ask - tick,
            };
            (price, side)
        } else {
            let side = random_side(&mut rng);
            let offset = rng.random_range(0..=4) * tick;
            let price = match side {
                Side::Buy => pair.bid - offset,
                Side::Sell => pair.ask + offset,
            };
            (price, side)
        };
        let mut events = vec![Draft::new(EventKind::Submit, id, size, price, side)];
        if size > 100 && rng.random::<bool>() {
            events.push(Draft::new(EventKind::PartialCancel, id, 100, price, side));
            events.push(Draft::new(EventKind::Delete, id, size - 100, price, side));
        } else {
            events.push(Draft::new(EventKind::Delete, id, size, price, side));
        }
        groups.push(Group {
            time_ms: t,
            rank: 2,
            events,
        });
    }

    for _ in 0..flow.hidden_executions {
        let t = in_hours_time(&mut rng);
        let pair = pairs[live_pair(t)];
        let side = random_side(&mut rng);
        let price = if side == Side::Buy { pair.bid } else { pair.ask };
        groups.push(Group {
            time_ms: t,
            rank: 3,
            events: vec![Draft::new(EventKind::ExecuteHidden, 0, rng.random_range(1..=500), price, side)],
        });
    }

    let last = pairs[pairs.len() - 1];
    groups.push(Group {
        time_ms: bounds.te_ms + AFTER_CLOSE_LAG_MS,
        rank: 3,
        events: vec![Draft::new(EventKind::ExecuteHidden, 0, 100, last.ask, Side::Sell)],
    });

    groups.sort_by_key(|g| (g.time_ms, g.rank));
    let events: Vec<MarketEvent> = groups
        .iter()
        .flat_map(|g| g.events.iter().map(move |d| (g.time_ms, *d)))
        .enumerate()
        .map(|(seq, (time_ms, d))| MarketEvent {
            time_ms,
            seq: seq as u64,
            kind: d.kind,
            order_id: d.order_id,
            size: d.size,
            price: d.price,
            direction: d.direction,
        })
        .collect();

    truth.flow = Some(FlowTruth {
        events: events.len(),
        submissions,
        in_spread_submissions: planted,
    });
    Ok(SyntheticDay {
        events,
        series,
        truth,
    })
}
