//! Spread-change series for one stock-day.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::book::Quote;
use crate::error::AnalysisError;
use crate::ingest::TradingDayBounds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadObservation {
    pub time_ms: i64,
    /// Price units.
    pub spread: f64,
}

/// Millisecond-level states that did not yield an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeriesQuality {
    /// Locked or crossed end-of-millisecond states.
    pub non_positive_states: u64,
    /// End-of-millisecond states with an empty side.
    pub one_sided_states: u64,
    pub one_sided_at_open: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadSeries {
    pub t0_ms: i64,
    pub te_ms: i64,
    pub observations: Vec<SpreadObservation>,
    pub quality: SeriesQuality,
}

impl SpreadSeries {
    /// Builds a series from raw observations, enforcing the series invariants.
    pub fn from_observations(
        bounds: TradingDayBounds,
        observations: Vec<SpreadObservation>,
    ) -> Result<Self, AnalysisError> {
        for pair in observations.windows(2) {
            if pair[1].time_ms <= pair[0].time_ms {
                return Err(AnalysisError::InvalidSeries(format!(
                    "times not strictly increasing at {} ms",
                    pair[1].time_ms
                )));
            }
            if pair[1].spread == pair[0].spread {
                return Err(AnalysisError::InvalidSeries(format!(
                    "repeated spread value at {} ms",
                    pair[1].time_ms
                )));
            }
        }
        if let (Some(first), Some(last)) = (observations.first(), observations.last()) {
            if first.time_ms < bounds.t0_ms || last.time_ms > bounds.te_ms {
                return Err(AnalysisError::InvalidSeries(
                    "observation outside trading hours".into(),
                ));
            }
        }
        Ok(Self {
            t0_ms: bounds.t0_ms,
            te_ms: bounds.te_ms,
            observations,
            quality: SeriesQuality::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn bounds(&self) -> TradingDayBounds {
        TradingDayBounds {
            t0_ms: self.t0_ms,
            te_ms: self.te_ms,
        }
    }

    /// Multiplies every spread by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for obs in &mut out.observations {
            obs.spread *= factor;
        }
        out
    }

    /// Shifts all timestamps and the session bounds by `delta_ms`.
    pub fn shifted(&self, delta_ms: i64) -> Self {
        let mut out = self.clone();
        out.t0_ms += delta_ms;
        out.te_ms += delta_ms;
        for obs in &mut out.observations {
            obs.time_ms += delta_ms;
        }
        out
    }

    /// How long each observation stays in force: until the next observation,
    /// the last one until the close.
    pub fn hold_durations(&self) -> impl Iterator<Item = i64> + '_ {
        let obs = &self.observations;
        (0..obs.len()).map(move |i| {
            let end = obs.get(i + 1).map_or(self.te_ms, |o| o.time_ms);
            (end - obs[i].time_ms).max(0)
        })
    }

    /// Two-column CSV: `time_ms,spread_units`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["time_ms", "spread_units"])?;
        for obs in &self.observations {
            writer.write_record([obs.time_ms.to_string(), obs.spread.to_string()])?;
        }
        writer.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanMethod {
    /// Piecewise-constant integral from the first observation to the close.
    #[default]
    TimeWeighted,
    /// Arithmetic mean over observations.
    PerChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyAverageSpread {
    pub mean_spread: f64,
    pub method: MeanMethod,
}

/// Classifies the end-of-millisecond book state.
enum State {
    Positive(i64),
    NonPositive,
    OneSided,
}

fn state_of(quote: &Quote) -> State {
    match quote.spread() {
        Ok(s) if s > 0 => State::Positive(s),
        Ok(_) => State::NonPositive,
        Err(_) => State::OneSided,
    }
}

/// Turns the full-day quote stream into the in-hours spread-change series.
///
/// `quotes` is the book's quote after every change, pre-market included; the
/// last pre-market state is the carry-over value and never an observation.
/// Several changes within one millisecond collapse to the last of them.
pub fn extract_spread_changes(
    quotes: &[Quote],
    bounds: TradingDayBounds,
) -> Result<SpreadSeries, AnalysisError> {
    let open = quotes.partition_point(|q| q.time_ms < bounds.t0_ms);
    let carry = open.checked_sub(1).map(|i| quotes[i]);
    let mut last_value = carry.and_then(|q| q.spread().ok().filter(|s| *s > 0));
    let mut quality = SeriesQuality {
        one_sided_at_open: !carry.is_some_and(|q| q.is_two_sided()),
        ..SeriesQuality::default()
    };
    let mut observations = Vec::new();

    let in_hours = &quotes[open..];
    let mut i = 0;
    while i < in_hours.len() && in_hours[i].time_ms <= bounds.te_ms {
        let time_ms = in_hours[i].time_ms;
        let mut j = i;
        while j + 1 < in_hours.len() && in_hours[j + 1].time_ms == time_ms {
            j += 1;
        }
        match state_of(&in_hours[j]) {
            State::Positive(s) => {
                if last_value != Some(s) {
                    observations.push(SpreadObservation {
                        time_ms,
                        spread: s as f64,
                    });
                    last_value = Some(s);
                }
            }
            State::NonPositive => quality.non_positive_states += 1,
            State::OneSided => quality.one_sided_states += 1,
        }
        i = j + 1;
    }

    if observations.is_empty() {
        return Err(AnalysisError::DegenerateDay(
            "no spread change during trading hours".into(),
        ));
    }
    Ok(SpreadSeries {
        t0_ms: bounds.t0_ms,
        te_ms: bounds.te_ms,
        observations,
        quality,
    })
}

pub fn mean_spread(
    series: &SpreadSeries,
    method: MeanMethod,
) -> Result<DailyAverageSpread, AnalysisError> {
    if series.is_empty() {
        return Err(AnalysisError::DegenerateDay("empty spread series".into()));
    }
    let arithmetic = || {
        series.observations.iter().map(|o| o.spread).sum::<f64>() / series.len() as f64
    };
    let mean_spread = match method {
        MeanMethod::PerChange => arithmetic(),
        MeanMethod::TimeWeighted => {
            let mut area = 0.0;
            let mut span = 0i64;
            for (obs, hold) in series.observations.iter().zip(series.hold_durations()) {
                area += obs.spread * hold as f64;
                span += hold;
            }
            if span > 0 {
                area / span as f64
            } else {
                arithmetic()
            }
        }
    };
    Ok(DailyAverageSpread {
        mean_spread,
        method,
    })
}
