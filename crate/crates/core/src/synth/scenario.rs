use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::analysis::TickRegime;
use crate::ingest::{TradingDayBounds, DEFAULT_TICK_SIZE};
use crate::series::{SeriesQuality, SpreadObservation, SpreadSeries};

pub const DEFAULT_NOISE: f64 = 0.05;
pub const DEFAULT_CHANGES: usize = 50_000;
pub const DEFAULT_EXCURSION_MS: i64 = 5;
/// Earliest defined elapsed time of the power-law curve, as a fraction of the
/// session length.
pub const POWER_LAW_START_FRACTION: f64 = 1e-3;

/// Shape of the planted spread curve, in ticks as a function of elapsed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `terminal_ticks * (D / e)^alpha`, with `e` floored at a thousandth of
    /// the session length `D`.
    PowerLawDecay { alpha: f64, terminal_ticks: f64 },
    /// Quadratic descent from `start_ticks` to one tick, reached at
    /// `saturation_ms` and held for the rest of the day.
    SaturatingLargeTick { start_ticks: f64, saturation_ms: f64 },
    /// `factor * base_ticks` during the opening period, `base_ticks` after it.
    PlantedOpening {
        opening_ms: f64,
        base_ticks: f64,
        factor: f64,
    },
    ConstantSpread { ticks: f64 },
    /// One tick from the first change on.
    DegenerateStart,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::PowerLawDecay { .. } => "power_law_decay",
            ScenarioKind::SaturatingLargeTick { .. } => "saturating_large_tick",
            ScenarioKind::PlantedOpening { .. } => "planted_opening",
            ScenarioKind::ConstantSpread { .. } => "constant_spread",
            ScenarioKind::DegenerateStart => "degenerate_start",
        }
    }

    /// Noise-free curve value in ticks.
    pub fn curve_ticks(&self, elapsed_ms: f64, day_length_ms: f64) -> f64 {
        match *self {
            ScenarioKind::PowerLawDecay {
                alpha,
                terminal_ticks,
            } => {
                let start = POWER_LAW_START_FRACTION * day_length_ms;
                terminal_ticks * (day_length_ms / elapsed_ms.max(start)).powf(alpha)
            }
            ScenarioKind::SaturatingLargeTick {
                start_ticks,
                saturation_ms,
            } => {
                let rest = (1.0 - elapsed_ms / saturation_ms).max(0.0);
                1.0 + (start_ticks - 1.0) * rest * rest
            }
            ScenarioKind::PlantedOpening {
                opening_ms,
                base_ticks,
                factor,
            } => {
                if elapsed_ms < opening_ms {
                    base_ticks * factor
                } else {
                    base_ticks
                }
            }
            ScenarioKind::ConstantSpread { ticks } => ticks,
            ScenarioKind::DegenerateStart => 1.0,
        }
    }

    fn validate(&self, day_length_ms: f64) -> Result<(), SynthError> {
        let bad = |what: &str| Err(SynthError::InvalidScenario(what.to_string()));
        match *self {
            ScenarioKind::PowerLawDecay {
                alpha,
                terminal_ticks,
            } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return bad("power-law exponent must lie in (0, 1)");
                }
                if terminal_ticks.is_nan() || terminal_ticks < 1.0 {
                    return bad("terminal spread must be at least one tick");
                }
            }
            ScenarioKind::SaturatingLargeTick {
                start_ticks,
                saturation_ms,
            } => {
                if start_ticks.is_nan() || start_ticks < 1.0 {
                    return bad("start spread must be at least one tick");
                }
                if !(saturation_ms > 0.0 && saturation_ms <= day_length_ms) {
                    return bad("saturation time must lie within the session");
                }
            }
            ScenarioKind::PlantedOpening {
                opening_ms,
                base_ticks,
                factor,
            } => {
                if !(opening_ms > 0.0 && opening_ms < day_length_ms) {
                    return bad("opening duration must lie within the session");
                }
                if base_ticks.is_nan() || base_ticks < 1.0 {
                    return bad("base spread must be at least one tick");
                }
                if !(factor >= 1.0 && factor.is_finite()) {
                    return bad("opening factor must be at least 1");
                }
            }
            ScenarioKind::ConstantSpread { ticks } => {
                if !(ticks >= 1.0 && ticks.is_finite()) {
                    return bad("constant spread must be at least one tick");
                }
            }
            ScenarioKind::DegenerateStart => {}
        }
        Ok(())
    }
}

/// How spread-change instants are spread over the session.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RateModel {
    /// Uniform rate over the whole session.
    #[default]
    Homogeneous,
    /// `factor` times the base rate during the first `opening_ms`.
    TwoPhase { opening_ms: f64, factor: f64 },
}

impl RateModel {
    /// Maps a uniform draw in `[0, 1)` to an elapsed time through the inverse
    /// cumulative intensity.
    fn elapsed_at(&self, u: f64, day_length_ms: f64) -> f64 {
        match *self {
            RateModel::Homogeneous => u * day_length_ms,
            RateModel::TwoPhase { opening_ms, factor } => {
                let head = factor * opening_ms;
                let x = u * (head + day_length_ms - opening_ms);
                if x < head {
                    x / factor
                } else {
                    opening_ms + (x - head)
                }
            }
        }
    }
}

/// Order flow laid around the quote changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    /// In-hours submissions besides the quote orders.
    pub fillers: usize,
    /// Target share of in-spread submissions among all in-hours submissions.
    pub in_spread_fraction: f64,
    pub hidden_executions: usize,
    /// Small executions against live quote orders that leave the quote intact.
    pub partial_executions: usize,
    /// Initial midpoint, price units.
    pub base_price: i64,
    /// Probability that the midpoint moves by one tick at a spread change.
    pub drift: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            fillers: 0,
            in_spread_fraction: 0.0,
            hidden_executions: 0,
            partial_executions: 0,
            base_price: 1_000_000,
            drift: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub kind: ScenarioKind,
    pub rate: RateModel,
    /// Standard deviation of the multiplicative log-normal noise.
    pub noise: f64,
    pub seed: u64,
    /// Number of in-hours spread changes.
    pub changes: usize,
    pub tick_size: i64,
    pub bounds: TradingDayBounds,
    /// Longest dwell of the one-tick excursion that separates two equal
    /// consecutive draws.
    pub excursion_ms: i64,
    pub flow: FlowParams,
}

impl SyntheticScenario {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            rate: RateModel::Homogeneous,
            noise: DEFAULT_NOISE,
            seed,
            changes: DEFAULT_CHANGES,
            tick_size: DEFAULT_TICK_SIZE,
            bounds: TradingDayBounds::default(),
            excursion_ms: DEFAULT_EXCURSION_MS,
            flow: FlowParams::default(),
        }
    }

    pub fn with_changes(mut self, changes: usize) -> Self {
        self.changes = changes;
        self
    }

    pub fn with_rate(mut self, rate: RateModel) -> Self {
        self.rate = rate;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_flow(mut self, flow: FlowParams) -> Self {
        self.flow = flow;
        self
    }

    pub fn day_length_ms(&self) -> f64 {
        self.bounds.day_length_ms() as f64
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |what: &str| Err(SynthError::InvalidScenario(what.to_string()));
        let day = self.day_length_ms();
        self.kind.validate(day)?;
        if self.changes as i64 > self.bounds.day_length_ms() {
            return bad("more spread changes than milliseconds in the session");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be non-negative");
        }
        if self.tick_size <= 0 {
            return bad("tick size must be positive");
        }
        if self.excursion_ms < 1 {
            return bad("excursion dwell must be at least 1 ms");
        }
        if let RateModel::TwoPhase { opening_ms, factor } = self.rate {
            if !(opening_ms > 0.0 && opening_ms < day && factor > 0.0 && factor.is_finite()) {
                return bad("two-phase rate needs an opening within the session and a positive factor");
            }
        }
        let flow = &self.flow;
        if !(0.0..=1.0).contains(&flow.in_spread_fraction) {
            return bad("in-spread fraction must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&flow.drift) {
            return bad("drift probability must lie in [0, 1]");
        }
        if flow.base_price <= 0 {
            return bad("base price must be positive");
        }
        Ok(())
    }

    /// Tick regime the planted curve belongs to.
    pub fn expected_class(&self) -> TickRegime {
        let end = self.kind.curve_ticks(self.day_length_ms(), self.day_length_ms());
        if end.round() <= 1.0 {
            TickRegime::LargeTick
        } else {
            TickRegime::SmallTick
        }
    }

    /// Whether the curve sits at one tick from the first change on.
    pub fn expected_degenerate_start(&self) -> bool {
        self.kind.curve_ticks(0.0, self.day_length_ms()).round() <= 1.0
    }
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub scenario: SyntheticScenario,
    pub changes: usize,
    /// Changes that are one-tick excursions rather than fresh draws.
    pub excursions: usize,
    pub alpha: Option<f64>,
    pub opening_ms: Option<f64>,
    pub class: TickRegime,
    pub degenerate_start: bool,
    pub flow: Option<FlowTruth>,
}

/// Order-flow counts of a generated event stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTruth {
    pub events: usize,
    /// In-hours submissions, quote orders included.
    pub submissions: usize,
    pub in_spread_submissions: usize,
}

impl FlowTruth {
    pub fn in_spread_share(&self) -> f64 {
        if self.submissions == 0 {
            0.0
        } else {
            self.in_spread_submissions as f64 / self.submissions as f64
        }
    }
}

/// Series generation shared with the event-stream builder; the RNG is handed
/// on so that order flow continues the same seeded stream.
pub(crate) struct Planned {
    pub series: SpreadSeries,
    pub truth: SyntheticTruth,
    /// Pre-market carry-over spread, price units.
    pub carry: i64,
    pub rng: ChaCha8Rng,
}

fn change_times(scenario: &SyntheticScenario, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let bounds = scenario.bounds;
    let day = scenario.day_length_ms();
    let n = scenario.changes;
    let mut draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    draws.sort_by(f64::total_cmp);
    let mut times: Vec<i64> = draws
        .iter()
        .map(|&u| bounds.t0_ms + (scenario.rate.elapsed_at(u, day).ceil() as i64).max(1))
        .collect();
    for i in 1..n {
        times[i] = times[i].max(times[i - 1] + 1);
    }
    let mut limit = bounds.te_ms;
    for t in times.iter_mut().rev() {
        *t = (*t).min(limit);
        limit = *t - 1;
    }
    times
}

pub(crate) fn plan(scenario: &SyntheticScenario) -> Result<Planned, SynthError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let bounds = scenario.bounds;
    let day = scenario.day_length_ms();
    let tick = scenario.tick_size;
    let times = change_times(scenario, &mut rng);

    let targets: Vec<i64> = times
        .iter()
        .map(|&t| {
            let z: f64 = rng.sample(StandardNormal);
            let ticks = scenario.kind.curve_ticks((t - bounds.t0_ms) as f64, day) * (scenario.noise * z).exp();
            (ticks.round() as i64).max(1) * tick
        })
        .collect();

    let carry = targets.first().map_or(2 * tick, |v| v + tick);
    let mut last = carry;
    let mut excursions = 0;
    let mut observations = Vec::with_capacity(times.len());
    for (i, (&time, &target)) in times.iter().zip(&targets).enumerate() {
        let (time_ms, value) = if target != last {
            (time, target)
        } else {
            excursions += 1;
            let next = times.get(i + 1).copied().unwrap_or(bounds.te_ms);
            (time.max(next - scenario.excursion_ms), last + tick)
        };
        observations.push(SpreadObservation {
            time_ms,
            spread: value as f64,
        });
        last = value;
    }

    let (alpha, opening_ms) = match scenario.kind {
        ScenarioKind::PowerLawDecay { alpha, .. } => (Some(alpha), None),
        ScenarioKind::PlantedOpening { opening_ms, .. } => (None, Some(opening_ms)),
        ScenarioKind::ConstantSpread { .. } | ScenarioKind::DegenerateStart => (None, Some(0.0)),
        ScenarioKind::SaturatingLargeTick { .. } => (None, None),
    };
    let truth = SyntheticTruth {
        scenario: *scenario,
        changes: observations.len(),
        excursions,
        alpha,
        opening_ms,
        class: scenario.expected_class(),
        degenerate_start: scenario.expected_degenerate_start(),
        flow: None,
    };
    let series = SpreadSeries {
        t0_ms: bounds.t0_ms,
        te_ms: bounds.te_ms,
        observations,
        quality: SeriesQuality::default(),
    };
    Ok(Planned {
        series,
        truth,
        carry,
        rng,
    })
}

/// Spread-change series of the scenario together with its ground truth.
pub fn generate_spread_series(scenario: &SyntheticScenario) -> Result<(SpreadSeries, SyntheticTruth), SynthError> {
    let planned = plan(scenario)?;
    Ok((planned.series, planned.truth))
}
