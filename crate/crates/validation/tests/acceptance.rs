//! Acceptance suite. Prints one `[acceptance]` line per criterion and exits
//! non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lobspread_validation::{ensure, run, Check, Criterion};

use lobspread::analysis::{
    aggregate, analyze_day, detect_opening, fit_power_law, terminal_ratio, volatility, AnalysisConfig, Interval,
    IntervalTag, OpeningStatus, StockDayReport, TickRegime, DEFAULT_FIT_MIN_ELAPSED_MS, DEFAULT_OPENING_FACTOR,
};
use lobspread::analysis::tick::DEFAULT_MEAN_THRESHOLD_TICKS;
use lobspread::book::{replay_day, MidpointPath, OrderBook, ReplayMode};
use lobspread::ingest::{parse_events, write_event_file, FormatConfig, Side, TimeFormat};
use lobspread::series::{mean_spread, DailyAverageSpread, MeanMethod};
use lobspread::smooth::{
    layout_windows, smooth_series, Normalization, SmoothedPoint, SmoothedSeries, SmoothingOptions, Window,
    WindowScheme,
};
use lobspread::synth::{
    generate_event_stream, generate_spread_series, FlowParams, IdealizedSpreadModel, ScenarioKind, SyntheticScenario,
};
use lobspread::MarketEvent;
use lobspread_cli::{analyze_files, synth_to_file};
use rand::Rng;

fn minutes(ms: f64) -> f64 {
    ms / 60_000.0
}

fn day_report(scenario: &SyntheticScenario, config: &AnalysisConfig) -> StockDayReport {
    let day = generate_event_stream(scenario).expect("valid scenario");
    analyze_day("SYN", "2016-03-01", &day.events, config)
        .expect("analysable day")
        .report
}

fn power_law(alpha: f64, seed: u64) -> SyntheticScenario {
    SyntheticScenario::new(
        ScenarioKind::PowerLawDecay {
            alpha,
            terminal_ticks: 4.0,
        },
        seed,
    )
}

fn with_prices(events: &[MarketEvent], f: impl Fn(i64) -> i64) -> Vec<MarketEvent> {
    events
        .iter()
        .map(|e| MarketEvent {
            price: f(e.price),
            ..*e
        })
        .collect()
}

// 1
fn window_layout() -> Check {
    let doubling: Vec<(usize, usize)> = layout_windows(1024, WindowScheme::GeometricDoubling)
        .map_err(|e| e.to_string())?
        .windows
        .iter()
        .map(|w| (w.start, w.end))
        .collect();
    let expected = vec![(1, 64), (65, 128), (129, 256), (257, 512), (513, 1024)];
    ensure(doubling == expected, || format!("doubling layout {doubling:?}"))?;

    let overlap = layout_windows(1024, WindowScheme::Overlap11).map_err(|e| e.to_string())?;
    let third = overlap.windows[2];
    ensure((third.start, third.end) == (70, 141), || format!("overlap window 3 = {third:?}"))?;

    for n in [64, 100, 128, 300, 1024, 5_000, 77_777, 200_000] {
        let layout = layout_windows(n, WindowScheme::Overlap11).map_err(|e| e.to_string())?;
        let quarter = n as f64 / 4.0;
        for w in &layout.windows {
            ensure(w.end <= n, || format!("n {n}: window {w:?} past the end"))?;
            ensure(!w.partial || w.len() as f64 >= quarter, || format!("n {n}: window {w:?} below the quarter floor"))?;
        }
        // The window after the last one would start past the end or fall under the floor.
        let k = layout.windows.len() as i32 + 1;
        let grow = 1.1f64.powi(k - 2);
        let next_start = if k == 2 { 65 } else { (64.0 * grow).round() as usize };
        let next_end = if k == 2 { 128 } else { (128.0 * grow).round() as usize };
        let stops = next_start > n || (next_end > n && ((n + 1 - next_start) as f64) < quarter);
        ensure(stops, || format!("n {n}: layout stopped early at {} windows", layout.windows.len()))?;
    }
    Ok("doubling and overlap layouts exact; quarter floor holds for 8 sizes".into())
}

// 2
fn book_oracle() -> Check {
    let started = Instant::now();
    let mut events_checked = 0usize;
    for seed in 0..100 {
        let events = common::random_stream(10_000 + seed, 100_000, 60);
        let mut book = OrderBook::new();
        let mut naive = common::NaiveBook::default();
        for (i, event) in events.iter().enumerate() {
            book.apply(event).map_err(|e| format!("stream {seed} seq {}: {e}", event.seq))?;
            naive.apply(event);
            ensure(
                (book.best_bid(), book.best_ask()) == (naive.best_bid(), naive.best_ask()),
                || format!("stream {seed} seq {}: quotes differ", event.seq),
            )?;
            ensure(
                book.level_size(event.direction, event.price) == naive.level_size(event.direction, event.price),
                || format!("stream {seed} seq {}: touched level differs", event.seq),
            )?;
            if i % 64 == 63 || i + 1 == events.len() {
                ensure(
                    book.bid_levels().eq(naive.levels(Side::Buy)) && book.ask_levels().eq(naive.levels(Side::Sell)),
                    || format!("stream {seed} seq {}: ladders differ", event.seq),
                )?;
            }
            events_checked += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {:.1} s", elapsed.as_secs_f64()))?;
    Ok(format!(
        "{events_checked} events agree (quotes and touched level every event, full ladders every 64), {:.1} s",
        elapsed.as_secs_f64()
    ))
}

// 3
fn power_law_recovery() -> Check {
    let config = AnalysisConfig::default();
    let mut inside = 0;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let report = day_report(&power_law(0.4, seed).with_changes(50_000).with_noise(0.05), &config);
        let alpha = report.fit.map(|f| f.alpha).ok_or_else(|| format!("seed {seed}: no fit"))?;
        worst = worst.max((alpha - 0.4).abs());
        if (alpha - 0.4).abs() <= 0.05 {
            inside += 1;
        }
    }
    ensure(inside >= 95, || format!("{inside}/100 seeds within 0.40 +- 0.05"))?;
    Ok(format!("{inside}/100 seeds within 0.40 +- 0.05, worst deviation {worst:.3}"))
}

// 4
fn terminal_ratio_check() -> Check {
    let mut parts = Vec::new();
    for alpha in [0.2, 0.3, 0.4, 0.5] {
        let scenario = SyntheticScenario {
            tick_size: 1,
            ..SyntheticScenario::new(
                ScenarioKind::PowerLawDecay {
                    alpha,
                    terminal_ticks: 1_000.0,
                },
                42,
            )
        }
        .with_noise(0.0)
        .with_changes(50_000);
        let (series, _) = generate_spread_series(&scenario).map_err(|e| e.to_string())?;
        let daily = mean_spread(&series, MeanMethod::TimeWeighted).map_err(|e| e.to_string())?;
        let normalized = smooth_series(&series, WindowScheme::GeometricDoubling, SmoothingOptions::default())
            .map_err(|e| e.to_string())?
            .normalized(daily.mean_spread);
        let ratio = terminal_ratio(&normalized, scenario.day_length_ms()).map_err(|e| e.to_string())?;
        let rel = ratio / (1.0 - alpha) - 1.0;
        ensure(rel.abs() <= 0.05, || format!("alpha {alpha}: ratio {ratio:.4}, {:+.2}%", 100.0 * rel))?;
        parts.push(format!("{alpha}: {ratio:.3}"));
    }
    Ok(format!("ratios {}", parts.join(", ")))
}

// 5
fn mean_approximation() -> Check {
    let day = 23_400_000.0;
    let mut worst: (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut failures = Vec::new();
    for alpha in [0.2, 0.3, 0.4, 0.5] {
        for fraction in [1e-3, 1e-4, 1e-5] {
            let t_l = fraction * day;
            let model = IdealizedSpreadModel::new(1.0, alpha, t_l, day).map_err(|e| e.to_string())?;
            let mean = model.mean();
            let quadrature = common::integrate_log(|t| t.powf(-alpha), t_l, day, 20_000) / (day - t_l);
            ensure((mean.exact / quadrature - 1.0).abs() < 1e-8, || {
                format!("alpha {alpha}: closed form {} vs quadrature {quadrature}", mean.exact)
            })?;
            let gap = (mean.approximation / mean.exact - 1.0).abs();
            if gap > worst.2 {
                worst = (alpha, fraction, gap);
            }
            if gap > 0.01 {
                failures.push(format!("alpha {alpha} at t_l/t_e {fraction:e}: {:.2}%", 100.0 * gap));
            }
        }
    }
    ensure(failures.is_empty(), || format!("gap above 1%: {}", failures.join("; ")))?;
    Ok(format!("largest gap {:.2}% (alpha {}, t_l/t_e {:e})", 100.0 * worst.2, worst.0, worst.1))
}

// 6
fn opening_detection() -> Check {
    let config = AnalysisConfig::default();
    let mut parts = Vec::new();
    for planted in [5.0, 12.0, 37.0, 60.0] {
        let mut found = Vec::new();
        for seed in 0..5 {
            let kind = ScenarioKind::PlantedOpening {
                opening_ms: planted * 60_000.0,
                base_ticks: 3.0,
                factor: 3.0,
            };
            let report = day_report(&SyntheticScenario::new(kind, 500 + seed), &config);
            let t = minutes(report.opening.duration_ms);
            ensure((t / planted - 1.0).abs() <= 0.25, || format!("planted {planted} min, seed {seed}: found {t:.2} min"))?;
            found.push(t);
        }
        let (lo, hi) = found
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), t| (lo.min(*t), hi.max(*t)));
        parts.push(format!("{planted}->[{lo:.1},{hi:.1}]"));
    }

    let constant = day_report(&SyntheticScenario::new(ScenarioKind::ConstantSpread { ticks: 4.0 }, 3), &config);
    ensure(
        constant.opening.duration_ms == 0.0 && constant.opening.status == OpeningStatus::NeverAbove,
        || format!("constant spread gave {:?}", constant.opening),
    )?;

    let high = SmoothedSeries {
        scheme: WindowScheme::Overlap11,
        options: SmoothingOptions::default(),
        normalization: Normalization::Raw,
        points: (0..30)
            .map(|i| SmoothedPoint {
                window: Window {
                    start: i + 1,
                    end: i + 64,
                    partial: false,
                },
                elapsed_ms: 60_000.0 * (i + 1) as f64,
                mean: 1_000.0 - 10.0 * i as f64,
            })
            .collect(),
        skipped: vec![],
    };
    let daily = DailyAverageSpread {
        mean_spread: 400.0,
        method: MeanMethod::TimeWeighted,
    };
    let always = detect_opening(&high, &daily, 34_200_000, DEFAULT_OPENING_FACTOR).map_err(|e| e.to_string())?;
    ensure(always.status == OpeningStatus::AlwaysAbove, || format!("monotone-high series gave {:?}", always.status))?;
    Ok(format!(
        "planted min->found range {}; constant -> 0; monotone-high -> always_above",
        parts.join(" ")
    ))
}

// 7
fn classification() -> Check {
    let config = AnalysisConfig::default();
    let mut reports = Vec::new();
    for seed in 0..5 {
        let large = SyntheticScenario::new(
            ScenarioKind::SaturatingLargeTick {
                start_ticks: 6.0,
                saturation_ms: 600_000.0,
            },
            seed,
        );
        let mut r = day_report(&large, &config);
        ensure(r.tick.class == TickRegime::LargeTick, || format!("saturating seed {seed}: {:?}", r.tick.class))?;
        r.ticker = "LARGE".into();
        r.day = format!("day{seed}");
        reports.push(r);

        let mut r = day_report(&power_law(0.4, seed), &config);
        ensure(r.tick.class == TickRegime::SmallTick, || format!("power law seed {seed}: {:?}", r.tick.class))?;
        r.ticker = "SMALL".into();
        r.day = format!("day{seed}");
        reports.push(r);

        let mut r = day_report(&SyntheticScenario::new(ScenarioKind::DegenerateStart, seed), &config);
        ensure(r.degenerate_start, || format!("degenerate-start seed {seed} not flagged"))?;
        r.ticker = "SIRI".into();
        r.day = format!("day{seed}");
        reports.push(r);
    }
    let summaries = aggregate(&reports, DEFAULT_MEAN_THRESHOLD_TICKS);
    let tickers: Vec<&str> = summaries.iter().map(|s| s.ticker.as_str()).collect();
    ensure(tickers == ["LARGE", "SMALL"], || format!("summary tickers {tickers:?}"))?;
    ensure(
        summaries[0].class == TickRegime::LargeTick && summaries[1].class == TickRegime::SmallTick,
        || "summary classes wrong".into(),
    )?;
    Ok("5/5 saturating -> large_tick, 5/5 power law -> small_tick, 5/5 degenerate starts excluded".into())
}

// 8
fn scale_invariances() -> Check {
    let config = AnalysisConfig::default();
    let mut rng = common::rng(8);
    for instance in 0..20 {
        let seed = rng.random::<u64>();
        let scenario = if instance % 2 == 0 {
            power_law(rng.random_range(0.2..0.6), seed)
        } else {
            SyntheticScenario::new(
                ScenarioKind::PlantedOpening {
                    opening_ms: rng.random_range(300_000.0..3_600_000.0),
                    base_ticks: 3.0,
                    factor: 3.0,
                },
                seed,
            )
        }
        .with_changes(20_000)
        .with_flow(FlowParams {
            fillers: 10_000,
            in_spread_fraction: 0.2,
            hidden_executions: 500,
            partial_executions: 500,
            ..FlowParams::default()
        });
        let day = generate_event_stream(&scenario).map_err(|e| e.to_string())?;
        let base = analyze_day("SYN", "d", &day.events, &config).map_err(|e| e.to_string())?;

        let lambda: i64 = rng.random_range(2..=20);
        let scaled_config = AnalysisConfig {
            tick_size: config.tick_size * lambda,
            ..config
        };
        let scaled = analyze_day("SYN", "d", &with_prices(&day.events, |p| p * lambda), &scaled_config)
            .map_err(|e| e.to_string())?;
        ensure(base.report.opening.duration_ms == scaled.report.opening.duration_ms
            && base.report.opening.status == scaled.report.opening.status, || {
            format!("instance {instance}: opening {:?} vs {:?} under price x{lambda}", base.report.opening, scaled.report.opening)
        })?;
        for (a, b) in base.report.volatility.iter().zip(&scaled.report.volatility) {
            ensure((a.sigma - b.sigma).abs() <= 1e-9 * a.sigma.max(1e-12), || {
                format!("instance {instance}: sigma {} vs {} under price x{lambda}", a.sigma, b.sigma)
            })?;
        }
        ensure(base.report.volatility.len() == scaled.report.volatility.len(), || "volatility count changed".into())?;
        match (base.report.fit, scaled.report.fit) {
            (Some(a), Some(b)) => ensure((a.alpha - b.alpha).abs() < 1e-9, || {
                format!("instance {instance}: alpha {} vs {} under price x{lambda}", a.alpha, b.alpha)
            })?,
            (None, None) => {}
            _ => return Err(format!("instance {instance}: fit availability changed under price x{lambda}")),
        }

        let k = [0.5, 2.0, 10.0][instance % 3];
        let normalized = base.doubling.normalized(base.report.mean_spread.mean_spread);
        let mut stretched = normalized.clone();
        for p in &mut stretched.points {
            p.elapsed_ms *= k;
        }
        if let (Ok(a), Ok(b)) = (
            fit_power_law(&normalized, base.report.opening.duration_ms, DEFAULT_FIT_MIN_ELAPSED_MS),
            fit_power_law(&stretched, k * base.report.opening.duration_ms, k * DEFAULT_FIT_MIN_ELAPSED_MS),
        ) {
            ensure((a.alpha - b.alpha).abs() < 1e-6, || {
                format!("instance {instance}: alpha {} vs {} under time x{k}", a.alpha, b.alpha)
            })?;
        } else {
            return Err(format!("instance {instance}: fit unavailable"));
        }

        let shift = 100 * rng.random_range(-2_000..2_000i64);
        let moved = analyze_day("SYN", "d", &with_prices(&day.events, |p| p + shift), &config)
            .map_err(|e| e.to_string())?;
        ensure(moved.report.in_spread == base.report.in_spread, || {
            format!("instance {instance}: in-spread shares changed under price +{shift}")
        })?;
        ensure(!base.report.in_spread.is_empty(), || format!("instance {instance}: no in-spread shares"))?;
    }
    Ok("20/20 instances: opening, alpha, sigma invariant under price scaling; alpha under time scaling; shares under translation".into())
}

// 9
fn statistics_oracles() -> Check {
    let changes = 2_000;
    let scenario = power_law(0.4, 9).with_changes(changes).with_flow(FlowParams {
        fillers: 10_000 - 2 * changes,
        in_spread_fraction: 0.3,
        ..FlowParams::default()
    });
    let day = generate_event_stream(&scenario).map_err(|e| e.to_string())?;
    let replay = replay_day(&day.events, scenario.bounds, ReplayMode::Strict).map_err(|e| e.error.to_string())?;
    let session = Interval {
        tag: IntervalTag::Opening,
        start_ms: scenario.bounds.t0_ms,
        end_ms: scenario.bounds.te_ms,
        clamped: false,
    };
    let share = lobspread::analysis::in_spread_share(&replay.submissions, &session).map_err(|e| e.to_string())?;
    ensure(share.submissions >= 10_000, || format!("only {} submissions", share.submissions))?;
    ensure((share.share - 0.3).abs() <= 0.01, || format!("share {:.4}", share.share))?;

    let mut inside = 0;
    for seed in 0..100 {
        let walk = common::geometric_walk(900 + seed, 1_000_000.0, 1e-3, 390);
        let path = MidpointPath::from_points(walk.iter().map(|(t, m)| (*t, Some(*m))));
        let sigma = volatility(&path, &session).map_err(|e| e.to_string())?.sigma;
        let direct = common::population_std(&common::minute_returns(&walk, session.start_ms, session.end_ms));
        ensure((sigma - direct).abs() < 1e-15, || format!("seed {seed}: {sigma} vs direct {direct}"))?;
        if (sigma / 1e-3 - 1.0).abs() <= 0.15 {
            inside += 1;
        }
    }
    ensure(inside == 100, || format!("{inside}/100 walks within 15%"))?;
    Ok(format!(
        "share {:.4} over {} submissions; 100/100 walks within 15% of 1e-3",
        share.share, share.submissions
    ))
}

fn write_days(dir: &Path, count: usize) -> Vec<PathBuf> {
    (0..count)
        .map(|i| {
            let scenario = power_law(0.4, 70 + i as u64).with_flow(FlowParams {
                fillers: 20_000,
                in_spread_fraction: 0.2,
                hidden_executions: 1_000,
                partial_executions: 1_000,
                ..FlowParams::default()
            });
            let path = dir.join(format!("T{:02}_2016-03-0{}.csv", i / 3, 1 + i % 3));
            synth_to_file(&scenario, &path, TimeFormat::Millis).expect("synthetic file");
            path
        })
        .collect()
}

// 10a
fn throughput() -> Check {
    let scenario = power_law(0.4, 10).with_changes(100_000).with_flow(FlowParams {
        fillers: 100_000,
        in_spread_fraction: 0.2,
        hidden_executions: 10_000,
        partial_executions: 10_000,
        ..FlowParams::default()
    });
    let day = generate_event_stream(&scenario).map_err(|e| e.to_string())?;
    let mut text = Vec::new();
    write_event_file(&day.events, TimeFormat::Millis, &mut text).map_err(|e| e.to_string())?;
    let text = String::from_utf8(text).map_err(|e| e.to_string())?;
    let mut best = f64::MAX;
    for _ in 0..3 {
        let started = Instant::now();
        let events = parse_events(&text, &FormatConfig::default()).map_err(|e| e.to_string())?;
        let replay = replay_day(&events, scenario.bounds, ReplayMode::Lenient).map_err(|e| e.error.to_string())?;
        best = best.min(started.elapsed().as_secs_f64());
        ensure(replay.is_clean(), || "replay reported issues".into())?;
    }
    let rate = day.events.len() as f64 / best;
    ensure(rate >= 5e5, || format!("{rate:.0} events/s"))?;
    Ok(format!("{:.2e} events/s over {} events", rate, day.events.len()))
}

// 10b
fn parallel_scaling() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = write_days(dir.path(), 8);
    let format = FormatConfig::default();
    let config = AnalysisConfig::default();
    let timed = |jobs: usize| -> Result<f64, String> {
        let out = dir.path().join(format!("out{jobs}"));
        let started = Instant::now();
        analyze_files(&files, &out, &format, &config, jobs).map_err(|e| e.to_string())?;
        Ok(started.elapsed().as_secs_f64())
    };
    let serial = timed(1)?;
    let parallel = timed(4)?;
    let speedup = serial / parallel;
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    ensure(speedup >= 3.0, || {
        format!("speedup {speedup:.2}x with 4 jobs on {cpus} available CPU(s) (serial {serial:.2} s, parallel {parallel:.2} s)")
    })?;
    Ok(format!("speedup {speedup:.2}x with 4 jobs on {cpus} CPU(s)"))
}

fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).expect("readable file");
                out.push((path.strip_prefix(root).expect("inside root").to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}

// 11
fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = write_days(dir.path(), 4);
    let format = FormatConfig::default();
    let config = AnalysisConfig::default();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let parallel = dir.path().join("parallel");
    analyze_files(&files, &first, &format, &config, 1).map_err(|e| e.to_string())?;
    analyze_files(&files, &second, &format, &config, 1).map_err(|e| e.to_string())?;
    let mut shuffled = files.clone();
    shuffled.reverse();
    analyze_files(&shuffled, &parallel, &format, &config, 4).map_err(|e| e.to_string())?;
    let a = tree_bytes(&first);
    ensure(a.len() >= 4 * 4 + 2, || format!("only {} output files", a.len()))?;
    ensure(a == tree_bytes(&second), || "repeated runs differ".into())?;
    ensure(a == tree_bytes(&parallel), || "serial and parallel runs differ".into())?;
    Ok(format!("{} output files byte-identical across two serial runs and a 4-job run", a.len()))
}

fn main() -> ExitCode {
    let criterion = |id, title, check| Criterion { id, title, check };
    let criteria = [
        criterion("1", "window layout exactness", window_layout),
        criterion("2", "book oracle equivalence", book_oracle),
        criterion("3", "power-law recovery", power_law_recovery),
        criterion("4", "terminal ratio", terminal_ratio_check),
        criterion("5", "closed-form mean approximation", mean_approximation),
        criterion("6", "opening detection", opening_detection),
        criterion("7", "classification", classification),
        criterion("8", "scale invariances", scale_invariances),
        criterion("9", "statistics oracles", statistics_oracles),
        criterion("10a", "parse and replay throughput", throughput),
        criterion("10b", "parallel scaling", parallel_scaling),
        criterion("11", "end-to-end determinism", determinism),
    ];
    let only = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    if run(&criteria, only.as_deref()) > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
