//! Batch commands behind the `lobspread` binary.
//!
//! Every command writes plain files: JSON reports, CSV tables and CSV plot
//! data. Output is ordered by input name, never by completion order, so serial
//! and parallel runs produce identical bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use lobspread::analysis::{
    aggregate, analyze_day, duration_pdf, linear_pdf, stock_day_from_path, AnalysisConfig, Histogram,
    IntervalTag, OpeningStatus, StockDayReport, StockSummary, TickRegime, DEFAULT_LOG_BINS,
};
use lobspread::book::{replay_day, IntegrityIssue, ReplayMode};
use lobspread::ingest::{parse_event_file, write_event_file, EventKind, FormatConfig, MarketEvent, TimeFormat};
use lobspread::synth::{generate_event_stream, write_truth_json, SyntheticScenario, SyntheticTruth};
use lobspread::TradingDayBounds;

pub const REPORT_FILE: &str = "report.json";
pub const REPORTS_TABLE: &str = "reports.csv";
pub const DEGENERATE_TABLE: &str = "degenerate.csv";
pub const SUMMARY_TABLE: &str = "summary.csv";

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn read_events(path: &Path, format: &FormatConfig) -> Result<Vec<MarketEvent>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_event_file(BufReader::new(file), format).with_context(|| format!("{}: invalid event file", path.display()))
}

// ==== ingest ====

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub path: PathBuf,
    pub events: usize,
    pub counts: [u64; 5],
    pub issues: Vec<IntegrityIssue>,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.path.display());
        for kind in EventKind::ALL {
            let _ = writeln!(out, "  {:<16}{}", format!("{kind:?}"), self.counts[kind.code() as usize - 1]);
        }
        for issue in &self.issues {
            let _ = writeln!(out, "  event {} at {} ms: {}", issue.seq, issue.time_ms, issue.error);
        }
        let _ = writeln!(out, "{} events, {} errors", self.events, self.issues.len());
        out
    }
}

/// Parses a file and replays it through the book, collecting integrity
/// errors instead of stopping at the first one.
pub fn ingest_file(path: &Path, format: &FormatConfig, bounds: TradingDayBounds) -> Result<IngestReport> {
    let events = read_events(path, format)?;
    let replay = replay_day(&events, bounds, ReplayMode::Lenient).expect("lenient replay does not fail");
    Ok(IngestReport {
        path: path.to_path_buf(),
        events: events.len(),
        counts: replay.event_counts,
        issues: replay.issues,
    })
}

// ==== analyze ====

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub reports: Vec<StockDayReport>,
    /// Inputs that yielded no report, with the reason.
    pub degenerate: Vec<(PathBuf, String)>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn analyze_one(path: &Path, out_dir: &Path, format: &FormatConfig, config: &AnalysisConfig) -> Result<Result<StockDayReport, String>> {
    let events = read_events(path, format)?;
    let (ticker, day) = stock_day_from_path(path);
    let analysis = match analyze_day(&ticker, &day, &events, config) {
        Ok(a) => a,
        Err(e) => {
            log::warn!("{}: {e}", path.display());
            return Ok(Err(e.to_string()));
        }
    };
    let dir = out_dir.join(stem(path));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mean = Some(analysis.report.mean_spread.mean_spread);
    let mut json = create(&dir.join(REPORT_FILE))?;
    serde_json::to_writer_pretty(&mut json, &analysis.report)?;
    json.write_all(b"\n")?;
    json.flush()?;
    analysis.series.write_csv(create(&dir.join("spread.csv"))?)?;
    analysis.doubling.write_csv(create(&dir.join("smoothed_doubling.csv"))?, mean)?;
    analysis.overlap.write_csv(create(&dir.join("smoothed_overlap.csv"))?, mean)?;
    Ok(Ok(analysis.report))
}

/// Analyses every stock-day file with `jobs` worker threads and writes the
/// per-day outputs plus the combined `reports.csv` and `degenerate.csv`.
pub fn analyze_files(
    files: &[PathBuf],
    out_dir: &Path,
    format: &FormatConfig,
    config: &AnalysisConfig,
    jobs: usize,
) -> Result<AnalyzeOutcome> {
    if files.is_empty() {
        bail!("no input files");
    }
    config.validate()?;
    let mut stems = BTreeSet::new();
    for f in files {
        if !stems.insert(stem(f)) {
            bail!("two inputs share the file name {}", stem(f));
        }
    }
    let mut files = files.to_vec();
    files.sort_by_key(|f| stem(f));
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let results: Vec<Result<Result<StockDayReport, String>>> = pool.install(|| {
        files
            .par_iter()
            .map(|f| analyze_one(f, out_dir, format, config))
            .collect()
    });

    let mut reports = Vec::new();
    let mut degenerate = Vec::new();
    for (file, result) in files.iter().zip(results) {
        match result? {
            Ok(report) => reports.push(report),
            Err(reason) => degenerate.push((file.clone(), reason)),
        }
    }
    StockDayReport::write_csv(&reports, create(&out_dir.join(REPORTS_TABLE))?)?;
    let mut writer = csv::Writer::from_writer(create(&out_dir.join(DEGENERATE_TABLE))?);
    writer.write_record(["file", "reason"])?;
    for (file, reason) in &degenerate {
        writer.write_record([stem(file), reason.clone()])?;
    }
    writer.flush()?;
    Ok(AnalyzeOutcome { reports, degenerate })
}

// ==== summarize ====

/// Reads every `*/report.json` under `dir`, in name order.
pub fn load_reports(dir: &Path) -> Result<Vec<StockDayReport>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path().join(REPORT_FILE)))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let file = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            serde_json::from_reader(BufReader::new(file)).with_context(|| format!("{}: invalid report", p.display()))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SummaryOutcome {
    pub summaries: Vec<StockSummary>,
    /// File names of the histogram tables written.
    pub histograms: Vec<String>,
}

fn minutes(ms: f64) -> f64 {
    ms / 60_000.0
}

fn class_label(class: TickRegime) -> &'static str {
    match class {
        TickRegime::LargeTick => "large_tick",
        TickRegime::SmallTick => "small_tick",
    }
}

fn write_summary_table(summaries: &[StockSummary], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "ticker",
        "days",
        "valid_days",
        "zero_duration_days",
        "mean_duration_min",
        "quotient",
        "class",
        "mean_spread_ticks",
        "small_spread",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in summaries {
        writer.write_record([
            s.ticker.clone(),
            s.days.to_string(),
            s.valid_days.to_string(),
            s.zero_duration_days.to_string(),
            opt(s.mean_duration_minutes()),
            opt(s.quotient),
            class_label(s.class).to_string(),
            s.mean_spread_ticks.to_string(),
            s.small_spread.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Builds the per-ticker table and the histogram tables. Durations are in
/// minutes; an empty histogram is skipped with a warning.
pub fn summarize(report_dir: &Path, out_dir: &Path, mean_threshold_ticks: f64) -> Result<SummaryOutcome> {
    let reports = load_reports(report_dir)?;
    if reports.is_empty() {
        bail!("no reports under {}", report_dir.display());
    }
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let summaries = aggregate(&reports, mean_threshold_ticks);
    write_summary_table(&summaries, create(&out_dir.join(SUMMARY_TABLE))?)?;

    let mut tables: Vec<(&str, Result<Histogram, _>)> = Vec::new();

    let valid: Vec<&StockDayReport> = reports
        .iter()
        .filter(|r| !r.degenerate_start && r.opening.status == OpeningStatus::Ok && r.opening.duration_ms > 0.0)
        .collect();
    let by_class = |class| -> Vec<f64> {
        valid
            .iter()
            .filter(|r| r.tick.class == class)
            .map(|r| minutes(r.opening.duration_ms))
            .collect()
    };
    let (large, small) = (by_class(TickRegime::LargeTick), by_class(TickRegime::SmallTick));
    tables.push((
        "durations_by_class.csv",
        duration_pdf(&[("large_tick", &large), ("small_tick", &small)], DEFAULT_LOG_BINS),
    ));

    let stock_means = |small_spread: bool| -> Vec<f64> {
        summaries
            .iter()
            .filter(|s| s.small_spread == small_spread)
            .filter_map(|s| s.mean_duration_minutes())
            .filter(|t| *t > 0.0)
            .collect()
    };
    let (tight, other) = (stock_means(true), stock_means(false));
    tables.push((
        "durations_by_spread.csv",
        duration_pdf(&[("small_spread", &tight), ("other", &other)], DEFAULT_LOG_BINS),
    ));

    let per_tag = |value: &dyn Fn(&StockDayReport, IntervalTag) -> Option<f64>| -> Vec<Vec<f64>> {
        IntervalTag::ALL
            .iter()
            .map(|&tag| reports.iter().filter_map(|r| value(r, tag)).collect())
            .collect()
    };
    let sigma = per_tag(&|r, t| r.sigma(t));
    let share = per_tag(&|r, t| r.share(t));
    let sigma_slices = labelled(&sigma);
    let share_slices = labelled(&share);
    tables.push(("volatility_pdf.csv", linear_pdf(&sigma_slices)));
    tables.push(("in_spread_pdf.csv", linear_pdf(&share_slices)));

    let mut histograms = Vec::new();
    for (name, hist) in tables {
        match hist {
            Ok(h) => {
                h.write_csv(create(&out_dir.join(name))?)?;
                histograms.push(name.to_string());
            }
            Err(e) => log::warn!("{name} not written: {e}"),
        }
    }
    Ok(SummaryOutcome { summaries, histograms })
}

fn labelled(values: &[Vec<f64>]) -> Vec<(&'static str, &[f64])> {
    IntervalTag::ALL
        .iter()
        .zip(values)
        .map(|(tag, v)| (tag.label(), v.as_slice()))
        .collect()
}

// ==== synth ====

/// Writes a generated event file and its ground-truth sidecar next to it
/// (`<stem>.truth.json`). Returns the sidecar path.
pub fn synth_to_file(scenario: &SyntheticScenario, out: &Path, time_format: TimeFormat) -> Result<(PathBuf, SyntheticTruth)> {
    let day = generate_event_stream(scenario)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    let mut writer = create(out)?;
    write_event_file(&day.events, time_format, &mut writer)?;
    writer.flush()?;
    let sidecar = out.with_file_name(format!("{}.truth.json", stem(out)));
    let mut truth_out = create(&sidecar)?;
    write_truth_json(&day.truth, &mut truth_out)?;
    truth_out.flush()?;
    Ok((sidecar, day.truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lobspread::synth::ScenarioKind;

    #[test]
    fn stem_drops_directory_and_extension() {
        assert_eq!(stem(Path::new("data/AAPL_2016-03-01.csv")), "AAPL_2016-03-01");
        assert_eq!(stem(Path::new("")), "");
    }

    #[test]
    fn synthetic_file_ingests_cleanly_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested/SYN_2016-03-01.csv");
        let scenario = SyntheticScenario::new(ScenarioKind::ConstantSpread { ticks: 3.0 }, 4).with_changes(500);
        let (sidecar, truth) = synth_to_file(&scenario, &out, TimeFormat::Millis).unwrap();
        assert_eq!(sidecar, dir.path().join("nested/SYN_2016-03-01.truth.json"));
        assert!(sidecar.exists());

        let format = FormatConfig::default();
        let report = ingest_file(&out, &format, TradingDayBounds::default()).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.events as u64, report.counts.iter().sum::<u64>());
        assert_eq!(truth.scenario.seed, 4);
        let rendered = report.render();
        assert!(rendered.ends_with(&format!("{} events, 0 errors\n", report.events)), "{rendered}");
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_events(Path::new("/nonexistent/X_2016-03-01.csv"), &FormatConfig::default()).unwrap_err();
        assert!(format!("{err:#}").contains("/nonexistent/X_2016-03-01.csv"));
    }

    #[test]
    fn labels_follow_interval_order() {
        let values = vec![vec![1.0], vec![2.0, 3.0], vec![]];
        let pairs = labelled(&values);
        assert_eq!(pairs.len(), values.len().min(IntervalTag::ALL.len()));
        assert_eq!(pairs[0].0, IntervalTag::ALL[0].label());
        assert_eq!(pairs[1].1, &[2.0, 3.0]);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = analyze_files(&[], dir.path(), &FormatConfig::default(), &AnalysisConfig::default(), 1).unwrap_err();
        assert!(err.to_string().contains("no input files"));
        assert!(summarize(dir.path(), &dir.path().join("s"), 3.0).is_err());
    }
}
