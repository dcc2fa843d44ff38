use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lobspread::analysis::{
    AnalysisConfig, TickCriterion, TickTolerances, DEFAULT_FIT_MIN_ELAPSED_MS, DEFAULT_OPENING_FACTOR,
};
use lobspread::analysis::tick::{DEFAULT_DEGENERATE_TICKS, DEFAULT_MEAN_THRESHOLD_TICKS, DEFAULT_SATURATION_TICKS};
use lobspread::book::ReplayMode;
use lobspread::ingest::{FormatConfig, TimeFormat, DEFAULT_TICK_SIZE, MARKET_CLOSE_MS, MARKET_OPEN_MS};
use lobspread::series::MeanMethod;
use lobspread::smooth::{SmoothingOptions, TimeRep, WindowWeighting};
use lobspread::synth::{FlowParams, RateModel, ScenarioKind, SyntheticScenario};
use lobspread::TradingDayBounds;
use lobspread_cli::{analyze_files, ingest_file, summarize, synth_to_file};

const OUT_ENV: &str = "LOBSPREAD_OUT";

#[derive(Parser)]
#[command(name = "lobspread", version, about = "Order book replay and intraday spread analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and replay event files, reporting counts per kind and integrity errors.
    Ingest(IngestArgs),
    /// Analyse stock-day event files into reports and plot data.
    Analyze(AnalyzeArgs),
    /// Aggregate reports per ticker and build histogram tables.
    Summarize(SummarizeArgs),
    /// Generate a synthetic event file with a ground-truth sidecar.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct FormatArgs {
    /// Timestamps are decimal seconds after midnight instead of milliseconds.
    #[arg(long)]
    decimal_seconds: bool,
    /// Tick size in price units of 1e-4 dollars.
    #[arg(long, default_value_t = DEFAULT_TICK_SIZE)]
    tick_size: i64,
    /// Market open, milliseconds after midnight.
    #[arg(long, default_value_t = MARKET_OPEN_MS)]
    open_ms: i64,
    /// Market close, milliseconds after midnight.
    #[arg(long, default_value_t = MARKET_CLOSE_MS)]
    close_ms: i64,
}

impl FormatArgs {
    fn time_format(&self) -> TimeFormat {
        if self.decimal_seconds {
            TimeFormat::DecimalSeconds
        } else {
            TimeFormat::Millis
        }
    }

    fn format(&self) -> FormatConfig {
        FormatConfig {
            time_format: self.time_format(),
            tick_size: self.tick_size,
        }
    }

    fn bounds(&self) -> Result<TradingDayBounds> {
        Ok(TradingDayBounds::new(self.open_ms, self.close_ms)?)
    }
}

#[derive(Args)]
struct IngestArgs {
    files: Vec<PathBuf>,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanArg {
    TimeWeighted,
    PerChange,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeRepArg {
    Geometric,
    Last,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Time,
    Observation,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Saturation,
    MeanSpread,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    out: PathBuf,
    #[command(flatten)]
    format: FormatArgs,
    #[arg(long, value_enum, default_value_t = MeanArg::TimeWeighted)]
    mean_method: MeanArg,
    /// Representative time of a smoothing window.
    #[arg(long, value_enum, default_value_t = TimeRepArg::Geometric)]
    time_rep: TimeRepArg,
    /// Weighting of observations inside a smoothing window.
    #[arg(long, value_enum, default_value_t = WeightingArg::Time)]
    window_weighting: WeightingArg,
    #[arg(long, value_enum, default_value_t = CriterionArg::Saturation)]
    tick_criterion: CriterionArg,
    /// The opening ends when the moving average last exceeds this multiple of the daily mean.
    #[arg(long, default_value_t = DEFAULT_OPENING_FACTOR)]
    opening_factor: f64,
    #[arg(long, default_value_t = DEFAULT_SATURATION_TICKS)]
    saturation_ticks: f64,
    #[arg(long, default_value_t = DEFAULT_DEGENERATE_TICKS)]
    degenerate_ticks: f64,
    #[arg(long, default_value_t = DEFAULT_MEAN_THRESHOLD_TICKS)]
    mean_threshold_ticks: f64,
    /// Windows earlier than this are left out of the power-law fit.
    #[arg(long, default_value_t = DEFAULT_FIT_MIN_ELAPSED_MS / 60_000.0)]
    fit_start_min: f64,
    /// Abort a stock-day on the first book integrity error.
    #[arg(long)]
    strict: bool,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
}

impl AnalyzeArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        Ok(AnalysisConfig {
            bounds: self.format.bounds()?,
            tick_size: self.format.tick_size,
            mean_method: match self.mean_method {
                MeanArg::TimeWeighted => MeanMethod::TimeWeighted,
                MeanArg::PerChange => MeanMethod::PerChange,
            },
            smoothing: SmoothingOptions {
                time_rep: match self.time_rep {
                    TimeRepArg::Geometric => TimeRep::GeometricMean,
                    TimeRepArg::Last => TimeRep::LastObservation,
                },
                weighting: match self.window_weighting {
                    WeightingArg::Time => WindowWeighting::TimeWeighted,
                    WeightingArg::Observation => WindowWeighting::PerObservation,
                },
            },
            opening_factor: self.opening_factor,
            tolerances: TickTolerances {
                saturation_ticks: self.saturation_ticks,
                mean_threshold_ticks: self.mean_threshold_ticks,
                degenerate_ticks: self.degenerate_ticks,
            },
            tick_criterion: match self.tick_criterion {
                CriterionArg::Saturation => TickCriterion::TerminalSaturation,
                CriterionArg::MeanSpread => TickCriterion::MeanSpreadThreshold,
            },
            fit_min_elapsed_ms: self.fit_start_min * 60_000.0,
            replay_mode: if self.strict {
                ReplayMode::Strict
            } else {
                ReplayMode::Lenient
            },
        })
    }
}

#[derive(Args)]
struct SummarizeArgs {
    /// Directory written by `analyze`.
    dir: PathBuf,
    /// Where to write the tables; defaults to the report directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MEAN_THRESHOLD_TICKS)]
    mean_threshold_ticks: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    PowerLaw,
    Saturating,
    Planted,
    Constant,
    Degenerate,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Event file to write; the truth sidecar goes next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    changes: usize,
    /// Standard deviation of the log-normal spread noise.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0.4)]
    alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    terminal_ticks: f64,
    #[arg(long, default_value_t = 6.0)]
    start_ticks: f64,
    #[arg(long, default_value_t = 10.0)]
    saturation_min: f64,
    #[arg(long, default_value_t = 30.0)]
    opening_min: f64,
    #[arg(long, default_value_t = 3.0)]
    base_ticks: f64,
    #[arg(long, default_value_t = 3.0)]
    factor: f64,
    #[arg(long, default_value_t = 4.0)]
    ticks: f64,
    /// Rate multiplier during the first `--burst-min` minutes; homogeneous if absent.
    #[arg(long)]
    burst_factor: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    burst_min: f64,
    #[arg(long, default_value_t = 0)]
    fillers: usize,
    #[arg(long, default_value_t = 0.0)]
    in_spread: f64,
    #[arg(long, default_value_t = 0)]
    hidden: usize,
    #[arg(long, default_value_t = 0)]
    partials: usize,
    #[arg(long, default_value_t = DEFAULT_TICK_SIZE)]
    tick_size: i64,
    /// Write timestamps as decimal seconds.
    #[arg(long)]
    decimal_seconds: bool,
}

impl SynthArgs {
    fn scenario(&self) -> SyntheticScenario {
        let kind = match self.scenario {
            ScenarioArg::PowerLaw => ScenarioKind::PowerLawDecay {
                alpha: self.alpha,
                terminal_ticks: self.terminal_ticks,
            },
            ScenarioArg::Saturating => ScenarioKind::SaturatingLargeTick {
                start_ticks: self.start_ticks,
                saturation_ms: self.saturation_min * 60_000.0,
            },
            ScenarioArg::Planted => ScenarioKind::PlantedOpening {
                opening_ms: self.opening_min * 60_000.0,
                base_ticks: self.base_ticks,
                factor: self.factor,
            },
            ScenarioArg::Constant => ScenarioKind::ConstantSpread { ticks: self.ticks },
            ScenarioArg::Degenerate => ScenarioKind::DegenerateStart,
        };
        let rate = match self.burst_factor {
            Some(factor) => RateModel::TwoPhase {
                opening_ms: self.burst_min * 60_000.0,
                factor,
            },
            None => RateModel::Homogeneous,
        };
        SyntheticScenario {
            tick_size: self.tick_size,
            ..SyntheticScenario::new(kind, self.seed)
        }
        .with_changes(self.changes)
        .with_noise(self.noise)
        .with_rate(rate)
        .with_flow(FlowParams {
            fillers: self.fillers,
            in_spread_fraction: self.in_spread,
            hidden_executions: self.hidden,
            partial_executions: self.partials,
            ..FlowParams::default()
        })
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest(args) => {
            let bounds = args.format.bounds()?;
            let mut clean = true;
            for file in &args.files {
                match ingest_file(file, &args.format.format(), bounds) {
                    Ok(report) => {
                        print!("{}", report.render());
                        clean &= report.is_clean();
                    }
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        clean = false;
                    }
                }
            }
            Ok(if clean { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Analyze(args) => {
            let config = args.config()?;
            let jobs = args
                .jobs
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let outcome = analyze_files(&args.files, &args.out, &args.format.format(), &config, jobs)?;
            for (file, reason) in &outcome.degenerate {
                eprintln!("{}: {reason}", file.display());
            }
            println!(
                "{} reports, {} degenerate days written to {}",
                outcome.reports.len(),
                outcome.degenerate.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Summarize(args) => {
            let out = args.out.clone().unwrap_or_else(|| args.dir.clone());
            let outcome = summarize(&args.dir, &out, args.mean_threshold_ticks)?;
            println!(
                "{} tickers; wrote summary.csv and {}",
                outcome.summaries.len(),
                outcome.histograms.join(", ")
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(args) => {
            let time_format = if args.decimal_seconds {
                TimeFormat::DecimalSeconds
            } else {
                TimeFormat::Millis
            };
            let (sidecar, truth) = synth_to_file(&args.scenario(), &args.out, time_format)
                .with_context(|| format!("cannot generate {}", args.out.display()))?;
            println!(
                "{} spread changes, {} events written to {} (truth in {})",
                truth.changes,
                truth.flow.map_or(0, |f| f.events),
                args.out.display(),
                sidecar.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("lobspread").chain(args.iter().copied()))
            .expect("arguments parse")
            .command
    }

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn analyze_defaults_match_library_defaults() {
        let Command::Analyze(args) = parse(&["analyze", "x.csv", "--out", "o"]) else {
            panic!("expected analyze");
        };
        assert_eq!(args.config().unwrap(), AnalysisConfig::default());
    }

    #[test]
    fn analyze_flags_reach_the_config() {
        let Command::Analyze(args) = parse(&[
            "analyze",
            "x.csv",
            "--out",
            "o",
            "--mean-method",
            "per-change",
            "--time-rep",
            "last",
            "--tick-criterion",
            "mean-spread",
            "--fit-start-min",
            "5",
            "--strict",
        ]) else {
            panic!("expected analyze");
        };
        let config = args.config().unwrap();
        assert_eq!(config.mean_method, MeanMethod::PerChange);
        assert_eq!(config.smoothing.time_rep, TimeRep::LastObservation);
        assert_eq!(config.tick_criterion, TickCriterion::MeanSpreadThreshold);
        assert_eq!(config.fit_min_elapsed_ms, 300_000.0);
        assert_eq!(config.replay_mode, ReplayMode::Strict);
    }

    #[test]
    fn inverted_session_is_rejected() {
        let Command::Analyze(args) = parse(&["analyze", "x.csv", "--out", "o", "--open-ms", "9", "--close-ms", "5"])
        else {
            panic!("expected analyze");
        };
        assert!(args.config().is_err());
    }

    #[test]
    fn burst_factor_selects_two_phase_rate() {
        let Command::Synth(args) = parse(&["synth", "--scenario", "planted", "--out", "f.csv", "--burst-factor", "4"])
        else {
            panic!("expected synth");
        };
        let scenario = args.scenario();
        assert_eq!(
            scenario.rate,
            RateModel::TwoPhase {
                opening_ms: 1_800_000.0,
                factor: 4.0
            }
        );
        assert!(matches!(scenario.kind, ScenarioKind::PlantedOpening { .. }));
    }
}
