//! Command-line front end: `simulate`, `replay` and `report`.
//!
//! Exit codes are 0 on success, 2 for bad input or configuration, and 3 when
//! a run violates an internal invariant.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::detection_io::{parse_detection_log, write_frame, FrameDetections, LogError};
use crate::pipeline::{merge_streams, Pipeline, PipelineError};
use crate::simulation::{
    run_pipeline_with, RunObserver, Scenario, SimulationError, SimulationReport,
};
use crate::tracking::{EventKind, TrackerConfig};
use crate::warning::{Decision, DeviceChannel, DeviceSpec, WarningEmitter, DEFAULT_T_DURATION};

pub const REPORT_FILE: &str = "report.jsonl";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const HOURLY_FILE: &str = "hourly.csv";
pub const WARNINGS_FILE: &str = "warnings.log";
pub const AUDIT_FILE: &str = "audit.log";

#[derive(Debug, Parser)]
#[command(
    name = "roadwatch",
    version,
    about = "Roadwork vehicle tracking and worker warnings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write report artifacts.
    Simulate {
        /// Scenario file, or a built-in name (paper-day, country-road, curve, empty).
        #[arg(long)]
        scenario: String,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the rendered detections as a replayable log.
        #[arg(long, value_name = "PATH")]
        dump_detections: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the tracker and flow check over a recorded detection log.
    Replay {
        #[arg(long, value_name = "PATH")]
        log: PathBuf,
        /// Sleep so that frames are processed at their recorded pace.
        #[arg(long)]
        pace_realtime: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Render the summary of a finished simulation.
    Report {
        #[arg(long, value_name = "DIR", default_value = "roadwatch-out")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Minimum quiet time before a new vehicle triggers a warning, seconds.
    #[arg(long, default_value_t = DEFAULT_T_DURATION)]
    pub t_duration: f64,
    /// Assignment gate, pixels [default: 75 px per 1280 px of frame width].
    #[arg(long)]
    pub gate: Option<f64>,
    /// Consecutive hits that confirm a track [default: 2].
    #[arg(long)]
    pub confirm_hits: Option<u32>,
    /// Consecutive misses that end a confirmed track [default: 3].
    #[arg(long)]
    pub max_misses: Option<u32>,
    /// `stdout` or `udp:<host>:<port>`.
    #[arg(long, value_name = "SINK")]
    pub device: Option<DeviceSpec>,
    /// Output directory for logs and report artifacts.
    #[arg(long, value_name = "DIR", default_value = "roadwatch-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Replay,
    Report,
}

/// Fully resolved settings of one CLI run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    /// Scenario (simulate) or detection log (replay); unused by report.
    pub input: String,
    pub seed: Option<u64>,
    pub gate: Option<f64>,
    pub confirm_hits: Option<u32>,
    pub max_misses: Option<u32>,
    pub t_duration: f64,
    /// Replay defaults to stdout; `None` sends warnings nowhere.
    pub device: Option<DeviceSpec>,
    pub dump_detections: Option<PathBuf>,
    pub out: PathBuf,
    pub pace_realtime: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        let base = |mode, input: String, run: RunArgs| RunConfig {
            mode,
            input,
            seed: None,
            gate: run.gate,
            confirm_hits: run.confirm_hits,
            max_misses: run.max_misses,
            t_duration: run.t_duration,
            device: run.device,
            dump_detections: None,
            out: run.out,
            pace_realtime: false,
        };
        match cli.command {
            Command::Simulate {
                scenario,
                seed,
                dump_detections,
                run,
            } => RunConfig {
                seed,
                dump_detections,
                ..base(Mode::Simulate, scenario, run)
            },
            Command::Replay {
                log,
                pace_realtime,
                run,
            } => RunConfig {
                pace_realtime,
                device: run.device.clone().or(Some(DeviceSpec::Stdout)),
                ..base(Mode::Replay, log.display().to_string(), run)
            },
            Command::Report { out } => RunConfig {
                mode: Mode::Report,
                input: String::new(),
                seed: None,
                gate: None,
                confirm_hits: None,
                max_misses: None,
                t_duration: DEFAULT_T_DURATION,
                device: None,
                dump_detections: None,
                out,
                pace_realtime: false,
            },
        }
    }

    /// Tracker defaults for the given frame width with the overrides applied.
    pub fn tracker_config(&self, frame_width: Option<f64>) -> Result<TrackerConfig, CliError> {
        let mut c = frame_width.map_or_else(TrackerConfig::default, TrackerConfig::for_frame_width);
        if let Some(g) = self.gate {
            c.gate_distance = g;
        }
        if let Some(m) = self.confirm_hits {
            c.confirm_hits = m;
        }
        if let Some(l) = self.max_misses {
            c.max_misses = l;
        }
        c.validate().map_err(|e| CliError::Input(e.to_string()))?;
        if !(self.t_duration > 0.0 && self.t_duration.is_finite()) {
            return Err(CliError::Input(format!(
                "--t-duration must be > 0, got {}",
                self.t_duration
            )));
        }
        Ok(c)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::Pipeline(p) => p.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LogError> for CliError {
    fn from(e: LogError) -> Self {
        CliError::Input(format!("malformed detection log: {e}"))
    }
}

fn io_error(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

/// Loads a scenario file; a missing file falls back to the built-in scenario
/// named by its stem, so `paper-day.cfg` works without the file.
pub fn load_scenario(spec: &str) -> Result<Scenario, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(Scenario::load(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    Scenario::builtin(stem).ok_or_else(|| {
        CliError::Input(format!(
            "scenario `{spec}` is neither a file nor a built-in (paper-day, country-road, curve, empty)"
        ))
    })
}

/// Channel that is never reachable; used when the device cannot be opened.
struct Unreachable(String);

impl DeviceChannel for Unreachable {
    fn send(&mut self, _message: &str) -> io::Result<()> {
        Err(io::Error::new(io::ErrorKind::NotConnected, self.0.clone()))
    }
}

fn open_device(spec: &DeviceSpec) -> WarningEmitter {
    let channel = spec.open().unwrap_or_else(|e| {
        log::warn!("device {spec} unreachable: {e}");
        Box::new(Unreachable(format!("{spec}: {e}")))
    });
    WarningEmitter::new(channel)
}

/// Writes warnings and audit lines as decisions arrive, and forwards
/// warnings to the device.
struct Sinks {
    warnings: BufWriter<File>,
    audit: BufWriter<File>,
    device: Option<WarningEmitter>,
    dump: Option<BufWriter<File>>,
    error: Option<io::Error>,
}

impl Sinks {
    fn create(
        out: &Path,
        device: Option<&DeviceSpec>,
        dump: Option<&Path>,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(io_error(out))?;
        let open = |p: PathBuf| {
            File::create(&p)
                .map(BufWriter::new)
                .map_err(|e| io_error(&p)(e))
        };
        Ok(Self {
            warnings: open(out.join(WARNINGS_FILE))?,
            audit: open(out.join(AUDIT_FILE))?,
            device: device.map(open_device),
            dump: dump.map(|p| open(p.to_path_buf())).transpose()?,
            error: None,
        })
    }

    fn finish(mut self) -> Result<(u64, u64), CliError> {
        if let Some(e) = self.error.take() {
            return Err(CliError::Input(e.to_string()));
        }
        let flush = |w: &mut BufWriter<File>| w.flush().map_err(|e| CliError::Input(e.to_string()));
        flush(&mut self.warnings)?;
        flush(&mut self.audit)?;
        if let Some(d) = self.dump.as_mut() {
            flush(d)?;
        }
        Ok(self
            .device
            .as_ref()
            .map_or((0, 0), |d| (d.sent(), d.failed())))
    }
}

impl RunObserver for Sinks {
    fn on_frame(&mut self, frame: &FrameDetections) -> io::Result<()> {
        match self.dump.as_mut() {
            Some(d) => write_frame(frame, d),
            None => Ok(()),
        }
    }

    fn on_decision(&mut self, decision: &Decision) {
        let mut r = writeln!(self.audit, "{decision}");
        if let Some(w) = decision.warning() {
            r = r.and_then(|()| writeln!(self.warnings, "{w}"));
            if let Some(device) = self.device.as_mut() {
                device.emit(w);
            }
        }
        if let Err(e) = r {
            self.error.get_or_insert(e);
        }
    }
}

/// Writes all report artifacts of `report` into `out`.
pub fn write_report(report: &SimulationReport, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_error(out))?;
    let mut jsonl = Vec::new();
    report
        .write_jsonl(&mut jsonl)
        .expect("writing to memory cannot fail");
    let files = [
        (REPORT_FILE, jsonl),
        (SUMMARY_FILE, report.summary().into_bytes()),
        (HISTOGRAM_FILE, report.histogram_csv().into_bytes()),
        (HOURLY_FILE, report.hourly_csv().into_bytes()),
    ];
    for (name, bytes) in files {
        let p = out.join(name);
        fs::write(&p, bytes).map_err(io_error(&p))?;
    }
    Ok(())
}

fn check_report(report: &SimulationReport) -> Result<(), CliError> {
    if report.warnings_with_filter > report.warnings_without_filter {
        return Err(CliError::Invariant(format!(
            "{} warnings with filter exceed {} without",
            report.warnings_with_filter, report.warnings_without_filter
        )));
    }
    Ok(())
}

pub fn cmd_simulate<W: Write>(
    config: &RunConfig,
    stdout: &mut W,
) -> Result<SimulationReport, CliError> {
    let mut scenario = load_scenario(&config.input)?;
    if let Some(seed) = config.seed {
        scenario.seed = seed;
    }
    scenario.validate()?;
    let tracker = config.tracker_config(Some(f64::from(scenario.camera.image_width)))?;
    let mut sinks = Sinks::create(
        &config.out,
        config.device.as_ref(),
        config.dump_detections.as_deref(),
    )?;
    let report = run_pipeline_with(&scenario, &tracker, config.t_duration, &mut sinks)?;
    let (sent, failed) = sinks.finish()?;
    check_report(&report)?;
    write_report(&report, &config.out)?;

    let w = |e: io::Error| CliError::Input(e.to_string());
    write!(stdout, "{}", report.summary()).map_err(w)?;
    if config.device.is_some() {
        writeln!(stdout, "device: {sent} sent, {failed} failed").map_err(w)?;
    }
    writeln!(stdout, "artifacts written to {}", config.out.display()).map_err(w)?;
    Ok(report)
}

/// Counters printed at the end of a replay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplaySummary {
    pub frames: u64,
    pub new_vehicles: u64,
    pub terminated: u64,
    pub warnings: u64,
    pub suppressed: u64,
    pub sent: u64,
    pub failed: u64,
}

pub fn cmd_replay<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<ReplaySummary, CliError> {
    let path = Path::new(&config.input);
    let file = File::open(path).map_err(io_error(path))?;
    let frames = merge_streams(parse_detection_log(BufReader::new(file))?);
    let tracker = config.tracker_config(None)?;
    let start = frames.first().map_or(0.0, |f| f.timestamp);
    let mut pipeline = Pipeline::new(tracker, start, config.t_duration)?;
    let mut sinks = Sinks::create(&config.out, config.device.as_ref(), None)?;

    let mut summary = ReplaySummary::default();
    let wall = Instant::now();
    for frame in &frames {
        if config.pace_realtime {
            let due = Duration::from_secs_f64((frame.timestamp - start).max(0.0));
            if let Some(wait) = due.checked_sub(wall.elapsed()) {
                std::thread::sleep(wait);
            }
        }
        let outcome = pipeline.process(frame)?;
        summary.frames += 1;
        for e in &outcome.step.events {
            match e.kind {
                EventKind::NewVehicle => summary.new_vehicles += 1,
                EventKind::TrackTerminated => summary.terminated += 1,
            }
        }
        for d in &outcome.decisions {
            match d.verdict {
                crate::warning::Verdict::Warn(_) => summary.warnings += 1,
                crate::warning::Verdict::Suppress { .. } => summary.suppressed += 1,
                crate::warning::Verdict::Ignore => {}
            }
            sinks.on_decision(d);
        }
    }
    (summary.sent, summary.failed) = sinks.finish()?;
    if summary.warnings > summary.new_vehicles {
        return Err(CliError::Invariant(format!(
            "{} warnings from {} new vehicles",
            summary.warnings, summary.new_vehicles
        )));
    }
    writeln!(
        stdout,
        "frames={} new_vehicles={} terminated={} warnings={} suppressed={} device_sent={} device_failed={}",
        summary.frames,
        summary.new_vehicles,
        summary.terminated,
        summary.warnings,
        summary.suppressed,
        summary.sent,
        summary.failed
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(summary)
}

pub fn cmd_report<W: Write>(
    config: &RunConfig,
    stdout: &mut W,
) -> Result<SimulationReport, CliError> {
    let path = config.out.join(REPORT_FILE);
    let file = File::open(&path).map_err(io_error(&path))?;
    let report = SimulationReport::read_jsonl(BufReader::new(file))?;
    check_report(&report)?;
    write_report(&report, &config.out)?;
    write!(stdout, "{}", report.summary()).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(report)
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("ROADWATCH_LOG_LEVEL", "warn"),
    )
    .try_init();

    let config = RunConfig::from_cli(cli);
    let mut stdout = io::stdout().lock();
    let result = match config.mode {
        Mode::Simulate => cmd_simulate(&config, &mut stdout).map(drop),
        Mode::Replay => cmd_replay(&config, &mut stdout).map(drop),
        Mode::Report => cmd_report(&config, &mut stdout).map(drop),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("roadwatch: {e}");
            e.exit_code()
        }
    }
}
