//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::audio::MultichannelAudio;
use crate::config::FusionConfig;
use crate::doa::MusicEstimator;
use crate::error::Result;
use crate::eval::{render_csv, render_table, run_suite_dir, EvalReport, DEFAULT_WINDOW};
use crate::model::Timestamp;
use crate::par::Execution;
use crate::sim::{parse_event_log, run_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ioi",
    version,
    about = "Initiation-of-interaction detection and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write its event log (stdout unless --events).
    Run {
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Noise seed; overrides config and scenario seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the event log here instead of stdout.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Write the per-frame state trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Perceive frames on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Score an event log against a scenario's ground truth.
    Eval {
        eventlog: PathBuf,
        scenario: PathBuf,
        /// Matching window half-width, seconds.
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
        #[arg(long)]
        csv: bool,
    },
    /// Print the MUSIC pseudospectrum of a WAV file as `azimuth,value` lines.
    DoaDump {
        wav: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare AV-only and full detection over every .scn file in a directory.
    Suite {
        dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
        #[arg(long)]
        csv: bool,
        /// Also list per-scenario counts.
        #[arg(long)]
        detail: bool,
        #[arg(long)]
        sequential: bool,
    },
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<FusionConfig> {
    let mut cfg = match path {
        Some(p) => FusionConfig::load(p)?,
        None => FusionConfig::default(),
    };
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn window_arg(w: f64) -> Result<f64> {
    if w.is_finite() && w >= 0.0 {
        Ok(w)
    } else {
        Err(crate::Error::invalid(format!(
            "window must be >= 0, got {w}"
        )))
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Run {
            scenario,
            config,
            seed,
            events,
            trace,
            sequential,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let sc = Scenario::load(&scenario)?;
            let result = run_scenario(&sc, &cfg, exec(sequential))?;
            match events {
                Some(p) => std::fs::write(p, result.event_log())?,
                None => out.write_all(result.event_log().as_bytes())?,
            }
            if let Some(p) = trace {
                std::fs::write(p, result.state_trace())?;
            }
        }
        Command::Eval {
            eventlog,
            scenario,
            window,
            csv,
        } => {
            let events = parse_event_log(&std::fs::read_to_string(&eventlog)?)?;
            let sc = Scenario::load(&scenario)?;
            let report = EvalReport::evaluate(&events, &sc.truth, window_arg(window)?);
            let rows = [("IoI", report)];
            let text = if csv {
                render_csv(&rows)
            } else {
                render_table(&rows)
            };
            out.write_all(text.as_bytes())?;
        }
        Command::DoaDump { wav, config } => {
            let cfg = load_config(config.as_deref(), None)?;
            let audio = MultichannelAudio::read_wav(&wav)?;
            let est = MusicEstimator::new(&cfg.array, &cfg.doa)?;
            let (spectrum, _) = est.localize(&audio, Timestamp::ZERO, Execution::default())?;
            out.write_all(spectrum.to_csv().as_bytes())?;
        }
        Command::Suite {
            dir,
            config,
            seed,
            window,
            csv,
            detail,
            sequential,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let report = run_suite_dir(&dir, &cfg, window_arg(window)?, exec(sequential))?;
            let rows = report.rows();
            let text = if csv {
                render_csv(&rows)
            } else {
                render_table(&rows)
            };
            out.write_all(text.as_bytes())?;
            if detail {
                writeln!(out)?;
                for s in &report.scenarios {
                    writeln!(
                        out,
                        "{}: av tp={} fp={} fn={}; full tp={} fp={} fn={}",
                        s.name,
                        s.av_only.true_positives,
                        s.av_only.false_positives,
                        s.av_only.false_negatives,
                        s.full.true_positives,
                        s.full.false_positives,
                        s.full.false_negatives
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}
