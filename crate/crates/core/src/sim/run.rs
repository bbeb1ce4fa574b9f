//! Closed-loop scenario execution and the event log format.

use std::fmt::Write as _;

use super::scenario::Scenario;
use super::synth::{synthesize_tracks, AudioSynth};
use crate::config::FusionConfig;
use crate::doa::MusicEstimator;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::machine::StateRecord;
use crate::model::{IoIEvent, IoIKind, PersonTrack, SoundSourceEstimate, StateKind, Timestamp};
use crate::par::Execution;

/// Everything a scenario run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub events: Vec<IoIEvent>,
    pub trace: Vec<StateRecord>,
}

impl RunOutput {
    pub fn event_log(&self) -> String {
        format_event_log(&self.events)
    }

    pub fn state_trace(&self) -> String {
        let mut out = String::new();
        for r in &self.trace {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }
}

/// Seed actually used for a run: the config's when set, else the scenario's, else 0.
pub fn effective_seed(scenario: &Scenario, config: &FusionConfig) -> u64 {
    config.seed.or(scenario.seed).unwrap_or(0)
}

/// Frame timestamps `0, fp, 2fp, …` up to and including `duration`.
pub fn frame_times(duration: f64, frame_period: f64) -> Vec<f64> {
    let n = (duration / frame_period + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * frame_period).collect()
}

struct Perception {
    now: Timestamp,
    tracks: Vec<PersonTrack>,
    sounds: Vec<SoundSourceEstimate>,
}

/// Runs the full pipeline over a scenario.
///
/// Each frame at time `t` sees the tracker output at `t` and the DOA of the
/// audio window `[t, t + frame_period)`. Frames are perceived independently
/// (in parallel under [`Execution::Parallel`]) and then fused in time order,
/// so the output does not depend on the execution mode.
pub fn run_scenario(
    scenario: &Scenario,
    config: &FusionConfig,
    exec: Execution,
) -> Result<RunOutput> {
    config.validate()?;
    let estimator = MusicEstimator::new(&config.array, &config.doa)?;
    let synth = AudioSynth {
        array: config.array.clone(),
        sample_rate: config.doa.sample_rate,
        snr_db: config.snr_db,
        seed: effective_seed(scenario, config),
    };
    let window = (config.frame_period * config.doa.sample_rate as f64).round() as usize;
    let times = frame_times(scenario.duration, config.frame_period);

    let perceived: Vec<Result<Perception>> = exec.map(&times, |&t| {
        let now = Timestamp::new(t)?;
        let tracks = synthesize_tracks(scenario, now, config.facing_threshold)?;
        let audio = synth.window(scenario, t, window);
        let (_, sounds) = estimator.localize(&audio, now, Execution::Sequential)?;
        Ok(Perception {
            now,
            tracks,
            sounds,
        })
    });

    let mut engine = Engine::new(config.clone())?;
    let mut out = RunOutput {
        events: Vec::new(),
        trace: Vec::with_capacity(times.len()),
    };
    for p in perceived {
        let p = p?;
        let (record, event) = engine.process(&p.tracks, &p.sounds, p.now)?;
        out.trace.push(record);
        out.events.extend(event);
    }
    Ok(out)
}

/// One `timestamp,kind,track_id,state_path` line per event.
pub fn format_event_log(events: &[IoIEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let path: Vec<&str> = e.state_path.iter().map(|k| k.as_str()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.timestamp,
            e.kind,
            e.track_id,
            path.join(";")
        );
    }
    out
}

/// Parses an event log; blank lines and `#` comments are skipped.
pub fn parse_event_log(text: &str) -> Result<Vec<IoIEvent>> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::EventLogSyntax { line, msg };
        let cols: Vec<&str> = body.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(bad(format!("expected 4 columns, found {}", cols.len())));
        }
        let t: f64 = cols[0]
            .parse()
            .map_err(|_| bad(format!("bad timestamp `{}`", cols[0])))?;
        let timestamp = Timestamp::new(t).map_err(|e| bad(e.to_string()))?;
        let kind = IoIKind::parse(cols[1]).ok_or_else(|| bad(format!("bad kind `{}`", cols[1])))?;
        let track_id = cols[2]
            .parse()
            .map_err(|_| bad(format!("bad track id `{}`", cols[2])))?;
        let state_path = cols[3]
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| StateKind::parse(s).ok_or_else(|| bad(format!("bad state `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        events.push(IoIEvent {
            kind,
            track_id,
            timestamp,
            state_path,
        });
    }
    Ok(events)
}
