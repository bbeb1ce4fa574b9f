//! Scenario-driven simulator for the full perception and fusion pipeline.

mod run;
mod scenario;
mod synth;

pub use run::{
    effective_seed, format_event_log, frame_times, parse_event_log, run_scenario, RunOutput,
};
pub use scenario::{
    GroundTruth, NoiseKind, NoiseSource, Scenario, ScriptedPerson, SpeechInterval, Waypoint,
};
pub use synth::{synthesize_tracks, AudioSynth, MEDIA_BAND, SPEECH_BAND};
