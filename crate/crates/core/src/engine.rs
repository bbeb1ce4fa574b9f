//! Frame-synchronous fusion: tracks and localized sounds in, IoI events out.

use std::collections::BTreeSet;

use crate::association::{best_aligned, match_speaker};
use crate::attention::{z_v1, z_v2, AttentionBank, TimerPhase};
use crate::config::FusionConfig;
use crate::error::Result;
use crate::machine::{FramePercepts, IoIStateMachine, StateRecord, TrackGates};
use crate::model::{IoIEvent, PersonTrack, SoundSourceEstimate, Timestamp, TrackId};

/// Owns the gaze timers, the state machine and the set of engaged people.
///
/// A person becomes engaged when an IoI is declared for them and stays
/// engaged until their gaze breaks or they stop being tracked; engaged people
/// cannot trigger another IoI.
#[derive(Debug, Clone)]
pub struct Engine {
    config: FusionConfig,
    timers: AttentionBank,
    machine: IoIStateMachine,
    engaged: BTreeSet<TrackId>,
}

impl Engine {
    pub fn new(config: FusionConfig) -> Result<Self> {
        config.validate()?;
        let machine = IoIStateMachine::new(config.enable_vision_path);
        Ok(Engine {
            config,
            timers: AttentionBank::new(),
            machine,
            engaged: BTreeSet::new(),
        })
    }

    pub fn config(&self) -> &FusionConfig {
        &self.config
    }

    pub fn machine(&self) -> &IoIStateMachine {
        &self.machine
    }

    /// Builds this frame's percepts; updates the gaze timers as a side effect.
    pub fn percepts(
        &mut self,
        tracks: &[PersonTrack],
        sounds: &[SoundSourceEstimate],
        now: Timestamp,
    ) -> Result<FramePercepts> {
        for id in self.timers.update(tracks, now, &self.config)? {
            self.engaged.remove(&id);
        }
        // strongest first; later estimates are ignored
        let sound = sounds
            .iter()
            .copied()
            .reduce(|a, b| if b.power > a.power { b } else { a });
        let (association, candidate) = match &sound {
            Some(s) => (
                Some(match_speaker(tracks, s, &self.config)?),
                best_aligned(tracks, s)?.map(|(id, _)| id),
            ),
            None => (None, None),
        };
        let gates = tracks
            .iter()
            .map(|t| {
                let timer = self.timers.get(t.track_id).expect("timer updated above");
                TrackGates {
                    track_id: t.track_id,
                    tracked: true,
                    frontal: t.frontal_face,
                    z_v1: z_v1(timer, &self.config),
                    z_v2: match timer.phase {
                        TimerPhase::VisualAttention => z_v2(timer, &self.config).ok(),
                        TimerPhase::Accumulating => None,
                    },
                    engaged: self.engaged.contains(&t.track_id),
                }
            })
            .collect();
        Ok(FramePercepts {
            timestamp: now,
            tracks: tracks.to_vec(),
            sound,
            association,
            candidate,
            gates,
        })
    }

    /// Processes one frame.
    pub fn process(
        &mut self,
        tracks: &[PersonTrack],
        sounds: &[SoundSourceEstimate],
        now: Timestamp,
    ) -> Result<(StateRecord, Option<IoIEvent>)> {
        let percepts = self.percepts(tracks, sounds, now)?;
        let event = self.machine.step(&percepts)?;
        if let Some(e) = &event {
            self.engaged.insert(e.track_id);
        }
        Ok((
            StateRecord {
                timestamp: now,
                state: self.machine.state(),
            },
            event,
        ))
    }
}
