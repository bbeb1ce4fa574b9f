//! The four-state interaction model.
//!
//! ```text
//!             sound                 associated             frontal (z_a)
//! Monitoring ------> VocalAttention ----------> VisualAttention ------> IoI
//!     |                                            ^      |   z_v2        |
//!     +----------- sustained gaze (z_v1) ----------+      +-------------->+
//! ```
//!
//! An unassociated sound (a radio, say) leads to VocalAttention only when
//! nobody has sustained a frontal gaze. Every failed check falls back to Monitoring, and IoI is held for exactly
//! one frame before the machine re-arms. Checks are evaluated in a fixed
//! priority order, one transition per frame.

use crate::association::AssociationResult;
use crate::attention::z_a;
use crate::error::{Error, Result};
use crate::model::{
    AttentionPath, IoIEvent, IoIKind, IoIState, PersonTrack, SoundSourceEstimate, StateKind,
    Timestamp, TrackId,
};

/// Per-track gate values for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackGates {
    pub track_id: TrackId,
    /// `h`: the person is tracked this frame.
    pub tracked: bool,
    /// `f`: the person's face is frontal this frame.
    pub frontal: bool,
    pub z_v1: bool,
    /// `None` while the track's timer has not reached visual attention.
    pub z_v2: Option<bool>,
    /// The person already triggered an IoI and has not looked away since.
    pub engaged: bool,
}

/// Everything the state machine sees in one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FramePercepts {
    pub timestamp: Timestamp,
    pub tracks: Vec<PersonTrack>,
    pub sound: Option<SoundSourceEstimate>,
    pub association: Option<AssociationResult>,
    /// Best-aligned track for the sound before the angular gate.
    pub candidate: Option<TrackId>,
    pub gates: Vec<TrackGates>,
}

impl FramePercepts {
    fn gate(&self, id: TrackId) -> Option<&TrackGates> {
        self.gates.iter().find(|g| g.track_id == id)
    }

    fn matched(&self) -> Option<TrackId> {
        self.association.and_then(|a| a.matched)
    }

    /// `(s, f, h)` relative to the track the current sound was associated with.
    pub fn audio_gate(&self) -> (bool, bool, bool) {
        let s = self.sound.is_some();
        match self.matched().and_then(|id| self.gate(id)) {
            Some(g) => (s, g.frontal, g.tracked),
            None => (s, false, false),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.association.is_some() && self.sound.is_none() {
            return Err(Error::Contract(
                "association present without a sound".into(),
            ));
        }
        for g in &self.gates {
            if g.z_v2.is_some() && !g.z_v1 {
                return Err(Error::Contract(format!(
                    "track {} has z_v2 without z_v1",
                    g.track_id
                )));
            }
        }
        Ok(())
    }
}

/// Vision-only indicator: both gaze stages satisfied.
#[inline]
pub fn z_v(z_v1: bool, z_v2: bool) -> bool {
    z_v1 && z_v2
}

/// Final IoI indicator: either route suffices.
#[inline]
pub fn z_ioi(z_a: bool, z_v: bool) -> bool {
    z_a || z_v
}

/// Kind of the event for a frame where `z_ioi` holds; audio-vision wins ties.
#[inline]
pub fn event_kind(z_a: bool, z_v: bool) -> Option<IoIKind> {
    if !z_ioi(z_a, z_v) {
        None
    } else if z_a {
        Some(IoIKind::AudioVision)
    } else {
        Some(IoIKind::VisionOnly)
    }
}

/// Pure transition function: next state plus the kind of IoI entered, if any.
///
/// `vision_path` disables the gaze-only route when false.
pub fn transition(
    state: IoIState,
    p: &FramePercepts,
    vision_path: bool,
) -> (IoIState, Option<IoIKind>) {
    let matched = p.matched();
    let usable = |id: TrackId| p.gate(id).filter(|g| g.tracked && !g.engaged);
    match state {
        IoIState::Monitoring => {
            let vocal = IoIState::VocalAttention {
                candidate: p.candidate,
            };
            if matched.is_some() {
                return (vocal, None);
            }
            // a sound nobody is associated with does not pre-empt a gazer
            if vision_path {
                let gazer = p
                    .gates
                    .iter()
                    .filter(|g| g.tracked && g.z_v1 && !g.engaged)
                    .map(|g| g.track_id)
                    .min();
                if let Some(track) = gazer {
                    return (
                        IoIState::VisualAttention {
                            track,
                            path: AttentionPath::Visual,
                        },
                        None,
                    );
                }
            }
            if p.sound.is_some() {
                return (vocal, None);
            }
            (IoIState::Monitoring, None)
        }
        IoIState::VocalAttention { .. } => {
            let anyone_facing = p.gates.iter().any(|g| g.tracked && g.frontal);
            match matched.and_then(usable) {
                Some(g) if anyone_facing => (
                    IoIState::VisualAttention {
                        track: g.track_id,
                        path: AttentionPath::Vocal,
                    },
                    None,
                ),
                _ => (IoIState::Monitoring, None),
            }
        }
        IoIState::VisualAttention {
            track,
            path: AttentionPath::Vocal,
        } => {
            let (f, h) = p
                .gate(track)
                .map_or((false, false), |g| (g.frontal, g.tracked));
            let s = matched == Some(track);
            match event_kind(z_a(s, f, h), false) {
                Some(kind) => (IoIState::IoI { track }, Some(kind)),
                None => (IoIState::Monitoring, None),
            }
        }
        IoIState::VisualAttention {
            track,
            path: AttentionPath::Visual,
        } => {
            let Some(g) = p.gate(track).filter(|g| g.tracked) else {
                return (IoIState::Monitoring, None);
            };
            let audio = z_a(matched == Some(track), g.frontal, g.tracked);
            let vision = vision_path && z_v(g.z_v1, g.z_v2.unwrap_or(false));
            if let Some(kind) = event_kind(audio, vision) {
                return (IoIState::IoI { track }, Some(kind));
            }
            // another person was heard: abandon and let Monitoring re-arbitrate
            if matched.is_some_and(|id| id != track) {
                return (IoIState::Monitoring, None);
            }
            if !g.z_v1 || !vision_path {
                return (IoIState::Monitoring, None);
            }
            (
                IoIState::VisualAttention {
                    track,
                    path: AttentionPath::Visual,
                },
                None,
            )
        }
        IoIState::IoI { .. } => (IoIState::Monitoring, None),
    }
}

/// One row of the per-frame state trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRecord {
    pub timestamp: Timestamp,
    pub state: IoIState,
}

impl StateRecord {
    /// `timestamp,state,attending_track` with `-` for no track.
    pub fn to_line(&self) -> String {
        let track = self
            .state
            .attending_track()
            .map_or_else(|| "-".to_string(), |t| t.to_string());
        format!("{},{},{}", self.timestamp, self.state.kind(), track)
    }
}

/// Stateful wrapper around [`transition`] that enforces time order and
/// records the states visited since the last Monitoring.
#[derive(Debug, Clone)]
pub struct IoIStateMachine {
    state: IoIState,
    last: Option<Timestamp>,
    path: Vec<StateKind>,
    vision_path: bool,
}

impl IoIStateMachine {
    pub fn new(vision_path: bool) -> Self {
        IoIStateMachine {
            state: IoIState::Monitoring,
            last: None,
            path: vec![StateKind::Monitoring],
            vision_path,
        }
    }

    pub fn state(&self) -> IoIState {
        self.state
    }

    /// States visited since the machine last left Monitoring.
    pub fn path(&self) -> &[StateKind] {
        &self.path
    }

    pub fn step(&mut self, percepts: &FramePercepts) -> Result<Option<IoIEvent>> {
        if let Some(last) = self.last {
            if percepts.timestamp <= last {
                return Err(Error::invalid(format!(
                    "frame at {} does not follow {}",
                    percepts.timestamp, last
                )));
            }
        }
        percepts.validate()?;
        self.last = Some(percepts.timestamp);
        let (next, kind) = transition(self.state, percepts, self.vision_path);
        if next.kind() == StateKind::Monitoring {
            self.path.clear();
            self.path.push(StateKind::Monitoring);
        } else if next.kind() != self.state.kind() {
            self.path.push(next.kind());
        }
        self.state = next;
        Ok(kind.map(|kind| IoIEvent {
            kind,
            track_id: next.attending_track().expect("IoI carries a track"),
            timestamp: percepts.timestamp,
            state_path: self.path.clone(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, Vec2};

    fn ts(k: usize) -> Timestamp {
        Timestamp::new(k as f64 * 0.1).unwrap()
    }

    fn gates(id: TrackId, frontal: bool, z_v1: bool, z_v2: Option<bool>) -> TrackGates {
        TrackGates {
            track_id: id,
            tracked: true,
            frontal,
            z_v1,
            z_v2,
            engaged: false,
        }
    }

    fn sound(k: usize) -> SoundSourceEstimate {
        SoundSourceEstimate {
            direction: Direction::from_azimuth(30.0).unwrap(),
            power: 40.0,
            timestamp: ts(k),
        }
    }

    fn frame(k: usize, heard: Option<Option<TrackId>>, g: Vec<TrackGates>) -> FramePercepts {
        FramePercepts {
            timestamp: ts(k),
            tracks: g
                .iter()
                .map(|g| PersonTrack {
                    track_id: g.track_id,
                    position: Vec2::new(1.0, 0.5),
                    frontal_face: g.frontal,
                    timestamp: ts(k),
                })
                .collect(),
            sound: heard.map(|_| sound(k)),
            association: heard.map(|m| AssociationResult {
                matched: m,
                angle_error: m.map(|_| 2.0),
            }),
            candidate: heard.flatten(),
            gates: g,
        }
    }

    #[test]
    fn unassociated_sound_does_not_block_a_gazer() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(0, Some(None), vec![gates(1, true, true, None)]))
            .unwrap();
        assert_eq!(
            m.state(),
            IoIState::VisualAttention {
                track: 1,
                path: AttentionPath::Visual
            }
        );
        let ev = m
            .step(&frame(
                1,
                Some(None),
                vec![gates(1, true, true, Some(true))],
            ))
            .unwrap()
            .unwrap();
        assert_eq!(ev.kind, IoIKind::VisionOnly);
    }

    #[test]
    fn unassociated_sound_without_gazer_is_vocal_attention() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(0, Some(None), vec![gates(1, false, false, None)]))
            .unwrap();
        assert_eq!(m.state().kind(), StateKind::VocalAttention);
        m.step(&frame(1, Some(None), vec![gates(1, false, false, None)]))
            .unwrap();
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn speech_while_facing_reaches_ioi_in_three_frames() {
        let mut m = IoIStateMachine::new(true);
        let g = || vec![gates(1, true, false, None)];
        assert_eq!(m.step(&frame(0, None, g())).unwrap(), None);
        assert_eq!(m.state(), IoIState::Monitoring);
        assert_eq!(m.step(&frame(1, Some(Some(1)), g())).unwrap(), None);
        assert_eq!(m.state().kind(), StateKind::VocalAttention);
        assert_eq!(m.step(&frame(2, Some(Some(1)), g())).unwrap(), None);
        assert_eq!(
            m.state(),
            IoIState::VisualAttention {
                track: 1,
                path: AttentionPath::Vocal
            }
        );
        let ev = m.step(&frame(3, Some(Some(1)), g())).unwrap().unwrap();
        assert_eq!(ev.kind, IoIKind::AudioVision);
        assert_eq!(ev.track_id, 1);
        assert_eq!(
            ev.state_path,
            vec![
                StateKind::Monitoring,
                StateKind::VocalAttention,
                StateKind::VisualAttention,
                StateKind::IoI
            ]
        );
        assert_eq!(m.step(&frame(4, None, g())).unwrap(), None);
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn radio_with_nobody_facing_falls_back() {
        let mut m = IoIStateMachine::new(true);
        let g = || vec![gates(1, false, false, None)];
        m.step(&frame(0, Some(None), g())).unwrap();
        assert_eq!(m.state().kind(), StateKind::VocalAttention);
        assert_eq!(m.step(&frame(1, Some(None), g())).unwrap(), None);
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn speaker_not_facing_returns_from_visual_attention() {
        let mut m = IoIStateMachine::new(true);
        // someone else faces the robot, the speaker does not
        let g = || vec![gates(1, false, false, None), gates(2, true, false, None)];
        m.step(&frame(0, Some(Some(1)), g())).unwrap();
        m.step(&frame(1, Some(Some(1)), g())).unwrap();
        assert_eq!(m.state().kind(), StateKind::VisualAttention);
        assert_eq!(m.step(&frame(2, Some(Some(1)), g())).unwrap(), None);
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn silent_gaze_path() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(0, None, vec![gates(3, true, true, Some(false))]))
            .unwrap();
        assert_eq!(
            m.state(),
            IoIState::VisualAttention {
                track: 3,
                path: AttentionPath::Visual
            }
        );
        m.step(&frame(1, None, vec![gates(3, true, true, Some(false))]))
            .unwrap();
        let ev = m
            .step(&frame(2, None, vec![gates(3, true, true, Some(true))]))
            .unwrap()
            .unwrap();
        assert_eq!(ev.kind, IoIKind::VisionOnly);
        assert_eq!(
            ev.state_path,
            vec![
                StateKind::Monitoring,
                StateKind::VisualAttention,
                StateKind::IoI
            ]
        );
    }

    #[test]
    fn gaze_break_returns_to_monitoring() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(0, None, vec![gates(3, true, true, Some(false))]))
            .unwrap();
        m.step(&frame(1, None, vec![gates(3, false, false, None)]))
            .unwrap();
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn lowest_gazer_wins() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(
            0,
            None,
            vec![
                gates(7, true, true, Some(false)),
                gates(4, true, true, Some(false)),
            ],
        ))
        .unwrap();
        assert_eq!(m.state().attending_track(), Some(4));
    }

    #[test]
    fn vision_path_can_be_disabled() {
        let mut m = IoIStateMachine::new(false);
        for k in 0..5 {
            let ev = m
                .step(&frame(k, None, vec![gates(3, true, true, Some(true))]))
                .unwrap();
            assert_eq!(ev, None);
            assert_eq!(m.state(), IoIState::Monitoring);
        }
    }

    #[test]
    fn own_speech_during_gaze_short_circuits_to_audio_vision() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(0, None, vec![gates(3, true, true, Some(false))]))
            .unwrap();
        let ev = m
            .step(&frame(
                1,
                Some(Some(3)),
                vec![gates(3, true, true, Some(true))],
            ))
            .unwrap()
            .unwrap();
        // both routes hold this frame; audio-vision takes precedence
        assert_eq!(ev.kind, IoIKind::AudioVision);
    }

    #[test]
    fn other_speaker_during_gaze_abandons() {
        let mut m = IoIStateMachine::new(true);
        let g = || {
            vec![
                gates(3, true, true, Some(false)),
                gates(5, true, false, None),
            ]
        };
        m.step(&frame(0, None, g())).unwrap();
        m.step(&frame(1, Some(Some(5)), g())).unwrap();
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn unrelated_noise_does_not_break_gaze() {
        let mut m = IoIStateMachine::new(true);
        let g = || vec![gates(3, true, true, Some(false))];
        m.step(&frame(0, None, g())).unwrap();
        m.step(&frame(1, Some(None), g())).unwrap();
        assert_eq!(m.state().kind(), StateKind::VisualAttention);
    }

    #[test]
    fn engaged_tracks_do_not_retrigger() {
        let mut m = IoIStateMachine::new(true);
        let mut g = gates(3, true, true, Some(true));
        g.engaged = true;
        m.step(&frame(0, None, vec![g])).unwrap();
        assert_eq!(m.state(), IoIState::Monitoring);
        m.step(&frame(1, Some(Some(3)), vec![g])).unwrap();
        m.step(&frame(2, Some(Some(3)), vec![g])).unwrap();
        assert_eq!(m.state(), IoIState::Monitoring);
    }

    #[test]
    fn timestamps_must_increase() {
        let mut m = IoIStateMachine::new(true);
        m.step(&frame(3, None, vec![])).unwrap();
        assert!(m.step(&frame(3, None, vec![])).is_err());
        assert!(m.step(&frame(2, None, vec![])).is_err());
    }

    #[test]
    fn association_without_sound_is_contract_error() {
        let mut p = frame(0, None, vec![]);
        p.association = Some(AssociationResult::NONE);
        assert!(matches!(
            IoIStateMachine::new(true).step(&p),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn indicator_tables() {
        assert!(!z_ioi(false, false));
        assert!(z_ioi(true, false));
        assert!(z_ioi(false, true));
        assert!(z_ioi(true, true));
        assert_eq!(event_kind(true, true), Some(IoIKind::AudioVision));
        assert_eq!(event_kind(false, true), Some(IoIKind::VisionOnly));
        assert_eq!(event_kind(false, false), None);
        assert!(z_v(true, true));
        assert!(!z_v(true, false));
        assert!(!z_v(false, true));
        assert!(!z_v(false, false));
    }

    #[test]
    fn trace_line_format() {
        let r = StateRecord {
            timestamp: ts(12),
            state: IoIState::VisualAttention {
                track: 2,
                path: AttentionPath::Visual,
            },
        };
        assert_eq!(r.to_line(), "1.200,VisualAttention,2");
        let r = StateRecord {
            timestamp: ts(0),
            state: IoIState::Monitoring,
        };
        assert_eq!(r.to_line(), "0.000,Monitoring,-");
    }
}
