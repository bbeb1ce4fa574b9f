//! Per-track gaze timers and the indicator functions built on them.
//!
//! `t1` measures frontal gaze before visual attention; once it reaches
//! `delta_t1` the timer switches phase and `t2` starts from zero. Frames in
//! which the face is missed hold both timers as long as the last frontal
//! frame is at most `max_face_gap` old; a longer dropout resets the timer.
//! Time only accrues between two consecutive frontal frames.

use std::collections::BTreeMap;

use crate::config::FusionConfig;
use crate::error::{Error, Result};
use crate::model::{PersonTrack, Timestamp, TrackId, TIME_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimerPhase {
    Accumulating,
    VisualAttention,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttentionTimer {
    pub track_id: TrackId,
    pub t1_elapsed: f64,
    pub t2_elapsed: f64,
    pub phase: TimerPhase,
    /// Most recent frontal frame of the current gaze, if one is running.
    pub last_frontal: Option<Timestamp>,
    last_update: Option<Timestamp>,
    prev_frontal: bool,
}

impl AttentionTimer {
    pub fn new(track_id: TrackId) -> Self {
        AttentionTimer {
            track_id,
            t1_elapsed: 0.0,
            t2_elapsed: 0.0,
            phase: TimerPhase::Accumulating,
            last_frontal: None,
            last_update: None,
            prev_frontal: false,
        }
    }

    /// True when no gaze is running (fresh or just reset).
    pub fn is_idle(&self) -> bool {
        self.last_frontal.is_none()
    }

    fn reset(&mut self) {
        self.t1_elapsed = 0.0;
        self.t2_elapsed = 0.0;
        self.phase = TimerPhase::Accumulating;
        self.last_frontal = None;
    }

    fn advance(&mut self, dt: f64, config: &FusionConfig) {
        match self.phase {
            TimerPhase::Accumulating => {
                self.t1_elapsed += dt;
                if self.t1_elapsed + TIME_EPS >= config.delta_t1 {
                    self.phase = TimerPhase::VisualAttention;
                    self.t2_elapsed = 0.0;
                }
            }
            TimerPhase::VisualAttention => self.t2_elapsed += dt,
        }
    }
}

/// Advances `timer` with the track's state at `now`.
pub fn update_timers(
    timer: &AttentionTimer,
    track: &PersonTrack,
    now: Timestamp,
    config: &FusionConfig,
) -> Result<AttentionTimer> {
    if track.track_id != timer.track_id {
        return Err(Error::invalid(format!(
            "timer for track {} fed track {}",
            timer.track_id, track.track_id
        )));
    }
    let dt = match timer.last_update {
        Some(last) if now < last => {
            return Err(Error::invalid(format!(
                "timestamp regression for track {}: {now} after {last}",
                timer.track_id
            )))
        }
        Some(last) => now.since(last),
        None => 0.0,
    };
    let mut next = *timer;
    next.last_update = Some(now);
    if track.frontal_face {
        if timer.prev_frontal {
            next.advance(dt, config);
        }
        next.last_frontal = Some(now);
        next.prev_frontal = true;
    } else {
        next.prev_frontal = false;
        match timer.last_frontal {
            Some(last) if now.since(last) <= config.max_face_gap + TIME_EPS => {}
            _ => next.reset(),
        }
    }
    Ok(next)
}

/// Visual-attention entry indicator: `t1 ≥ delta_t1`.
pub fn z_v1(timer: &AttentionTimer, config: &FusionConfig) -> bool {
    timer.t1_elapsed + TIME_EPS >= config.delta_t1
}

/// IoI-from-visual-attention indicator: `t2 ≥ delta_t2`.
///
/// Only meaningful once the timer is in its visual-attention phase.
pub fn z_v2(timer: &AttentionTimer, config: &FusionConfig) -> Result<bool> {
    if timer.phase != TimerPhase::VisualAttention {
        return Err(Error::Contract(format!(
            "z_v2 evaluated for track {} before visual attention",
            timer.track_id
        )));
    }
    Ok(timer.t2_elapsed + TIME_EPS >= config.delta_t2)
}

/// Audio-vision indicator: a sound (`s`), from a tracked person (`h`), who faces the robot (`f`).
#[inline]
pub fn z_a(s: bool, f: bool, h: bool) -> bool {
    s && f && h
}

/// Timers for every currently tracked person.
#[derive(Debug, Clone, Default)]
pub struct AttentionBank {
    timers: BTreeMap<TrackId, AttentionTimer>,
}

impl AttentionBank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Updates the timer of every track in `tracks`; timers of tracks that
    /// are no longer reported are dropped. Returns the ids whose timer was
    /// dropped or reset in this frame.
    pub fn update(
        &mut self,
        tracks: &[PersonTrack],
        now: Timestamp,
        config: &FusionConfig,
    ) -> Result<Vec<TrackId>> {
        let mut next = BTreeMap::new();
        let mut broken = Vec::new();
        for t in tracks {
            let prev = self
                .timers
                .get(&t.track_id)
                .copied()
                .unwrap_or_else(|| AttentionTimer::new(t.track_id));
            let updated = update_timers(&prev, t, now, config)?;
            if !prev.is_idle() && updated.is_idle() {
                broken.push(t.track_id);
            }
            if next.insert(t.track_id, updated).is_some() {
                return Err(Error::invalid(format!(
                    "track {} reported twice in one frame",
                    t.track_id
                )));
            }
        }
        broken.extend(self.timers.keys().filter(|id| !next.contains_key(id)));
        self.timers = next;
        Ok(broken)
    }

    pub fn get(&self, id: TrackId) -> Option<&AttentionTimer> {
        self.timers.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AttentionTimer> {
        self.timers.values()
    }
}
