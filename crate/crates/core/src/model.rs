//! Domain types shared by every stage of the pipeline.
//!
//! All geometry lives in the robot's horizontal frame: the robot sits at the
//! origin, the x axis points forward and azimuth grows counter-clockwise
//! (90° is the robot's left).

use std::fmt;

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Position or direction in the robot's horizontal plane, meters.
pub type Vec2 = Vector2<f64>;

/// Identity of a tracked person, stable across frames.
pub type TrackId = u32;

/// Slack used when comparing accumulated durations against thresholds, seconds.
///
/// Timers accumulate frame periods such as 0.1 s, which are not exact in
/// binary floating point; twenty of them sum to slightly less than 2.0.
pub const TIME_EPS: f64 = 1e-9;

/// Seconds since the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Timestamp(f64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0.0);

    pub fn new(seconds: f64) -> Result<Self> {
        if !seconds.is_finite() || seconds < 0.0 {
            return Err(Error::invalid(format!(
                "timestamp must be finite and non-negative, got {seconds}"
            )));
        }
        Ok(Timestamp(seconds))
    }

    #[inline]
    pub fn seconds(self) -> f64 {
        self.0
    }

    /// Elapsed seconds from `earlier` to `self` (negative on regression).
    #[inline]
    pub fn since(self, earlier: Timestamp) -> f64 {
        self.0 - earlier.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}", self.0)
    }
}

/// Wraps an angle in degrees into `[-180, 180)`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// A bearing in the horizontal plane, kept both as an azimuth and a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth: f64,
    unit: Vec2,
}

impl Direction {
    /// Builds a direction from an azimuth in degrees, wrapping it into `[-180, 180)`.
    pub fn from_azimuth(azimuth: f64) -> Result<Self> {
        if !azimuth.is_finite() {
            return Err(Error::invalid(format!(
                "azimuth must be finite, got {azimuth}"
            )));
        }
        let azimuth = wrap_degrees(azimuth);
        let rad = azimuth.to_radians();
        Ok(Direction {
            azimuth,
            unit: Vec2::new(rad.cos(), rad.sin()),
        })
    }

    /// Direction of a non-zero vector.
    pub fn from_vector(v: Vec2) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::invalid(format!(
                "direction of a zero or non-finite vector ({}, {})",
                v.x, v.y
            )));
        }
        Ok(Direction {
            azimuth: wrap_degrees(v.y.atan2(v.x).to_degrees()),
            unit: v / norm,
        })
    }

    #[inline]
    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    #[inline]
    pub fn unit_vector(&self) -> Vec2 {
        self.unit
    }

    /// Same direction rotated counter-clockwise by `deg` degrees.
    pub fn rotated(&self, deg: f64) -> Result<Self> {
        Direction::from_azimuth(self.azimuth + deg)
    }

    /// Mirror image across the robot's forward (x) axis.
    pub fn mirrored(&self) -> Self {
        Direction {
            azimuth: wrap_degrees(-self.azimuth),
            unit: Vec2::new(self.unit.x, -self.unit.y),
        }
    }
}

/// Unsigned angle between two directions in degrees, in `[0, 180]`.
pub fn angle_between(a: &Direction, b: &Direction) -> f64 {
    a.unit.dot(&b.unit).clamp(-1.0, 1.0).acos().to_degrees()
}

/// One person as reported by the tracker at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersonTrack {
    pub track_id: TrackId,
    /// Position relative to the robot, meters.
    pub position: Vec2,
    /// Whether the person's face is oriented at the robot.
    pub frontal_face: bool,
    pub timestamp: Timestamp,
}

impl PersonTrack {
    /// Bearing from the robot to the person. Fails for a person at the origin.
    pub fn bearing(&self) -> Result<Direction> {
        Direction::from_vector(self.position).map_err(|_| {
            Error::invalid(format!(
                "track {} is coincident with the robot origin",
                self.track_id
            ))
        })
    }
}

/// A localized sound source: one above-threshold pseudospectrum peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundSourceEstimate {
    pub direction: Direction,
    /// Peak height of the pseudospectrum (dimensionless).
    pub power: f64,
    pub timestamp: Timestamp,
}

/// Label of a node in the interaction state model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Monitoring,
    VocalAttention,
    VisualAttention,
    IoI,
}

impl StateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Monitoring => "Monitoring",
            StateKind::VocalAttention => "VocalAttention",
            StateKind::VisualAttention => "VisualAttention",
            StateKind::IoI => "IoI",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            StateKind::Monitoring,
            StateKind::VocalAttention,
            StateKind::VisualAttention,
            StateKind::IoI,
        ]
        .into_iter()
        .find(|k| k.as_str() == s.trim())
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which route led into the visual attention state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttentionPath {
    /// Entered after a sound was associated with a tracked person.
    Vocal,
    /// Entered after sustained frontal gaze.
    Visual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum IoIState {
    #[default]
    Monitoring,
    /// A sound was detected; `candidate` is the best-aligned track, if any
    /// person was tracked at all.
    VocalAttention {
        candidate: Option<TrackId>,
    },
    VisualAttention {
        track: TrackId,
        path: AttentionPath,
    },
    IoI {
        track: TrackId,
    },
}

impl IoIState {
    pub fn kind(&self) -> StateKind {
        match self {
            IoIState::Monitoring => StateKind::Monitoring,
            IoIState::VocalAttention { .. } => StateKind::VocalAttention,
            IoIState::VisualAttention { .. } => StateKind::VisualAttention,
            IoIState::IoI { .. } => StateKind::IoI,
        }
    }

    pub fn attending_track(&self) -> Option<TrackId> {
        match *self {
            IoIState::Monitoring => None,
            IoIState::VocalAttention { candidate } => candidate,
            IoIState::VisualAttention { track, .. } | IoIState::IoI { track } => Some(track),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IoIKind {
    /// Speech from a tracked person who faces the robot.
    AudioVision,
    /// Silent, sustained frontal gaze.
    VisionOnly,
}

impl IoIKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IoIKind::AudioVision => "AudioVision",
            IoIKind::VisionOnly => "VisionOnly",
        }
    }

    /// Accepts the canonical names plus a few spellings common in hand-written files.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "audiovision" | "audio_vision" | "av" => Some(IoIKind::AudioVision),
            "visiononly" | "vision_only" | "vision" => Some(IoIKind::VisionOnly),
            _ => None,
        }
    }
}

impl fmt::Display for IoIKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A detected initiation of interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct IoIEvent {
    pub kind: IoIKind,
    pub track_id: TrackId,
    pub timestamp: Timestamp,
    /// States visited since the machine last left Monitoring, ending in `IoI`.
    pub state_path: Vec<StateKind>,
}
