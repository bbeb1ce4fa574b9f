//! Speaker association: which tracked person produced a localized sound.
//!
//! The speaker is the track whose bearing best agrees with the sound
//! direction, `argmax_i <X_i/|X_i|, S>`. Positions are normalized first so a
//! distant person is not preferred over a closer, better-aligned one. The
//! winner is rejected when its bearing is more than `delta_l` degrees off.

use crate::config::FusionConfig;
use crate::error::{Error, Result};
use crate::model::{angle_between, PersonTrack, SoundSourceEstimate, TrackId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationResult {
    pub matched: Option<TrackId>,
    /// Degrees between the matched track's bearing and the sound; set iff `matched` is.
    pub angle_error: Option<f64>,
}

impl AssociationResult {
    pub const NONE: AssociationResult = AssociationResult {
        matched: None,
        angle_error: None,
    };
}

/// Best-aligned track before the `delta_l` gate: `(track_id, cosine)`.
/// Ties on the cosine go to the lowest track id.
pub fn best_aligned(
    tracks: &[PersonTrack],
    sound: &SoundSourceEstimate,
) -> Result<Option<(TrackId, f64)>> {
    let s = sound.direction.unit_vector();
    let mut best: Option<(TrackId, f64)> = None;
    for t in tracks {
        let cos = t.bearing()?.unit_vector().dot(&s);
        best = match best {
            Some((id, c)) if c > cos || (c == cos && id < t.track_id) => Some((id, c)),
            _ => Some((t.track_id, cos)),
        };
    }
    Ok(best)
}

/// Matches a sound to the tracked person it most likely came from.
///
/// An empty track list yields no match; a track at the robot origin or a
/// track older than one frame relative to the sound is an error.
pub fn match_speaker(
    tracks: &[PersonTrack],
    sound: &SoundSourceEstimate,
    config: &FusionConfig,
) -> Result<AssociationResult> {
    for t in tracks {
        let skew = (t.timestamp.since(sound.timestamp)).abs();
        if skew > config.frame_period + crate::model::TIME_EPS {
            return Err(Error::invalid(format!(
                "track {} at {} is more than one frame from the sound at {}",
                t.track_id, t.timestamp, sound.timestamp
            )));
        }
    }
    let Some((id, _)) = best_aligned(tracks, sound)? else {
        return Ok(AssociationResult::NONE);
    };
    let winner = tracks
        .iter()
        .find(|t| t.track_id == id)
        .expect("winner is a track");
    let angle = angle_between(&winner.bearing()?, &sound.direction);
    if angle > config.delta_l {
        return Ok(AssociationResult::NONE);
    }
    Ok(AssociationResult {
        matched: Some(id),
        angle_error: Some(angle),
    })
}
