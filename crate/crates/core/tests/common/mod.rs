//! Abstract gate alphabets for exhaustive state-machine exploration.

#![allow(dead_code)]

use ioi_core::association::AssociationResult;
use ioi_core::machine::{FramePercepts, TrackGates};
use ioi_core::model::{
    Direction, PersonTrack, SoundSourceEstimate, StateKind, Timestamp, TrackId, Vec2,
};

pub const VOCAL_PATH: [StateKind; 4] = [
    StateKind::Monitoring,
    StateKind::VocalAttention,
    StateKind::VisualAttention,
    StateKind::IoI,
];
pub const VISUAL_PATH: [StateKind; 3] = [
    StateKind::Monitoring,
    StateKind::VisualAttention,
    StateKind::IoI,
];

/// Abstract per-frame input: gate values per track and what was heard.
#[derive(Debug, Clone)]
pub struct Letter {
    pub gates: Vec<TrackGates>,
    /// `None`: silence; `Some(None)`: unassociated sound; `Some(Some(id))`: associated.
    pub heard: Option<Option<TrackId>>,
}

pub fn track_options(id: TrackId) -> Vec<Option<TrackGates>> {
    let mut out = vec![None];
    for frontal in [false, true] {
        for (z_v1, z_v2) in [
            (false, None),
            (true, None),
            (true, Some(false)),
            (true, Some(true)),
        ] {
            for engaged in [false, true] {
                out.push(Some(TrackGates {
                    track_id: id,
                    tracked: true,
                    frontal,
                    z_v1,
                    z_v2,
                    engaged,
                }));
            }
        }
    }
    out
}

pub fn alphabet(ids: &[TrackId]) -> Vec<Letter> {
    let mut combos: Vec<Vec<TrackGates>> = vec![vec![]];
    for &id in ids {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                track_options(id).into_iter().map(move |g| {
                    let mut c = c.clone();
                    c.extend(g);
                    c
                })
            })
            .collect();
    }
    let mut letters = Vec::new();
    for gates in combos {
        let mut heard = vec![None, Some(None)];
        heard.extend(gates.iter().map(|g| Some(Some(g.track_id))));
        for h in heard {
            letters.push(Letter {
                gates: gates.clone(),
                heard: h,
            });
        }
    }
    letters
}

pub fn percepts(letter: &Letter, k: usize) -> FramePercepts {
    let timestamp = Timestamp::new(k as f64 * 0.1).unwrap();
    FramePercepts {
        timestamp,
        tracks: letter
            .gates
            .iter()
            .map(|g| PersonTrack {
                track_id: g.track_id,
                position: Vec2::new(1.0, g.track_id as f64),
                frontal_face: g.frontal,
                timestamp,
            })
            .collect(),
        sound: letter.heard.map(|_| SoundSourceEstimate {
            direction: Direction::from_azimuth(45.0).unwrap(),
            power: 50.0,
            timestamp,
        }),
        association: letter.heard.map(|m| AssociationResult {
            matched: m,
            angle_error: m.map(|_| 0.0),
        }),
        candidate: letter.heard.flatten(),
        gates: letter.gates.clone(),
    }
}

/// Observed trajectory since the last Monitoring, with repeats collapsed.
pub fn since_monitoring(kinds: &[StateKind]) -> Vec<StateKind> {
    let start = kinds
        .iter()
        .rposition(|&k| k == StateKind::Monitoring)
        .unwrap_or(0);
    let mut out: Vec<StateKind> = kinds[start..].to_vec();
    out.dedup();
    out
}

pub fn path_is_allowed(path: &[StateKind]) -> bool {
    path == VOCAL_PATH || path == VISUAL_PATH
}
