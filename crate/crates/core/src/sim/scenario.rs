//! Scripted scenarios and their text format.
//!
//! ```text
//! [meta]
//! duration = 8
//! seed = 3
//!
//! [person 1]
//! # waypoint t x y yaw
//! waypoint 0 2.0 0.5 -166
//!
//! [speech]
//! # person t_start t_end [gain]
//! 1 1.5 3.5 1.0
//!
//! [noise]
//! # kind x y t_start t_end [gain]
//! radio -2 -3 0 8
//!
//! [truth]
//! # person t_onset kind
//! 1 1.5 AudioVision
//! ```
//!
//! A person is present from their first waypoint until the end of the
//! scenario and holds the last waypoint's pose after it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{wrap_degrees, IoIKind, TrackId, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub position: Vec2,
    /// Direction the head points, degrees in the robot frame.
    pub head_yaw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedPerson {
    pub id: TrackId,
    pub waypoints: Vec<Waypoint>,
}

impl ScriptedPerson {
    pub fn appears_at(&self) -> f64 {
        self.waypoints[0].t
    }

    /// Interpolated pose at `t`, or `None` before the person appears.
    /// Yaw follows the shorter arc between waypoints.
    pub fn pose_at(&self, t: f64) -> Option<(Vec2, f64)> {
        let first = self.waypoints.first()?;
        if t < first.t {
            return None;
        }
        let next = self.waypoints.partition_point(|w| w.t <= t);
        if next == self.waypoints.len() {
            let last = self.waypoints.last()?;
            return Some((last.position, last.head_yaw));
        }
        let (a, b) = (&self.waypoints[next - 1], &self.waypoints[next]);
        let alpha = (t - a.t) / (b.t - a.t);
        let position = a.position + (b.position - a.position) * alpha;
        let yaw = wrap_degrees(a.head_yaw + wrap_degrees(b.head_yaw - a.head_yaw) * alpha);
        Some((position, yaw))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeechInterval {
    pub person: TrackId,
    pub start: f64,
    pub end: f64,
    /// Linear amplitude relative to a unit-variance talker.
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Radio,
    Tv,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Radio => "radio",
            NoiseKind::Tv => "tv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource {
    pub kind: NoiseKind,
    pub position: Vec2,
    pub start: f64,
    pub end: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub person: TrackId,
    pub onset: f64,
    pub kind: IoIKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub duration: f64,
    pub seed: Option<u64>,
    pub persons: Vec<ScriptedPerson>,
    pub speech: Vec<SpeechInterval>,
    pub noise: Vec<NoiseSource>,
    pub truth: Vec<GroundTruth>,
}

enum Section {
    Meta,
    Person(usize),
    Speech,
    Noise,
    Truth,
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::ScenarioSyntax {
        line,
        msg: msg.into(),
    }
}

fn field<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

fn finite(line: usize, tok: Option<&str>, what: &str) -> Result<f64> {
    let v: f64 = field(line, tok, what)?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{what} must be finite")));
    }
    Ok(v)
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses and validates a scenario file; errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sc = Scenario {
            duration: f64::NAN,
            ..Scenario::default()
        };
        let mut section = None;
        // line numbers for checks that need the whole file
        let mut duration_line = 0;
        let mut speech_lines = Vec::new();
        let mut noise_lines = Vec::new();
        let mut truth_lines = Vec::new();
        let mut person_index: BTreeMap<TrackId, usize> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(header) = content.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line, "unterminated section header"))?;
                let mut toks = header.split_whitespace();
                section = Some(match toks.next() {
                    Some("meta") => Section::Meta,
                    Some("speech") => Section::Speech,
                    Some("noise") => Section::Noise,
                    Some("truth") => Section::Truth,
                    Some("person") => {
                        let id: TrackId = field(line, toks.next(), "person id")?;
                        if person_index.contains_key(&id) {
                            return Err(syntax(line, format!("person {id} defined twice")));
                        }
                        person_index.insert(id, sc.persons.len());
                        sc.persons.push(ScriptedPerson {
                            id,
                            waypoints: Vec::new(),
                        });
                        Section::Person(sc.persons.len() - 1)
                    }
                    other => {
                        return Err(syntax(
                            line,
                            format!("unknown section `{}`", other.unwrap_or("")),
                        ))
                    }
                });
                if toks.next().is_some() {
                    return Err(syntax(line, "trailing tokens in section header"));
                }
                continue;
            }
            let sec = section
                .as_ref()
                .ok_or_else(|| syntax(line, "content before the first section"))?;
            match sec {
                Section::Meta => {
                    let (key, value) = match content.split_once('=') {
                        Some((k, v)) => (k.trim(), v.trim()),
                        None => content
                            .split_once(char::is_whitespace)
                            .map(|(k, v)| (k.trim(), v.trim()))
                            .ok_or_else(|| syntax(line, "expected `key = value`"))?,
                    };
                    match key {
                        "duration" => {
                            sc.duration = finite(line, Some(value), "duration")?;
                            duration_line = line;
                        }
                        "seed" => sc.seed = Some(field(line, Some(value), "seed")?),
                        _ => return Err(syntax(line, format!("unknown meta key `{key}`"))),
                    }
                }
                Section::Person(i) => {
                    let mut toks = content.split_whitespace();
                    if toks.next() != Some("waypoint") {
                        return Err(syntax(line, "expected `waypoint t x y yaw`"));
                    }
                    let w = Waypoint {
                        t: finite(line, toks.next(), "time")?,
                        position: Vec2::new(
                            finite(line, toks.next(), "x")?,
                            finite(line, toks.next(), "y")?,
                        ),
                        head_yaw: finite(line, toks.next(), "yaw")?,
                    };
                    if toks.next().is_some() {
                        return Err(syntax(line, "trailing tokens after waypoint"));
                    }
                    let person = &mut sc.persons[*i];
                    if let Some(prev) = person.waypoints.last() {
                        if w.t <= prev.t {
                            return Err(syntax(
                                line,
                                format!(
                                    "waypoint time {} does not follow {} for person {}",
                                    w.t, prev.t, person.id
                                ),
                            ));
                        }
                    }
                    if w.t < 0.0 {
                        return Err(syntax(line, "waypoint time is negative"));
                    }
                    if w.position.norm() == 0.0 {
                        return Err(syntax(line, "person placed at the robot origin"));
                    }
                    person.waypoints.push(w);
                }
                Section::Speech => {
                    let toks: Vec<&str> = content.split_whitespace().collect();
                    if !(3..=4).contains(&toks.len()) {
                        return Err(syntax(line, "expected `person t_start t_end [gain]`"));
                    }
                    sc.speech.push(SpeechInterval {
                        person: field(line, Some(toks[0]), "person id")?,
                        start: finite(line, Some(toks[1]), "t_start")?,
                        end: finite(line, Some(toks[2]), "t_end")?,
                        gain: match toks.get(3) {
                            Some(g) => finite(line, Some(g), "gain")?,
                            None => 1.0,
                        },
                    });
                    speech_lines.push(line);
                }
                Section::Noise => {
                    let toks: Vec<&str> = content.split_whitespace().collect();
                    if !(5..=6).contains(&toks.len()) {
                        return Err(syntax(line, "expected `kind x y t_start t_end [gain]`"));
                    }
                    let kind = match toks[0].to_ascii_lowercase().as_str() {
                        "radio" => NoiseKind::Radio,
                        "tv" => NoiseKind::Tv,
                        k => return Err(syntax(line, format!("unknown noise kind `{k}`"))),
                    };
                    let position = Vec2::new(
                        finite(line, Some(toks[1]), "x")?,
                        finite(line, Some(toks[2]), "y")?,
                    );
                    if position.norm() == 0.0 {
                        return Err(syntax(line, "noise source at the robot origin"));
                    }
                    sc.noise.push(NoiseSource {
                        kind,
                        position,
                        start: finite(line, Some(toks[3]), "t_start")?,
                        end: finite(line, Some(toks[4]), "t_end")?,
                        gain: match toks.get(5) {
                            Some(g) => finite(line, Some(g), "gain")?,
                            None => 1.0,
                        },
                    });
                    noise_lines.push(line);
                }
                Section::Truth => {
                    let toks: Vec<&str> = content.split_whitespace().collect();
                    if toks.len() != 3 {
                        return Err(syntax(line, "expected `person t_onset kind`"));
                    }
                    sc.truth.push(GroundTruth {
                        person: field(line, Some(toks[0]), "person id")?,
                        onset: finite(line, Some(toks[1]), "t_onset")?,
                        kind: IoIKind::parse(toks[2])
                            .ok_or_else(|| syntax(line, format!("unknown kind `{}`", toks[2])))?,
                    });
                    truth_lines.push(line);
                }
            }
        }

        if sc.duration.is_nan() {
            return Err(Error::InvalidScenario(
                "missing `duration` in [meta]".into(),
            ));
        }
        if sc.duration <= 0.0 {
            return Err(syntax(duration_line, "duration must be positive"));
        }
        let d = sc.duration;
        for p in &sc.persons {
            match p.waypoints.first() {
                None => {
                    return Err(Error::InvalidScenario(format!(
                        "person {} has no waypoints",
                        p.id
                    )))
                }
                Some(w) if w.t > d => {
                    return Err(Error::InvalidScenario(format!(
                        "person {} appears after the scenario ends",
                        p.id
                    )))
                }
                _ => {}
            }
        }
        let interval_ok = |a: f64, b: f64| 0.0 <= a && a < b && b <= d;
        for (s, &line) in sc.speech.iter().zip(&speech_lines) {
            if !person_index.contains_key(&s.person) {
                return Err(syntax(
                    line,
                    format!("speech by unknown person {}", s.person),
                ));
            }
            if !interval_ok(s.start, s.end) {
                return Err(syntax(line, format!("interval outside [0, {d}] or empty")));
            }
            if s.gain < 0.0 {
                return Err(syntax(line, "gain must be non-negative"));
            }
        }
        for (n, &line) in sc.noise.iter().zip(&noise_lines) {
            if !interval_ok(n.start, n.end) {
                return Err(syntax(line, format!("interval outside [0, {d}] or empty")));
            }
            if n.gain < 0.0 {
                return Err(syntax(line, "gain must be non-negative"));
            }
        }
        for (t, &line) in sc.truth.iter().zip(&truth_lines) {
            if !person_index.contains_key(&t.person) {
                return Err(syntax(
                    line,
                    format!("truth for unknown person {}", t.person),
                ));
            }
            if !(0.0..=d).contains(&t.onset) {
                return Err(syntax(line, format!("onset outside [0, {d}]")));
            }
        }
        Ok(sc)
    }

    /// Renders the scenario in the format [`Scenario::parse`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[meta]\nduration = {}", self.duration);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        for p in &self.persons {
            let _ = writeln!(out, "\n[person {}]", p.id);
            for w in &p.waypoints {
                let _ = writeln!(
                    out,
                    "waypoint {} {} {} {}",
                    w.t, w.position.x, w.position.y, w.head_yaw
                );
            }
        }
        if !self.speech.is_empty() {
            out.push_str("\n[speech]\n");
            for s in &self.speech {
                let _ = writeln!(out, "{} {} {} {}", s.person, s.start, s.end, s.gain);
            }
        }
        if !self.noise.is_empty() {
            out.push_str("\n[noise]\n");
            for n in &self.noise {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    n.kind.as_str(),
                    n.position.x,
                    n.position.y,
                    n.start,
                    n.end,
                    n.gain
                );
            }
        }
        if !self.truth.is_empty() {
            out.push_str("\n[truth]\n");
            for t in &self.truth {
                let _ = writeln!(out, "{} {} {}", t.person, t.onset, t.kind);
            }
        }
        out
    }

    /// Mirror image across the robot's forward axis: `y → -y`, `yaw → -yaw`.
    pub fn mirrored(&self) -> Scenario {
        let flip = |v: Vec2| Vec2::new(v.x, -v.y);
        Scenario {
            persons: self
                .persons
                .iter()
                .map(|p| ScriptedPerson {
                    id: p.id,
                    waypoints: p
                        .waypoints
                        .iter()
                        .map(|w| Waypoint {
                            t: w.t,
                            position: flip(w.position),
                            head_yaw: wrap_degrees(-w.head_yaw),
                        })
                        .collect(),
                })
                .collect(),
            noise: self
                .noise
                .iter()
                .map(|n| NoiseSource {
                    position: flip(n.position),
                    ..*n
                })
                .collect(),
            ..self.clone()
        }
    }

    pub fn person(&self, id: TrackId) -> Option<&ScriptedPerson> {
        self.persons.iter().find(|p| p.id == id)
    }
}
