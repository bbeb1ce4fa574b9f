//! Thresholds, array geometry and DOA parameters, plus the flat
//! `key = value` config file format.
//!
//! Every key of [`FusionConfig`], [`MicArrayGeometry`] and [`DoaConfig`]
//! appears at top level in the file under its field name:
//!
//! ```text
//! # thresholds
//! delta_l = 15.0
//! delta_t1 = 2.0
//! mic_positions = 0 0; 0.045 0; 0.0225 0.03897
//! band = 500 2800
//! ```
//!
//! Unknown keys, repeated keys and out-of-range values are load errors.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Vec2;

/// Microphone layout in the robot frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MicArrayGeometry {
    pub mic_positions: Vec<Vec2>,
    /// m/s
    pub speed_of_sound: f64,
}

impl MicArrayGeometry {
    pub fn new(mic_positions: Vec<Vec2>, speed_of_sound: f64) -> Result<Self> {
        let g = MicArrayGeometry {
            mic_positions,
            speed_of_sound,
        };
        g.validate()?;
        Ok(g)
    }

    /// Six microphones on a 4.5 cm circle plus one at the center.
    pub fn circular_seven() -> Self {
        let radius = 0.045;
        let mut mic_positions = vec![Vec2::zeros()];
        mic_positions.extend((0..6).map(|k| {
            let a = (60.0 * k as f64).to_radians();
            Vec2::new(radius * a.cos(), radius * a.sin())
        }));
        MicArrayGeometry {
            mic_positions,
            speed_of_sound: 343.0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.mic_positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.mic_positions.is_empty()
    }

    /// Every microphone rotated counter-clockwise about the origin.
    pub fn rotated(&self, deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        MicArrayGeometry {
            mic_positions: self
                .mic_positions
                .iter()
                .map(|p| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y))
                .collect(),
            speed_of_sound: self.speed_of_sound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mic_positions.len() < 2 {
            return Err(Error::config("mic array needs at least two microphones"));
        }
        if !(self.speed_of_sound.is_finite() && self.speed_of_sound > 0.0) {
            return Err(Error::config("speed_of_sound must be positive"));
        }
        for (i, p) in self.mic_positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::config(format!("mic {i} has a non-finite position")));
            }
            for q in &self.mic_positions[..i] {
                if p == q {
                    return Err(Error::config(format!(
                        "mic {i} duplicates position ({}, {})",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Default for MicArrayGeometry {
    fn default() -> Self {
        Self::circular_seven()
    }
}

/// STFT and MUSIC scan parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaConfig {
    /// Hz
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop: usize,
    /// Analysis band `(f_lo, f_hi)` in Hz.
    pub band: (f64, f64),
    /// Assumed number of sources; sets the signal/noise subspace split.
    pub n_sources: usize,
    /// Azimuth grid resolution, degrees.
    pub grid_step: f64,
    /// A peak must reach this multiple of the spectrum's median to count.
    pub peak_threshold: f64,
}

impl Default for DoaConfig {
    fn default() -> Self {
        DoaConfig {
            sample_rate: 16_000,
            fft_size: 512,
            hop: 256,
            band: (500.0, 2800.0),
            n_sources: 1,
            grid_step: 1.0,
            peak_threshold: 10.0,
        }
    }
}

impl DoaConfig {
    /// Number of azimuth grid points covering `[-180, 180)`.
    pub fn grid_len(&self) -> usize {
        (360.0 / self.grid_step).round() as usize
    }

    pub fn validate(&self, mics: usize) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        let (lo, hi) = self.band;
        if self.sample_rate == 0 {
            return Err(Error::config("sample_rate must be positive"));
        }
        if !(lo > 0.0 && lo < hi && hi < nyquist) {
            return Err(Error::config(format!(
                "band must satisfy 0 < f_lo < f_hi < {nyquist}, got ({lo}, {hi})"
            )));
        }
        if self.fft_size < 2 {
            return Err(Error::config("fft_size must be at least 2"));
        }
        if self.hop == 0 {
            return Err(Error::config("hop must be positive"));
        }
        if self.n_sources == 0 || self.n_sources >= mics {
            return Err(Error::config(format!(
                "n_sources must lie in [1, {}), got {}",
                mics, self.n_sources
            )));
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0 && self.grid_step <= 180.0) {
            return Err(Error::config("grid_step must lie in (0, 180]"));
        }
        let cells = 360.0 / self.grid_step;
        if (cells - cells.round()).abs() > 1e-9 {
            return Err(Error::config(format!(
                "grid_step {} does not divide 360",
                self.grid_step
            )));
        }
        if !(self.peak_threshold.is_finite() && self.peak_threshold > 0.0) {
            return Err(Error::config("peak_threshold must be positive"));
        }
        Ok(())
    }
}

/// Everything the pipeline needs besides the scenario itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    /// Speaker association gate, degrees.
    pub delta_l: f64,
    /// Frontal gaze needed to enter visual attention, seconds.
    pub delta_t1: f64,
    /// Further frontal gaze needed in visual attention to declare IoI, seconds.
    pub delta_t2: f64,
    /// Longest face-detector dropout that does not reset gaze timers, seconds.
    pub max_face_gap: f64,
    pub frame_period: f64,
    pub array: MicArrayGeometry,
    pub doa: DoaConfig,
    /// When false, only the audio-vision route can reach IoI.
    pub enable_vision_path: bool,
    /// Head yaw tolerance for the simulated frontal-face detector, degrees.
    pub facing_threshold: f64,
    /// Sensor SNR of the simulated microphones, dB; `inf` disables sensor noise.
    pub snr_db: f64,
    /// Noise seed; overrides the scenario's own seed when set.
    pub seed: Option<u64>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            delta_l: 15.0,
            delta_t1: 2.0,
            delta_t2: 2.0,
            max_face_gap: 0.3,
            frame_period: 0.1,
            array: MicArrayGeometry::default(),
            doa: DoaConfig::default(),
            enable_vision_path: true,
            facing_threshold: 20.0,
            snr_db: 20.0,
            seed: None,
        }
    }
}

const KEYS: &[&str] = &[
    "delta_l",
    "delta_t1",
    "delta_t2",
    "max_face_gap",
    "frame_period",
    "mic_positions",
    "speed_of_sound",
    "sample_rate",
    "fft_size",
    "hop",
    "band",
    "n_sources",
    "grid_step",
    "peak_threshold",
    "enable_vision_path",
    "facing_threshold",
    "snr_db",
    "seed",
];

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_l > 0.0 && self.delta_l < 90.0) {
            return Err(Error::config(format!(
                "delta_l must lie in (0, 90), got {}",
                self.delta_l
            )));
        }
        for (name, v) in [
            ("delta_t1", self.delta_t1),
            ("delta_t2", self.delta_t2),
            ("frame_period", self.frame_period),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.max_face_gap >= 0.0 && self.max_face_gap < self.delta_t1) {
            return Err(Error::config(format!(
                "max_face_gap must lie in [0, delta_t1), got {}",
                self.max_face_gap
            )));
        }
        if !(self.facing_threshold > 0.0 && self.facing_threshold < 180.0) {
            return Err(Error::config("facing_threshold must lie in (0, 180)"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::config("snr_db must be a number or inf"));
        }
        self.array.validate()?;
        self.doa.validate(self.array.len())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses a flat config file on top of the defaults, then validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = FusionConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |msg: String| Error::ConfigSyntax { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(syntax(format!("unknown key `{key}`")));
            }
            if !seen.insert(key.to_string()) {
                return Err(syntax(format!("key `{key}` given twice")));
            }
            cfg.set(key, value).map_err(syntax)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "delta_l" => self.delta_l = num(value)?,
            "delta_t1" => self.delta_t1 = num(value)?,
            "delta_t2" => self.delta_t2 = num(value)?,
            "max_face_gap" => self.max_face_gap = num(value)?,
            "frame_period" => self.frame_period = num(value)?,
            "speed_of_sound" => self.array.speed_of_sound = num(value)?,
            "mic_positions" => self.array.mic_positions = positions(value)?,
            "sample_rate" => self.doa.sample_rate = int(value)?,
            "fft_size" => self.doa.fft_size = int(value)?,
            "hop" => self.doa.hop = int(value)?,
            "n_sources" => self.doa.n_sources = int(value)?,
            "grid_step" => self.doa.grid_step = num(value)?,
            "peak_threshold" => self.doa.peak_threshold = num(value)?,
            "band" => {
                let v = numbers(value)?;
                if v.len() != 2 {
                    return Err(format!("band needs two numbers, got {}", v.len()));
                }
                self.doa.band = (v[0], v[1]);
            }
            "enable_vision_path" => {
                self.enable_vision_path = value
                    .parse()
                    .map_err(|_| format!("expected true or false, got `{value}`"))?
            }
            "facing_threshold" => self.facing_threshold = num(value)?,
            "snr_db" => self.snr_db = num(value)?,
            "seed" => self.seed = Some(int(value)?),
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    /// Renders the config in the same format `parse` reads.
    pub fn to_text(&self) -> String {
        let mics = self
            .array
            .mic_positions
            .iter()
            .map(|p| format!("{} {}", p.x, p.y))
            .collect::<Vec<_>>()
            .join("; ");
        let mut out = format!(
            "delta_l = {}\ndelta_t1 = {}\ndelta_t2 = {}\nmax_face_gap = {}\nframe_period = {}\n\
             mic_positions = {}\nspeed_of_sound = {}\nsample_rate = {}\nfft_size = {}\nhop = {}\n\
             band = {} {}\nn_sources = {}\ngrid_step = {}\npeak_threshold = {}\n\
             enable_vision_path = {}\nfacing_threshold = {}\nsnr_db = {}\n",
            self.delta_l,
            self.delta_t1,
            self.delta_t2,
            self.max_face_gap,
            self.frame_period,
            mics,
            self.array.speed_of_sound,
            self.doa.sample_rate,
            self.doa.fft_size,
            self.doa.hop,
            self.doa.band.0,
            self.doa.band.1,
            self.doa.n_sources,
            self.doa.grid_step,
            self.doa.peak_threshold,
            self.enable_vision_path,
            self.facing_threshold,
            self.snr_db,
        );
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed = {seed}\n"));
        }
        out
    }
}

fn num(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("expected a number, got `{s}`"))
}

fn int<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>()
        .map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

fn numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(num)
        .collect()
}

fn positions(s: &str) -> std::result::Result<Vec<Vec2>, String> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|pair| {
            let v = numbers(pair)?;
            match v.as_slice() {
                [x, y] => Ok(Vec2::new(*x, *y)),
                _ => Err(format!("mic position needs `x y`, got `{}`", pair.trim())),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = FusionConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.delta_l, 15.0);
        assert_eq!(cfg.array.len(), 7);
        assert_eq!(cfg.doa.grid_len(), 360);
    }

    #[test]
    fn default_array_geometry() {
        let g = MicArrayGeometry::circular_seven();
        for p in &g.mic_positions[1..] {
            assert!((p.norm() - 0.045).abs() < 1e-12);
        }
        assert_eq!(g.mic_positions[0], Vec2::zeros());
    }

    #[test]
    fn parses_overrides() {
        let cfg = FusionConfig::parse(
            "# comment\ndelta_l = 10.0\ndelta_t1=3\nband = 400, 3000\n\
             mic_positions = 0 0; 0.05 0 ; 0 0.05\nn_sources = 2\nseed = 7\n\
             enable_vision_path = false\nsnr_db = inf\n",
        )
        .unwrap();
        assert_eq!(cfg.delta_l, 10.0);
        assert_eq!(cfg.delta_t1, 3.0);
        assert_eq!(cfg.doa.band, (400.0, 3000.0));
        assert_eq!(cfg.array.len(), 3);
        assert_eq!(cfg.doa.n_sources, 2);
        assert_eq!(cfg.seed, Some(7));
        assert!(!cfg.enable_vision_path);
        assert!(cfg.snr_db.is_infinite());
    }

    #[test]
    fn round_trips_through_text() {
        let cfg = FusionConfig {
            seed: Some(11),
            delta_t2: 2.5,
            ..FusionConfig::default()
        };
        let back = FusionConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let err = FusionConfig::parse("delta_l = 15\nbogus = 1\n").unwrap_err();
        match err {
            Error::ConfigSyntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn invalid_values_rejected_not_clamped() {
        for text in [
            "delta_l = 90",
            "delta_l = 0",
            "delta_t1 = 0",
            "delta_t2 = -1",
            "max_face_gap = 2.5",
            "grid_step = 7",
            "n_sources = 7",
            "n_sources = 0",
            "band = 2800 500",
            "band = 500 9000",
            "mic_positions = 0 0; 0 0",
            "mic_positions = 0 0",
            "delta_l = 1\ndelta_l = 2",
            "delta_l 15",
            "fft_size = -3",
        ] {
            assert!(FusionConfig::parse(text).is_err(), "accepted `{text}`");
        }
    }
}
