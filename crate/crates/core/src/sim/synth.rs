//! Synthetic perception inputs: tracker output and microphone signals.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::scenario::Scenario;
use crate::audio::MultichannelAudio;
use crate::config::MicArrayGeometry;
use crate::doa::plane_wave_delay;
use crate::error::Result;
use crate::model::{wrap_degrees, Direction, PersonTrack, Timestamp, Vec2};

/// Speech occupies the classic telephone band.
pub const SPEECH_BAND: (f64, f64) = (500.0, 2800.0);
/// Radio and TV are broader than speech.
pub const MEDIA_BAND: (f64, f64) = (200.0, 4000.0);

/// Samples of guard added on both sides before cropping, so the circular
/// frequency-domain delay never wraps into the returned window.
const GUARD: usize = 64;

/// Tracker output at time `t`: one track per present person.
///
/// `frontal_face` holds when the head yaw points at the robot within
/// `facing_threshold` degrees.
pub fn synthesize_tracks(
    scenario: &Scenario,
    t: Timestamp,
    facing_threshold: f64,
) -> Result<Vec<PersonTrack>> {
    let mut tracks = Vec::with_capacity(scenario.persons.len());
    for p in &scenario.persons {
        let Some((position, yaw)) = p.pose_at(t.seconds()) else {
            continue;
        };
        let to_robot = Direction::from_vector(-position)?;
        let off = wrap_degrees(yaw - to_robot.azimuth()).abs();
        tracks.push(PersonTrack {
            track_id: p.id,
            position,
            frontal_face: off <= facing_threshold,
            timestamp: t,
        });
    }
    Ok(tracks)
}

/// Parameters for microphone signal synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSynth {
    pub array: MicArrayGeometry,
    pub sample_rate: u32,
    /// Per-microphone SNR of a unit-gain source, dB; infinite disables sensor noise.
    pub snr_db: f64,
    pub seed: u64,
}

/// One active point source within a window.
struct Emitter {
    bearing_deg: f64,
    band: (f64, f64),
    gain: f64,
    start: f64,
    end: f64,
}

impl AudioSynth {
    /// Microphone signals for `len` samples starting at `start` seconds.
    ///
    /// Each active source is unit-variance band-limited Gaussian noise
    /// (speech 500–2800 Hz, radio/TV 200–4000 Hz) scaled by its gain and
    /// delayed to every microphone by an exact frequency-domain phase shift
    /// for its far-field bearing. White sensor noise is added per channel.
    /// The random stream depends only on the seed and the window's first
    /// sample, so windows can be generated in any order.
    pub fn window(&self, scenario: &Scenario, start: f64, len: usize) -> MultichannelAudio {
        let fs = self.sample_rate as f64;
        let end = start + len as f64 / fs;
        let mid = start + 0.5 * len as f64 / fs;
        let mut emitters = Vec::new();
        for s in &scenario.speech {
            if s.start >= end || s.end <= start {
                continue;
            }
            let Some((pos, _)) = scenario.person(s.person).and_then(|p| p.pose_at(mid)) else {
                continue;
            };
            emitters.push(Emitter {
                bearing_deg: bearing(pos),
                band: SPEECH_BAND,
                gain: s.gain,
                start: s.start,
                end: s.end,
            });
        }
        for n in &scenario.noise {
            if n.start >= end || n.end <= start {
                continue;
            }
            emitters.push(Emitter {
                bearing_deg: bearing(n.position),
                band: MEDIA_BAND,
                gain: n.gain,
                start: n.start,
                end: n.end,
            });
        }
        self.render(&emitters, start, len)
    }

    /// Signals of a single static source active over the whole window.
    pub fn point_source(&self, bearing_deg: f64, start: f64, len: usize) -> MultichannelAudio {
        self.sources(&[(bearing_deg, 1.0)], start, len)
    }

    /// Several simultaneous speech-band sources `(bearing, gain)` active over the whole window.
    pub fn sources(&self, sources: &[(f64, f64)], start: f64, len: usize) -> MultichannelAudio {
        let emitters: Vec<Emitter> = sources
            .iter()
            .map(|&(bearing_deg, gain)| Emitter {
                bearing_deg,
                band: SPEECH_BAND,
                gain,
                start: f64::NEG_INFINITY,
                end: f64::INFINITY,
            })
            .collect();
        self.render(&emitters, start, len)
    }

    fn render(&self, emitters: &[Emitter], start: f64, len: usize) -> MultichannelAudio {
        let fs = self.sample_rate as f64;
        let first_sample = (start * fs).round() as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(first_sample as u64);

        let m = self.array.len();
        let mut out = MultichannelAudio::silent(self.sample_rate, m, len);
        let n = len + 2 * GUARD;
        let mut planner = FftPlanner::<f64>::new();
        let ifft = planner.plan_fft_inverse(n);
        let mut buf = vec![Complex::new(0.0, 0.0); n];

        for e in emitters {
            let lo = (e.band.0 * n as f64 / fs).ceil().max(1.0) as usize;
            let hi = ((e.band.1 * n as f64 / fs).floor() as usize).min((n - 1) / 2);
            if hi < lo {
                continue;
            }
            // unit variance after the inverse transform: a = n / (2 sqrt(B))
            let amp = n as f64 / (2.0 * ((hi - lo + 1) as f64).sqrt());
            let spectrum: Vec<Complex<f64>> = (lo..=hi)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex::new(re, im) * amp
                })
                .collect();
            let mask: Vec<f64> = (0..len)
                .map(|i| {
                    let t = start + i as f64 / fs;
                    if t >= e.start && t < e.end {
                        e.gain
                    } else {
                        0.0
                    }
                })
                .collect();
            for (mic, ch) in self.array.mic_positions.iter().zip(out.channels.iter_mut()) {
                let tau = plane_wave_delay(mic, e.bearing_deg, self.array.speed_of_sound);
                buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
                for (k, &s) in (lo..=hi).zip(&spectrum) {
                    let f = k as f64 * fs / n as f64;
                    let z = s * Complex::from_polar(1.0, -2.0 * PI * f * tau);
                    buf[k] = z;
                    buf[n - k] = z.conj();
                }
                ifft.process(&mut buf);
                let inv = 1.0 / n as f64;
                for ((y, z), g) in ch.iter_mut().zip(&buf[GUARD..GUARD + len]).zip(&mask) {
                    *y += z.re * inv * g;
                }
            }
        }

        if self.snr_db.is_finite() {
            let sigma = 10f64.powf(-self.snr_db / 20.0);
            for ch in out.channels.iter_mut() {
                for y in ch.iter_mut() {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    *y += sigma * w;
                }
            }
        }
        out
    }
}

fn bearing(pos: Vec2) -> f64 {
    pos.y.atan2(pos.x).to_degrees()
}
