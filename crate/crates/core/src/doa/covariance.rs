use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use super::steering::C64;
use crate::audio::MultichannelAudio;
use crate::config::DoaConfig;
use crate::error::{Error, Result};

/// Spatial covariance of one frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCovariance {
    /// FFT bin index.
    pub bin: usize,
    /// Bin center frequency, Hz.
    pub freq: f64,
    pub matrix: DMatrix<C64>,
}

/// Per-bin covariances over the analysis band, in ascending bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariances {
    pub bins: Vec<BinCovariance>,
    /// Number of STFT snapshots averaged into each matrix.
    pub snapshots: usize,
}

/// FFT bins whose center frequency lies inside the configured band.
pub fn band_bins(config: &DoaConfig) -> Vec<(usize, f64)> {
    let df = config.sample_rate as f64 / config.fft_size as f64;
    let (lo, hi) = config.band;
    (1..config.fft_size / 2)
        .map(|k| (k, k as f64 * df))
        .filter(|&(_, f)| f >= lo && f <= hi)
        .collect()
}

/// Short-time Fourier analysis with a periodic Hann window.
///
/// Spectra are scaled by `1/√Σw²` so that white noise of variance σ² has
/// expected per-bin power σ².
pub(crate) struct Stft {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    scale: f64,
    hop: usize,
}

impl Stft {
    pub(crate) fn new(fft_size: usize, hop: usize) -> Self {
        let window: Vec<f64> = (0..fft_size)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / fft_size as f64).cos())
            .collect();
        let energy: f64 = window.iter().map(|w| w * w).sum();
        Stft {
            fft: FftPlanner::new().plan_fft_forward(fft_size),
            window,
            scale: 1.0 / energy.sqrt(),
            hop,
        }
    }

    pub(crate) fn snapshot_count(&self, len: usize) -> usize {
        let n = self.window.len();
        if len < n {
            0
        } else {
            (len - n) / self.hop + 1
        }
    }

    /// Accumulates `(1/K) Σ_k x_k x_kᴴ` for the given bins.
    pub(crate) fn covariances(
        &self,
        audio: &MultichannelAudio,
        bins: &[(usize, f64)],
    ) -> Result<Covariances> {
        audio.validate()?;
        let m = audio.channel_count();
        let n = self.window.len();
        let k_total = self.snapshot_count(audio.len());
        if k_total == 0 {
            return Err(Error::invalid(format!(
                "window of {} samples is shorter than fft_size {}",
                audio.len(),
                n
            )));
        }
        let mut acc: Vec<DMatrix<C64>> = vec![DMatrix::zeros(m, m); bins.len()];
        let mut spectra = vec![vec![C64::new(0.0, 0.0); n]; m];
        let mut snapshot = vec![C64::new(0.0, 0.0); m];
        for k in 0..k_total {
            let start = k * self.hop;
            for (ch, buf) in audio.channels.iter().zip(spectra.iter_mut()) {
                for ((b, &x), &w) in buf.iter_mut().zip(&ch[start..start + n]).zip(&self.window) {
                    *b = C64::new(x * w, 0.0);
                }
                self.fft.process(buf);
            }
            for (r, &(bin, _)) in acc.iter_mut().zip(bins) {
                for (s, spec) in snapshot.iter_mut().zip(&spectra) {
                    *s = spec[bin] * self.scale;
                }
                for j in 0..m {
                    let xj = snapshot[j].conj();
                    for i in 0..m {
                        r[(i, j)] += snapshot[i] * xj;
                    }
                }
            }
        }
        let inv = 1.0 / k_total as f64;
        Ok(Covariances {
            bins: acc
                .into_iter()
                .zip(bins)
                .map(|(matrix, &(bin, freq))| BinCovariance {
                    bin,
                    freq,
                    matrix: matrix * C64::new(inv, 0.0),
                })
                .collect(),
            snapshots: k_total,
        })
    }
}

/// Per-bin spatial covariance matrices of `audio` over the configured band.
pub fn compute_covariance(
    audio: &MultichannelAudio,
    mics: usize,
    config: &DoaConfig,
) -> Result<Covariances> {
    if audio.channel_count() != mics {
        return Err(Error::invalid(format!(
            "audio has {} channels, array has {} microphones",
            audio.channel_count(),
            mics
        )));
    }
    if audio.sample_rate != config.sample_rate {
        return Err(Error::invalid(format!(
            "audio sample rate {} differs from configured {}",
            audio.sample_rate, config.sample_rate
        )));
    }
    Stft::new(config.fft_size, config.hop).covariances(audio, &band_bins(config))
}
