//! Multichannel sample buffers and 16-bit PCM WAV I/O.

use std::path::Path;

use crate::error::{Error, Result};

/// Channel-major audio: `channels[m][n]` is sample `n` of microphone `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudio {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

impl MultichannelAudio {
    pub fn silent(sample_rate: u32, channels: usize, len: usize) -> Self {
        MultichannelAudio {
            sample_rate,
            channels: vec![vec![0.0; len]; channels],
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel (0 when there are no channels).
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.channels.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("channels have different lengths"));
        }
        Ok(())
    }

    pub fn read_wav(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = hound::WavReader::open(path)?;
        let spec = reader.spec();
        if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
            return Err(Error::invalid(format!(
                "expected 16-bit integer PCM, got {} bits {:?}",
                spec.bits_per_sample, spec.sample_format
            )));
        }
        let m = spec.channels as usize;
        let mut channels = vec![Vec::with_capacity(reader.len() as usize / m.max(1)); m];
        for (i, s) in reader.samples::<i16>().enumerate() {
            channels[i % m].push(s? as f64 / 32768.0);
        }
        let audio = MultichannelAudio {
            sample_rate: spec.sample_rate,
            channels,
        };
        audio.validate()?;
        Ok(audio)
    }

    /// Writes interleaved 16-bit PCM. Buffers whose peak exceeds full scale
    /// are attenuated uniformly to fit.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        let spec = hound::WavSpec {
            channels: self.channel_count() as u16,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let peak = self
            .channels
            .iter()
            .flatten()
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        let gain = if peak > 0.99 { 0.99 / peak } else { 1.0 };
        let mut writer = hound::WavWriter::create(path, spec)?;
        for n in 0..self.len() {
            for ch in &self.channels {
                let s = (ch[n] * gain * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(s)?;
            }
        }
        writer.finalize()?;
        Ok(())
    }
}
