use nalgebra::DMatrix;

use super::covariance::{band_bins, BinCovariance, Covariances, Stft};
use super::steering::{steering_vector, C64};
use crate::audio::MultichannelAudio;
use crate::config::{DoaConfig, MicArrayGeometry};
use crate::error::{Error, Result};
use crate::model::{Direction, SoundSourceEstimate, Timestamp};
use crate::par::Execution;

/// Smallest squared noise-subspace projection; caps pseudospectrum values.
const MIN_PROJECTION: f64 = 1e-14;

/// MUSIC scan values over a uniform azimuth grid starting at -180°.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudospectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Pseudospectrum {
    /// Grid azimuth of the largest value (lowest azimuth on ties).
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.grid[best]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn median(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            0.0
        } else if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    /// Renders `azimuth,value` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        for (a, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{a},{v}\n"));
        }
        out
    }
}

fn azimuth_grid(config: &DoaConfig) -> Vec<f64> {
    (0..config.grid_len())
        .map(|i| -180.0 + i as f64 * config.grid_step)
        .collect()
}

/// MUSIC estimator for one array and DOA configuration.
///
/// Steering vectors for every (band bin, grid azimuth) pair are tabulated at
/// construction, so repeated frames only pay for the STFT, the eigensolves
/// and one matrix product per bin.
pub struct MusicEstimator {
    array: MicArrayGeometry,
    config: DoaConfig,
    grid: Vec<f64>,
    bins: Vec<(usize, f64)>,
    /// One `M × G` matrix per band bin; column `g` is the steering vector at `grid[g]`.
    steering: Vec<DMatrix<C64>>,
    stft: Stft,
}

impl MusicEstimator {
    pub fn new(array: &MicArrayGeometry, config: &DoaConfig) -> Result<Self> {
        array.validate()?;
        config.validate(array.len())?;
        let grid = azimuth_grid(config);
        let bins = band_bins(config);
        if bins.is_empty() {
            return Err(Error::config("analysis band contains no FFT bins"));
        }
        let steering = bins
            .iter()
            .map(|&(_, f)| {
                let cols: Vec<_> = grid
                    .iter()
                    .map(|&az| steering_vector(array, az, f))
                    .collect();
                DMatrix::from_columns(&cols)
            })
            .collect();
        Ok(MusicEstimator {
            array: array.clone(),
            config: config.clone(),
            grid,
            bins,
            steering,
            stft: Stft::new(config.fft_size, config.hop),
        })
    }

    pub fn config(&self) -> &DoaConfig {
        &self.config
    }

    pub fn array(&self) -> &MicArrayGeometry {
        &self.array
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn covariance(&self, audio: &MultichannelAudio) -> Result<Covariances> {
        if audio.channel_count() != self.array.len() {
            return Err(Error::invalid(format!(
                "audio has {} channels, array has {} microphones",
                audio.channel_count(),
                self.array.len()
            )));
        }
        if audio.sample_rate != self.config.sample_rate {
            return Err(Error::invalid(format!(
                "audio sample rate {} differs from configured {}",
                audio.sample_rate, self.config.sample_rate
            )));
        }
        self.stft.covariances(audio, &self.bins)
    }

    /// Narrowband MUSIC spectrum of every bin, in bin order.
    pub fn bin_spectra(&self, cov: &Covariances, exec: Execution) -> Result<Vec<Vec<f64>>> {
        if cov.bins.len() != self.bins.len()
            || cov.bins.iter().zip(&self.bins).any(|(c, b)| c.bin != b.0)
        {
            return Err(Error::invalid(
                "covariances were computed for a different band",
            ));
        }
        let m = self.array.len();
        let noise_dim = m - self.config.n_sources;
        let per_bin = exec.map_range(cov.bins.len(), |i| {
            narrowband(&cov.bins[i], &self.steering[i], noise_dim)
        });
        per_bin.into_iter().collect()
    }

    /// Broadband pseudospectrum: arithmetic mean of the per-bin spectra.
    ///
    /// Bins may be processed concurrently but are summed in ascending bin
    /// order, so the result is bitwise identical for every [`Execution`].
    pub fn pseudospectrum(&self, cov: &Covariances, exec: Execution) -> Result<Pseudospectrum> {
        let spectra = self.bin_spectra(cov, exec)?;
        let mut values = vec![0.0; self.grid.len()];
        for s in &spectra {
            for (acc, v) in values.iter_mut().zip(s) {
                *acc += v;
            }
        }
        let inv = 1.0 / spectra.len() as f64;
        values.iter_mut().for_each(|v| *v *= inv);
        Ok(Pseudospectrum {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Audio window to pseudospectrum to detected sources.
    pub fn localize(
        &self,
        audio: &MultichannelAudio,
        now: Timestamp,
        exec: Execution,
    ) -> Result<(Pseudospectrum, Vec<SoundSourceEstimate>)> {
        let cov = self.covariance(audio)?;
        let spectrum = self.pseudospectrum(&cov, exec)?;
        let found = detect_sources(&spectrum, &self.config, now);
        Ok((spectrum, found))
    }
}

fn narrowband(cov: &BinCovariance, steering: &DMatrix<C64>, noise_dim: usize) -> Result<Vec<f64>> {
    if cov
        .matrix
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::Numeric(format!(
            "non-finite covariance at bin {}",
            cov.bin
        )));
    }
    let eig = cov.matrix.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numeric(format!(
            "eigendecomposition failed at bin {}",
            cov.bin
        )));
    }
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let noise = DMatrix::from_columns(
        &order[..noise_dim]
            .iter()
            .map(|&i| eig.eigenvectors.column(i))
            .collect::<Vec<_>>(),
    );
    let proj = noise.adjoint() * steering;
    Ok(proj
        .column_iter()
        .map(|c| 1.0 / c.norm_squared().max(MIN_PROJECTION))
        .collect())
}

/// Convenience wrapper: per-bin covariances to broadband pseudospectrum.
pub fn music_pseudospectrum(
    cov: &Covariances,
    array: &MicArrayGeometry,
    config: &DoaConfig,
) -> Result<Pseudospectrum> {
    MusicEstimator::new(array, config)?.pseudospectrum(cov, Execution::default())
}

/// Picks above-threshold local maxima of a pseudospectrum.
///
/// A peak is a run of equal values (usually a single grid point) whose two
/// circular neighbours are strictly lower; a run is reported at its lowest
/// azimuth. Peaks below `peak_threshold × median` are dropped, the rest are
/// sorted by descending value and truncated to `n_sources`.
pub fn detect_sources(
    spectrum: &Pseudospectrum,
    config: &DoaConfig,
    now: Timestamp,
) -> Vec<SoundSourceEstimate> {
    let floor = config.peak_threshold * spectrum.median();
    let mut peaks: Vec<(f64, f64)> = find_peaks(&spectrum.values)
        .into_iter()
        .filter(|&(_, v)| v >= floor)
        .map(|(run, v)| {
            let az = run
                .iter()
                .map(|&i| spectrum.grid[i])
                .fold(f64::INFINITY, f64::min);
            (az, v)
        })
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    peaks.truncate(config.n_sources);
    peaks
        .into_iter()
        .map(|(az, power)| SoundSourceEstimate {
            direction: Direction::from_azimuth(az).expect("grid azimuths are finite"),
            power,
            timestamp: now,
        })
        .collect()
}

/// Circular plateau-aware local maxima: `(indices of the run, value)`.
fn find_peaks(values: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    // start at the beginning of some run so no run straddles the scan start
    let Some(start) = (0..n).find(|&i| values[i] != values[(i + n - 1) % n]) else {
        return Vec::new();
    };
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        let first = (start + i) % n;
        let v = values[first];
        let mut run = vec![first];
        let mut j = i + 1;
        while j < n && values[(start + j) % n] == v {
            run.push((start + j) % n);
            j += 1;
        }
        let left = values[(first + n - 1) % n];
        let right = values[(start + j) % n];
        if left < v && right < v {
            peaks.push((run, v));
        }
        i = j;
    }
    peaks
}
