//! MUSIC direction-of-arrival estimation for a planar microphone array.
//!
//! A frame of multichannel audio is split into Hann-windowed snapshots, each
//! band bin gets a spatial covariance, and the noise subspace of every bin is
//! scanned against far-field steering vectors. Per-bin spectra are averaged
//! into one broadband pseudospectrum whose peaks become
//! [`SoundSourceEstimate`](crate::model::SoundSourceEstimate)s.

mod covariance;
mod music;
mod steering;

pub use covariance::{band_bins, compute_covariance, BinCovariance, Covariances};
pub use music::{detect_sources, music_pseudospectrum, MusicEstimator, Pseudospectrum};
pub use steering::{plane_wave_delay, steering_vector, C64};
