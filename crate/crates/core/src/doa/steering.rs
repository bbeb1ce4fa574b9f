use std::f64::consts::PI;

use nalgebra::{Complex, DVector};

use crate::config::MicArrayGeometry;
use crate::model::Vec2;

pub type C64 = Complex<f64>;

/// Far-field arrival delay at a microphone relative to the array origin, seconds.
///
/// A microphone displaced towards the source hears the wavefront early, so
/// its delay is negative.
#[inline]
pub fn plane_wave_delay(mic: &Vec2, azimuth_deg: f64, speed_of_sound: f64) -> f64 {
    let a = azimuth_deg.to_radians();
    -(mic.x * a.cos() + mic.y * a.sin()) / speed_of_sound
}

/// Unit-norm plane-wave response of the array to a source at `azimuth_deg`
/// at frequency `freq` (Hz): entry `m` is `exp(-j 2π f τ_m) / √M`.
pub fn steering_vector(array: &MicArrayGeometry, azimuth_deg: f64, freq: f64) -> DVector<C64> {
    debug_assert!(freq > 0.0);
    let scale = 1.0 / (array.len() as f64).sqrt();
    DVector::from_iterator(
        array.len(),
        array.mic_positions.iter().map(|p| {
            let tau = plane_wave_delay(p, azimuth_deg, array.speed_of_sound);
            C64::from_polar(scale, -2.0 * PI * freq * tau)
        }),
    )
}
