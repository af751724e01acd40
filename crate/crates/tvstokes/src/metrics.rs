//! Quality metrics, reproducible Gaussian noise, and synthetic fixtures.
//!
//! The noise generator is deliberately self-contained and portable: sample
//! `index` of stream `seed` is produced by the splitmix64 finalizer applied to
//! `seed + (counter+1)·0x9E3779B97F4A7C15`, mapped to `(0,1)` with 53 bits,
//! and turned Gaussian by the Box–Muller transform (each sample consumes two
//! counters). Identical `(seed, index)` pairs give bit-identical samples on
//! every platform, so noisy fixtures reproduce exactly.

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Settings for peak-based metrics.
#[derive(Debug, Clone, Copy)]
pub struct MetricConfig {
    /// Peak signal value (255 for 8-bit images).
    pub peak: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { peak: 255.0 }
    }
}

fn check_same_shape(u: &ScalarField, g: &ScalarField) -> Result<()> {
    if !u.same_shape(g) {
        return Err(Error::DimensionMismatch {
            expected: g.shape(),
            found: u.shape(),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio `10·log₁₀(peak²/MSE)` in decibels.
///
/// Identical inputs have zero MSE; that case returns `f64::INFINITY` so it
/// stays distinguishable from any finite ratio.
pub fn psnr(u: &ScalarField, g: &ScalarField, cfg: &MetricConfig) -> Result<f64> {
    check_same_shape(u, g)?;
    if !(cfg.peak > 0.0 && cfg.peak.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "peak must be positive and finite, got {}",
            cfg.peak
        )));
    }
    let mse = u
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        / u.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (cfg.peak * cfg.peak / mse).log10())
}

/// Root-mean-square difference against the reference image.
pub fn noise_level(u: &ScalarField, g: &ScalarField) -> Result<f64> {
    check_same_shape(u, g)?;
    let ms = u
        .as_slice()
        .iter()
        .zip(g.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        / u.len() as f64;
    Ok(ms.sqrt())
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn unit_open(seed: u64, counter: u64) -> f64 {
    let bits = mix64(seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)));
    // 53 mantissa bits, offset by half a step: strictly inside (0, 1)
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard normal sample `index` of stream `seed` (counter-based, stateless).
pub fn standard_normal(seed: u64, index: u64) -> f64 {
    let u1 = unit_open(seed, 2 * index);
    let u2 = unit_open(seed, 2 * index + 1);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Adds i.i.d. Gaussian noise `σ·Z` to the image, pixel `q` drawing sample
/// `q` of stream `seed`. With `clip`, the result is clamped to `[0, peak]`.
pub fn add_gaussian_noise(
    g: &ScalarField,
    sigma: f64,
    seed: u64,
    clip: bool,
    peak: f64,
) -> Result<ScalarField> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be positive and finite, got {sigma}"
        )));
    }
    if clip && !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "peak must be positive and finite to clip, got {peak}"
        )));
    }
    let (h, w) = g.shape();
    let mut out = Vec::with_capacity(h * w);
    for (q, &v) in g.as_slice().iter().enumerate() {
        let mut x = v + sigma * standard_normal(seed, q as u64);
        if clip {
            x = x.clamp(0.0, peak);
        }
        out.push(x);
    }
    ScalarField::from_vec(h, w, out)
}

/// Synthetic test image: a smooth two-way ramp with a brighter disk.
///
/// Values stay within [40, 245], so there is headroom for noise under an
/// 8-bit peak. The disk edge is sharp; everything else is smooth.
pub fn ramp_disk_image(height: usize, width: usize) -> ScalarField {
    let (hc, wc) = ((height - 1) as f64 / 2.0, (width - 1) as f64 / 2.0);
    let radius = 0.22 * height.min(width) as f64;
    ScalarField::from_fn(height, width, |i, j| {
        let ramp = 40.0
            + 90.0 * i as f64 / (height - 1) as f64
            + 45.0 * j as f64 / (width - 1) as f64;
        let (di, dj) = (i as f64 - hc, j as f64 - wc);
        if di * di + dj * dj <= radius * radius {
            ramp + 70.0
        } else {
            ramp
        }
    })
}
