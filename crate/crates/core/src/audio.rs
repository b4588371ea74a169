//! Mono audio buffers and dBFS level arithmetic.
//!
//! Everything downstream (masking, mixing, the harness) works on
//! [`AudioClip`] values. Levels are expressed in dBFS with amplitude 1.0 as
//! full scale; an all-zero signal has no finite level and is carried as the
//! explicit [`Level::Silent`] marker so callers must branch rather than
//! propagate `-inf`.

use crate::error::{Error, Result};

/// Sample rate every pipeline stage expects. Inputs at other rates are
/// rejected, not resampled.
pub const CANONICAL_SAMPLE_RATE: u32 = 16_000;

/// Peak amplitude allowed after RMS normalization; leaves headroom so that
/// 16-bit quantization cannot clip.
pub const HEADROOM_PEAK: f64 = 0.99;

/// A mono sample buffer with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    /// All-zero clip of `len` samples.
    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Largest absolute sample value; 0.0 for an empty clip.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    /// True when every sample is exactly zero (or the clip is empty).
    pub fn is_silent(&self) -> bool {
        self.samples.iter().all(|&s| s == 0.0)
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Signal level relative to digital full scale (amplitude 1.0 = 0 dBFS).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    /// All-zero signal; no finite dBFS value exists.
    Silent,
    /// Finite level in dBFS. Clip-safe signals measure at most 0.
    Dbfs(f64),
}

impl Level {
    pub fn db(self) -> Option<f64> {
        match self {
            Level::Silent => None,
            Level::Dbfs(v) => Some(v),
        }
    }

    pub fn is_silent(self) -> bool {
        matches!(self, Level::Silent)
    }
}

/// Linear amplitude multiplier, non-negative by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain(f64);

impl Gain {
    pub const UNITY: Gain = Gain(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gain must be finite and non-negative, got {value}"
            )));
        }
        Ok(Gain(value))
    }

    /// Gain from decibels: `10^(db/20)`.
    pub fn from_db(db: f64) -> Self {
        Gain(10f64.powf(db / 20.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `20*log10(value)`; `None` for zero gain.
    pub fn db(self) -> Option<f64> {
        if self.0 > 0.0 {
            Some(20.0 * self.0.log10())
        } else {
            None
        }
    }
}

/// RMS level of the clip in dBFS: `20*log10(sqrt(mean(x^2)))`.
///
/// An all-zero clip yields [`Level::Silent`]; an empty clip is an error.
pub fn rms_dbfs(clip: &AudioClip) -> Result<Level> {
    if clip.is_empty() {
        return Err(Error::InvalidArgument("rms of an empty clip".into()));
    }
    let mean_sq = mean_square(clip.samples());
    if mean_sq == 0.0 {
        Ok(Level::Silent)
    } else {
        Ok(Level::Dbfs(10.0 * mean_sq.log10()))
    }
}

/// Mean of squared samples. Shared by level and SNR math.
pub(crate) fn mean_square(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// Multiplies every sample by `g`. No clamping: overload handling is the
/// caller's explicit step.
pub fn apply_gain(clip: &AudioClip, g: Gain) -> AudioClip {
    AudioClip {
        samples: clip.samples.iter().map(|s| s * g.value()).collect(),
        sample_rate: clip.sample_rate,
    }
}

/// Scales the clip so its RMS hits `target_dbfs`, unless that would push the
/// peak above `headroom_peak`, in which case the gain is reduced so the peak
/// lands exactly on `headroom_peak` and the clipped flag is set.
///
/// Returns the scaled clip, the gain actually applied, and the clipped flag.
pub fn normalize_to_dbfs(
    clip: &AudioClip,
    target_dbfs: f64,
    headroom_peak: f64,
) -> Result<(AudioClip, Gain, bool)> {
    if clip.is_empty() {
        return Err(Error::InvalidArgument("normalize of an empty clip".into()));
    }
    let current = match rms_dbfs(clip)? {
        Level::Silent => return Err(Error::SilentSignal("cannot normalize an all-zero clip".into())),
        Level::Dbfs(db) => db,
    };
    let mut gain = 10f64.powf((target_dbfs - current) / 20.0);
    let mut clipped = false;
    let peak = clip.peak();
    if peak * gain > headroom_peak {
        gain = headroom_peak / peak;
        clipped = true;
    }
    let gain = Gain::new(gain)?;
    Ok((apply_gain(clip, gain), gain, clipped))
}
