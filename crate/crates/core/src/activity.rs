//! Frame-level energy analysis and activity masks.
//!
//! Activity is decided per non-overlapping frame, relative to the loudest
//! frame of the same clip. The relative threshold makes masks invariant to
//! global gain, which the segmental-SNR gain solver relies on.

use crate::audio::{AudioClip, Level};
use crate::error::{Error, Result};

pub const DEFAULT_FRAME_MS: u32 = 20;
pub const DEFAULT_REL_THRESHOLD_DB: f64 = -40.0;
pub const DEFAULT_SPEECH_PROB_THRESHOLD: f64 = 0.5;

/// Per-frame activity flags; the trailing partial frame is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityMask {
    frame_ms: u32,
    flags: Vec<bool>,
}

impl ActivityMask {
    pub fn frame_ms(&self) -> u32 {
        self.frame_ms
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn any_active(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }
}

pub(crate) fn samples_per_frame(sample_rate: u32, frame_ms: u32) -> usize {
    (sample_rate as u64 * frame_ms as u64 / 1000) as usize
}

/// Number of samples per frame for a clip; errors if the clip is shorter
/// than one full frame.
fn frame_len(clip: &AudioClip, frame_ms: u32) -> Result<usize> {
    if frame_ms == 0 {
        return Err(Error::InvalidArgument("frame_ms must be positive".into()));
    }
    let len = samples_per_frame(clip.sample_rate(), frame_ms);
    if len == 0 {
        return Err(Error::InvalidArgument(format!(
            "frame of {frame_ms} ms is shorter than one sample at {} Hz",
            clip.sample_rate()
        )));
    }
    if clip.len() < len {
        return Err(Error::InvalidArgument(format!(
            "clip of {} samples is shorter than one {frame_ms} ms frame ({len} samples)",
            clip.len()
        )));
    }
    Ok(len)
}

/// Mean power (mean of squared samples) per full frame.
fn frame_powers(clip: &AudioClip, frame_ms: u32) -> Result<Vec<f64>> {
    let len = frame_len(clip, frame_ms)?;
    Ok(clip
        .samples()
        .chunks_exact(len)
        .map(crate::audio::mean_square)
        .collect())
}

/// Per-frame RMS levels in dBFS; silent frames carry the silent marker.
pub fn frame_rms_db(clip: &AudioClip, frame_ms: u32) -> Result<Vec<Level>> {
    Ok(frame_powers(clip, frame_ms)?
        .into_iter()
        .map(|p| if p == 0.0 { Level::Silent } else { Level::Dbfs(10.0 * p.log10()) })
        .collect())
}

/// Marks a frame active when its RMS is within `rel_threshold_db` (a
/// negative number) of the clip's loudest frame. Silent frames are never
/// active; an all-silent clip yields an all-false mask.
pub fn active_mask(clip: &AudioClip, frame_ms: u32, rel_threshold_db: f64) -> Result<ActivityMask> {
    let powers = frame_powers(clip, frame_ms)?;
    let max_power = powers.iter().cloned().fold(0.0f64, f64::max);
    // Threshold comparison stays in the linear power domain so that scaling
    // every sample by the same factor cannot flip a frame.
    let floor = max_power * 10f64.powf(rel_threshold_db / 10.0);
    let flags = powers.iter().map(|&p| p > 0.0 && p >= floor).collect();
    Ok(ActivityMask { frame_ms, flags })
}

/// Logical AND of two masks; lengths may differ and the result is truncated
/// to the shorter one.
pub fn intersect(a: &ActivityMask, b: &ActivityMask) -> Result<ActivityMask> {
    if a.frame_ms != b.frame_ms {
        return Err(Error::InvalidArgument(format!(
            "mask frame sizes differ: {} ms vs {} ms",
            a.frame_ms, b.frame_ms
        )));
    }
    let flags = a.flags.iter().zip(&b.flags).map(|(&x, &y)| x && y).collect();
    Ok(ActivityMask { frame_ms: a.frame_ms, flags })
}

/// Outcome of screening one noise clip against an external speech detector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechScreenResult {
    pub clip_id: String,
    pub speech_probability: f64,
    pub keep: bool,
}

/// Keep a noise clip only when its speech probability is strictly below the
/// threshold. The probability comes from an external detector or a sidecar
/// file; this is the policy, not the detector.
pub fn screen_noise_clip(
    clip_id: &str,
    speech_probability: f64,
    threshold: f64,
) -> Result<SpeechScreenResult> {
    if !(0.0..=1.0).contains(&speech_probability) {
        return Err(Error::InvalidArgument(format!(
            "speech probability {speech_probability} outside [0, 1] for clip {clip_id}"
        )));
    }
    Ok(SpeechScreenResult {
        clip_id: clip_id.to_string(),
        speech_probability,
        keep: speech_probability < threshold,
    })
}

/// Parses a speech-probability sidecar: delimited text with header
/// `clip_id,speech_prob`, one row per noise clip.
pub fn load_speech_probs(path: &std::path::Path) -> Result<std::collections::HashMap<String, f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["clip_id", "speech_prob"] {
        return Err(Error::Data(format!(
            "speech-probability sidecar {} must have header clip_id,speech_prob",
            path.display()
        )));
    }
    let mut out = std::collections::HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let id = record.get(0).unwrap_or_default().to_string();
        let prob: f64 = record
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::Data(format!("bad speech_prob for clip {id}")))?;
        out.insert(id, prob);
    }
    Ok(out)
}
