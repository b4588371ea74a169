//! Seeded synthetic test signals: speech-like amplitude-modulated tones
//! with pauses, filtered noise beds, and exponentially decaying impulse
//! responses. Everything at the canonical 16 kHz rate, fully determined
//! by the seed, loud enough that no generator output is silent.

use crate::audio::{AudioClip, CANONICAL_SAMPLE_RATE};
use crate::seed::rng_for;
use rand::Rng;
use std::f64::consts::PI;

fn total_samples(duration_s: f64) -> usize {
    (duration_s * CANONICAL_SAMPLE_RATE as f64).round() as usize
}

/// A harmonic tone chopped into syllable-length bursts with silent gaps,
/// so activity masks see both active and inactive frames.
pub fn speech_like(duration_s: f64, seed: u64) -> AudioClip {
    let rate = CANONICAL_SAMPLE_RATE as f64;
    let total = total_samples(duration_s);
    let mut rng = rng_for(seed, 0);
    let f0: f64 = rng.random_range(110.0..220.0);
    let mut samples = vec![0.0f64; total];
    let mut pos = 0usize;
    loop {
        if pos >= total {
            break;
        }
        let burst = (rng.random_range(0.25..0.45) * rate) as usize;
        let gap = (rng.random_range(0.08..0.20) * rate) as usize;
        let end = (pos + burst).min(total);
        let span = (end - pos) as f64;
        for i in pos..end {
            let t = (i - pos) as f64 / rate;
            let env = (PI * (i - pos) as f64 / span).sin();
            let tone = (2.0 * PI * f0 * t).sin()
                + 0.5 * (2.0 * PI * 2.0 * f0 * t).sin()
                + 0.25 * (2.0 * PI * 3.0 * f0 * t).sin();
            samples[i] = 0.4 * env * tone / 1.75;
        }
        pos = end + gap;
    }
    AudioClip::new(samples, CANONICAL_SAMPLE_RATE).expect("generated signal is valid")
}

/// Low-passed uniform noise with a seeded cutoff; active in every frame.
pub fn noise_like(duration_s: f64, seed: u64) -> AudioClip {
    let total = total_samples(duration_s);
    let mut rng = rng_for(seed, 1);
    let alpha: f64 = rng.random_range(0.1..0.6);
    let mut state = 0.0f64;
    let mut samples = Vec::with_capacity(total);
    for _ in 0..total {
        let white: f64 = rng.random_range(-1.0..1.0);
        state += alpha * (white - state);
        samples.push(0.5 * state);
    }
    AudioClip::new(samples, CANONICAL_SAMPLE_RATE).expect("generated signal is valid")
}

/// A unit direct path followed by a noise tail whose energy falls 60 dB
/// over `rt60_ms`, padded with enough tail to integrate the decay.
pub fn impulse_response(rt60_ms: f64, seed: u64) -> AudioClip {
    let rate = CANONICAL_SAMPLE_RATE as f64;
    let duration_s = (rt60_ms / 1000.0 * 1.5).max(0.1);
    let total = total_samples(duration_s).max(2);
    let tau = rt60_ms / 1000.0 * rate;
    let mut rng = rng_for(seed, 2);
    let mut samples = Vec::with_capacity(total);
    samples.push(1.0);
    for i in 1..total {
        let amp = 10f64.powf(-60.0 * i as f64 / tau / 20.0);
        samples.push(0.5 * amp * rng.random_range(-1.0f64..1.0));
    }
    AudioClip::new(samples, CANONICAL_SAMPLE_RATE).expect("generated signal is valid")
}
