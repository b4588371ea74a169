//! Noisy-speech synthesis: bed assembly, segmental SNR, gain solving,
//! reverb convolution, and the full mixing pipeline.
//!
//! Segmental SNR is measured only over frames where speech and noise are
//! both active, so leading silence or gaps never dilute the ratio. The
//! noise gain that hits a target SNR has a closed form because activity
//! masks do not move under global gain.

use crate::activity::{active_mask, intersect, samples_per_frame, ActivityMask, DEFAULT_REL_THRESHOLD_DB};
use crate::audio::{apply_gain, normalize_to_dbfs, rms_dbfs, AudioClip, Gain, HEADROOM_PEAK};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_MIX_DURATION_S: f64 = 30.0;
pub const DEFAULT_SPEECH_GAP_MS: u32 = 200;

/// Everything needed to rebuild one noisy clip bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixRecipe {
    pub recipe_id: String,
    pub clean_clip_ids: Vec<String>,
    pub noise_clip_ids: Vec<String>,
    pub target_snr_db: f64,
    pub target_rms_dbfs: f64,
    pub duration_s: f64,
    pub rir_id: Option<String>,
    pub seed: u64,
}

/// A room impulse response plus its estimated reverberation time.
#[derive(Debug, Clone)]
pub struct RirMeta {
    pub rir_id: String,
    pub impulse: AudioClip,
    pub rt60_ms: f64,
}

#[derive(Debug, Clone)]
pub struct MixResult {
    pub mixture: AudioClip,
    pub clean_ref: AudioClip,
    pub noise_ref: AudioClip,
    pub achieved_snr_db: f64,
    pub achieved_rms_dbfs: f64,
    pub clipped: bool,
}

/// Frame size and inter-utterance gap used by the mixer.
#[derive(Debug, Clone, Copy)]
pub struct MixParams {
    pub frame_ms: u32,
    pub speech_gap_ms: u32,
}

impl Default for MixParams {
    fn default() -> Self {
        MixParams { frame_ms: crate::activity::DEFAULT_FRAME_MS, speech_gap_ms: DEFAULT_SPEECH_GAP_MS }
    }
}

fn joint_mask(speech: &AudioClip, noise: &AudioClip, frame_ms: u32) -> Result<ActivityMask> {
    if speech.sample_rate() != noise.sample_rate() {
        return Err(Error::InvalidArgument(format!(
            "sample rates differ: speech {} Hz vs noise {} Hz",
            speech.sample_rate(),
            noise.sample_rate()
        )));
    }
    let ms = active_mask(speech, frame_ms, DEFAULT_REL_THRESHOLD_DB)?;
    let mn = active_mask(noise, frame_ms, DEFAULT_REL_THRESHOLD_DB)?;
    intersect(&ms, &mn)
}

/// Mean power of the samples inside active frames.
fn masked_mean_power(clip: &AudioClip, mask: &ActivityMask, frame_len: usize) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, &on) in mask.flags().iter().enumerate() {
        if on {
            let seg = &clip.samples()[i * frame_len..(i + 1) * frame_len];
            sum += seg.iter().map(|s| s * s).sum::<f64>();
            count += frame_len;
        }
    }
    if count == 0 { 0.0 } else { sum / count as f64 }
}

fn joint_powers(speech: &AudioClip, noise: &AudioClip, frame_ms: u32) -> Result<(f64, f64)> {
    let joint = joint_mask(speech, noise, frame_ms)?;
    if !joint.any_active() {
        return Err(Error::UndefinedSnr);
    }
    let flen = samples_per_frame(speech.sample_rate(), frame_ms);
    let ps = masked_mean_power(speech, &joint, flen);
    let pn = masked_mean_power(noise, &joint, flen);
    Ok((ps, pn))
}

/// Segmental SNR in dB, measured over frames active in both signals.
/// Errors with `UndefinedSnr` when no frame is active in both.
pub fn segmental_snr_db(speech: &AudioClip, noise: &AudioClip, frame_ms: u32) -> Result<f64> {
    let (ps, pn) = joint_powers(speech, noise, frame_ms)?;
    Ok(10.0 * (ps / pn).log10())
}

/// The gain to apply to `noise` so the segmental SNR against `speech`
/// equals `target_snr_db`. Exact, not iterative: masks are gain-invariant,
/// so scaling noise by g scales its joint-frame power by g^2.
pub fn noise_gain_for_snr(
    speech: &AudioClip,
    noise: &AudioClip,
    target_snr_db: f64,
    frame_ms: u32,
) -> Result<Gain> {
    if !target_snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("target SNR {target_snr_db} is not finite")));
    }
    let (ps, pn) = joint_powers(speech, noise, frame_ms)?;
    Gain::new((ps / (pn * 10f64.powf(target_snr_db / 10.0))).sqrt())
}

/// Concatenates source clips into a bed of exactly `duration_s` seconds.
/// `gap_ms` of silence separates consecutive utterances. With
/// `loop_if_short` the source list repeats from the start; otherwise
/// running out of material is an error. The final clip is truncated to the
/// exact target length.
pub fn build_long_clip(
    sources: &[AudioClip],
    duration_s: f64,
    gap_ms: u32,
    loop_if_short: bool,
) -> Result<AudioClip> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("no source clips given".into()));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::InvalidArgument(format!("duration {duration_s} s must be positive")));
    }
    let rate = sources[0].sample_rate();
    if sources.iter().any(|c| c.sample_rate() != rate) {
        return Err(Error::InvalidArgument("source clips have mixed sample rates".into()));
    }
    let target = (duration_s * rate as f64).round() as usize;
    let gap = samples_per_frame(rate, gap_ms);
    if loop_if_short && sources.iter().all(|c| c.is_empty()) {
        return Err(Error::InsufficientMaterial("all source clips are empty".into()));
    }

    let mut out: Vec<f64> = Vec::with_capacity(target);
    'fill: loop {
        for src in sources {
            if out.len() >= target {
                break 'fill;
            }
            if !out.is_empty() {
                let pad = gap.min(target - out.len());
                out.extend(std::iter::repeat(0.0).take(pad));
                if out.len() >= target {
                    break 'fill;
                }
            }
            let take = src.len().min(target - out.len());
            out.extend_from_slice(&src.samples()[..take]);
        }
        if out.len() >= target {
            break;
        }
        if !loop_if_short {
            return Err(Error::InsufficientMaterial(format!(
                "sources cover {:.2} s of a {:.2} s bed",
                out.len() as f64 / rate as f64,
                duration_s
            )));
        }
    }
    AudioClip::new(out, rate)
}

/// Linear convolution of the clip with a room impulse response, truncated
/// to the input length and rescaled so overall RMS is unchanged.
pub fn convolve_rir(clip: &AudioClip, rir: &RirMeta) -> Result<AudioClip> {
    if rir.impulse.is_empty() {
        return Err(Error::InvalidArgument(format!("impulse response {} is empty", rir.rir_id)));
    }
    if rir.impulse.sample_rate() != clip.sample_rate() {
        return Err(Error::InvalidArgument(format!(
            "impulse response {} rate {} Hz does not match clip rate {} Hz",
            rir.rir_id,
            rir.impulse.sample_rate(),
            clip.sample_rate()
        )));
    }
    if clip.is_silent() {
        return Ok(clip.clone());
    }
    if rir.impulse.is_silent() {
        return Err(Error::InvalidArgument(format!("impulse response {} has no energy", rir.rir_id)));
    }

    let mut wet = convolve_full(clip.samples(), rir.impulse.samples());
    wet.truncate(clip.len());

    let dry_power = crate::audio::mean_square(clip.samples());
    let wet_power = crate::audio::mean_square(&wet);
    if wet_power == 0.0 {
        return Err(Error::SilentSignal(format!(
            "convolution with {} produced a silent clip",
            rir.rir_id
        )));
    }
    let scale = (dry_power / wet_power).sqrt();
    for s in &mut wet {
        *s *= scale;
    }
    AudioClip::new(wet, clip.sample_rate())
}

fn convolve_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    // Direct form for small kernels; FFT overlap is not worth it there.
    if a.len().saturating_mul(b.len()) <= 1 << 20 {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    convolve_fft(a, b)
}

fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(n, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fb.resize(n, Complex::new(0.0, 0.0));

    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    fa[..out_len].iter().map(|c| c.re / n as f64).collect()
}

/// Reverberation time estimated from the impulse response by backward
/// integration of its energy decay curve: the -5 dB to -25 dB slope,
/// extrapolated by a factor of three to the full 60 dB range.
pub fn estimate_rt60_ms(impulse: &AudioClip) -> Result<f64> {
    if impulse.is_empty() || impulse.is_silent() {
        return Err(Error::SilentSignal("impulse response has no energy".into()));
    }
    let rate = impulse.sample_rate() as f64;
    let mut tail: Vec<f64> = vec![0.0; impulse.len()];
    let mut acc = 0.0;
    for (i, &s) in impulse.samples().iter().enumerate().rev() {
        acc += s * s;
        tail[i] = acc;
    }
    let total = tail[0];
    let decay_db = |i: usize| 10.0 * (tail[i] / total).log10();

    let first_at = |db: f64| (0..impulse.len()).find(|&i| decay_db(i) <= db);
    let i5 = first_at(-5.0)
        .ok_or_else(|| Error::InvalidArgument("impulse never decays 5 dB".into()))?;
    let i25 = first_at(-25.0)
        .ok_or_else(|| Error::InvalidArgument("impulse too short to reach -25 dB".into()))?;
    Ok(3.0 * (i25 - i5) as f64 / rate * 1000.0)
}

/// Runs the whole recipe: build beds, reverberate, solve the noise gain,
/// sum, and level the mixture. The references receive the same global gain
/// as the mixture, so `mixture = clean_ref + noise_ref` holds sample by
/// sample and the achieved SNR can be re-measured from the outputs.
pub fn mix(
    recipe: &MixRecipe,
    clean: &[AudioClip],
    noise: &[AudioClip],
    rir: Option<&RirMeta>,
    params: &MixParams,
) -> Result<MixResult> {
    mix_inner(recipe, clean, noise, rir, params).map_err(|e| e.in_recipe(&recipe.recipe_id))
}

fn mix_inner(
    recipe: &MixRecipe,
    clean: &[AudioClip],
    noise: &[AudioClip],
    rir: Option<&RirMeta>,
    params: &MixParams,
) -> Result<MixResult> {
    if !recipe.target_rms_dbfs.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target RMS {} dBFS is not finite",
            recipe.target_rms_dbfs
        )));
    }

    let mut speech_bed = build_long_clip(clean, recipe.duration_s, params.speech_gap_ms, false)?;
    let noise_bed = build_long_clip(noise, recipe.duration_s, 0, true)?;
    if let Some(r) = rir {
        speech_bed = convolve_rir(&speech_bed, r)?;
    }

    let noise_gain = noise_gain_for_snr(&speech_bed, &noise_bed, recipe.target_snr_db, params.frame_ms)?;
    let scaled_noise = apply_gain(&noise_bed, noise_gain);

    let raw: Vec<f64> = speech_bed
        .samples()
        .iter()
        .zip(scaled_noise.samples())
        .map(|(s, n)| s + n)
        .collect();
    let raw = AudioClip::new(raw, speech_bed.sample_rate())?;

    let (mixture, global, clipped) = normalize_to_dbfs(&raw, recipe.target_rms_dbfs, HEADROOM_PEAK)?;
    let clean_ref = apply_gain(&speech_bed, global);
    let noise_ref = apply_gain(&scaled_noise, global);

    let achieved_snr_db = segmental_snr_db(&clean_ref, &noise_ref, params.frame_ms)?;
    let achieved_rms_dbfs = match rms_dbfs(&mixture)? {
        crate::audio::Level::Dbfs(db) => db,
        crate::audio::Level::Silent => {
            return Err(Error::SilentSignal("mixture is silent".into()));
        }
    };

    Ok(MixResult { mixture, clean_ref, noise_ref, achieved_snr_db, achieved_rms_dbfs, clipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16_000).unwrap()
    }

    fn tone(len: usize, amp: f64, period: usize) -> AudioClip {
        clip((0..len).map(|i| amp * (2.0 * std::f64::consts::PI * i as f64 / period as f64).sin()).collect())
    }

    #[test]
    fn identical_signals_have_zero_snr() {
        let s = tone(16_000, 0.5, 160);
        assert!(segmental_snr_db(&s, &s, 20).unwrap().abs() < 1e-12);
    }

    #[test]
    fn snr_of_scaled_copy() {
        let s = tone(16_000, 0.5, 160);
        let n = apply_gain(&s, Gain::new(0.1).unwrap());
        let snr = segmental_snr_db(&s, &n, 20).unwrap();
        assert!((snr - 20.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_activity_is_undefined() {
        let mut speech = vec![0.0; 32_000];
        let mut noise = vec![0.0; 32_000];
        for i in 0..16_000 {
            speech[i] = 0.5;
            noise[i + 16_000] = 0.5;
        }
        let got = segmental_snr_db(&clip(speech), &clip(noise), 20);
        assert!(matches!(got, Err(Error::UndefinedSnr)));
    }

    #[test]
    fn gain_solver_exact_cases() {
        let s = clip(vec![0.5; 16_000]);
        let equal = clip(vec![0.5; 16_000]);
        assert!((noise_gain_for_snr(&s, &equal, 0.0, 20).unwrap().value() - 1.0).abs() < 1e-12);
        assert!((noise_gain_for_snr(&s, &equal, 20.0, 20).unwrap().value() - 0.1).abs() < 1e-12);

        let four_times = clip(vec![1.0; 16_000]);
        assert!((noise_gain_for_snr(&s, &four_times, 0.0, 20).unwrap().value() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn solved_gain_hits_target() {
        let mut rng = crate::seed::rng_for(7, 0);
        use rand::Rng;
        let s = clip((0..32_000).map(|_| rng.random_range(-0.5..0.5)).collect());
        let n = clip((0..32_000).map(|_| rng.random_range(-0.3..0.3)).collect());
        for target in [-5.0, 0.0, 12.5, 30.0] {
            let g = noise_gain_for_snr(&s, &n, target, 20).unwrap();
            let achieved = segmental_snr_db(&s, &apply_gain(&n, g), 20).unwrap();
            assert!((achieved - target).abs() < 0.05, "target {target} achieved {achieved}");
        }
    }

    #[test]
    fn bed_concatenation_without_loop() {
        let a = clip(vec![0.1; 320_000]);
        let b = clip(vec![0.2; 320_000]);
        let bed = build_long_clip(&[a, b], 30.0, 0, false).unwrap();
        assert_eq!(bed.len(), 480_000);
        assert!((bed.samples()[0] - 0.1).abs() < 1e-15);
        assert!((bed.samples()[320_000] - 0.2).abs() < 1e-15);
        assert!((bed.samples()[479_999] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn bed_gap_between_utterances() {
        let a = clip(vec![0.5; 1600]);
        // 1600 voiced, 3200 gap, 1600 voiced = 6400 samples = 0.4 s.
        let bed = build_long_clip(&[a.clone(), a], 0.4, 200, false).unwrap();
        assert_eq!(bed.len(), 6400);
        assert!((bed.samples()[1599] - 0.5).abs() < 1e-15);
        assert!(bed.samples()[1600].abs() < 1e-15);
        assert!(bed.samples()[4799].abs() < 1e-15);
        assert!((bed.samples()[4800] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bed_loops_noise() {
        let n = clip((0..160_000).map(|i| (i as f64 / 160_000.0) * 0.5).collect());
        let bed = build_long_clip(&[n], 30.0, 0, true).unwrap();
        assert_eq!(bed.len(), 480_000);
        assert!((bed.samples()[160_000] - bed.samples()[0]).abs() < 1e-15);
        assert!((bed.samples()[320_001] - bed.samples()[1]).abs() < 1e-15);
    }

    #[test]
    fn bed_rejects_empty_and_mixed_rates() {
        assert!(build_long_clip(&[], 1.0, 0, false).is_err());
        let a = AudioClip::new(vec![0.1; 100], 16_000).unwrap();
        let b = AudioClip::new(vec![0.1; 100], 8_000).unwrap();
        assert!(matches!(
            build_long_clip(&[a, b], 1.0, 0, true),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bed_exhaustion_is_material_error() {
        let a = clip(vec![0.5; 16_000]);
        assert!(matches!(
            build_long_clip(&[a], 30.0, 200, false),
            Err(Error::InsufficientMaterial(_))
        ));
    }

    #[test]
    fn unit_impulse_is_identity() {
        let x = tone(8000, 0.4, 160);
        let mut h = vec![0.0; 64];
        h[0] = 1.0;
        let rir = RirMeta { rir_id: "unit".into(), impulse: clip(h), rt60_ms: 0.0 };
        let wet = convolve_rir(&x, &rir).unwrap();
        for (a, b) in wet.samples().iter().zip(x.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn delayed_impulse_preserves_rms() {
        let x = tone(8000, 0.4, 160);
        let mut h = vec![0.0; 200];
        h[100] = 0.5;
        let rir = RirMeta { rir_id: "late".into(), impulse: clip(h), rt60_ms: 0.0 };
        let wet = convolve_rir(&x, &rir).unwrap();
        let dry_rms = rms_dbfs(&x).unwrap().db().unwrap();
        let wet_rms = rms_dbfs(&wet).unwrap().db().unwrap();
        assert!((dry_rms - wet_rms).abs() < 1e-9);
        // Shape survives: samples after the delay are a scaled copy.
        let c = wet.samples()[1000] / x.samples()[900];
        for i in (200..8000).step_by(37) {
            assert!((wet.samples()[i] - c * x.samples()[i - 100]).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_or_silent_impulse_rejected() {
        let x = tone(8000, 0.4, 160);
        let empty = RirMeta {
            rir_id: "e".into(),
            impulse: AudioClip::new(vec![], 16_000).unwrap(),
            rt60_ms: 0.0,
        };
        assert!(convolve_rir(&x, &empty).is_err());
        let silent = RirMeta { rir_id: "s".into(), impulse: clip(vec![0.0; 64]), rt60_ms: 0.0 };
        assert!(convolve_rir(&x, &silent).is_err());
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let mut rng = crate::seed::rng_for(11, 0);
        use rand::Rng;
        let a: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let direct = {
            let mut out = vec![0.0; a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let fast = convolve_fft(&a, &b);
        for (d, f) in direct.iter().zip(&fast) {
            assert!((d - f).abs() < 1e-9);
        }
    }

    #[test]
    fn rt60_of_synthetic_decay() {
        for rt60_s in [0.3, 0.6, 1.3] {
            let rate = 16_000.0;
            let len = (2.0 * rt60_s * rate) as usize;
            let h: Vec<f64> =
                (0..len).map(|i| 10f64.powf(-3.0 * i as f64 / (rate * rt60_s))).collect();
            let est = estimate_rt60_ms(&clip(h)).unwrap();
            let want = rt60_s * 1000.0;
            assert!((est - want).abs() / want < 0.05, "want {want} got {est}");
        }
    }

    #[test]
    fn rt60_of_unit_impulse_is_zero() {
        let mut h = vec![0.0; 100];
        h[0] = 1.0;
        assert_eq!(estimate_rt60_ms(&clip(h)).unwrap(), 0.0);
    }

    fn toy_recipe(snr: f64, rms: f64) -> MixRecipe {
        MixRecipe {
            recipe_id: "r0".into(),
            clean_clip_ids: vec!["c0".into()],
            noise_clip_ids: vec!["n0".into()],
            target_snr_db: snr,
            target_rms_dbfs: rms,
            duration_s: 1.0,
            rir_id: None,
            seed: 0,
        }
    }

    #[test]
    fn mix_of_constant_beds_is_exact_sum() {
        let s = clip(vec![0.2; 16_000]);
        let n = clip(vec![0.2; 16_000]);
        let rms_of_sum = 20.0 * 0.4f64.log10();
        let got = mix(&toy_recipe(0.0, rms_of_sum), &[s], &[n], None, &MixParams::default()).unwrap();
        assert!(!got.clipped);
        assert!(got.achieved_snr_db.abs() < 1e-9);
        assert!((got.achieved_rms_dbfs - rms_of_sum).abs() < 1e-9);
        for i in 0..got.mixture.len() {
            let sum = got.clean_ref.samples()[i] + got.noise_ref.samples()[i];
            assert!((got.mixture.samples()[i] - sum).abs() <= 1e-6);
        }
    }

    #[test]
    fn mix_is_deterministic() {
        let s = tone(16_000, 0.4, 160);
        let n = tone(16_000, 0.3, 250);
        let r = toy_recipe(8.0, -25.0);
        let a = mix(&r, &[s.clone()], &[n.clone()], None, &MixParams::default()).unwrap();
        let b = mix(&r, &[s], &[n], None, &MixParams::default()).unwrap();
        assert_eq!(a.mixture.samples(), b.mixture.samples());
        assert_eq!(a.clean_ref.samples(), b.clean_ref.samples());
    }

    #[test]
    fn mix_reports_clipping_and_caps_peak() {
        let mut s = vec![0.001; 16_000];
        for i in (0..16_000).step_by(1000) {
            s[i] = 0.9;
        }
        let n = tone(16_000, 0.2, 250);
        let got = mix(&toy_recipe(20.0, -3.0), &[clip(s)], &[n], None, &MixParams::default()).unwrap();
        assert!(got.clipped);
        assert!((got.mixture.peak() - 0.99).abs() < 1e-12);
        assert!(got.achieved_rms_dbfs < -3.0);
    }

    #[test]
    fn mix_wraps_errors_with_recipe_id() {
        let s = clip(vec![0.2; 16_000]);
        let got = mix(&toy_recipe(0.0, -25.0), &[s], &[clip(vec![0.0; 16_000])], None, &MixParams::default());
        match got {
            Err(Error::Recipe { recipe_id, .. }) => assert_eq!(recipe_id, "r0"),
            other => panic!("expected recipe error, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // Solving for a gain then measuring must land on the target.
        #[test]
        fn solver_roundtrip(seed in 0u64..500, target in -10.0f64..40.0) {
            use rand::Rng;
            let mut rng = crate::seed::rng_for(seed, 1);
            let s = clip((0..16_000).map(|_| rng.random_range(-0.5..0.5)).collect());
            let n = clip((0..16_000).map(|_| rng.random_range(-0.5..0.5)).collect());
            let g = noise_gain_for_snr(&s, &n, target, 20).unwrap();
            let achieved = segmental_snr_db(&s, &apply_gain(&n, g), 20).unwrap();
            prop_assert!((achieved - target).abs() < 0.1);
        }

        // Pre-scaling the noise is absorbed by the solved gain.
        #[test]
        fn solver_counters_noise_scaling(seed in 0u64..500, exp in -6i32..6) {
            use rand::Rng;
            let mut rng = crate::seed::rng_for(seed, 2);
            let s = clip((0..16_000).map(|_| rng.random_range(-0.5..0.5)).collect());
            let n = clip((0..16_000).map(|_| rng.random_range(-0.5..0.5)).collect());
            let a = 2f64.powi(exp);
            let g1 = noise_gain_for_snr(&s, &n, 10.0, 20).unwrap();
            let g2 = noise_gain_for_snr(&s, &apply_gain(&n, Gain::new(a).unwrap()), 10.0, 20).unwrap();
            prop_assert!((g2.value() * a - g1.value()).abs() / g1.value() < 1e-9);
        }
    }
}
