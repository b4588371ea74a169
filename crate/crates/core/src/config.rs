//! Run configuration. A TOML file with full defaulting: an empty file is
//! a complete, valid configuration, and every default mirrors the
//! published pipeline values. Relative paths are resolved against the
//! directory containing the config file.

use crate::corpus::{self, TestPlanParams, TrainingParams};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub master_seed: u64,
    pub paths: PathsConfig,
    pub synthesis: SynthesisConfig,
    pub test_plan: TestPlanConfig,
    pub curation: CurationConfig,
    pub balance: BalanceConfig,
    pub ratings: RatingsConfig,
    pub harness: HarnessConfig,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            master_seed: 0,
            paths: PathsConfig::default(),
            synthesis: SynthesisConfig::default(),
            test_plan: TestPlanConfig::default(),
            curation: CurationConfig::default(),
            balance: BalanceConfig::default(),
            ratings: RatingsConfig::default(),
            harness: HarnessConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub clean_manifest: Option<PathBuf>,
    pub noise_manifest: Option<PathBuf>,
    pub rir_manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> PathsConfig {
        PathsConfig {
            clean_manifest: None,
            noise_manifest: None,
            rir_manifest: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub count: usize,
    pub snr_db: (f64, f64),
    pub rms_dbfs: (f64, f64),
    pub duration_s: f64,
    pub speech_gap_ms: u32,
    pub frame_ms: u32,
}

impl Default for SynthesisConfig {
    fn default() -> SynthesisConfig {
        let p = TrainingParams::default();
        SynthesisConfig {
            count: 100,
            snr_db: p.snr_db,
            rms_dbfs: p.rms_dbfs,
            duration_s: p.duration_s,
            speech_gap_ms: p.speech_gap_ms,
            frame_ms: crate::activity::DEFAULT_FRAME_MS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestPlanConfig {
    pub reverb: bool,
    pub priority_categories: Vec<String>,
    pub per_category: usize,
    pub random_count: usize,
    pub snr_db: (f64, f64),
    pub rms_dbfs: (f64, f64),
    pub duration_s: f64,
    pub speech_gap_ms: u32,
    pub rt60_range_ms: (f64, f64),
}

impl Default for TestPlanConfig {
    fn default() -> TestPlanConfig {
        let p = TestPlanParams::default();
        TestPlanConfig {
            reverb: false,
            priority_categories: p.priority_categories,
            per_category: p.per_category,
            random_count: p.random_count,
            snr_db: p.snr_db,
            rms_dbfs: p.rms_dbfs,
            duration_s: p.duration_s,
            speech_gap_ms: p.speech_gap_ms,
            rt60_range_ms: p.rt60_range_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    pub min_speaker_seconds: f64,
    pub segment_seconds: f64,
}

impl Default for CurationConfig {
    fn default() -> CurationConfig {
        CurationConfig {
            min_speaker_seconds: corpus::DEFAULT_MIN_SPEAKER_SECONDS,
            segment_seconds: corpus::DEFAULT_SEGMENT_SECONDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceConfig {
    pub min_per_class: usize,
}

impl Default for BalanceConfig {
    fn default() -> BalanceConfig {
        BalanceConfig { min_per_class: corpus::DEFAULT_MIN_PER_CLASS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatingsConfig {
    pub group_size: usize,
    pub ratings_per_clip: usize,
    pub gold_tolerance: u8,
    pub max_per_day: Option<usize>,
}

impl Default for RatingsConfig {
    fn default() -> RatingsConfig {
        RatingsConfig {
            group_size: crate::p808::DEFAULT_GROUP_SIZE,
            ratings_per_clip: crate::p808::DEFAULT_RATINGS_PER_CLIP,
            gold_tolerance: crate::p808::DEFAULT_GOLD_TOLERANCE,
            max_per_day: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub frame_ms: u32,
    pub lookahead_ms: u32,
    pub trials: usize,
    pub signal_seconds: f64,
    pub warmup_frames: usize,
}

impl Default for HarnessConfig {
    fn default() -> HarnessConfig {
        HarnessConfig {
            frame_ms: crate::activity::DEFAULT_FRAME_MS,
            lookahead_ms: 0,
            trials: crate::rtcheck::DEFAULT_PROBE_TRIALS,
            signal_seconds: crate::rtcheck::DEFAULT_PROBE_SIGNAL_SECONDS,
            warmup_frames: crate::rtcheck::DEFAULT_WARMUP_FRAMES,
        }
    }
}

fn check_range(name: &str, r: (f64, f64)) -> Result<()> {
    if !(r.0.is_finite() && r.1.is_finite() && r.0 <= r.1) {
        return Err(Error::Config(format!("{name} range [{}, {}] is not ordered", r.0, r.1)));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        if let Some(p) = self.paths.clean_manifest.as_mut() {
            anchor(p);
        }
        if let Some(p) = self.paths.noise_manifest.as_mut() {
            anchor(p);
        }
        if let Some(p) = self.paths.rir_manifest.as_mut() {
            anchor(p);
        }
        anchor(&mut self.paths.out_dir);
    }

    pub fn validate(&self) -> Result<()> {
        check_range("synthesis.snr_db", self.synthesis.snr_db)?;
        check_range("synthesis.rms_dbfs", self.synthesis.rms_dbfs)?;
        check_positive("synthesis.duration_s", self.synthesis.duration_s)?;
        check_range("test_plan.snr_db", self.test_plan.snr_db)?;
        check_range("test_plan.rms_dbfs", self.test_plan.rms_dbfs)?;
        check_positive("test_plan.duration_s", self.test_plan.duration_s)?;
        check_range("test_plan.rt60_range_ms", self.test_plan.rt60_range_ms)?;
        check_positive("curation.min_speaker_seconds", self.curation.min_speaker_seconds)?;
        check_positive("curation.segment_seconds", self.curation.segment_seconds)?;
        check_positive("harness.signal_seconds", self.harness.signal_seconds)?;
        if self.synthesis.frame_ms == 0 || self.harness.frame_ms == 0 {
            return Err(Error::Config("frame_ms must be positive".into()));
        }
        if self.ratings.group_size < 3 {
            return Err(Error::Config(format!(
                "ratings.group_size must be at least 3, got {}",
                self.ratings.group_size
            )));
        }
        if !(1..=4).contains(&self.ratings.gold_tolerance) {
            return Err(Error::Config(format!(
                "ratings.gold_tolerance must be in [1, 4], got {}",
                self.ratings.gold_tolerance
            )));
        }
        if self.ratings.ratings_per_clip == 0 {
            return Err(Error::Config("ratings.ratings_per_clip must be positive".into()));
        }
        if self.harness.trials == 0 {
            return Err(Error::Config("harness.trials must be positive".into()));
        }
        Ok(())
    }

    pub fn training_params(&self) -> TrainingParams {
        TrainingParams {
            snr_db: self.synthesis.snr_db,
            rms_dbfs: self.synthesis.rms_dbfs,
            duration_s: self.synthesis.duration_s,
            speech_gap_ms: self.synthesis.speech_gap_ms,
        }
    }

    pub fn test_plan_params(&self) -> TestPlanParams {
        TestPlanParams {
            priority_categories: self.test_plan.priority_categories.clone(),
            per_category: self.test_plan.per_category,
            random_count: self.test_plan.random_count,
            snr_db: self.test_plan.snr_db,
            rms_dbfs: self.test_plan.rms_dbfs,
            duration_s: self.test_plan.duration_s,
            speech_gap_ms: self.test_plan.speech_gap_ms,
            rt60_range_ms: self.test_plan.rt60_range_ms,
        }
    }

    /// The full effective configuration, defaults included, for run logs.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn require_clean_manifest(&self) -> Result<&Path> {
        self.paths
            .clean_manifest
            .as_deref()
            .ok_or_else(|| Error::Config("paths.clean_manifest is not set".into()))
    }

    pub fn require_noise_manifest(&self) -> Result<&Path> {
        self.paths
            .noise_manifest
            .as_deref()
            .ok_or_else(|| Error::Config("paths.noise_manifest is not set".into()))
    }

    pub fn require_rir_manifest(&self) -> Result<&Path> {
        self.paths
            .rir_manifest
            .as_deref()
            .ok_or_else(|| Error::Config("paths.rir_manifest is not set".into()))
    }
}
