//! Corpus curation and plan generation: chapter-quality selection, speaker
//! pruning, segmentation, noise-class balancing, and seeded recipe
//! builders for training sets and challenge test sets.
//!
//! Everything here is pure over manifests and bit-deterministic in
//! (inputs, master_seed): candidate lists are sorted by id before any
//! seeded draw, so the iteration order of the backing store never leaks
//! into an output.

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::manifest::{ClipKind, ClipRecord, Manifest};
use crate::seed::{derive_seed, rng_for};
use crate::synth::{MixRecipe, RirMeta};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

pub const DEFAULT_MIN_SPEAKER_SECONDS: f64 = 900.0;
pub const DEFAULT_SEGMENT_SECONDS: f64 = 10.0;
pub const DEFAULT_MIN_PER_CLASS: usize = 500;
pub const PLAN_FORMAT_VERSION: u32 = 1;

/// Subjective quality of one book chapter: the grand mean over every
/// rating of every sampled clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ChapterScore {
    pub chapter_id: String,
    pub mos: f64,
    pub ci95: f64,
    pub rating_count: usize,
}

pub fn chapter_mos(chapter_id: &str, clip_ratings: &[Vec<u8>]) -> Result<ChapterScore> {
    let pooled: Vec<u8> = clip_ratings.iter().flatten().copied().collect();
    let (mos, ci95) = crate::p808::mos_ci(&pooled)?;
    Ok(ChapterScore {
        chapter_id: chapter_id.to_string(),
        mos,
        ci95,
        rating_count: pooled.len(),
    })
}

/// The chapters that survive quartile selection, plus the realized MOS
/// cut-off (an outcome of the data, not a tunable).
#[derive(Debug, Clone, PartialEq)]
pub struct QuartileSelection {
    pub selected: Vec<String>,
    pub threshold_mos: f64,
}

/// Keeps the top ceil(n/4) chapters by MOS, ties broken by ascending
/// chapter_id.
pub fn select_upper_quartile(chapters: &[ChapterScore]) -> Result<QuartileSelection> {
    if chapters.is_empty() {
        return Err(Error::InvalidArgument("no chapters to select from".into()));
    }
    let mut order: Vec<&ChapterScore> = chapters.iter().collect();
    order.sort_by(|a, b| {
        b.mos
            .partial_cmp(&a.mos)
            .expect("finite mos")
            .then_with(|| a.chapter_id.cmp(&b.chapter_id))
    });
    let take = chapters.len().div_ceil(4);
    let selected: Vec<String> = order[..take].iter().map(|c| c.chapter_id.clone()).collect();
    let threshold_mos = order[..take]
        .iter()
        .map(|c| c.mos)
        .fold(f64::INFINITY, f64::min);
    Ok(QuartileSelection { selected, threshold_mos })
}

/// Drops every clean clip of any speaker whose total recorded time is
/// strictly below `min_seconds`. Non-clean rows pass through untouched.
pub fn prune_speakers(manifest: &Manifest, min_seconds: f64) -> Result<Manifest> {
    let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
    for r in manifest.of_kind(ClipKind::Clean) {
        let speaker = r
            .speaker_id
            .as_deref()
            .ok_or_else(|| Error::Data(format!("clean clip {} lacks speaker_id", r.clip_id)))?;
        *totals.entry(speaker).or_default() += r.duration_s;
    }
    let kept: Vec<ClipRecord> = manifest
        .records()
        .iter()
        .filter(|r| {
            r.kind != ClipKind::Clean
                || totals[r.speaker_id.as_deref().expect("checked above")] >= min_seconds
        })
        .cloned()
        .collect();
    Manifest::new(kept)
}

/// Consecutive non-overlapping segments of `seg_seconds`; the trailing
/// remainder is dropped.
pub fn segment_clip(clip: &AudioClip, seg_seconds: f64) -> Result<Vec<AudioClip>> {
    if !(seg_seconds.is_finite() && seg_seconds > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "segment length {seg_seconds} s must be positive"
        )));
    }
    let seg_len = (seg_seconds * clip.sample_rate() as f64).round() as usize;
    clip.samples()
        .chunks_exact(seg_len)
        .map(|chunk| AudioClip::new(chunk.to_vec(), clip.sample_rate()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassStats {
    pub available: usize,
    pub quota: usize,
    pub selected: usize,
    pub under_quota: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceReport {
    pub selected: Vec<String>,
    pub per_class: BTreeMap<String, ClassStats>,
}

/// Greedy multi-label cover: classes are processed from scarcest to most
/// plentiful, and each class draws seeded-random unselected clips bearing
/// its label until it holds min(`min_per_class`, availability) selected
/// clips. A selected clip credits every label it carries. Classes too
/// small to meet the quota are reported, not failed.
pub fn balance_classes(
    manifest: &Manifest,
    min_per_class: usize,
    seed: u64,
) -> Result<BalanceReport> {
    let mut classes: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in manifest.of_kind(ClipKind::Noise) {
        if r.labels.is_empty() {
            return Err(Error::Data(format!("noise clip {} has no labels", r.clip_id)));
        }
        for label in &r.labels {
            classes.entry(label).or_default().push(&r.clip_id);
        }
    }
    for members in classes.values_mut() {
        members.sort_unstable();
        members.dedup();
    }

    let mut order: Vec<&str> = classes.keys().copied().collect();
    order.sort_by_key(|c| (classes[c].len(), *c));

    let mut selected: BTreeSet<&str> = BTreeSet::new();
    for (class_index, class) in order.iter().enumerate() {
        let members = &classes[class];
        let quota = min_per_class.min(members.len());
        let have = members.iter().filter(|m| selected.contains(*m)).count();
        if have >= quota {
            continue;
        }
        let mut pool: Vec<&str> =
            members.iter().copied().filter(|m| !selected.contains(m)).collect();
        pool.shuffle(&mut rng_for(seed, class_index as u64));
        for clip in pool.into_iter().take(quota - have) {
            selected.insert(clip);
        }
    }

    let per_class = classes
        .iter()
        .map(|(class, members)| {
            let count = members.iter().filter(|m| selected.contains(*m)).count();
            (
                class.to_string(),
                ClassStats {
                    available: members.len(),
                    quota: min_per_class.min(members.len()),
                    selected: count,
                    under_quota: members.len() < min_per_class,
                },
            )
        })
        .collect();

    Ok(BalanceReport {
        selected: selected.into_iter().map(str::to_string).collect(),
        per_class,
    })
}

/// Knobs for the training-set recipe builder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingParams {
    pub snr_db: (f64, f64),
    pub rms_dbfs: (f64, f64),
    pub duration_s: f64,
    pub speech_gap_ms: u32,
}

impl Default for TrainingParams {
    fn default() -> Self {
        TrainingParams {
            snr_db: (0.0, 40.0),
            rms_dbfs: (-35.0, -15.0),
            duration_s: 30.0,
            speech_gap_ms: crate::synth::DEFAULT_SPEECH_GAP_MS,
        }
    }
}

fn check_range(name: &str, range: (f64, f64)) -> Result<()> {
    if !(range.0.is_finite() && range.1.is_finite() && range.0 <= range.1) {
        return Err(Error::InvalidArgument(format!(
            "{name} range ({}, {}) is not an ordered finite pair",
            range.0, range.1
        )));
    }
    Ok(())
}

fn sorted_ids<'a>(manifest: &'a Manifest, kind: ClipKind) -> Vec<&'a ClipRecord> {
    let mut records: Vec<&ClipRecord> = manifest.of_kind(kind).collect();
    records.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    records
}

/// Picks clips from a seeded shuffle of `records` until their joint
/// duration (plus inter-utterance gaps) covers `duration_s`. With
/// `allow_short` the picks may fall short once every record is used,
/// for sources that loop at synthesis time.
fn pick_material(
    records: &[&ClipRecord],
    duration_s: f64,
    gap_s: f64,
    allow_short: bool,
    rng: &mut impl Rng,
) -> Result<Vec<String>> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(rng);
    let mut picked = Vec::new();
    let mut covered = 0.0;
    for idx in order {
        if !picked.is_empty() {
            if covered >= duration_s {
                break;
            }
            covered += gap_s;
        }
        picked.push(records[idx].clip_id.clone());
        covered += records[idx].duration_s;
    }
    if covered < duration_s && !allow_short {
        return Err(Error::InsufficientMaterial(format!(
            "clips cover {covered:.2} s of a {duration_s:.2} s bed"
        )));
    }
    Ok(picked)
}

/// Seeded training recipes: uniform SNR and RMS targets, random source
/// material, one derived seed per recipe.
pub fn build_training_recipes(
    clean: &Manifest,
    noise: &Manifest,
    count: usize,
    params: &TrainingParams,
    master_seed: u64,
) -> Result<Vec<MixRecipe>> {
    check_range("snr_db", params.snr_db)?;
    check_range("rms_dbfs", params.rms_dbfs)?;
    let clean_records = sorted_ids(clean, ClipKind::Clean);
    let noise_records = sorted_ids(noise, ClipKind::Noise);
    if clean_records.is_empty() || noise_records.is_empty() {
        return Err(Error::InvalidArgument("clean and noise manifests must be nonempty".into()));
    }

    let gap_s = params.speech_gap_ms as f64 / 1000.0;
    (0..count)
        .map(|i| {
            let mut rng = rng_for(master_seed, i as u64);
            let target_snr_db = rng.random_range(params.snr_db.0..=params.snr_db.1);
            let target_rms_dbfs = rng.random_range(params.rms_dbfs.0..=params.rms_dbfs.1);
            let clean_clip_ids =
                pick_material(&clean_records, params.duration_s, gap_s, false, &mut rng)?;
            let noise_clip_ids =
                pick_material(&noise_records, params.duration_s, 0.0, true, &mut rng)?;
            Ok(MixRecipe {
                recipe_id: format!("tr{i:06}"),
                clean_clip_ids,
                noise_clip_ids,
                target_snr_db,
                target_rms_dbfs,
                duration_s: params.duration_s,
                rir_id: None,
                seed: derive_seed(master_seed, i as u64),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanVariant {
    SyntheticNoReverb,
    SyntheticReverb,
}

impl PlanVariant {
    fn recipe_prefix(self) -> &'static str {
        match self {
            PlanVariant::SyntheticNoReverb => "tsnr",
            PlanVariant::SyntheticReverb => "tsrv",
        }
    }
}

/// Knobs for the test-set plan builder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestPlanParams {
    pub priority_categories: Vec<String>,
    pub per_category: usize,
    pub random_count: usize,
    pub snr_db: (f64, f64),
    pub rms_dbfs: (f64, f64),
    pub duration_s: f64,
    pub speech_gap_ms: u32,
    pub rt60_range_ms: (f64, f64),
}

impl Default for TestPlanParams {
    fn default() -> Self {
        TestPlanParams {
            priority_categories: default_priority_categories(),
            per_category: 15,
            random_count: 120,
            snr_db: (0.0, 25.0),
            rms_dbfs: (-35.0, -15.0),
            duration_s: 10.0,
            speech_gap_ms: crate::synth::DEFAULT_SPEECH_GAP_MS,
            rt60_range_ms: (300.0, 1300.0),
        }
    }
}

pub fn default_priority_categories() -> Vec<String> {
    [
        "fan",
        "air_conditioner",
        "typing",
        "door_shutting",
        "clatter",
        "car",
        "munching",
        "creaking_chair",
        "breathing",
        "copy_machine",
        "baby_crying",
        "barking",
    ]
    .into_iter()
    .map(str::to_string)
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestPlan {
    pub variant: PlanVariant,
    pub recipes: Vec<MixRecipe>,
    pub composition: BTreeMap<String, usize>,
}

/// Builds one synthetic test-set plan: `per_category` clips from each
/// priority noise category plus `random_count` from the remaining
/// classes, each turned into a seeded recipe. The reverb variant pairs
/// every recipe with an impulse response whose decay lies in
/// `rt60_range_ms`.
pub fn build_test_plan(
    noise: &Manifest,
    clean: &Manifest,
    params: &TestPlanParams,
    rir_pool: Option<&[RirMeta]>,
    master_seed: u64,
) -> Result<TestPlan> {
    check_range("snr_db", params.snr_db)?;
    check_range("rms_dbfs", params.rms_dbfs)?;
    check_range("rt60_ms", params.rt60_range_ms)?;
    let mut unique = BTreeSet::new();
    for c in &params.priority_categories {
        if !unique.insert(c) {
            return Err(Error::InvalidArgument(format!("duplicate priority category {c}")));
        }
    }
    let clean_records = sorted_ids(clean, ClipKind::Clean);
    if clean_records.is_empty() {
        return Err(Error::InvalidArgument("clean manifest is empty".into()));
    }

    let variant = if rir_pool.is_some() {
        PlanVariant::SyntheticReverb
    } else {
        PlanVariant::SyntheticNoReverb
    };
    let eligible_rirs: Vec<&RirMeta> = match rir_pool {
        None => Vec::new(),
        Some(pool) => {
            let mut rirs: Vec<&RirMeta> = pool
                .iter()
                .filter(|r| {
                    r.rt60_ms >= params.rt60_range_ms.0 && r.rt60_ms <= params.rt60_range_ms.1
                })
                .collect();
            rirs.sort_by(|a, b| a.rir_id.cmp(&b.rir_id));
            if rirs.is_empty() {
                return Err(Error::Plan(format!(
                    "no impulse responses with decay in [{}, {}] ms",
                    params.rt60_range_ms.0, params.rt60_range_ms.1
                )));
            }
            rirs
        }
    };

    // Priority categories first, in their given order, then the random
    // remainder drawn from every other class.
    let mut chosen_noise: Vec<&ClipRecord> = Vec::new();
    for (ci, category) in params.priority_categories.iter().enumerate() {
        let mut candidates: Vec<&ClipRecord> = noise
            .of_kind(ClipKind::Noise)
            .filter(|r| r.category.as_deref() == Some(category.as_str()))
            .collect();
        candidates.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
        if candidates.len() < params.per_category {
            return Err(Error::Plan(format!(
                "priority category {category} has {} clips, need {}",
                candidates.len(),
                params.per_category
            )));
        }
        candidates.shuffle(&mut rng_for(master_seed, ci as u64));
        chosen_noise.extend(&candidates[..params.per_category]);
    }
    let mut remainder: Vec<&ClipRecord> = noise
        .of_kind(ClipKind::Noise)
        .filter(|r| match &r.category {
            Some(c) => !params.priority_categories.contains(c),
            None => false,
        })
        .collect();
    remainder.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    if remainder.len() < params.random_count {
        return Err(Error::Plan(format!(
            "remaining classes offer {} clips, need {}",
            remainder.len(),
            params.random_count
        )));
    }
    remainder.shuffle(&mut rng_for(master_seed, params.priority_categories.len() as u64));
    chosen_noise.extend(&remainder[..params.random_count]);

    let gap_s = params.speech_gap_ms as f64 / 1000.0;
    let mut recipes = Vec::with_capacity(chosen_noise.len());
    let mut composition: BTreeMap<String, usize> = BTreeMap::new();
    for (i, noise_record) in chosen_noise.iter().enumerate() {
        // Recipe draws live on a stream disjoint from the category draws.
        let mut rng = rng_for(master_seed, (1u64 << 33) + i as u64);
        let target_snr_db = rng.random_range(params.snr_db.0..=params.snr_db.1);
        let target_rms_dbfs = rng.random_range(params.rms_dbfs.0..=params.rms_dbfs.1);
        let clean_clip_ids =
            pick_material(&clean_records, params.duration_s, gap_s, false, &mut rng)?;
        let rir_id = if eligible_rirs.is_empty() {
            None
        } else {
            Some(eligible_rirs[rng.random_range(0..eligible_rirs.len())].rir_id.clone())
        };
        *composition
            .entry(noise_record.category.clone().unwrap_or_else(|| "uncategorized".into()))
            .or_default() += 1;
        recipes.push(MixRecipe {
            recipe_id: format!("{}{i:04}", variant.recipe_prefix()),
            clean_clip_ids,
            noise_clip_ids: vec![noise_record.clip_id.clone()],
            target_snr_db,
            target_rms_dbfs,
            duration_s: params.duration_s,
            rir_id,
            seed: derive_seed(master_seed, i as u64),
        });
    }

    Ok(TestPlan { variant, recipes, composition })
}

#[derive(Serialize, Deserialize)]
struct PlanLine {
    format_version: u32,
    #[serde(flatten)]
    recipe: MixRecipe,
}

/// One recipe per line, each line carrying the format version.
pub fn write_plan_jsonl(path: &Path, recipes: &[MixRecipe]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in recipes {
        let line = PlanLine { format_version: PLAN_FORMAT_VERSION, recipe: r.clone() };
        serde_json::to_writer(&mut f, &line)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_plan_jsonl(path: &Path) -> Result<Vec<MixRecipe>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: PlanLine = serde_json::from_str(&line)
            .map_err(|e| Error::Plan(format!("plan line {}: {e}", i + 1)))?;
        if parsed.format_version != PLAN_FORMAT_VERSION {
            return Err(Error::Plan(format!(
                "plan line {}: format_version {} unsupported (expected {})",
                i + 1,
                parsed.format_version,
                PLAN_FORMAT_VERSION
            )));
        }
        out.push(parsed.recipe);
    }
    Ok(out)
}
