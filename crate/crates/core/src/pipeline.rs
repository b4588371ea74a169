//! Batch orchestration behind the command-line interface: load manifests,
//! run recipes or aggregations, and persist artifacts under an output
//! directory. Every command is deterministic for a fixed (inputs, config)
//! pair and reruns produce byte-identical files.

use crate::audio::AudioClip;
use crate::config::PipelineConfig;
use crate::corpus::{self, TestPlan};
use crate::error::{Error, Result};
use crate::manifest::{format_compact, ClipKind, ClipRecord, Manifest};
use crate::p808::{self, GroupAssignment, RatingRecord, RejectReason};
use crate::rtcheck::{self, FrameProcessor, ProbeOutcome, StreamConstraints, TimingReport};
use crate::synth::{self, MixParams, MixRecipe, RirMeta};
use crate::wav;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

pub const RESULTS_HEADER: [&str; 9] = [
    "recipe_id",
    "noisy_path",
    "clean_path",
    "noise_path",
    "target_snr",
    "achieved_snr",
    "target_rms",
    "achieved_rms",
    "clipped",
];

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.toml";

/// Prepares `out`: creates it if absent, wipes it first when `force` is
/// set, and refuses to write into a non-empty directory otherwise.
pub fn ensure_out_dir(out: &Path, force: bool) -> Result<()> {
    if out.exists() {
        let occupied = fs::read_dir(out)?.next().is_some();
        if occupied && !force {
            return Err(Error::InvalidArgument(format!(
                "output directory {} is not empty; pass --force to overwrite",
                out.display()
            )));
        }
        if occupied {
            fs::remove_dir_all(out)?;
        }
    }
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_effective_config(config: &PipelineConfig, out: &Path) -> Result<()> {
    fs::write(out.join(EFFECTIVE_CONFIG_FILE), config.to_toml())?;
    Ok(())
}

fn resolve_clip_path(manifest_path: &Path, record: &ClipRecord) -> PathBuf {
    if record.path.is_absolute() {
        record.path.clone()
    } else {
        manifest_path.parent().unwrap_or_else(|| Path::new(".")).join(&record.path)
    }
}

type ClipPool = HashMap<String, std::result::Result<AudioClip, String>>;

/// Load failures stay per-clip so one broken reference only sinks the
/// recipes that use it.
fn load_clips(manifest_path: &Path, manifest: &Manifest, wanted: &HashSet<&str>) -> ClipPool {
    wanted
        .iter()
        .map(|id| {
            let loaded = manifest
                .require(id)
                .and_then(|record| wav::read_wav(&resolve_clip_path(manifest_path, record)));
            ((*id).to_string(), loaded.map_err(|e| e.to_string()))
        })
        .collect()
}

/// Loads every impulse response in the manifest and tags it with its
/// estimated decay time.
pub fn load_rir_pool(manifest_path: &Path, manifest: &Manifest) -> Result<Vec<RirMeta>> {
    let mut pool = Vec::new();
    for record in manifest.of_kind(ClipKind::Rir) {
        let impulse = wav::read_wav(&resolve_clip_path(manifest_path, record))?;
        let rt60_ms = synth::estimate_rt60_ms(&impulse)?;
        pool.push(RirMeta { rir_id: record.clip_id.clone(), impulse, rt60_ms });
    }
    pool.sort_by(|a, b| a.rir_id.cmp(&b.rir_id));
    Ok(pool)
}

fn install_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot size thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub recipe_id: String,
    pub noisy_path: String,
    pub clean_path: String,
    pub noise_path: String,
    pub target_snr: f64,
    pub achieved_snr: f64,
    pub target_rms: f64,
    pub achieved_rms: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeFailure {
    pub recipe_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RecipeFailure>,
    pub results_path: PathBuf,
}

fn gather_source_ids(recipes: &[MixRecipe]) -> (HashSet<&str>, HashSet<&str>, HashSet<&str>) {
    let mut clean = HashSet::new();
    let mut noise = HashSet::new();
    let mut rirs = HashSet::new();
    for r in recipes {
        clean.extend(r.clean_clip_ids.iter().map(String::as_str));
        noise.extend(r.noise_clip_ids.iter().map(String::as_str));
        if let Some(id) = r.rir_id.as_deref() {
            rirs.insert(id);
        }
    }
    (clean, noise, rirs)
}

type RirPool = HashMap<String, std::result::Result<RirMeta, String>>;

fn synthesize_one(
    recipe: &MixRecipe,
    clean: &ClipPool,
    noise: &ClipPool,
    rirs: &RirPool,
    params: &MixParams,
    out: &Path,
) -> Result<ResultRow> {
    let lookup = |ids: &[String], pool: &ClipPool| -> Result<Vec<AudioClip>> {
        ids.iter()
            .map(|id| match pool.get(id) {
                Some(Ok(clip)) => Ok(clip.clone()),
                Some(Err(msg)) => Err(Error::Data(format!("clip {id}: {msg}"))),
                None => Err(Error::Data(format!("clip {id} missing from source pool"))),
            })
            .collect()
    };
    let clean_clips = lookup(&recipe.clean_clip_ids, clean)?;
    let noise_clips = lookup(&recipe.noise_clip_ids, noise)?;
    let rir = match recipe.rir_id.as_deref() {
        None => None,
        Some(id) => match rirs.get(id) {
            Some(Ok(meta)) => Some(meta),
            Some(Err(msg)) => return Err(Error::Data(format!("impulse response {id}: {msg}"))),
            None => {
                return Err(Error::Data(format!("impulse response {id} missing from pool")))
            }
        },
    };

    let result = synth::mix(recipe, &clean_clips, &noise_clips, rir, params)?;

    let rel = |dir: &str| format!("{dir}/{}.wav", recipe.recipe_id);
    let row = ResultRow {
        recipe_id: recipe.recipe_id.clone(),
        noisy_path: rel("noisy"),
        clean_path: rel("clean"),
        noise_path: rel("noise"),
        target_snr: recipe.target_snr_db,
        achieved_snr: result.achieved_snr_db,
        target_rms: recipe.target_rms_dbfs,
        achieved_rms: result.achieved_rms_dbfs,
        clipped: result.clipped,
    };
    let triple = [
        (&row.noisy_path, &result.mixture),
        (&row.clean_path, &result.clean_ref),
        (&row.noise_path, &result.noise_ref),
    ];
    for (rel_path, clip) in triple {
        if let Err(e) = wav::write_wav(clip, &out.join(rel_path)) {
            for (p, _) in triple {
                let _ = fs::remove_file(out.join(p));
            }
            return Err(e);
        }
    }
    Ok(row)
}

/// Runs every recipe, writes the noisy/clean/noise WAV triple per recipe
/// plus a results manifest, and collects per-recipe failures instead of
/// aborting the batch. Rows keep plan order regardless of parallelism.
pub fn run_synthesis(
    config: &PipelineConfig,
    recipes: &[MixRecipe],
    out: &Path,
    force: bool,
    jobs: Option<usize>,
) -> Result<SynthesisReport> {
    if recipes.is_empty() {
        return Err(Error::InvalidArgument("no recipes to synthesize".into()));
    }
    let mut seen = HashSet::new();
    for r in recipes {
        if !seen.insert(r.recipe_id.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate recipe id {}", r.recipe_id)));
        }
    }

    let clean_manifest_path = config.require_clean_manifest()?;
    let noise_manifest_path = config.require_noise_manifest()?;
    let clean_manifest = Manifest::read_csv(clean_manifest_path)?;
    let noise_manifest = Manifest::read_csv(noise_manifest_path)?;

    let (clean_ids, noise_ids, rir_ids) = gather_source_ids(recipes);
    let clean = load_clips(clean_manifest_path, &clean_manifest, &clean_ids);
    let noise = load_clips(noise_manifest_path, &noise_manifest, &noise_ids);
    let rirs: RirPool = if rir_ids.is_empty() {
        HashMap::new()
    } else {
        let rir_manifest_path = config.require_rir_manifest()?;
        let rir_manifest = Manifest::read_csv(rir_manifest_path)?;
        rir_ids
            .iter()
            .map(|id| {
                let loaded = rir_manifest.require(id).and_then(|record| {
                    let impulse = wav::read_wav(&resolve_clip_path(rir_manifest_path, record))?;
                    let rt60_ms = synth::estimate_rt60_ms(&impulse)?;
                    Ok(RirMeta { rir_id: record.clip_id.clone(), impulse, rt60_ms })
                });
                ((*id).to_string(), loaded.map_err(|e| e.to_string()))
            })
            .collect()
    };

    ensure_out_dir(out, force)?;
    write_effective_config(config, out)?;
    for dir in ["noisy", "clean", "noise"] {
        fs::create_dir_all(out.join(dir))?;
    }
    corpus::write_plan_jsonl(&out.join("plan.jsonl"), recipes)?;

    let params =
        MixParams { frame_ms: config.synthesis.frame_ms, speech_gap_ms: config.synthesis.speech_gap_ms };
    let outcomes: Vec<Result<ResultRow>> = install_pool(jobs, || {
        recipes
            .par_iter()
            .map(|r| synthesize_one(r, &clean, &noise, &rirs, &params, out))
            .collect()
    })?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (recipe, outcome) in recipes.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => {
                failures.push(RecipeFailure { recipe_id: recipe.recipe_id.clone(), message: e.to_string() })
            }
        }
    }

    let results_path = out.join("results.csv");
    let mut wtr = csv::Writer::from_path(&results_path)?;
    wtr.write_record(RESULTS_HEADER)?;
    for row in &rows {
        wtr.write_record([
            row.recipe_id.as_str(),
            &row.noisy_path,
            &row.clean_path,
            &row.noise_path,
            &format_compact(row.target_snr),
            &format_compact(row.achieved_snr),
            &format_compact(row.target_rms),
            &format_compact(row.achieved_rms),
            if row.clipped { "true" } else { "false" },
        ])?;
    }
    wtr.flush()?;

    Ok(SynthesisReport { rows, failures, results_path })
}

/// Builds training recipes from the config and synthesizes them.
pub fn cmd_synthesize(
    config: &PipelineConfig,
    plan: Option<&Path>,
    out: &Path,
    force: bool,
    jobs: Option<usize>,
) -> Result<SynthesisReport> {
    let recipes = match plan {
        Some(path) => corpus::read_plan_jsonl(path)?,
        None => {
            let clean = Manifest::read_csv(config.require_clean_manifest()?)?;
            let noise = Manifest::read_csv(config.require_noise_manifest()?)?;
            corpus::build_training_recipes(
                &clean,
                &noise,
                config.synthesis.count,
                &config.training_params(),
                config.master_seed,
            )?
        }
    };
    run_synthesis(config, &recipes, out, force, jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestsetReport {
    pub plan_path: PathBuf,
    pub composition: BTreeMap<String, usize>,
    pub recipe_count: usize,
}

/// Builds the test-set plan (reverb-free or reverberant per config) and
/// writes it with its composition table.
pub fn cmd_build_testset(config: &PipelineConfig, out: &Path, force: bool) -> Result<TestsetReport> {
    let clean = Manifest::read_csv(config.require_clean_manifest()?)?;
    let noise = Manifest::read_csv(config.require_noise_manifest()?)?;
    let rir_pool = if config.test_plan.reverb {
        let rir_manifest_path = config.require_rir_manifest()?;
        let rir_manifest = Manifest::read_csv(rir_manifest_path)?;
        Some(load_rir_pool(rir_manifest_path, &rir_manifest)?)
    } else {
        None
    };

    let plan: TestPlan = corpus::build_test_plan(
        &noise,
        &clean,
        &config.test_plan_params(),
        rir_pool.as_deref(),
        config.master_seed,
    )?;

    ensure_out_dir(out, force)?;
    write_effective_config(config, out)?;
    let plan_path = out.join("plan.jsonl");
    corpus::write_plan_jsonl(&plan_path, &plan.recipes)?;

    let mut wtr = csv::Writer::from_path(out.join("composition.csv"))?;
    wtr.write_record(["category", "count"])?;
    for (category, count) in &plan.composition {
        wtr.write_record([category.as_str(), &count.to_string()])?;
    }
    wtr.flush()?;

    Ok(TestsetReport {
        plan_path,
        composition: plan.composition,
        recipe_count: plan.recipes.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterReport {
    pub chapters_total: usize,
    pub chapters_selected: usize,
    pub speakers_kept: usize,
    pub segments_written: usize,
    pub manifest_path: PathBuf,
}

fn pooled_chapter_ratings(
    manifest: &Manifest,
    ratings: &[RatingRecord],
) -> Result<BTreeMap<String, Vec<Vec<u8>>>> {
    let mut per_clip: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for r in ratings {
        per_clip.entry(r.clip_id.as_str()).or_default().push(r.score);
    }
    let mut per_chapter: BTreeMap<String, Vec<Vec<u8>>> = BTreeMap::new();
    for (clip_id, scores) in per_clip {
        let record = manifest.require(clip_id)?;
        let chapter = record.chapter_id.clone().ok_or_else(|| {
            Error::Data(format!("clip {clip_id} has ratings but no chapter id"))
        })?;
        per_chapter.entry(chapter).or_default().push(scores);
    }
    Ok(per_chapter)
}

/// The corpus curation pass: chapter MOS, upper-quartile selection,
/// speaker pruning, then fixed-length segmentation of the survivors.
/// Writes the segment WAVs, the curated manifest, and a chapter table.
pub fn cmd_filter_corpus(
    config: &PipelineConfig,
    ratings_path: &Path,
    out: &Path,
    force: bool,
) -> Result<FilterReport> {
    let manifest_path = config.require_clean_manifest()?;
    let manifest = Manifest::read_csv(manifest_path)?;
    let ratings = p808::read_ratings_csv(ratings_path)?;
    if ratings.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "ratings file {} has no rows",
            ratings_path.display()
        )));
    }

    let per_chapter = pooled_chapter_ratings(&manifest, &ratings)?;
    let chapters: Vec<corpus::ChapterScore> = per_chapter
        .iter()
        .map(|(id, clips)| corpus::chapter_mos(id, clips))
        .collect::<Result<_>>()?;
    let selection = corpus::select_upper_quartile(&chapters)?;
    let selected: HashSet<&str> = selection.selected.iter().map(String::as_str).collect();

    let surviving: Vec<ClipRecord> = manifest
        .records()
        .iter()
        .filter(|r| {
            r.kind != ClipKind::Clean
                || r.chapter_id.as_deref().is_some_and(|c| selected.contains(c))
        })
        .cloned()
        .collect();
    let pruned = corpus::prune_speakers(&Manifest::new(surviving)?, config.curation.min_speaker_seconds)?;
    let speakers_kept = pruned
        .of_kind(ClipKind::Clean)
        .filter_map(|r| r.speaker_id.as_deref())
        .collect::<HashSet<_>>()
        .len();

    ensure_out_dir(out, force)?;
    write_effective_config(config, out)?;
    fs::create_dir_all(out.join("segments"))?;

    let mut curated = Vec::new();
    let mut segments_written = 0usize;
    for record in pruned.records() {
        if record.kind != ClipKind::Clean {
            curated.push(record.clone());
            continue;
        }
        let clip = wav::read_wav(&resolve_clip_path(manifest_path, record))?;
        for (i, segment) in
            corpus::segment_clip(&clip, config.curation.segment_seconds)?.iter().enumerate()
        {
            let seg_id = format!("{}_s{i:03}", record.clip_id);
            let rel = format!("segments/{seg_id}.wav");
            wav::write_wav(segment, &out.join(&rel))?;
            let mut seg_record =
                ClipRecord::new(&seg_id, Path::new(&rel), ClipKind::Clean, segment.duration_seconds());
            seg_record.labels = record.labels.clone();
            seg_record.speaker_id = record.speaker_id.clone();
            seg_record.chapter_id = record.chapter_id.clone();
            seg_record.category = record.category.clone();
            curated.push(seg_record);
            segments_written += 1;
        }
    }
    let manifest_out = out.join("curated_manifest.csv");
    Manifest::new(curated)?.write_csv(&manifest_out)?;

    let mut wtr = csv::Writer::from_path(out.join("chapters.csv"))?;
    wtr.write_record(["chapter_id", "mos", "ci95", "rating_count", "selected"])?;
    let mut ordered = chapters.clone();
    ordered.sort_by(|a, b| {
        b.mos.partial_cmp(&a.mos).expect("finite mos").then_with(|| a.chapter_id.cmp(&b.chapter_id))
    });
    for c in &ordered {
        wtr.write_record([
            c.chapter_id.as_str(),
            &format_compact(c.mos),
            &format_compact(c.ci95),
            &c.rating_count.to_string(),
            if selected.contains(c.chapter_id.as_str()) { "true" } else { "false" },
        ])?;
    }
    wtr.flush()?;

    Ok(FilterReport {
        chapters_total: chapters.len(),
        chapters_selected: selection.selected.len(),
        speakers_kept,
        segments_written,
        manifest_path: manifest_out,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceRunReport {
    pub selected: usize,
    pub under_quota: Vec<String>,
    pub manifest_path: PathBuf,
}

/// Greedy multi-label balancing over the noise manifest; writes the
/// selected subset as a new manifest plus per-class statistics.
pub fn cmd_balance_noise(config: &PipelineConfig, out: &Path, force: bool) -> Result<BalanceRunReport> {
    let manifest = Manifest::read_csv(config.require_noise_manifest()?)?;
    let report =
        corpus::balance_classes(&manifest, config.balance.min_per_class, config.master_seed)?;

    ensure_out_dir(out, force)?;
    write_effective_config(config, out)?;

    let records: Vec<ClipRecord> = report
        .selected
        .iter()
        .map(|id| manifest.require(id).cloned())
        .collect::<Result<_>>()?;
    let manifest_path = out.join("balanced_manifest.csv");
    Manifest::new(records)?.write_csv(&manifest_path)?;

    let mut wtr = csv::Writer::from_path(out.join("class_stats.csv"))?;
    wtr.write_record(["class", "available", "quota", "selected", "under_quota"])?;
    for (class, stats) in &report.per_class {
        wtr.write_record([
            class.as_str(),
            &stats.available.to_string(),
            &stats.quota.to_string(),
            &stats.selected.to_string(),
            if stats.under_quota { "true" } else { "false" },
        ])?;
    }
    wtr.flush()?;

    Ok(BalanceRunReport {
        selected: report.selected.len(),
        under_quota: report
            .per_class
            .iter()
            .filter(|(_, s)| s.under_quota)
            .map(|(c, _)| c.clone())
            .collect(),
        manifest_path,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub accepted: usize,
    pub rejections: usize,
    pub rejected_raters: usize,
    pub clip_summaries: usize,
    pub condition_summaries: Option<usize>,
    pub rate_limit_violations: usize,
}

fn reason_str(reason: &RejectReason) -> &'static str {
    match reason {
        RejectReason::Gold => "gold",
        RejectReason::Trap => "trap",
        RejectReason::Incomplete => "incomplete",
    }
}

/// Filters a rating export against its group assignments, then writes
/// accepted ratings, per-clip MOS, optional per-condition MOS, and the
/// rejection report.
pub fn cmd_aggregate(
    config: &PipelineConfig,
    ratings_path: &Path,
    assignments_path: &Path,
    conditions_path: Option<&Path>,
    out: &Path,
    force: bool,
) -> Result<AggregateReport> {
    let ratings = p808::read_ratings_csv(ratings_path)?;
    if ratings.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "ratings file {} has no rows",
            ratings_path.display()
        )));
    }
    let assignments: Vec<GroupAssignment> = p808::read_assignments_jsonl(assignments_path)?;
    let (accepted, rejections) =
        p808::filter_ratings(&ratings, &assignments, config.ratings.gold_tolerance)?;

    let rate_limit_violations = match config.ratings.max_per_day {
        Some(max) => p808::check_rate_limits(&ratings, max),
        None => Vec::new(),
    };

    ensure_out_dir(out, force)?;
    write_effective_config(config, out)?;

    p808::write_ratings_csv(&out.join("accepted.csv"), &accepted)?;
    let clip_summaries = p808::clip_mos(&accepted)?;
    p808::write_summaries_csv(&out.join("clip_mos.csv"), &clip_summaries)?;

    let condition_summaries = match conditions_path {
        None => None,
        Some(path) => {
            let map = read_condition_map(path)?;
            let summaries = p808::condition_mos(&accepted, &map)?;
            p808::write_summaries_csv(&out.join("condition_mos.csv"), &summaries)?;
            Some(summaries.len())
        }
    };

    let mut wtr = csv::Writer::from_path(out.join("rejections.csv"))?;
    wtr.write_record(["rater_id", "group_id", "reason"])?;
    for r in &rejections {
        wtr.write_record([r.rater_id.as_str(), r.group_id.as_str(), reason_str(&r.reason)])?;
    }
    wtr.flush()?;

    if !rate_limit_violations.is_empty() {
        let mut wtr = csv::Writer::from_path(out.join("rate_limit.csv"))?;
        wtr.write_record(["rater_id", "day", "count"])?;
        for v in &rate_limit_violations {
            wtr.write_record([v.rater_id.as_str(), &v.day.to_string(), &v.count.to_string()])?;
        }
        wtr.flush()?;
    }

    Ok(AggregateReport {
        accepted: accepted.len(),
        rejections: rejections.len(),
        rejected_raters: p808::rejected_raters(&rejections).len(),
        clip_summaries: clip_summaries.len(),
        condition_summaries,
        rate_limit_violations: rate_limit_violations.len(),
    })
}

fn read_condition_map(path: &Path) -> Result<HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("cannot open condition map {}: {e}", path.display())))?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["clip_id", "condition"] {
        return Err(Error::Data(format!(
            "condition map {} must have header clip_id,condition",
            path.display()
        )));
    }
    let mut map = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let clip = row.get(0).unwrap_or_default().to_string();
        let condition = row.get(1).unwrap_or_default().to_string();
        if clip.is_empty() || condition.is_empty() {
            return Err(Error::Data(format!("condition map {} has an empty field", path.display())));
        }
        map.insert(clip, condition);
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub declared: StreamConstraints,
    pub probe: ProbeOutcome,
    /// Absent when the causality probe already failed; timing a processor
    /// that reads ahead of its declaration proves nothing.
    pub timing: Option<TimingReport>,
    pub track: u8,
}

impl VerifyReport {
    /// True when both streaming rules hold: no reads past the declared
    /// lookahead and mean compute under half the frame.
    pub fn compliant(&self) -> bool {
        self.probe.passed() && self.timing.as_ref().is_some_and(|t| t.pass)
    }
}

/// Runs the full harness against an external processor command: spawn it,
/// read its declaration, probe causality against that declaration, time
/// it on a seeded noise clip, and classify the track.
pub fn cmd_verify(config: &PipelineConfig, command: &[String], out: Option<&Path>) -> Result<VerifyReport> {
    let mut proc = rtcheck::SubprocessProcessor::spawn(command, crate::audio::CANONICAL_SAMPLE_RATE)?;
    let declared = proc.declared();

    let probe = rtcheck::probe_lookahead(
        &mut proc,
        &declared,
        config.harness.trials,
        config.harness.signal_seconds,
        config.master_seed,
    )?;

    let timing = if probe.passed() {
        let frames_needed = config.harness.warmup_frames + rtcheck::MIN_TIMED_FRAMES + 10;
        let clip_seconds = frames_needed as f64 * declared.frame_ms as f64 / 1000.0;
        let clip = crate::siggen::noise_like(clip_seconds, config.master_seed);
        proc.reset()?;
        Some(rtcheck::measure_budget(&mut proc, &clip, &declared, config.harness.warmup_frames)?)
    } else {
        None
    };

    let track = match &timing {
        Some(t) => rtcheck::classify_track(&declared, t),
        None => 2,
    };
    let report = VerifyReport { declared, probe, timing, track };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&report)?;
        fs::write(dir.join("verify_report.json"), json + "\n")?;
    }
    Ok(report)
}

/// Reads a leaderboard export, ranks it, and writes the final order.
pub fn cmd_rank(entries_path: &Path, out: Option<&Path>) -> Result<Vec<rtcheck::SubmissionEntry>> {
    let entries = rtcheck::read_entries_csv(entries_path)?;
    let ranked = rtcheck::rank(&entries)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut wtr = csv::Writer::from_path(dir.join("ranking.csv"))?;
        wtr.write_record(["rank", "entry_id", "mos", "param_count", "per_frame_ms", "track"])?;
        for (i, e) in ranked.iter().enumerate() {
            wtr.write_record([
                &(i + 1).to_string(),
                e.entry_id.as_str(),
                &format_compact(e.mos),
                &e.param_count.to_string(),
                &format_compact(e.per_frame_ms),
                &e.track.to_string(),
            ])?;
        }
        wtr.flush()?;
    }
    Ok(ranked)
}

/// Child-process entry for the bundled fixtures, speaking the
/// frame-exchange protocol on stdin/stdout.
pub fn run_fixture(
    kind: &str,
    frame_ms: u32,
    lookahead_ms: u32,
    sleep_ms: u64,
    window_frames: usize,
) -> Result<()> {
    let constraints = StreamConstraints::new(frame_ms, lookahead_ms)?;
    let frame_len = constraints.frame_samples(crate::audio::CANONICAL_SAMPLE_RATE);
    let mut proc: Box<dyn FrameProcessor> = match kind {
        "passthrough" => Box::new(rtcheck::fixtures::Passthrough::new(frame_len)),
        "sleeper" => Box::new(rtcheck::fixtures::Sleeper::new(frame_len, sleep_ms)),
        "averager" => Box::new(rtcheck::fixtures::WindowAverager::new(frame_len, window_frames)),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown fixture {other}; expected passthrough, sleeper, or averager"
            )))
        }
    };
    rtcheck::run_child_loop(proc.as_mut(), &constraints)
}
