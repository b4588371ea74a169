//! Release gate: one test per acceptance criterion. Each test prints a
//! single verdict line and pins its tolerance locally, so a criterion
//! can't drift without the diff showing it.

use noiseforge::audio::AudioClip;
use noiseforge::config::PipelineConfig;
use noiseforge::corpus::{
    self, default_priority_categories, ChapterScore, TestPlanParams, TrainingParams,
};
use noiseforge::manifest::{ClipKind, ClipRecord, Manifest};
use noiseforge::p808::{self, GroupAssignment, GroupVerdict};
use noiseforge::pipeline;
use noiseforge::rtcheck::{
    self,
    fixtures::{Passthrough, Sleeper, WindowAverager},
    StreamConstraints, SubmissionEntry,
};
use noiseforge::seed::rng_for;
use noiseforge::siggen;
use noiseforge::synth::{self, MixParams, MixRecipe, MixResult};
use noiseforge::wav;
use rand::prelude::*;
use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::time::Instant;

const BATCH_SEED: u64 = 0xACCE55;
const BATCH_SIZE: usize = 200;

struct BatchItem {
    recipe: MixRecipe,
    result: MixResult,
}

fn mix_one(i: u64, target_rms_dbfs: f64, target_snr_db: f64) -> BatchItem {
    let speech = vec![
        siggen::speech_like(2.0, BATCH_SEED ^ (i * 3 + 1)),
        siggen::speech_like(2.0, BATCH_SEED ^ (i * 3 + 2)),
    ];
    let noise = vec![siggen::noise_like(1.5, BATCH_SEED ^ (i * 3 + 3))];
    let recipe = MixRecipe {
        recipe_id: format!("acc{i:04}"),
        clean_clip_ids: vec!["s0".into(), "s1".into()],
        noise_clip_ids: vec!["n0".into()],
        target_snr_db,
        target_rms_dbfs,
        duration_s: 3.0,
        rir_id: None,
        seed: i,
    };
    let result = synth::mix(&recipe, &speech, &noise, None, &MixParams::default())
        .expect("batch recipe mixes");
    BatchItem { recipe, result }
}

fn mix_batch() -> Vec<BatchItem> {
    (0..BATCH_SIZE as u64)
        .map(|i| {
            let mut rng = rng_for(BATCH_SEED, i);
            let target_snr_db = rng.random_range(0.0..=40.0);
            let target_rms_dbfs = rng.random_range(-35.0..=-15.0);
            mix_one(i, target_rms_dbfs, target_snr_db)
        })
        .collect()
}

#[test]
fn criterion_01_snr_fidelity() {
    let start = Instant::now();
    let batch = mix_batch();
    let elapsed = start.elapsed().as_secs_f64();

    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for item in &batch {
        if item.result.clipped {
            continue;
        }
        let err = (item.result.achieved_snr_db - item.recipe.target_snr_db).abs();
        assert!(err <= 0.1, "recipe {} SNR off by {err:.4} dB", item.recipe.recipe_id);
        worst = worst.max(err);
        checked += 1;
    }
    assert!(checked >= 150, "only {checked} unclipped results; batch is degenerate");
    assert!(elapsed < 60.0, "batch took {elapsed:.1} s, budget is 60 s");
    println!(
        "criterion 1 pass: |achieved - target| SNR <= 0.1 dB (worst {worst:.2e} dB) on {checked} unclipped of {BATCH_SIZE} recipes in {elapsed:.1} s"
    );
}

#[test]
fn criterion_02_level_fidelity() {
    let batch = mix_batch();
    let mut checked = 0usize;
    let mut clipped = 0usize;
    for item in &batch {
        if item.result.clipped {
            let peak = item.result.mixture.peak();
            assert!((peak - 0.99).abs() <= 1.0 / 32768.0, "clipped peak {peak}");
            clipped += 1;
        } else {
            let err = (item.result.achieved_rms_dbfs - item.recipe.target_rms_dbfs).abs();
            assert!(err <= 0.1, "recipe {} RMS off by {err:.4} dB", item.recipe.recipe_id);
            checked += 1;
        }
    }

    // A deliberately hot target exercises the peak limiter and the
    // quantized ceiling even if the uniform draws above produced none.
    let loud = mix_one(9_999, -1.0, 10.0);
    assert!(loud.result.clipped);
    let decoded = wav::decode_wav(&wav::encode_wav(&loud.result.mixture)).unwrap();
    let peak = decoded.peak();
    assert!((peak - 0.99).abs() <= 1.0 / 32768.0, "quantized peak {peak}");
    println!(
        "criterion 2 pass: RMS within 0.1 dB on {checked} unclipped results; {} clipped results peak at 0.99 within 1/32768",
        clipped + 1
    );
}

#[test]
fn criterion_03_additivity() {
    let batch = mix_batch();
    let mut worst = 0.0f64;
    for item in &batch {
        let m = item.result.mixture.samples();
        let c = item.result.clean_ref.samples();
        let n = item.result.noise_ref.samples();
        assert_eq!(m.len(), c.len());
        assert_eq!(m.len(), n.len());
        for j in 0..m.len() {
            let gap = (m[j] - c[j] - n[j]).abs();
            assert!(gap <= 1e-6, "recipe {} sample {j} off by {gap:.2e}", item.recipe.recipe_id);
            worst = worst.max(gap);
        }
    }
    println!(
        "criterion 3 pass: max |mixture - clean_ref - noise_ref| = {worst:.2e} <= 1e-6 over {BATCH_SIZE} recipes"
    );
}

fn synthetic_clean_manifest(count: usize, duration_s: f64) -> Manifest {
    let records = (0..count)
        .map(|i| {
            let id = format!("c{i:03}");
            let mut r =
                ClipRecord::new(&id, Path::new(&format!("{id}.wav")), ClipKind::Clean, duration_s);
            r.speaker_id = Some(format!("spk{}", i % 7));
            r.chapter_id = Some(format!("ch{}", i % 11));
            r
        })
        .collect();
    Manifest::new(records).unwrap()
}

fn synthetic_noise_manifest(per_category: &[(String, usize)], duration_s: f64) -> Manifest {
    let mut records = Vec::new();
    for (category, count) in per_category {
        for i in 0..*count {
            let id = format!("{category}-{i:03}");
            let mut r =
                ClipRecord::new(&id, Path::new(&format!("{id}.wav")), ClipKind::Noise, duration_s);
            r.labels = vec![category.clone()];
            r.category = Some(category.clone());
            records.push(r);
        }
    }
    Manifest::new(records).unwrap()
}

#[test]
fn criterion_04_default_parameter_conformance() {
    let clean = synthetic_clean_manifest(30, 12.0);
    let noise = synthetic_noise_manifest(&[("hum".to_string(), 25)], 10.0);
    let recipes =
        corpus::build_training_recipes(&clean, &noise, 500, &TrainingParams::default(), 7).unwrap();
    assert_eq!(recipes.len(), 500);
    for r in &recipes {
        assert!((0.0..=40.0).contains(&r.target_snr_db), "training SNR {}", r.target_snr_db);
        assert!((-35.0..=-15.0).contains(&r.target_rms_dbfs), "training RMS {}", r.target_rms_dbfs);
        assert_eq!(r.duration_s, 30.0);
    }

    let priorities = default_priority_categories();
    assert_eq!(priorities.len(), 12);
    let mut pool: Vec<(String, usize)> = priorities.iter().map(|c| (c.clone(), 20)).collect();
    pool.push(("street".to_string(), 45));
    pool.push(("office_other".to_string(), 45));
    pool.push(("cafe".to_string(), 45));
    let plan_noise = synthetic_noise_manifest(&pool, 11.0);
    let plan =
        corpus::build_test_plan(&plan_noise, &clean, &TestPlanParams::default(), None, 7).unwrap();

    assert_eq!(plan.recipes.len(), 300);
    for cat in &priorities {
        assert_eq!(plan.composition.get(cat), Some(&15), "category {cat}");
    }
    let random_total: usize = plan
        .composition
        .iter()
        .filter(|(c, _)| !priorities.contains(c))
        .map(|(_, n)| n)
        .sum();
    assert_eq!(random_total, 120);
    for r in &plan.recipes {
        assert!((0.0..=25.0).contains(&r.target_snr_db), "test SNR {}", r.target_snr_db);
    }
    println!(
        "criterion 4 pass: training draws stay in SNR [0,40] / RMS [-35,-15]; test plan is 12x15 + 120 with SNR [0,25]"
    );
}

#[test]
fn criterion_05_quartile_and_segmentation() {
    let mut values: Vec<f64> = (0..1000).map(|i| 1.0 + i as f64 * 0.003).collect();
    values.shuffle(&mut rng_for(55, 0));
    let chapters: Vec<ChapterScore> = values
        .iter()
        .enumerate()
        .map(|(i, &mos)| ChapterScore {
            chapter_id: format!("ch{i:04}"),
            mos,
            ci95: 0.0,
            rating_count: 10,
        })
        .collect();
    let selection = corpus::select_upper_quartile(&chapters).unwrap();
    assert_eq!(selection.selected.len(), 250);

    let chosen: HashSet<&str> = selection.selected.iter().map(String::as_str).collect();
    let min_selected = chapters
        .iter()
        .filter(|c| chosen.contains(c.chapter_id.as_str()))
        .map(|c| c.mos)
        .fold(f64::INFINITY, f64::min);
    let max_unselected = chapters
        .iter()
        .filter(|c| !chosen.contains(c.chapter_id.as_str()))
        .map(|c| c.mos)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(min_selected >= max_unselected, "{min_selected} < {max_unselected}");

    let clip = AudioClip::new(vec![0.25; (35.0 * 16_000.0) as usize], 16_000).unwrap();
    let segments = corpus::segment_clip(&clip, 10.0).unwrap();
    assert_eq!(segments.len(), 3);
    for s in &segments {
        assert_eq!(s.len(), 160_000);
    }
    println!(
        "criterion 5 pass: 1000 chapters -> 250 selected with min(selected MOS) >= max(rest); 35 s clip -> 3 segments of 10 s"
    );
}

#[test]
fn criterion_06_balancing_oracle() {
    for instance in 0..200u64 {
        let mut rng = rng_for(66, instance);
        let n_clips = rng.random_range(1..=20usize);
        let n_classes = rng.random_range(1..=5usize);
        let quota = rng.random_range(1..=8usize);
        let class_names: Vec<String> = (0..n_classes).map(|c| format!("k{c}")).collect();

        let records: Vec<ClipRecord> = (0..n_clips)
            .map(|i| {
                let mut labels: Vec<String> =
                    class_names.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
                if labels.is_empty() {
                    labels.push(class_names[rng.random_range(0..n_classes)].clone());
                }
                let id = format!("clip{i:02}");
                let mut r =
                    ClipRecord::new(&id, Path::new(&format!("{id}.wav")), ClipKind::Noise, 5.0);
                r.labels = labels;
                r
            })
            .collect();
        let manifest = Manifest::new(records.clone()).unwrap();
        let report = corpus::balance_classes(&manifest, quota, instance).unwrap();
        let selected: HashSet<&str> = report.selected.iter().map(String::as_str).collect();
        assert_eq!(selected.len(), report.selected.len(), "duplicate selection");

        // Exhaustive recount over every clip/label pair, independent of
        // the library's bookkeeping.
        let mut members: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for r in &records {
            for label in &r.labels {
                members.entry(label).or_default().push(&r.clip_id);
            }
        }
        assert_eq!(members.len(), report.per_class.len());
        for (class, ids) in &members {
            let available = ids.len();
            let picked = ids.iter().filter(|id| selected.contains(**id)).count();
            let stats = &report.per_class[*class];
            assert_eq!(stats.available, available);
            assert_eq!(stats.selected, picked);
            assert!(
                picked >= quota.min(available),
                "instance {instance}: class {class} got {picked}, needs {}",
                quota.min(available)
            );
            assert_eq!(stats.under_quota, available < quota);
        }
        for id in &report.selected {
            assert!(manifest.get(id).is_some(), "selected unknown clip {id}");
        }
    }
    println!(
        "criterion 6 pass: 200 random multi-label instances meet quota-or-availability for every class"
    );
}

#[test]
fn criterion_07_spearman_oracle() {
    fn oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let rank = |v: &[f64], i: usize| 1.0 + v.iter().filter(|&&a| a < v[i]).count() as f64;
        let d2: f64 = (0..x.len())
            .map(|i| {
                let d = rank(x, i) - rank(y, i);
                d * d
            })
            .sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    }

    let mut rng = rng_for(77, 0);
    for _ in 0..1000 {
        let n = rng.random_range(3..=50usize);
        let mut x: Vec<f64> = (1..=n).map(|v| v as f64).collect();
        let mut y = x.clone();
        x.shuffle(&mut rng);
        y.shuffle(&mut rng);

        let got = p808::spearman(&x, &y).unwrap();
        assert!((got - oracle(&x, &y)).abs() <= 1e-12, "spearman {got} vs oracle");

        let fx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let gy: Vec<f64> = y.iter().map(|v| v * 3.0 + 10.0).collect();
        let transformed = p808::spearman(&fx, &gy).unwrap();
        assert_eq!(got.to_bits(), transformed.to_bits(), "monotone transform changed rho");
    }

    let pinned = p808::spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
    assert!((pinned - 0.5).abs() < 1e-15, "pinned example gave {pinned}");
    println!(
        "criterion 7 pass: 1000 tie-free vectors within 1e-12 of the rank-formula oracle; monotone invariance exact; pinned example = 0.5"
    );
}

fn control_group(trap_expected: u8) -> GroupAssignment {
    GroupAssignment {
        group_id: "g00000".into(),
        clip_ids: (0..10).map(|i| format!("p{i}")).collect(),
        gold_position: 3,
        trap_position: 7,
        gold_expected: 4,
        trap_expected,
    }
}

#[test]
fn criterion_08_spam_filtering() {
    let mut rng = rng_for(88, 0);
    let mut filtered = 0usize;
    let trials = 10_000usize;
    for _ in 0..trials {
        let mut caught = false;
        for _ in 0..5 {
            let group = control_group(rng.random_range(1..=5));
            let mut responses: Vec<u8> = (0..10).map(|_| rng.random_range(1..=5)).collect();
            responses[group.gold_position] = group.gold_expected;
            responses[group.trap_position] = rng.random_range(1..=5);
            if p808::judge_group(&responses, &group, 1) != GroupVerdict::Accept {
                caught = true;
            }
        }
        if caught {
            filtered += 1;
        }
    }
    let rate = filtered as f64 / trials as f64;
    assert!(rate >= 0.98968, "random-trap raters filtered at {rate}, need >= 0.98968");

    for _ in 0..1000 {
        let group = control_group(rng.random_range(1..=5));
        let mut responses: Vec<u8> = (0..10).map(|_| rng.random_range(1..=5)).collect();
        let jitter: i16 = rng.random_range(-1..=1);
        responses[group.gold_position] = (group.gold_expected as i16 + jitter) as u8;
        responses[group.trap_position] = group.trap_expected;
        assert_eq!(
            p808::judge_group(&responses, &group, 1),
            GroupVerdict::Accept,
            "honest rater filtered"
        );
    }
    println!(
        "criterion 8 pass: uniform-random trap answers over 5 groups filtered in {:.3}% of {trials} trials (theory 99.968%); honest raters never filtered",
        rate * 100.0
    );
}

#[test]
fn criterion_09_mos_ci() {
    let (mos, ci) = p808::mos_ci(&[3, 4, 5]).unwrap();
    assert_eq!(mos, 4.0);
    assert!((ci - 2.484).abs() <= 0.001, "ci {ci}");

    for scores in [vec![4u8; 4], vec![1u8; 2], vec![5u8; 9]] {
        let (_, ci) = p808::mos_ci(&scores).unwrap();
        assert_eq!(ci, 0.0, "zero-variance set has ci {ci}");
    }
    println!("criterion 9 pass: {{3,4,5}} -> (4.0, 2.484 +/- 0.001); zero-variance sets -> CI 0");
}

#[test]
fn criterion_10_causality_probe() {
    let constraints = StreamConstraints::new(20, 40).unwrap();
    let frame = constraints.frame_samples(16_000);
    let mut flagged_60 = 0usize;
    let mut flagged_40 = 0usize;
    let mut flagged_pass = 0usize;
    for seed in 0..50u64 {
        let mut over = WindowAverager::new(frame, 3);
        if !rtcheck::probe_lookahead(&mut over, &constraints, 1, 2.0, seed).unwrap().passed() {
            flagged_60 += 1;
        }
        let mut exact = WindowAverager::new(frame, 2);
        if !rtcheck::probe_lookahead(&mut exact, &constraints, 1, 2.0, seed).unwrap().passed() {
            flagged_40 += 1;
        }
        let mut passthrough = Passthrough::new(frame);
        if !rtcheck::probe_lookahead(&mut passthrough, &constraints, 1, 2.0, seed)
            .unwrap()
            .passed()
        {
            flagged_pass += 1;
        }
    }
    assert_eq!(flagged_60, 50, "60 ms fixture escaped the probe");
    assert_eq!(flagged_40, 0, "exactly-40 ms fixture wrongly flagged");
    assert_eq!(flagged_pass, 0, "passthrough wrongly flagged");
    println!(
        "criterion 10 pass: 60 ms lookahead flagged 50/50; exactly-40 ms and passthrough flagged 0/50"
    );
}

#[test]
fn criterion_11_budget_harness() {
    let constraints = StreamConstraints::new(20, 0).unwrap();
    assert_eq!(constraints.budget_ms(), 10.0);
    let clip = AudioClip::new(vec![0.1; 110 * 320], 16_000).unwrap();
    for run in 0..5 {
        let mut slow = Sleeper::new(320, 15);
        let report = rtcheck::measure_budget(&mut slow, &clip, &constraints, 10).unwrap();
        assert!(!report.pass, "run {run}: 15 ms sleeper passed at {} ms", report.mean_ms);

        let mut fast = Sleeper::new(320, 1);
        let report = rtcheck::measure_budget(&mut fast, &clip, &constraints, 10).unwrap();
        assert!(report.pass, "run {run}: 1 ms sleeper failed at {} ms", report.mean_ms);
    }
    println!(
        "criterion 11 pass: 15 ms sleeper fails and 1 ms sleeper passes the 10 ms budget in 5/5 runs"
    );
}

fn entry(id: &str, mos: f64, params: u64, per_frame_ms: f64) -> SubmissionEntry {
    SubmissionEntry { entry_id: id.into(), mos, param_count: params, per_frame_ms, track: 1 }
}

fn complexity(e: &SubmissionEntry) -> (u64, u64, String) {
    (e.param_count, e.per_frame_ms.to_bits(), e.entry_id.clone())
}

/// Independent fixpoint search: canonical MOS-descending start, then
/// repeatedly swap the leftmost adjacent near-tie complexity inversion
/// and rescan from the start.
fn oracle_rank(entries: &[SubmissionEntry]) -> Vec<SubmissionEntry> {
    let mut v = entries.to_vec();
    v.sort_by(|a, b| {
        b.mos.partial_cmp(&a.mos).unwrap().then_with(|| a.entry_id.cmp(&b.entry_id))
    });
    'search: loop {
        for i in 0..v.len().saturating_sub(1) {
            if (v[i].mos - v[i + 1].mos).abs() < 0.1 && complexity(&v[i + 1]) < complexity(&v[i]) {
                v.swap(i, i + 1);
                continue 'search;
            }
        }
        return v;
    }
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

#[test]
fn criterion_12_ranking_oracle() {
    let fixture_sets: Vec<Vec<SubmissionEntry>> = vec![
        // The pinned near-tie plus a spread of gaps and chains.
        vec![
            entry("A", 3.50, 5_000_000, 2.0),
            entry("B", 3.45, 1_000_000, 2.0),
            entry("C", 4.20, 9_000_000, 3.0),
            entry("D", 2.00, 100_000, 0.5),
            entry("E", 3.38, 2_000_000, 1.0),
            entry("F", 3.30, 500_000, 1.0),
        ],
        // One flat tie: complexity alone decides.
        vec![
            entry("u", 3.0, 6, 1.0),
            entry("v", 3.0, 5, 1.0),
            entry("w", 3.0, 4, 1.0),
            entry("x", 3.0, 3, 1.0),
            entry("y", 3.0, 2, 1.0),
            entry("z", 3.0, 1, 1.0),
        ],
        // A 0.05-step chain where near-ties overlap but don't close.
        vec![
            entry("p0", 3.00, 4, 1.0),
            entry("p1", 2.95, 6, 1.0),
            entry("p2", 2.90, 1, 1.0),
            entry("p3", 2.85, 5, 1.0),
            entry("p4", 2.80, 2, 1.0),
            entry("p5", 2.75, 3, 1.0),
        ],
        // Equal parameter counts: per-frame time, then id, break ties.
        vec![
            entry("m0", 3.52, 7, 0.9),
            entry("m1", 3.47, 7, 0.3),
            entry("m2", 3.44, 7, 0.3),
            entry("m3", 3.60, 7, 2.0),
            entry("m4", 2.90, 7, 0.1),
            entry("m5", 2.88, 7, 0.1),
        ],
    ];

    let mut permutations_checked = 0usize;
    for set in &fixture_sets {
        let expected = oracle_rank(set);
        for perm in permutations(set) {
            let ranked = rtcheck::rank(&perm).unwrap();
            assert_eq!(ranked, expected, "permutation diverged from oracle");
            permutations_checked += 1;
        }
        // The reached order really is a fixpoint.
        for w in expected.windows(2) {
            let near = (w[0].mos - w[1].mos).abs() < 0.1;
            assert!(!(near && complexity(&w[1]) < complexity(&w[0])), "not a fixpoint");
        }
    }

    let pinned = rtcheck::rank(&[entry("A", 3.50, 5_000_000, 1.0), entry("B", 3.45, 1_000_000, 1.0)])
        .unwrap();
    assert_eq!(pinned[0].entry_id, "B");
    println!(
        "criterion 12 pass: rank matches the fixpoint oracle on {permutations_checked} permutations across {} fixture sets; B outranks A in the pinned case",
        fixture_sets.len()
    );
}

fn fabricate_disk_corpus(dir: &Path) -> PipelineConfig {
    let mut records = Vec::new();
    for i in 0..4u64 {
        let id = format!("sp{i:02}");
        let rel = format!("{id}.wav");
        wav::write_wav(&siggen::speech_like(3.0, 300 + i), &dir.join(&rel)).unwrap();
        let mut r = ClipRecord::new(&id, Path::new(&rel), ClipKind::Clean, 3.0);
        r.speaker_id = Some(format!("spk{i}"));
        records.push(r);
    }
    Manifest::new(records).unwrap().write_csv(&dir.join("clean.csv")).unwrap();

    let mut records = Vec::new();
    let categories = ["alpha", "alpha", "alpha", "beta", "beta", "beta", "gamma", "gamma"];
    for (i, category) in categories.iter().enumerate() {
        let id = format!("nz{i:02}");
        let rel = format!("{id}.wav");
        wav::write_wav(&siggen::noise_like(3.0, 400 + i as u64), &dir.join(&rel)).unwrap();
        let mut r = ClipRecord::new(&id, Path::new(&rel), ClipKind::Noise, 3.0);
        r.labels = vec![category.to_string()];
        r.category = Some(category.to_string());
        records.push(r);
    }
    Manifest::new(records).unwrap().write_csv(&dir.join("noise.csv")).unwrap();

    let mut config = PipelineConfig::default();
    config.master_seed = 17;
    config.paths.clean_manifest = Some(dir.join("clean.csv"));
    config.paths.noise_manifest = Some(dir.join("noise.csv"));
    config.synthesis.count = 4;
    config.synthesis.duration_s = 2.0;
    config.test_plan.priority_categories = vec!["alpha".into(), "beta".into()];
    config.test_plan.per_category = 2;
    config.test_plan.random_count = 2;
    config.test_plan.duration_s = 2.0;
    config
}

fn dir_snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn criterion_13_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fabricate_disk_corpus(tmp.path());

    let synth_a = tmp.path().join("synth_a");
    let synth_b = tmp.path().join("synth_b");
    let report = pipeline::cmd_synthesize(&config, None, &synth_a, false, None).unwrap();
    assert!(report.failures.is_empty());
    pipeline::cmd_synthesize(&config, None, &synth_b, false, Some(4)).unwrap();
    let snap_a = dir_snapshot(&synth_a);
    let snap_b = dir_snapshot(&synth_b);
    assert_eq!(
        snap_a.keys().collect::<Vec<_>>(),
        snap_b.keys().collect::<Vec<_>>(),
        "synthesize reruns produced different file sets"
    );
    let mut synth_files = 0usize;
    for (name, bytes) in &snap_a {
        assert_eq!(bytes, &snap_b[name], "synthesize rerun differs in {name}");
        synth_files += 1;
    }

    let plan_a = tmp.path().join("plan_a");
    let plan_b = tmp.path().join("plan_b");
    pipeline::cmd_build_testset(&config, &plan_a, false).unwrap();
    pipeline::cmd_build_testset(&config, &plan_b, false).unwrap();
    let snap_a = dir_snapshot(&plan_a);
    let snap_b = dir_snapshot(&plan_b);
    assert_eq!(snap_a.keys().collect::<Vec<_>>(), snap_b.keys().collect::<Vec<_>>());
    let mut plan_files = 0usize;
    for (name, bytes) in &snap_a {
        assert_eq!(bytes, &snap_b[name], "build-testset rerun differs in {name}");
        plan_files += 1;
    }

    println!(
        "criterion 13 pass: synthesize ({synth_files} files) and build-testset ({plan_files} files) reruns are byte-identical"
    );
}
