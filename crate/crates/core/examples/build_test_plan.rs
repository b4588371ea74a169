//! Assembles the category-stratified synthetic test plan: a fixed draw
//! from each priority noise category plus a random draw over the rest,
//! with every recipe carrying its own seed, SNR, and level target. The
//! reverberant variant additionally pairs each recipe with an impulse
//! response whose decay falls inside the configured window.

use noiseforge::corpus::{self, TestPlanParams};
use noiseforge::manifest::{ClipKind, ClipRecord, Manifest};
use noiseforge::synth::{self, RirMeta};
use noiseforge::siggen;
use std::fs;
use std::path::{Path, PathBuf};

fn main() -> noiseforge::Result<()> {
    let mut clean_records = Vec::new();
    for i in 0..6 {
        clean_records.push(ClipRecord::new(
            &format!("reader{i}"),
            Path::new(&format!("clean/reader{i}.wav")),
            ClipKind::Clean,
            12.0,
        ));
    }
    let clean = Manifest::new(clean_records)?;

    let mut noise_records = Vec::new();
    let categories = [("typing", 4), ("babble", 4), ("traffic", 5), ("rain", 3)];
    for (category, count) in categories {
        for i in 0..count {
            let mut r = ClipRecord::new(
                &format!("{category}{i}"),
                Path::new(&format!("noise/{category}{i}.wav")),
                ClipKind::Noise,
                9.0,
            );
            r.category = Some(category.to_string());
            noise_records.push(r);
        }
    }
    let noise = Manifest::new(noise_records)?;

    let params = TestPlanParams {
        priority_categories: vec!["typing".into(), "babble".into()],
        per_category: 3,
        random_count: 4,
        duration_s: 8.0,
        ..TestPlanParams::default()
    };

    let plan = corpus::build_test_plan(&noise, &clean, &params, None, 17)?;
    println!("{:?} plan, {} recipes", plan.variant, plan.recipes.len());
    for (category, count) in &plan.composition {
        println!("  {category}: {count}");
    }
    for recipe in plan.recipes.iter().take(3) {
        println!(
            "  {} mixes {:?} with {:?} at {:.1} dB SNR",
            recipe.recipe_id, recipe.clean_clip_ids, recipe.noise_clip_ids, recipe.target_snr_db
        );
    }

    // The reverberant variant draws from an impulse response pool; decay
    // outside the window disqualifies a response.
    let rirs: Vec<RirMeta> = [200.0, 450.0, 900.0, 1800.0]
        .iter()
        .enumerate()
        .map(|(i, &rt60)| {
            let impulse = siggen::impulse_response(rt60, 70 + i as u64);
            let rt60_ms = synth::estimate_rt60_ms(&impulse)?;
            Ok(RirMeta { rir_id: format!("room{i}"), impulse, rt60_ms })
        })
        .collect::<noiseforge::Result<_>>()?;
    let reverb = corpus::build_test_plan(&noise, &clean, &params, Some(&rirs), 17)?;
    let with_rir = reverb.recipes.iter().filter(|r| r.rir_id.is_some()).count();
    println!("{:?} plan: {with_rir} of {} recipes carry a room", reverb.variant, reverb.recipes.len());

    let out = PathBuf::from("target/example-output/build_test_plan");
    fs::create_dir_all(&out)?;
    corpus::write_plan_jsonl(&out.join("plan.jsonl"), &plan.recipes)?;
    corpus::write_plan_jsonl(&out.join("plan_reverb.jsonl"), &reverb.recipes)?;
    println!("plans written under {}", out.display());
    Ok(())
}
