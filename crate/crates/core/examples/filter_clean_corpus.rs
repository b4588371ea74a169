//! Curates a read-aloud corpus the way the clean side of the dataset was
//! built: pool ratings per chapter, keep the top quartile by MOS, drop
//! speakers with too little surviving material, and cut the remainder
//! into fixed-length segments.

use noiseforge::corpus;
use noiseforge::manifest::{ClipKind, ClipRecord, Manifest};
use noiseforge::seed::rng_for;
use noiseforge::siggen;
use rand::Rng;
use std::path::Path;

fn main() -> noiseforge::Result<()> {
    // Eight chapters of descending intrinsic quality, two clips each,
    // spread over four speakers.
    let mut records = Vec::new();
    let mut chapters = Vec::new();
    for c in 0..8 {
        let chapter_id = format!("ch{c}");
        let quality = 4.8 - 0.4 * c as f64;
        let mut clip_ratings = Vec::new();
        for k in 0..2 {
            let mut rng = rng_for(900, (c * 2 + k) as u64);
            let scores: Vec<u8> = (0..5)
                .map(|_| (quality + rng.random_range(-0.8..0.8)).round().clamp(1.0, 5.0) as u8)
                .collect();
            clip_ratings.push(scores);

            let mut r = ClipRecord::new(
                &format!("ch{c}_clip{k}"),
                Path::new(&format!("clean/ch{c}_clip{k}.wav")),
                ClipKind::Clean,
                31.0,
            );
            r.speaker_id = Some(format!("spk{}", c / 2));
            r.chapter_id = Some(chapter_id.clone());
            records.push(r);
        }
        chapters.push(corpus::chapter_mos(&chapter_id, &clip_ratings)?);
    }

    let selection = corpus::select_upper_quartile(&chapters)?;
    println!("chapter MOS (threshold {:.2}):", selection.threshold_mos);
    for ch in &chapters {
        let mark = if selection.selected.contains(&ch.chapter_id) { "kept" } else { "    " };
        println!(
            "  {}  mos {:.2} +- {:.2} over {} ratings  {}",
            ch.chapter_id, ch.mos, ch.ci95, ch.rating_count, mark
        );
    }

    let manifest = Manifest::new(records)?;
    let surviving: Vec<ClipRecord> = manifest
        .records()
        .iter()
        .filter(|r| {
            r.chapter_id.as_deref().is_some_and(|c| selection.selected.iter().any(|s| s == c))
        })
        .cloned()
        .collect();
    // 62 s per surviving speaker here; a 90 s floor would empty the corpus.
    let pruned = corpus::prune_speakers(&Manifest::new(surviving)?, 60.0)?;
    println!(
        "{} clips survive chapter selection and the 60 s speaker floor",
        pruned.len()
    );

    let clip = siggen::speech_like(31.0, 4);
    let segments = corpus::segment_clip(&clip, 10.0)?;
    println!(
        "a {:.0} s clip yields {} segments of 10 s; the remainder is dropped",
        clip.duration_seconds(),
        segments.len()
    );
    Ok(())
}
