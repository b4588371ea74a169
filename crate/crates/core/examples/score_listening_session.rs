//! Runs a crowdsourced listening session offline: assemble rating groups
//! with hidden gold and trap clips, simulate honest raters plus one
//! click-through spammer, void every session that misses a control, and
//! aggregate the survivors into per-clip MOS.

use noiseforge::p808::{self, ControlClip, RatingRecord};
use noiseforge::seed::rng_for;
use rand::Rng;

fn main() -> noiseforge::Result<()> {
    let clip_ids: Vec<String> = (0..12).map(|i| format!("c{i:02}")).collect();
    let true_quality: Vec<f64> = (0..12).map(|i| 1.5 + 0.3 * i as f64).collect();
    let quality_of = |clip: &str| true_quality[clip[1..].parse::<usize>().unwrap()];

    let groups = p808::build_groups(
        &clip_ids,
        2,
        6,
        &[ControlClip::new("gold_reference", 5)],
        &[ControlClip::new("trap_silence", 1)],
        31,
    )?;
    println!("{} groups of 6 (4 real clips, 1 gold, 1 trap each)", groups.len());

    let mut records = Vec::new();
    let mut ts = 0u64;
    for (gi, group) in groups.iter().enumerate() {
        for rater_id in ["ann", "ben", "lazy"] {
            for (pos, clip_id) in group.clip_ids.iter().enumerate() {
                let score = if rater_id == "lazy" {
                    4
                } else if pos == group.gold_position {
                    group.gold_expected
                } else if pos == group.trap_position {
                    group.trap_expected
                } else {
                    let mut rng = rng_for(77, (gi * 100 + pos) as u64);
                    let jitter: f64 = rng.random_range(-0.7..0.7);
                    (quality_of(clip_id) + jitter).round().clamp(1.0, 5.0) as u8
                };
                records.push(RatingRecord {
                    rater_id: rater_id.to_string(),
                    clip_id: clip_id.clone(),
                    group_id: group.group_id.clone(),
                    score,
                    timestamp: ts,
                });
                ts += 1;
            }
        }
    }

    let (accepted, rejections) = p808::filter_ratings(&records, &groups, 1)?;
    println!(
        "{} raw ratings -> {} accepted, {} sessions voided (raters: {:?})",
        records.len(),
        accepted.len(),
        rejections.len(),
        p808::rejected_raters(&rejections)
    );

    let summaries = p808::clip_mos(&accepted)?;
    println!();
    println!("clip   true   mos    ci95   n");
    for s in &summaries {
        println!(
            "{}   {:.2}   {:.2}   {:.2}   {}",
            s.subject_id,
            quality_of(&s.subject_id),
            s.mos,
            s.ci95,
            s.n
        );
    }

    let mos: Vec<f64> = summaries.iter().map(|s| s.mos).collect();
    let truth: Vec<f64> = summaries.iter().map(|s| quality_of(&s.subject_id)).collect();
    println!();
    println!("spearman against true quality: {:.3}", p808::spearman(&mos, &truth)?);
    Ok(())
}
