//! Orders challenge submissions: MOS decides, but a gap under 0.1 is
//! within the rating noise floor, so near-ties resolve toward the model
//! with fewer parameters and less compute.

use noiseforge::rtcheck::{self, SubmissionEntry};

fn entry(entry_id: &str, mos: f64, param_count: u64, per_frame_ms: f64) -> SubmissionEntry {
    SubmissionEntry { entry_id: entry_id.to_string(), mos, param_count, per_frame_ms, track: 1 }
}

fn main() -> noiseforge::Result<()> {
    let submissions = vec![
        entry("big_ensemble", 3.52, 48_000_000, 8.1),
        entry("lean_crn", 3.47, 1_800_000, 1.9),
        entry("midsize_gru", 3.46, 6_200_000, 3.0),
        entry("tiny_dsp", 3.21, 90_000, 0.3),
        entry("baseline_ns", 3.20, 1_200_000, 0.9),
        entry("unprocessed", 2.63, 0, 0.0),
    ];

    println!("submitted (MOS order):");
    for e in &submissions {
        println!(
            "  {:<14} mos {:.2}  {:>10} params  {:>4.1} ms/frame",
            e.entry_id, e.mos, e.param_count, e.per_frame_ms
        );
    }

    let ranked = rtcheck::rank(&submissions)?;
    println!();
    println!("final ranking:");
    for (i, e) in ranked.iter().enumerate() {
        println!(
            "  {}. {:<14} mos {:.2}  {:>10} params  {:>4.1} ms/frame",
            i + 1,
            e.entry_id,
            e.mos,
            e.param_count,
            e.per_frame_ms
        );
    }
    println!();
    println!("big_ensemble, lean_crn, and midsize_gru sit within 0.1 MOS of");
    println!("each other, so the two smaller models pass the ensemble; the");
    println!("0.25 gap down to tiny_dsp is real and stays put");
    Ok(())
}
