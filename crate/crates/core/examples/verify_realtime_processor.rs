//! Checks frame processors against the streaming rules: per-frame compute
//! must stay under half the frame duration, and output may depend on at
//! most the declared lookahead. The causality probe is black box, so a
//! processor that quietly reads further ahead than it declares is caught
//! by its output bits, and an external command speaking the stdin/stdout
//! frame protocol is caught by its buffering depth.

use noiseforge::rtcheck::{
    self, fixtures, FrameProcessor, ProbeOutcome, StreamConstraints,
};
use noiseforge::siggen;

fn check(name: &str, proc: &mut dyn FrameProcessor, constraints: &StreamConstraints) {
    let probe = rtcheck::probe_lookahead(proc, constraints, 10, 2.0, 5).expect("probe runs");
    let verdict = match probe {
        ProbeOutcome::Pass => "causal within declaration".to_string(),
        ProbeOutcome::Violation { trial, first_frame } => {
            format!("VIOLATION (trial {trial}, output frame {first_frame})")
        }
        ProbeOutcome::Stall { exchange } => format!("VIOLATION (stalled at exchange {exchange})"),
    };
    println!("{name:<34} {verdict}");
}

fn main() -> noiseforge::Result<()> {
    // Track rules: 20 ms frames, up to 40 ms lookahead, 10 ms budget.
    let constraints = StreamConstraints::new(20, 40)?;
    let frame_len = constraints.frame_samples(16_000);
    println!(
        "declared: {} ms frames, {} ms lookahead, budget {} ms per frame",
        constraints.frame_ms,
        constraints.lookahead_ms,
        constraints.budget_ms()
    );
    println!();

    check("passthrough", &mut fixtures::Passthrough::new(frame_len), &constraints);
    check(
        "averager over 2 future frames (40 ms)",
        &mut fixtures::WindowAverager::new(frame_len, 2),
        &constraints,
    );
    check(
        "averager over 3 future frames (60 ms)",
        &mut fixtures::WindowAverager::new(frame_len, 3),
        &constraints,
    );

    println!();
    let clip = siggen::noise_like(2.5, 9);
    for (name, sleep_ms) in [("fast model (2 ms/frame)", 2), ("slow model (12 ms/frame)", 12)] {
        let mut proc = fixtures::Sleeper::new(frame_len, sleep_ms);
        let timing = rtcheck::measure_budget(&mut proc, &clip, &constraints, 5)?;
        println!(
            "{name:<34} mean {:>6.2} ms, p95 {:>6.2} ms -> {} (track {})",
            timing.mean_ms,
            timing.p95_ms,
            if timing.pass { "pass" } else { "over budget" },
            rtcheck::classify_track(&constraints, &timing)
        );
    }

    println!();
    println!("external processors run the same checks through the CLI:");
    println!("  noiseforge verify-rt -- <your-command>");
    println!("where the command prints `frame_ms=<int> lookahead_ms=<int>` and");
    println!("then exchanges raw little-endian f32 frames on stdin/stdout.");
    Ok(())
}
