//! Balances a multi-label noise library: every class should end up with a
//! quota of selected clips, a clip counts toward every label it carries,
//! and classes with too few clips are reported rather than failed.

use noiseforge::corpus;
use noiseforge::manifest::{ClipKind, ClipRecord, Manifest};
use std::path::Path;

fn main() -> noiseforge::Result<()> {
    let inventory: &[(&str, &[&str])] = &[
        ("kitchen0", &["dishes", "appliance"]),
        ("kitchen1", &["dishes"]),
        ("kitchen2", &["dishes", "speech_babble"]),
        ("office0", &["typing", "appliance"]),
        ("office1", &["typing"]),
        ("office2", &["typing", "speech_babble"]),
        ("street0", &["traffic"]),
        ("street1", &["traffic", "siren"]),
        ("street2", &["traffic"]),
        ("cafe0", &["speech_babble", "dishes"]),
    ];
    let records: Vec<ClipRecord> = inventory
        .iter()
        .map(|(clip_id, labels)| {
            let mut r = ClipRecord::new(
                clip_id,
                Path::new(&format!("noise/{clip_id}.wav")),
                ClipKind::Noise,
                10.0,
            );
            r.labels = labels.iter().map(|l| l.to_string()).collect();
            r
        })
        .collect();
    let manifest = Manifest::new(records)?;

    let report = corpus::balance_classes(&manifest, 2, 23)?;
    println!("selected {} of {} clips:", report.selected.len(), manifest.len());
    println!("  {:?}", report.selected);
    println!();
    println!("class           available  quota  selected  short");
    for (class, stats) in &report.per_class {
        println!(
            "{:<16} {:>8} {:>6} {:>9}  {}",
            class,
            stats.available,
            stats.quota,
            stats.selected,
            if stats.under_quota { "yes" } else { "" }
        );
    }
    println!();
    println!("multi-label clips satisfy several quotas at once, so the");
    println!("selection stays well under classes x quota");
    Ok(())
}
