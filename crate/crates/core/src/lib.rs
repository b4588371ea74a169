//! Deterministic tooling for building noisy-speech corpora and judging
//! the systems trained on them: segmental-SNR mixing with loudness
//! targets and optional reverb, corpus curation and multi-label noise
//! balancing, crowdsourced MOS aggregation with spam filtering, and a
//! real-time constraint harness with causality probing and final
//! ranking.
//!
//! Everything is seeded: one master seed determines every recipe, every
//! group assignment, and every probe signal, so two runs with the same
//! inputs produce byte-identical artifacts.
//!
//! The `examples/` directory is the front door; each example is a
//! self-contained run of one capability on fabricated data:
//!
//! - `synthesize_training_batch`: seeded recipes to WAV triples with a
//!   results manifest.
//! - `build_test_plan`: the 12x15 + 120 category-stratified test set.
//! - `filter_clean_corpus`: chapter MOS, quartile selection, speaker
//!   pruning, segmentation.
//! - `balance_noise_classes`: greedy multi-label balancing.
//! - `score_listening_session`: group assignment, gold/trap filtering,
//!   MOS with confidence intervals, rank correlation.
//! - `verify_realtime_processor`: compute budget and lookahead probes.
//! - `rank_submissions`: MOS ranking with the near-tie complexity rule.
//!
//! A thin `noiseforge` binary wraps the same operations as subcommands
//! for batch use.

pub mod activity;
pub mod audio;
pub mod config;
pub mod corpus;
pub mod error;
pub mod manifest;
pub mod p808;
pub mod pipeline;
pub mod rtcheck;
pub mod seed;
pub mod siggen;
pub mod synth;
pub mod wav;

pub use audio::{AudioClip, CANONICAL_SAMPLE_RATE};
pub use error::{Error, Result};
