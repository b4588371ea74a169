use clap::{Parser, Subcommand};
use noiseforge::config::PipelineConfig;
use noiseforge::pipeline;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "noiseforge", version, about = "Noisy-speech corpus synthesis, rating aggregation, and real-time constraint checking")]
struct Cli {
    /// TOML config file; built-in defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overwrite a non-empty output directory
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads for parallel stages
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mix recipes into noisy/clean/noise WAV triples with a results manifest
    Synthesize {
        /// Recipe plan in JSON lines; omitted means seeded training recipes from the config
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Build the category-stratified synthetic test-set plan
    BuildTestset,
    /// Keep top-rated chapters, prune thin speakers, segment the survivors
    FilterCorpus {
        /// Rating export over the clean corpus (rater_id,clip_id,group_id,score,timestamp)
        #[arg(long)]
        ratings: PathBuf,
    },
    /// Select a noise subset meeting the per-class quota
    BalanceNoise,
    /// Filter a rating export against its group assignments and compute MOS
    AggregateRatings {
        #[arg(long)]
        ratings: PathBuf,

        /// Group assignments in JSON lines, as produced when the session was planned
        #[arg(long)]
        assignments: PathBuf,

        /// Optional clip-to-condition map (clip_id,condition) for pooled MOS
        #[arg(long)]
        conditions: Option<PathBuf>,
    },
    /// Check an external processor against the streaming rules
    VerifyRt {
        /// Processor command line; it must print the declaration header and echo frames
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, required = true)]
        processor: Vec<String>,
    },
    /// Order submissions by MOS, breaking near-ties toward the simpler model
    Rank {
        #[arg(long)]
        entries: PathBuf,
    },
    /// Run a built-in fixture as the child side of the frame protocol
    RunFixture {
        /// passthrough, sleeper, or averager
        #[arg(long)]
        kind: String,

        #[arg(long, default_value_t = 20)]
        frame_ms: u32,

        /// Lookahead the fixture declares, not necessarily what it uses
        #[arg(long, default_value_t = 0)]
        lookahead_ms: u32,

        /// Sleeper only: wall-clock milliseconds burned per frame
        #[arg(long, default_value_t = 0)]
        sleep_ms: u64,

        /// Averager only: future frames folded into each output frame
        #[arg(long, default_value_t = 0)]
        window_frames: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> noiseforge::Result<i32> {
    if let Command::RunFixture { kind, frame_ms, lookahead_ms, sleep_ms, window_frames } =
        &cli.command
    {
        pipeline::run_fixture(kind, *frame_ms, *lookahead_ms, *sleep_ms, *window_frames)?;
        return Ok(0);
    }

    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    let out = cli.out.clone().unwrap_or_else(|| config.paths.out_dir.clone());

    match &cli.command {
        Command::RunFixture { .. } => unreachable!("handled above"),
        Command::Synthesize { plan } => {
            let report =
                pipeline::cmd_synthesize(&config, plan.as_deref(), &out, cli.force, cli.jobs)?;
            println!(
                "synthesized {} of {} recipes into {} (seed {})",
                report.rows.len(),
                report.rows.len() + report.failures.len(),
                out.display(),
                config.master_seed
            );
            println!("results manifest: {}", report.results_path.display());
            for f in &report.failures {
                eprintln!("recipe {} failed: {}", f.recipe_id, f.message);
            }
            Ok(if report.failures.is_empty() { 0 } else { 1 })
        }
        Command::BuildTestset => {
            let report = pipeline::cmd_build_testset(&config, &out, cli.force)?;
            println!(
                "planned {} recipes into {} (seed {})",
                report.recipe_count,
                report.plan_path.display(),
                config.master_seed
            );
            for (category, count) in &report.composition {
                println!("  {category}: {count}");
            }
            Ok(0)
        }
        Command::FilterCorpus { ratings } => {
            let report = pipeline::cmd_filter_corpus(&config, ratings, &out, cli.force)?;
            println!(
                "kept {} of {} chapters, {} speakers, wrote {} segments",
                report.chapters_selected,
                report.chapters_total,
                report.speakers_kept,
                report.segments_written
            );
            println!("curated manifest: {}", report.manifest_path.display());
            Ok(0)
        }
        Command::BalanceNoise => {
            let report = pipeline::cmd_balance_noise(&config, &out, cli.force)?;
            println!("selected {} clips into {}", report.selected, report.manifest_path.display());
            for class in &report.under_quota {
                eprintln!("class {class} is under quota");
            }
            Ok(0)
        }
        Command::AggregateRatings { ratings, assignments, conditions } => {
            let report = pipeline::cmd_aggregate(
                &config,
                ratings,
                assignments,
                conditions.as_deref(),
                &out,
                cli.force,
            )?;
            println!(
                "accepted {} ratings, rejected {} group sessions from {} raters",
                report.accepted, report.rejections, report.rejected_raters
            );
            println!("clip summaries: {}", report.clip_summaries);
            if let Some(n) = report.condition_summaries {
                println!("condition summaries: {n}");
            }
            if report.rate_limit_violations > 0 {
                eprintln!("rate limit violations: {}", report.rate_limit_violations);
            }
            Ok(0)
        }
        Command::VerifyRt { processor } => {
            let report = pipeline::cmd_verify(&config, processor, Some(&out))?;
            println!(
                "declared frame {} ms, lookahead {} ms (budget {} ms)",
                report.declared.frame_ms,
                report.declared.lookahead_ms,
                report.declared.budget_ms()
            );
            match report.probe {
                noiseforge::rtcheck::ProbeOutcome::Pass => println!("causality: pass"),
                noiseforge::rtcheck::ProbeOutcome::Violation { trial, first_frame } => println!(
                    "causality: VIOLATION at trial {trial}, output frame {first_frame} depends on samples past the declared lookahead"
                ),
                noiseforge::rtcheck::ProbeOutcome::Stall { exchange } => println!(
                    "causality: VIOLATION at exchange {exchange}, processor buffers more input than its declared lookahead"
                ),
            }
            match &report.timing {
                Some(t) => println!(
                    "timing: mean {:.3} ms, p95 {:.3} ms, max {:.3} ms over {} frames -> {}",
                    t.mean_ms,
                    t.p95_ms,
                    t.max_ms,
                    t.frames_timed,
                    if t.pass { "pass" } else { "FAIL" }
                ),
                None => println!("timing: skipped (causality already failed)"),
            }
            println!("track: {}", report.track);
            Ok(if report.compliant() { 0 } else { 1 })
        }
        Command::Rank { entries } => {
            let ranked = pipeline::cmd_rank(entries, Some(&out))?;
            for (i, e) in ranked.iter().enumerate() {
                println!(
                    "{:>3}. {} mos {:.2} params {} time {:.3} ms",
                    i + 1,
                    e.entry_id,
                    e.mos,
                    e.param_count,
                    e.per_frame_ms
                );
            }
            Ok(0)
        }
    }
}
