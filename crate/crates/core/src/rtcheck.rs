//! Real-time submission harness: per-frame compute budget, lookahead
//! causality probing, and final ranking with the near-tie complexity rule.
//!
//! The causality probe is black-box: it runs the processor twice on
//! signals that agree up to the last sample the processor is allowed to
//! see for frame t, and demands bit-identical output up to t. Timing is
//! wall-clock per process call with warmup excluded.

use crate::audio::{AudioClip, CANONICAL_SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::seed::rng_for;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

pub const DEFAULT_PROBE_TRIALS: usize = 50;
pub const DEFAULT_PROBE_SIGNAL_SECONDS: f64 = 2.0;
pub const DEFAULT_WARMUP_FRAMES: usize = 10;
pub const MIN_TIMED_FRAMES: usize = 100;
pub const MAX_TRACK1_FRAME_MS: u32 = 40;
pub const MAX_TRACK1_LOOKAHEAD_MS: u32 = 40;
pub const DEFAULT_REPLY_TIMEOUT_MS: u64 = 2_000;

pub const ENTRIES_HEADER: [&str; 5] = ["entry_id", "mos", "param_count", "per_frame_ms", "track"];

/// The streaming contract a submission declares: frame size T and how far
/// past the current frame it may look. The compute budget is T/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamConstraints {
    pub frame_ms: u32,
    pub lookahead_ms: u32,
}

impl StreamConstraints {
    pub fn new(frame_ms: u32, lookahead_ms: u32) -> Result<StreamConstraints> {
        if frame_ms == 0 {
            return Err(Error::InvalidArgument("frame_ms must be positive".into()));
        }
        Ok(StreamConstraints { frame_ms, lookahead_ms })
    }

    pub fn budget_ms(&self) -> f64 {
        self.frame_ms as f64 / 2.0
    }

    pub fn frame_samples(&self, sample_rate: u32) -> usize {
        (sample_rate as u64 * self.frame_ms as u64 / 1000) as usize
    }

    pub fn lookahead_samples(&self, sample_rate: u32) -> usize {
        (sample_rate as u64 * self.lookahead_ms as u64 / 1000) as usize
    }
}

/// A streaming frame transform. `process` consumes exactly one input
/// frame and yields the next output frame once enough input has arrived;
/// `flush` drains whatever is still buffered after the last input. A
/// processor must emit exactly one output frame per input frame overall
/// and must be deterministic for the causality probe to be meaningful.
pub trait FrameProcessor {
    fn frame_len(&self) -> usize;
    fn process(&mut self, frame: &[f32]) -> Result<Option<Vec<f32>>>;
    fn flush(&mut self) -> Result<Vec<Vec<f32>>>;
    fn reset(&mut self) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub budget_ms: f64,
    pub pass: bool,
    pub frames_timed: usize,
    /// Budgets are hardware-relative, so the host is part of the record.
    pub host: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeOutcome {
    Pass,
    /// Output frames up to `first_frame` changed when only samples beyond
    /// the legal horizon changed.
    Violation { trial: usize, first_frame: usize },
    /// The processor withheld output past its declared lookahead; the
    /// buffering depth alone contradicts the declaration.
    Stall { exchange: usize },
}

impl ProbeOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ProbeOutcome::Pass)
    }
}

fn run_all(proc: &mut dyn FrameProcessor, signal: &[f32], frame_len: usize) -> Result<Vec<Vec<f32>>> {
    proc.reset()?;
    let mut outs = Vec::with_capacity(signal.len() / frame_len);
    for frame in signal.chunks_exact(frame_len) {
        if let Some(out) = proc.process(frame)? {
            outs.push(out);
        }
    }
    outs.extend(proc.flush()?);
    Ok(outs)
}

fn frames_bit_equal(a: &[f32], b: &[f32]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Feeds pairs of signals that agree on every sample the processor may
/// legally consult for a seeded cut-off frame t, and differ afterwards.
/// Any bit difference in output frames 0..=t convicts the processor of
/// reading beyond its declared lookahead.
pub fn probe_lookahead(
    proc: &mut dyn FrameProcessor,
    constraints: &StreamConstraints,
    trials: usize,
    signal_seconds: f64,
    seed: u64,
) -> Result<ProbeOutcome> {
    let frame_len = constraints.frame_samples(CANONICAL_SAMPLE_RATE);
    if proc.frame_len() != frame_len {
        return Err(Error::InvalidArgument(format!(
            "processor frame of {} samples does not match declared {} ms ({} samples)",
            proc.frame_len(),
            constraints.frame_ms,
            frame_len
        )));
    }
    let lookahead = constraints.lookahead_samples(CANONICAL_SAMPLE_RATE);
    let num_frames = ((signal_seconds * CANONICAL_SAMPLE_RATE as f64) as usize) / frame_len;
    let total = num_frames * frame_len;
    // Largest t whose legal horizon still leaves samples to perturb.
    let t_max = (0..num_frames)
        .rev()
        .find(|t| (t + 1) * frame_len + lookahead < total)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{signal_seconds} s signal too short to probe {} ms lookahead",
                constraints.lookahead_ms
            ))
        })?;

    for trial in 0..trials {
        let mut rng = rng_for(seed, trial as u64);
        let signal_a: Vec<f32> = (0..total).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let t = rng.random_range(0..=t_max);
        let boundary = (t + 1) * frame_len + lookahead;

        let mut signal_b = signal_a.clone();
        let mut rng_b = rng_for(seed, (1u64 << 32) + trial as u64);
        for s in &mut signal_b[boundary..] {
            *s = rng_b.random_range(-1.0f32..1.0);
        }
        if frames_bit_equal(&signal_a[boundary..], &signal_b[boundary..]) {
            signal_b[boundary] = -0.5 * signal_a[boundary] - 0.25;
        }

        let ctx = |e: Error| Error::Harness(format!("probe trial {trial}: {e}"));
        let outs_a = match run_all(proc, &signal_a, frame_len) {
            Ok(outs) => outs,
            Err(Error::CausalityStall { exchange }) => return Ok(ProbeOutcome::Stall { exchange }),
            Err(e) => return Err(ctx(e)),
        };
        let outs_b = match run_all(proc, &signal_b, frame_len) {
            Ok(outs) => outs,
            Err(Error::CausalityStall { exchange }) => return Ok(ProbeOutcome::Stall { exchange }),
            Err(e) => return Err(ctx(e)),
        };
        if outs_a.len() != num_frames || outs_b.len() != num_frames {
            return Err(Error::Harness(format!(
                "probe trial {trial}: processor emitted {}/{} then {}/{} frames",
                outs_a.len(),
                num_frames,
                outs_b.len(),
                num_frames
            )));
        }
        for i in 0..=t {
            if !frames_bit_equal(&outs_a[i], &outs_b[i]) {
                return Ok(ProbeOutcome::Violation { trial, first_frame: i });
            }
        }
    }
    Ok(ProbeOutcome::Pass)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).max(1) - 1;
    sorted[idx.min(sorted.len() - 1)]
}

/// Times every process call on the clip, wall-clock, discarding the first
/// `warmup_frames`. The verdict compares the mean against the T/2 budget.
pub fn measure_budget(
    proc: &mut dyn FrameProcessor,
    clip: &AudioClip,
    constraints: &StreamConstraints,
    warmup_frames: usize,
) -> Result<TimingReport> {
    let frame_len = constraints.frame_samples(clip.sample_rate());
    if proc.frame_len() != frame_len {
        return Err(Error::InvalidArgument(format!(
            "processor frame of {} samples does not match declared {} ms ({} samples)",
            proc.frame_len(),
            constraints.frame_ms,
            frame_len
        )));
    }
    let frames: Vec<Vec<f32>> = clip
        .samples()
        .chunks_exact(frame_len)
        .map(|c| c.iter().map(|&s| s as f32).collect())
        .collect();
    if frames.len() < warmup_frames + MIN_TIMED_FRAMES {
        return Err(Error::InvalidArgument(format!(
            "clip provides {} frames, need {} warmup + {}",
            frames.len(),
            warmup_frames,
            MIN_TIMED_FRAMES
        )));
    }

    proc.reset()?;
    let mut timings = Vec::with_capacity(frames.len() - warmup_frames);
    for (i, frame) in frames.iter().enumerate() {
        let start = Instant::now();
        let _ = proc.process(frame)?;
        let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
        if i >= warmup_frames {
            timings.push(elapsed_ms);
        }
    }
    let _ = proc.flush()?;

    let mut sorted = timings.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let mean_ms = timings.iter().sum::<f64>() / timings.len() as f64;
    let budget_ms = constraints.budget_ms();
    Ok(TimingReport {
        mean_ms,
        p50_ms: percentile(&sorted, 0.50),
        p95_ms: percentile(&sorted, 0.95),
        max_ms: *sorted.last().expect("nonempty"),
        budget_ms,
        pass: mean_ms < budget_ms,
        frames_timed: timings.len(),
        host: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
    })
}

/// Track 1 demands the budget pass and the 40 ms caps; everything else
/// lands in the unconstrained track 2.
pub fn classify_track(constraints: &StreamConstraints, timing: &TimingReport) -> u8 {
    if timing.pass
        && constraints.frame_ms <= MAX_TRACK1_FRAME_MS
        && constraints.lookahead_ms <= MAX_TRACK1_LOOKAHEAD_MS
    {
        1
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionEntry {
    pub entry_id: String,
    pub mos: f64,
    pub param_count: u64,
    pub per_frame_ms: f64,
    pub track: u8,
}

impl SubmissionEntry {
    fn validate(&self) -> Result<()> {
        if !(1.0..=5.0).contains(&self.mos) {
            return Err(Error::InvalidArgument(format!(
                "entry {} has MOS {} outside [1, 5]",
                self.entry_id, self.mos
            )));
        }
        if !(self.per_frame_ms.is_finite() && self.per_frame_ms >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "entry {} has invalid per_frame_ms {}",
                self.entry_id, self.per_frame_ms
            )));
        }
        if !matches!(self.track, 1 | 2) {
            return Err(Error::InvalidArgument(format!(
                "entry {} has track {} (must be 1 or 2)",
                self.entry_id, self.track
            )));
        }
        Ok(())
    }
}

fn complexity_cmp(a: &SubmissionEntry, b: &SubmissionEntry) -> Ordering {
    a.param_count
        .cmp(&b.param_count)
        .then_with(|| a.per_frame_ms.partial_cmp(&b.per_frame_ms).expect("validated finite"))
        .then_with(|| a.entry_id.cmp(&b.entry_id))
}

/// MOS-descending order, then repeated adjacent passes: a pair closer
/// than 0.1 MOS swaps when the lower entry is strictly simpler. Each swap
/// reduces complexity inversions among near-ties, so the fixpoint exists
/// and the result is deterministic.
pub fn rank(entries: &[SubmissionEntry]) -> Result<Vec<SubmissionEntry>> {
    if entries.is_empty() {
        return Ok(Vec::new());
    }
    for e in entries {
        e.validate()?;
    }
    if entries.iter().any(|e| e.track != entries[0].track) {
        return Err(Error::InvalidArgument("entries span more than one track".into()));
    }

    let mut out: Vec<SubmissionEntry> = entries.to_vec();
    out.sort_by(|a, b| {
        b.mos
            .partial_cmp(&a.mos)
            .expect("validated finite")
            .then_with(|| a.entry_id.cmp(&b.entry_id))
    });
    loop {
        let mut swapped = false;
        for i in 0..out.len() - 1 {
            let near = (out[i].mos - out[i + 1].mos).abs() < 0.1;
            if near && complexity_cmp(&out[i + 1], &out[i]) == Ordering::Less {
                out.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            return Ok(out);
        }
    }
}

pub fn read_entries_csv(path: &Path) -> Result<Vec<SubmissionEntry>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("cannot open entries {}: {e}", path.display())))?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != ENTRIES_HEADER {
        return Err(Error::Data(format!(
            "entries file {} must have header {}",
            path.display(),
            ENTRIES_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let parse_err =
            |what: &str| Error::Data(format!("entries row {}: bad {what}", line + 2));
        let entry = SubmissionEntry {
            entry_id: field(0).to_string(),
            mos: field(1).parse().map_err(|_| parse_err("mos"))?,
            param_count: field(2).parse().map_err(|_| parse_err("param_count"))?,
            per_frame_ms: field(3).parse().map_err(|_| parse_err("per_frame_ms"))?,
            track: field(4).parse().map_err(|_| parse_err("track"))?,
        };
        entry.validate().map_err(|e| Error::Data(format!("entries row {}: {e}", line + 2)))?;
        out.push(entry);
    }
    Ok(out)
}

pub fn write_entries_csv(path: &Path, entries: &[SubmissionEntry]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(ENTRIES_HEADER)?;
    for e in entries {
        wtr.write_record([
            e.entry_id.as_str(),
            &crate::manifest::format_compact(e.mos),
            &e.param_count.to_string(),
            &crate::manifest::format_compact(e.per_frame_ms),
            &e.track.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Deterministic synthetic processors for exercising the harness.
pub mod fixtures {
    use super::*;

    /// Emits each input frame unchanged; the causal baseline.
    #[derive(Debug, Clone)]
    pub struct Passthrough {
        frame_len: usize,
    }

    impl Passthrough {
        pub fn new(frame_len: usize) -> Passthrough {
            Passthrough { frame_len }
        }
    }

    impl FrameProcessor for Passthrough {
        fn frame_len(&self) -> usize {
            self.frame_len
        }

        fn process(&mut self, frame: &[f32]) -> Result<Option<Vec<f32>>> {
            Ok(Some(frame.to_vec()))
        }

        fn flush(&mut self) -> Result<Vec<Vec<f32>>> {
            Ok(Vec::new())
        }

        fn reset(&mut self) -> Result<()> {
            Ok(())
        }
    }

    /// Passthrough that burns a fixed amount of wall-clock time per frame.
    #[derive(Debug, Clone)]
    pub struct Sleeper {
        frame_len: usize,
        per_frame: std::time::Duration,
    }

    impl Sleeper {
        pub fn new(frame_len: usize, per_frame_ms: u64) -> Sleeper {
            Sleeper { frame_len, per_frame: std::time::Duration::from_millis(per_frame_ms) }
        }
    }

    impl FrameProcessor for Sleeper {
        fn frame_len(&self) -> usize {
            self.frame_len
        }

        fn process(&mut self, frame: &[f32]) -> Result<Option<Vec<f32>>> {
            std::thread::sleep(self.per_frame);
            Ok(Some(frame.to_vec()))
        }

        fn flush(&mut self) -> Result<Vec<Vec<f32>>> {
            Ok(Vec::new())
        }

        fn reset(&mut self) -> Result<()> {
            Ok(())
        }
    }

    /// Averages frame t with the next `lookahead_frames` frames, so its
    /// true lookahead is lookahead_frames x frame duration. It withholds
    /// output until the window fills and drains shrinking windows on
    /// flush.
    #[derive(Debug, Clone)]
    pub struct WindowAverager {
        frame_len: usize,
        lookahead_frames: usize,
        window: VecDeque<Vec<f32>>,
    }

    impl WindowAverager {
        pub fn new(frame_len: usize, lookahead_frames: usize) -> WindowAverager {
            WindowAverager { frame_len, lookahead_frames, window: VecDeque::new() }
        }

        fn emit(&mut self) -> Vec<f32> {
            let mut out = vec![0.0f32; self.frame_len];
            for frame in &self.window {
                for (o, s) in out.iter_mut().zip(frame) {
                    *o += s;
                }
            }
            let scale = 1.0 / self.window.len() as f32;
            for o in &mut out {
                *o *= scale;
            }
            self.window.pop_front();
            out
        }
    }

    impl FrameProcessor for WindowAverager {
        fn frame_len(&self) -> usize {
            self.frame_len
        }

        fn process(&mut self, frame: &[f32]) -> Result<Option<Vec<f32>>> {
            self.window.push_back(frame.to_vec());
            if self.window.len() > self.lookahead_frames {
                Ok(Some(self.emit()))
            } else {
                Ok(None)
            }
        }

        fn flush(&mut self) -> Result<Vec<Vec<f32>>> {
            let mut outs = Vec::new();
            while !self.window.is_empty() {
                outs.push(self.emit());
            }
            Ok(outs)
        }

        fn reset(&mut self) -> Result<()> {
            self.window.clear();
            Ok(())
        }
    }
}

fn harness_io(context: &str, e: std::io::Error) -> Error {
    Error::Harness(format!("{context}: {e}"))
}

/// Parses the child's startup header `frame_ms=<int> lookahead_ms=<int>`.
pub fn parse_header(line: &str) -> Result<StreamConstraints> {
    let mut frame_ms = None;
    let mut lookahead_ms = None;
    for token in line.split_whitespace() {
        if let Some(v) = token.strip_prefix("frame_ms=") {
            frame_ms = v.parse::<u32>().ok();
        } else if let Some(v) = token.strip_prefix("lookahead_ms=") {
            lookahead_ms = v.parse::<u32>().ok();
        }
    }
    match (frame_ms, lookahead_ms) {
        (Some(f), Some(l)) => StreamConstraints::new(f, l),
        _ => Err(Error::Harness(format!(
            "bad processor header {line:?}, expected frame_ms=<int> lookahead_ms=<int>"
        ))),
    }
}

/// An external processor speaking the frame-exchange protocol: raw
/// little-endian f32 frames on stdin/stdout after a one-line header. The
/// harness withholds reads for the first ceil(lookahead / frame)
/// exchanges, exactly the buffering a processor with the declared
/// lookahead needs before its first output, then expects one reply per
/// exchange. A reply that never arrives means the child buffers deeper
/// than it declared and is reported as a causality stall. Reset respawns
/// the child for a fresh state.
pub struct SubprocessProcessor {
    command: Vec<String>,
    child: Child,
    stdin: Option<ChildStdin>,
    replies: mpsc::Receiver<std::io::Result<Vec<f32>>>,
    declared: StreamConstraints,
    frame_len: usize,
    priming: usize,
    sample_rate: u32,
    reply_timeout: Duration,
    sent: usize,
    received: usize,
}

impl SubprocessProcessor {
    pub fn spawn(command: &[String], sample_rate: u32) -> Result<SubprocessProcessor> {
        if command.is_empty() {
            return Err(Error::InvalidArgument("empty processor command".into()));
        }
        let (child, stdin, replies, declared, frame_len) = Self::launch(command, sample_rate)?;
        let priming = declared.lookahead_samples(sample_rate).div_ceil(frame_len);
        Ok(SubprocessProcessor {
            command: command.to_vec(),
            child,
            stdin: Some(stdin),
            replies,
            declared,
            frame_len,
            priming,
            sample_rate,
            reply_timeout: Duration::from_millis(DEFAULT_REPLY_TIMEOUT_MS),
            sent: 0,
            received: 0,
        })
    }

    #[allow(clippy::type_complexity)]
    fn launch(
        command: &[String],
        sample_rate: u32,
    ) -> Result<(
        Child,
        ChildStdin,
        mpsc::Receiver<std::io::Result<Vec<f32>>>,
        StreamConstraints,
        usize,
    )> {
        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Harness(format!("cannot spawn {}: {e}", command[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut header = String::new();
        stdout
            .read_line(&mut header)
            .map_err(|e| harness_io("reading processor header", e))?;
        let declared = parse_header(header.trim_end())?;
        let frame_len = declared.frame_samples(sample_rate);
        if frame_len == 0 {
            return Err(Error::Harness(format!(
                "declared {} ms frame is empty at {} Hz",
                declared.frame_ms, sample_rate
            )));
        }
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut buf = vec![0u8; frame_len * 4];
            loop {
                match read_full(&mut stdout, &mut buf) {
                    Ok(false) => break,
                    Ok(true) => {
                        let frame = buf
                            .chunks_exact(4)
                            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                            .collect();
                        if tx.send(Ok(frame)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok((child, stdin, rx, declared, frame_len))
    }

    pub fn declared(&self) -> StreamConstraints {
        self.declared
    }

    pub fn set_reply_timeout(&mut self, timeout: Duration) {
        self.reply_timeout = timeout;
    }

    fn next_reply(&mut self, on_timeout: impl FnOnce(usize) -> Error) -> Result<Vec<f32>> {
        match self.replies.recv_timeout(self.reply_timeout) {
            Ok(Ok(frame)) => {
                if frame.len() != self.frame_len {
                    return Err(Error::Harness(format!(
                        "processor replied with {} samples, expected {}",
                        frame.len(),
                        self.frame_len
                    )));
                }
                self.received += 1;
                Ok(frame)
            }
            Ok(Err(e)) => Err(harness_io("reading frame from processor", e)),
            Err(mpsc::RecvTimeoutError::Timeout) => {
                let _ = self.child.kill();
                Err(on_timeout(self.sent.saturating_sub(1)))
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(Error::Harness(format!(
                "processor exited after {} of {} replies",
                self.received, self.sent
            ))),
        }
    }
}

impl FrameProcessor for SubprocessProcessor {
    fn frame_len(&self) -> usize {
        self.frame_len
    }

    fn process(&mut self, frame: &[f32]) -> Result<Option<Vec<f32>>> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Harness("processor input already closed".into()))?;
        let mut bytes = Vec::with_capacity(frame.len() * 4);
        for s in frame {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        stdin
            .write_all(&bytes)
            .and_then(|_| stdin.flush())
            .map_err(|e| harness_io("writing frame to processor", e))?;
        self.sent += 1;
        if self.sent <= self.priming {
            return Ok(None);
        }
        let out = self.next_reply(|exchange| Error::CausalityStall { exchange })?;
        Ok(Some(out))
    }

    fn flush(&mut self) -> Result<Vec<Vec<f32>>> {
        self.stdin = None;
        let mut outs = Vec::new();
        while self.received < self.sent {
            outs.push(
                self.next_reply(|_| Error::Harness("processor stopped mid-drain".into()))?,
            );
        }
        Ok(outs)
    }

    fn reset(&mut self) -> Result<()> {
        let _ = self.child.kill();
        let _ = self.child.wait();
        let (child, stdin, replies, declared, frame_len) =
            Self::launch(&self.command, self.sample_rate)?;
        if declared != self.declared {
            return Err(Error::Harness(format!(
                "processor changed its declaration across restarts: {:?} vs {:?}",
                self.declared, declared
            )));
        }
        self.child = child;
        self.stdin = Some(stdin);
        self.replies = replies;
        self.frame_len = frame_len;
        self.sent = 0;
        self.received = 0;
        Ok(())
    }
}

impl Drop for SubprocessProcessor {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn write_frame(out: &mut impl Write, frame: &[f32]) -> Result<()> {
    let mut bytes = Vec::with_capacity(frame.len() * 4);
    for s in frame {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    out.write_all(&bytes).map_err(|e| harness_io("writing frame", e))?;
    out.flush().map_err(|e| harness_io("flushing frame", e))
}

/// Child side of the frame-exchange protocol: print the header, answer
/// frames as output becomes available, and drain the buffered tail when
/// stdin closes.
pub fn run_child_loop(
    proc: &mut dyn FrameProcessor,
    constraints: &StreamConstraints,
) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "frame_ms={} lookahead_ms={}", constraints.frame_ms, constraints.lookahead_ms)
        .map_err(|e| harness_io("writing header", e))?;
    out.flush().map_err(|e| harness_io("flushing header", e))?;

    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut buf = vec![0u8; proc.frame_len() * 4];
    loop {
        match read_full(&mut input, &mut buf) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(harness_io("reading frame", e)),
        }
        let frame: Vec<f32> = buf
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if let Some(reply) = proc.process(&frame)? {
            write_frame(&mut out, &reply)?;
        }
    }
    for reply in proc.flush()? {
        write_frame(&mut out, &reply)?;
    }
    Ok(())
}

/// Fills `buf` completely; Ok(false) on clean end-of-stream before any
/// byte, an error on a partial frame.
fn read_full(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 if filled == 0 => return Ok(false),
            0 => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::UnexpectedEof,
                    "partial frame at end of stream",
                ))
            }
            n => filled += n,
        }
    }
    Ok(true)
}
