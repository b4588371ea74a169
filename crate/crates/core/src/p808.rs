//! Crowd listening-test aggregation: group assembly with hidden control
//! clips, spam filtering, MOS with confidence intervals, and rank
//! correlation against reference scores.
//!
//! Filtering is group-level: one failed control voids everything the rater
//! scored in that group, and control positions never surface as clip
//! ratings.

use crate::error::{Error, Result};
use crate::seed::rng_for;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

pub const DEFAULT_GROUP_SIZE: usize = 10;
pub const DEFAULT_RATINGS_PER_CLIP: usize = 3;
pub const DEFAULT_GOLD_TOLERANCE: u8 = 1;

pub const RATINGS_HEADER: [&str; 5] = ["rater_id", "clip_id", "group_id", "score", "timestamp"];
pub const SUMMARY_HEADER: [&str; 4] = ["subject_id", "mos", "ci95", "n"];

/// One rater's 1-5 judgment of one clip within a group session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rater_id: String,
    pub clip_id: String,
    pub group_id: String,
    pub score: u8,
    pub timestamp: u64,
}

/// A control stimulus with a known expected answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlClip {
    pub clip_id: String,
    pub expected: u8,
}

impl ControlClip {
    pub fn new(clip_id: &str, expected: u8) -> ControlClip {
        ControlClip { clip_id: clip_id.to_string(), expected }
    }
}

/// One rating group: `clip_ids` is the full ordered playlist including the
/// gold and trap clips at their positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub group_id: String,
    pub clip_ids: Vec<String>,
    pub gold_position: usize,
    pub trap_position: usize,
    pub gold_expected: u8,
    pub trap_expected: u8,
}

impl GroupAssignment {
    pub fn real_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.clip_ids.len()).filter(|&i| i != self.gold_position && i != self.trap_position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub subject_id: String,
    pub mos: f64,
    pub ci95: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    Gold,
    Trap,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupVerdict {
    Accept,
    Reject(RejectReason),
}

/// One voided (rater, group) session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub rater_id: String,
    pub group_id: String,
    pub reason: RejectReason,
}

fn valid_score(s: u8) -> bool {
    (1..=5).contains(&s)
}

/// Packs real clips into rating groups, each with one gold and one trap
/// clip at seeded positions. Every clip lands in at least
/// `ratings_per_clip` groups; when a round does not divide evenly the last
/// group is padded with already-covered clips, which therefore gain an
/// extra appearance.
pub fn build_groups(
    clip_ids: &[String],
    ratings_per_clip: usize,
    group_size: usize,
    gold_pool: &[ControlClip],
    trap_pool: &[ControlClip],
    seed: u64,
) -> Result<Vec<GroupAssignment>> {
    if clip_ids.is_empty() {
        return Err(Error::InvalidArgument("no clips to group".into()));
    }
    if ratings_per_clip == 0 {
        return Err(Error::InvalidArgument("ratings_per_clip must be at least 1".into()));
    }
    if group_size < 3 {
        return Err(Error::InvalidArgument(
            "group_size must be at least 3 (one gold, one trap, one clip)".into(),
        ));
    }
    if gold_pool.is_empty() || trap_pool.is_empty() {
        return Err(Error::InvalidArgument("gold and trap pools must be nonempty".into()));
    }
    for c in gold_pool.iter().chain(trap_pool) {
        if !valid_score(c.expected) {
            return Err(Error::InvalidArgument(format!(
                "control clip {} expects score {} outside 1-5",
                c.clip_id, c.expected
            )));
        }
    }
    let real_set: HashSet<&String> = clip_ids.iter().collect();
    if real_set.len() != clip_ids.len() {
        return Err(Error::InvalidArgument("duplicate clip ids".into()));
    }
    let mut control_ids = HashSet::new();
    for c in gold_pool.iter().chain(trap_pool) {
        if real_set.contains(&c.clip_id) || !control_ids.insert(&c.clip_id) {
            return Err(Error::InvalidArgument(format!(
                "control clip id {} collides with another clip",
                c.clip_id
            )));
        }
    }
    let real_per_group = group_size - 2;
    if clip_ids.len() < real_per_group {
        return Err(Error::InvalidArgument(format!(
            "{} clips cannot fill a group of {} real slots",
            clip_ids.len(),
            real_per_group
        )));
    }

    let mut groups = Vec::new();
    let mut group_index = 0u64;
    for round in 0..ratings_per_clip {
        let mut order: Vec<usize> = (0..clip_ids.len()).collect();
        order.shuffle(&mut rng_for(seed, (1u64 << 32) + round as u64));

        for chunk in order.chunks(real_per_group) {
            let mut rng = rng_for(seed, group_index);
            let mut members: Vec<usize> = chunk.to_vec();
            while members.len() < real_per_group {
                let pick = rng.random_range(0..clip_ids.len());
                if !members.contains(&pick) {
                    members.push(pick);
                }
            }

            let gold = &gold_pool[rng.random_range(0..gold_pool.len())];
            let trap = &trap_pool[rng.random_range(0..trap_pool.len())];
            let gold_position = rng.random_range(0..group_size);
            let trap_position = loop {
                let p = rng.random_range(0..group_size);
                if p != gold_position {
                    break p;
                }
            };

            let mut slots = Vec::with_capacity(group_size);
            let mut next_member = members.iter();
            for pos in 0..group_size {
                if pos == gold_position {
                    slots.push(gold.clip_id.clone());
                } else if pos == trap_position {
                    slots.push(trap.clip_id.clone());
                } else {
                    slots.push(clip_ids[*next_member.next().expect("slot count")].clone());
                }
            }

            groups.push(GroupAssignment {
                group_id: format!("g{group_index:05}"),
                clip_ids: slots,
                gold_position,
                trap_position,
                gold_expected: gold.expected,
                trap_expected: trap.expected,
            });
            group_index += 1;
        }
    }
    Ok(groups)
}

/// Accepts a rater's group iff the gold answer is within `gold_tolerance`
/// of its expected score and the trap answer matches exactly. `responses`
/// is the score per playlist position.
pub fn judge_group(
    responses: &[u8],
    assignment: &GroupAssignment,
    gold_tolerance: u8,
) -> GroupVerdict {
    if responses.len() != assignment.clip_ids.len() || responses.iter().any(|&s| !valid_score(s)) {
        return GroupVerdict::Reject(RejectReason::Incomplete);
    }
    let gold = responses[assignment.gold_position] as i16;
    if (gold - assignment.gold_expected as i16).abs() > gold_tolerance as i16 {
        return GroupVerdict::Reject(RejectReason::Gold);
    }
    if responses[assignment.trap_position] != assignment.trap_expected {
        return GroupVerdict::Reject(RejectReason::Trap);
    }
    GroupVerdict::Accept
}

/// Splits a raw rating stream into accepted real-clip ratings and a
/// rejection report. Ratings are grouped per (rater, group), judged via
/// the controls, and control positions are stripped from the output.
pub fn filter_ratings(
    records: &[RatingRecord],
    assignments: &[GroupAssignment],
    gold_tolerance: u8,
) -> Result<(Vec<RatingRecord>, Vec<Rejection>)> {
    let mut by_group: HashMap<&str, &GroupAssignment> = HashMap::new();
    for a in assignments {
        if by_group.insert(&a.group_id, a).is_some() {
            return Err(Error::Data(format!("duplicate group_id {}", a.group_id)));
        }
    }

    let mut sessions: BTreeMap<(&str, &str), Vec<Option<&RatingRecord>>> = BTreeMap::new();
    for r in records {
        let assignment = *by_group
            .get(r.group_id.as_str())
            .ok_or_else(|| Error::Data(format!("rating references unknown group {}", r.group_id)))?;
        let position = assignment
            .clip_ids
            .iter()
            .position(|c| *c == r.clip_id)
            .ok_or_else(|| {
                Error::Data(format!("clip {} is not in group {}", r.clip_id, r.group_id))
            })?;
        let slots = sessions
            .entry((r.rater_id.as_str(), r.group_id.as_str()))
            .or_insert_with(|| vec![None; assignment.clip_ids.len()]);
        if slots[position].is_some() {
            return Err(Error::Data(format!(
                "rater {} rated clip {} twice in group {}",
                r.rater_id, r.clip_id, r.group_id
            )));
        }
        slots[position] = Some(r);
    }

    let mut accepted = Vec::new();
    let mut rejections = Vec::new();
    for ((rater_id, group_id), slots) in &sessions {
        let assignment = by_group[group_id];
        let responses: Vec<u8> = slots.iter().map(|s| s.map_or(0, |r| r.score)).collect();
        match judge_group(&responses, assignment, gold_tolerance) {
            GroupVerdict::Accept => {
                for pos in assignment.real_positions() {
                    accepted.push(slots[pos].expect("judged complete").clone());
                }
            }
            GroupVerdict::Reject(reason) => rejections.push(Rejection {
                rater_id: rater_id.to_string(),
                group_id: group_id.to_string(),
                reason,
            }),
        }
    }
    Ok((accepted, rejections))
}

/// Raters with at least one rejected group.
pub fn rejected_raters(rejections: &[Rejection]) -> BTreeSet<String> {
    rejections.iter().map(|r| r.rater_id.clone()).collect()
}

/// Mean and 95% confidence half-width of a set of 1-5 scores. The interval
/// uses the t distribution; a single score or zero variance gives 0.
pub fn mos_ci(scores: &[u8]) -> Result<(f64, f64)> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scores".into()));
    }
    if let Some(&bad) = scores.iter().find(|&&s| !valid_score(s)) {
        return Err(Error::InvalidArgument(format!("score {bad} outside 1-5")));
    }
    let n = scores.len() as f64;
    let mean = scores.iter().map(|&s| s as f64).sum::<f64>() / n;
    if scores.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = scores.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok((mean, 0.0));
    }
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("valid dof")
        .inverse_cdf(0.975);
    Ok((mean, t * var.sqrt() / n.sqrt()))
}

fn summarize<'a>(
    groups: impl Iterator<Item = (&'a str, Vec<u8>)>,
) -> Result<Vec<ScoreSummary>> {
    groups
        .map(|(subject_id, scores)| {
            let (mos, ci95) = mos_ci(&scores)?;
            Ok(ScoreSummary { subject_id: subject_id.to_string(), mos, ci95, n: scores.len() })
        })
        .collect()
}

/// Per-clip MOS over accepted ratings.
pub fn clip_mos(accepted: &[RatingRecord]) -> Result<Vec<ScoreSummary>> {
    let mut by_clip: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for r in accepted {
        by_clip.entry(&r.clip_id).or_default().push(r.score);
    }
    summarize(by_clip.into_iter())
}

/// Per-condition MOS: all accepted ratings of a condition's clips pooled.
pub fn condition_mos(
    accepted: &[RatingRecord],
    clip_to_condition: &HashMap<String, String>,
) -> Result<Vec<ScoreSummary>> {
    let mut by_condition: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for r in accepted {
        let condition = clip_to_condition
            .get(&r.clip_id)
            .ok_or_else(|| Error::Data(format!("clip {} has no condition mapping", r.clip_id)))?;
        by_condition.entry(condition).or_default().push(r.score);
    }
    summarize(by_condition.into_iter())
}

/// Ranks with ties replaced by the mean of the positions they span
/// (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling: the Pearson
/// correlation of the two rank vectors.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::InvalidArgument("constant input has no rank order".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// A rater exceeding the per-day rating cap. Days are timestamp/86400.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateLimitViolation {
    pub rater_id: String,
    pub day: u64,
    pub count: usize,
}

pub fn check_rate_limits(records: &[RatingRecord], max_per_day: usize) -> Vec<RateLimitViolation> {
    let mut per_day: BTreeMap<(&str, u64), usize> = BTreeMap::new();
    for r in records {
        *per_day.entry((&r.rater_id, r.timestamp / 86_400)).or_default() += 1;
    }
    per_day
        .into_iter()
        .filter(|&(_, count)| count > max_per_day)
        .map(|((rater_id, day), count)| RateLimitViolation {
            rater_id: rater_id.to_string(),
            day,
            count,
        })
        .collect()
}

pub fn read_ratings_csv(path: &Path) -> Result<Vec<RatingRecord>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("cannot open ratings {}: {e}", path.display())))?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != RATINGS_HEADER {
        return Err(Error::Data(format!(
            "ratings file {} must have header {}",
            path.display(),
            RATINGS_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let score: u8 = field(3)
            .parse()
            .ok()
            .filter(|&s| valid_score(s))
            .ok_or_else(|| Error::Data(format!("row {}: score {:?} outside 1-5", line + 2, field(3))))?;
        let timestamp: u64 = field(4)
            .parse()
            .map_err(|_| Error::Data(format!("row {}: bad timestamp {:?}", line + 2, field(4))))?;
        out.push(RatingRecord {
            rater_id: field(0).to_string(),
            clip_id: field(1).to_string(),
            group_id: field(2).to_string(),
            score,
            timestamp,
        });
    }
    Ok(out)
}

pub fn write_ratings_csv(path: &Path, records: &[RatingRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(RATINGS_HEADER)?;
    for r in records {
        wtr.write_record([
            r.rater_id.as_str(),
            &r.clip_id,
            &r.group_id,
            &r.score.to_string(),
            &r.timestamp.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_summaries_csv(path: &Path, summaries: &[ScoreSummary]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        wtr.write_record([
            s.subject_id.as_str(),
            &crate::manifest::format_compact(s.mos),
            &crate::manifest::format_compact(s.ci95),
            &s.n.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_assignments_jsonl(path: &Path, assignments: &[GroupAssignment]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for a in assignments {
        serde_json::to_writer(&mut f, a)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_assignments_jsonl(path: &Path) -> Result<Vec<GroupAssignment>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
