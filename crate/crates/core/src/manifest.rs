//! Clip manifests: the delimited index files that name every source clip,
//! where it lives on disk, and the metadata the curation stages key on.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const MANIFEST_HEADER: [&str; 8] =
    ["clip_id", "path", "kind", "duration_s", "labels", "speaker_id", "chapter_id", "category"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClipKind {
    Clean,
    Noise,
    Rir,
}

impl fmt::Display for ClipKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClipKind::Clean => "clean",
            ClipKind::Noise => "noise",
            ClipKind::Rir => "rir",
        })
    }
}

impl FromStr for ClipKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" => Ok(ClipKind::Clean),
            "noise" => Ok(ClipKind::Noise),
            "rir" => Ok(ClipKind::Rir),
            other => Err(Error::Data(format!("unknown clip kind {other:?}"))),
        }
    }
}

/// One manifest row. Empty optional fields stay empty strings on disk;
/// labels are joined with `|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipRecord {
    pub clip_id: String,
    pub path: PathBuf,
    pub kind: ClipKind,
    pub duration_s: f64,
    pub labels: Vec<String>,
    pub speaker_id: Option<String>,
    pub chapter_id: Option<String>,
    pub category: Option<String>,
}

impl ClipRecord {
    pub fn new(clip_id: &str, path: &Path, kind: ClipKind, duration_s: f64) -> ClipRecord {
        ClipRecord {
            clip_id: clip_id.to_string(),
            path: path.to_path_buf(),
            kind,
            duration_s,
            labels: Vec::new(),
            speaker_id: None,
            chapter_id: None,
            category: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    records: Vec<ClipRecord>,
    by_id: HashMap<String, usize>,
}

impl Manifest {
    pub fn new(records: Vec<ClipRecord>) -> Result<Manifest> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.clip_id.is_empty() {
                return Err(Error::Data("manifest row with empty clip_id".into()));
            }
            if !(r.duration_s.is_finite() && r.duration_s >= 0.0) {
                return Err(Error::Data(format!(
                    "clip {} has invalid duration {}",
                    r.clip_id, r.duration_s
                )));
            }
            if by_id.insert(r.clip_id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate clip_id {}", r.clip_id)));
            }
        }
        Ok(Manifest { records, by_id })
    }

    pub fn records(&self) -> &[ClipRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, clip_id: &str) -> Option<&ClipRecord> {
        self.by_id.get(clip_id).map(|&i| &self.records[i])
    }

    pub fn require(&self, clip_id: &str) -> Result<&ClipRecord> {
        self.get(clip_id)
            .ok_or_else(|| Error::Data(format!("clip_id {clip_id} not in manifest")))
    }

    pub fn of_kind(&self, kind: ClipKind) -> impl Iterator<Item = &ClipRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn read_csv(path: &Path) -> Result<Manifest> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| Error::Data(format!("cannot open manifest {}: {e}", path.display())))?;
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
            return Err(Error::Data(format!(
                "manifest {} has header {:?}, expected {:?}",
                path.display(),
                headers.iter().collect::<Vec<_>>(),
                MANIFEST_HEADER
            )));
        }
        let mut records = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let field = |i: usize| row.get(i).unwrap_or_default().to_string();
            let optional = |i: usize| {
                let v = field(i);
                if v.is_empty() { None } else { Some(v) }
            };
            let duration_s: f64 = field(3).parse().map_err(|_| {
                Error::Data(format!("manifest row {}: bad duration_s {:?}", line + 2, field(3)))
            })?;
            let labels = if field(4).is_empty() {
                Vec::new()
            } else {
                field(4).split('|').map(str::to_string).collect()
            };
            records.push(ClipRecord {
                clip_id: field(0),
                path: PathBuf::from(field(1)),
                kind: field(2).parse()?,
                duration_s,
                labels,
                speaker_id: optional(5),
                chapter_id: optional(6),
                category: optional(7),
            });
        }
        Manifest::new(records)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(MANIFEST_HEADER)?;
        for r in &self.records {
            wtr.write_record([
                r.clip_id.as_str(),
                &r.path.to_string_lossy(),
                &r.kind.to_string(),
                &format_compact(r.duration_s),
                &r.labels.join("|"),
                r.speaker_id.as_deref().unwrap_or(""),
                r.chapter_id.as_deref().unwrap_or(""),
                r.category.as_deref().unwrap_or(""),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Fixed-precision float text without trailing zero noise, so artifacts
/// are byte-stable across runs.
pub(crate) fn format_compact(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0');
    let s = s.trim_end_matches('.');
    s.to_string()
}
