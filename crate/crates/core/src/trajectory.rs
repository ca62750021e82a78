//! Points, trajectories, 1-based intervals and dataset ingestion.
//!
//! Intervals use the 1-based inclusive convention `[start, end]` everywhere in
//! the public API. [`Interval::range`] is the single place where they become
//! 0-based slice ranges.

use std::fmt;
use std::io::BufRead;
use std::ops::Range;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Timestamp in seconds. Carried through ingestion, ignored by every measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y, t: None }
    }

    pub fn with_time(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t: Some(t) }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Euclidean distance. Symmetric bit-for-bit.
    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// 1-based inclusive interval `[start, end]` naming the subtrajectory `T[start, end]`.
///
/// The derived ordering (start, then end) is the tie rule used by every searcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub const fn new(start: usize, end: usize) -> Self {
        Interval { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_valid_for(&self, n: usize) -> bool {
        1 <= self.start && self.start <= self.end && self.end <= n
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.is_valid_for(n) {
            Ok(())
        } else {
            Err(Error::Index { start: self.start, end: self.end, len: n })
        }
    }

    /// 0-based half-open slice range.
    pub fn range(&self) -> Range<usize> {
        self.start - 1..self.end
    }

    /// Position of this interval in [`enumerate_intervals`] order (0-based).
    pub fn ordinal(&self, n: usize) -> u64 {
        let (n, s, e) = (n as u64, self.start as u64, self.end as u64);
        // intervals with start < s: sum_{k=1}^{s-1} (n - k + 1)
        let before = (s - 1) * (2 * n - s + 2) / 2;
        before + (e - s)
    }

    /// Inverse of [`Interval::ordinal`].
    pub fn from_ordinal(n: usize, mut ordinal: u64) -> Interval {
        let mut start = 1usize;
        loop {
            let row = (n - start + 1) as u64;
            if ordinal < row {
                return Interval::new(start, start + ordinal as usize);
            }
            ordinal -= row;
            start += 1;
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

pub fn interval_count(n: usize) -> u64 {
    let n = n as u64;
    n * (n + 1) / 2
}

/// All `n(n+1)/2` intervals ordered by (start asc, end asc).
pub fn enumerate_intervals(n: usize) -> Vec<Interval> {
    let mut out = Vec::with_capacity(interval_count(n) as usize);
    for s in 1..=n {
        for e in s..=n {
            out.push(Interval::new(s, e));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: String,
    points: Vec<Point>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Format("trajectory must have at least one point".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Format(format!("non-finite coordinate at point {}", i + 1)));
        }
        Ok(Trajectory { id: id.into(), points })
    }

    pub fn from_xy(id: impl Into<String>, xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(id, xy.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 1-based access.
    pub fn point(&self, i: usize) -> &Point {
        &self.points[i - 1]
    }

    pub fn reversed(&self) -> Trajectory {
        let mut points = self.points.clone();
        points.reverse();
        Trajectory { id: self.id.clone(), points }
    }

    pub fn subtrajectory(&self, iv: Interval) -> Result<Trajectory> {
        iv.check(self.len())?;
        Ok(Trajectory { id: self.id.clone(), points: self.points[iv.range()].to_vec() })
    }

    pub fn slice(&self, iv: Interval) -> &[Point] {
        &self.points[iv.range()]
    }

    /// Axis-aligned bounding box as `(min_x, min_y, max_x, max_y)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "jsonl" | "ndjson" => Ok(DataFormat::Jsonl),
            other => Err(Error::InvalidParam(format!("unknown data format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: PathBuf,
    pub rows_read: u64,
    pub rows_rejected: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trajectories: Vec<Trajectory>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn from_trajectories(trajectories: Vec<Trajectory>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for t in &trajectories {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::Format(format!("duplicate trajectory id {:?}", t.id)));
            }
        }
        Ok(Dataset { trajectories, provenance: Provenance::default() })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }
}

pub fn parse_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut ds = parse_dataset_bytes(&bytes, format)?;
    ds.provenance.source = path.to_path_buf();
    Ok(ds)
}

/// Parses in-memory bytes. Malformed rows are counted and skipped; zero valid
/// rows is a [`Error::Format`].
pub fn parse_dataset_bytes(bytes: &[u8], format: DataFormat) -> Result<Dataset> {
    match format {
        DataFormat::Csv => parse_csv(bytes),
        DataFormat::Jsonl => parse_jsonl(bytes),
    }
}

fn parse_csv(bytes: &[u8]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);

    // id -> [(seq, point)], in first-appearance order
    let mut groups: IndexMap<String, Vec<(i64, Point)>> = IndexMap::new();
    let mut read = 0u64;
    let mut rejected = 0u64;
    let mut first = true;

    for record in reader.records() {
        let Ok(record) = record else {
            read += 1;
            rejected += 1;
            continue;
        };
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if std::mem::take(&mut first) && is_csv_header(&record) {
            continue;
        }
        read += 1;
        match csv_row(&record) {
            Some((id, seq, p)) => groups.entry(id).or_default().push((seq, p)),
            None => rejected += 1,
        }
    }
    finish(groups, read, rejected)
}

fn is_csv_header(record: &csv::StringRecord) -> bool {
    record.len() >= 4 && record.iter().skip(1).take(3).all(|f| f.parse::<f64>().is_err())
}

fn csv_row(record: &csv::StringRecord) -> Option<(String, i64, Point)> {
    if !(4..=5).contains(&record.len()) {
        return None;
    }
    let id = record.get(0)?;
    if id.is_empty() {
        return None;
    }
    let seq: i64 = record.get(1)?.parse().ok()?;
    let x: f64 = record.get(2)?.parse().ok()?;
    let y: f64 = record.get(3)?.parse().ok()?;
    let t = match record.get(4) {
        Some("") | None => None,
        Some(s) => Some(s.parse::<f64>().ok().filter(|t| t.is_finite())?),
    };
    let p = Point { x, y, t };
    p.is_finite().then(|| (id.to_string(), seq, p))
}

fn parse_jsonl(bytes: &[u8]) -> Result<Dataset> {
    let mut groups: IndexMap<String, Vec<(i64, Point)>> = IndexMap::new();
    let mut read = 0u64;
    let mut rejected = 0u64;
    for line in bytes.lines() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        read += 1;
        match jsonl_row(line) {
            Some((id, points)) if !groups.contains_key(&id) => {
                groups.insert(id, points.into_iter().enumerate().map(|(i, p)| (i as i64, p)).collect());
            }
            _ => rejected += 1,
        }
    }
    finish(groups, read, rejected)
}

fn jsonl_row(line: &str) -> Option<(String, Vec<Point>)> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    let id = match v.get("id")? {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        _ => return None,
    };
    let mut points = Vec::new();
    for p in v.get("points")?.as_array()? {
        let coords = p.as_array()?;
        if !(2..=3).contains(&coords.len()) {
            return None;
        }
        let x = coords[0].as_f64()?;
        let y = coords[1].as_f64()?;
        let t = coords.get(2).map(|t| t.as_f64()).map_or(Some(None), |t| t.map(Some))?;
        let p = Point { x, y, t };
        if !p.is_finite() {
            return None;
        }
        points.push(p);
    }
    (!points.is_empty()).then_some((id, points))
}

fn finish(groups: IndexMap<String, Vec<(i64, Point)>>, read: u64, rejected: u64) -> Result<Dataset> {
    if groups.is_empty() {
        return Err(Error::Format(format!("no valid rows ({read} read, {rejected} rejected)")));
    }
    let trajectories = groups
        .into_iter()
        .map(|(id, mut rows)| {
            rows.sort_by_key(|(seq, _)| *seq);
            Trajectory { id, points: rows.into_iter().map(|(_, p)| p).collect() }
        })
        .collect();
    Ok(Dataset {
        trajectories,
        provenance: Provenance { source: PathBuf::new(), rows_read: read, rows_rejected: rejected },
    })
}

/// Canonical CSV rendering (`traj_id,seq,x,y[,t]`, header included). Parsing
/// the output reproduces the dataset exactly.
pub fn to_csv(ds: &Dataset) -> String {
    let mut out = String::from("traj_id,seq,x,y,t\n");
    for t in &ds.trajectories {
        for (i, p) in t.points.iter().enumerate() {
            match p.t {
                Some(ts) => out.push_str(&format!("{},{},{:?},{:?},{:?}\n", t.id, i, p.x, p.y, ts)),
                None => out.push_str(&format!("{},{},{:?},{:?},\n", t.id, i, p.x, p.y)),
            }
        }
    }
    out
}
