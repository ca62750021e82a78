//! Trajectory dissimilarity measures and their incremental evaluators.
//!
//! Every search algorithm is built on [`Evaluator`]: `start(p_h)` evaluates the
//! single-point prefix `<p_h>` against the query and each `extend(p_j)` grows
//! the prefix by one point. DTW and Frechet keep one O(m) dynamic-programming
//! row; the grid embedding keeps a fixed-size count vector, so its extension is
//! O(1).
//!
//! Dissimilarities are raw distances (smaller is more similar).
//!
//! Summation order: a DTW cell is `d(p_i, q_k) + min(diag, up, left)` and the
//! boundary cells are `d(p_i, q_k) + previous`. `min` is exact, so the value of
//! every cell is reproduced bit-for-bit by any evaluation that performs the same
//! additions, in particular by the from-scratch [`dtw`] and by Spring.

use serde::{Deserialize, Serialize};

use crate::rng::splitmix64;
use crate::trajectory::Point;

pub const EMBED_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Measure {
    Dtw,
    Frechet,
    /// Running mean of hashed grid-cell indicator features; `cell` is the grid side.
    #[serde(rename = "gridembed")]
    GridEmbed { cell: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Dtw,
    Frechet,
    #[serde(rename = "gridembed")]
    GridEmbed,
}

impl Measure {
    pub const DEFAULT_CELL: f64 = 1.0;

    pub fn kind(&self) -> MeasureKind {
        match self {
            Measure::Dtw => MeasureKind::Dtw,
            Measure::Frechet => MeasureKind::Frechet,
            Measure::GridEmbed { .. } => MeasureKind::GridEmbed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Dtw => "dtw",
            Measure::Frechet => "frechet",
            Measure::GridEmbed { .. } => "gridembed",
        }
    }

    /// DTW and Frechet are dynamic programs over point pairs.
    pub fn is_dp(&self) -> bool {
        !matches!(self, Measure::GridEmbed { .. })
    }

    pub fn parse(name: &str, cell: f64) -> crate::Result<Measure> {
        match name.to_ascii_lowercase().as_str() {
            "dtw" => Ok(Measure::Dtw),
            "frechet" => Ok(Measure::Frechet),
            "gridembed" | "grid" | "embed" => {
                if cell > 0.0 && cell.is_finite() {
                    Ok(Measure::GridEmbed { cell })
                } else {
                    Err(crate::Error::InvalidParam(format!("grid cell must be > 0, got {cell}")))
                }
            }
            other => Err(crate::Error::InvalidParam(format!("unknown measure {other:?}"))),
        }
    }
}

/// From-scratch dissimilarity.
pub fn distance(measure: Measure, t: &[Point], q: &[Point]) -> f64 {
    match measure {
        Measure::Dtw => dtw(t, q),
        Measure::Frechet => frechet(t, q),
        Measure::GridEmbed { cell } => grid_embed_distance(t, q, cell),
    }
}

pub fn dtw(t: &[Point], q: &[Point]) -> f64 {
    dp_distance(Measure::Dtw, t, q)
}

pub fn frechet(t: &[Point], q: &[Point]) -> f64 {
    dp_distance(Measure::Frechet, t, q)
}

fn dp_distance(measure: Measure, t: &[Point], q: &[Point]) -> f64 {
    assert!(!t.is_empty() && !q.is_empty(), "distance of an empty trajectory");
    let mut row = vec![0.0; q.len()];
    init_row(measure, &mut row, &t[0], q);
    for p in &t[1..] {
        extend_row(measure, &mut row, p, q);
    }
    row[q.len() - 1]
}

fn init_row(measure: Measure, row: &mut [f64], p: &Point, q: &[Point]) {
    row[0] = p.dist(&q[0]);
    for k in 1..q.len() {
        let d = p.dist(&q[k]);
        row[k] = match measure {
            Measure::Dtw => d + row[k - 1],
            _ => d.max(row[k - 1]),
        };
    }
}

fn extend_row(measure: Measure, row: &mut [f64], p: &Point, q: &[Point]) {
    let mut diag = row[0];
    let d = p.dist(&q[0]);
    row[0] = match measure {
        Measure::Dtw => d + row[0],
        _ => d.max(row[0]),
    };
    for k in 1..q.len() {
        let up = row[k];
        let best = diag.min(up).min(row[k - 1]);
        let d = p.dist(&q[k]);
        row[k] = match measure {
            Measure::Dtw => d + best,
            _ => d.max(best),
        };
        diag = up;
    }
}

/// Grid cell of a point. Floor division; coordinates far outside i64 saturate.
pub fn grid_cell(p: &Point, cell: f64) -> (i64, i64) {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
}

/// Embedding slot of a grid cell: SplitMix64 of `cx * 0x9E3779B97F4A7C15 ^ cy * 0xC2B2AE3D27D4EB4F`,
/// reduced mod [`EMBED_DIM`].
pub fn grid_slot(cx: i64, cy: i64) -> usize {
    let mixed = (cx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (cy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    (splitmix64(mixed) % EMBED_DIM as u64) as usize
}

#[derive(Debug, Clone, PartialEq)]
struct Embedding {
    counts: [u32; EMBED_DIM],
    len: u32,
}

impl Embedding {
    fn empty() -> Self {
        Embedding { counts: [0; EMBED_DIM], len: 0 }
    }

    fn push(&mut self, p: &Point, cell: f64) {
        let (cx, cy) = grid_cell(p, cell);
        self.counts[grid_slot(cx, cy)] += 1;
        self.len += 1;
    }

    /// Euclidean distance between the two mean embeddings, computed as
    /// `sqrt(N / D)` with the exact integers `N = sum_k (c_k * m - a_k * l)^2`
    /// and `D = (l * m)^2`, so equal distances are bitwise equal (exact while
    /// both fit in 53 bits).
    fn distance_to(&self, other: &Embedding) -> f64 {
        let (l, m) = (self.len as u128, other.len as u128);
        let mut num: u128 = 0;
        for k in 0..EMBED_DIM {
            let diff = (self.counts[k] as u128 * m).abs_diff(other.counts[k] as u128 * l);
            num += diff * diff;
        }
        let den = (l * m) * (l * m);
        (num as f64 / den as f64).sqrt()
    }
}

pub fn grid_embed_distance(t: &[Point], q: &[Point], cell: f64) -> f64 {
    assert!(!t.is_empty() && !q.is_empty(), "distance of an empty trajectory");
    let mut et = Embedding::empty();
    t.iter().for_each(|p| et.push(p, cell));
    let mut eq = Embedding::empty();
    q.iter().for_each(|p| eq.push(p, cell));
    et.distance_to(&eq)
}

#[derive(Debug, Clone)]
enum EvalState {
    Row(Vec<f64>),
    Embed { acc: Embedding, query: Embedding, cell: f64 },
}

/// Incremental dissimilarity between a growing prefix and a fixed query.
#[derive(Debug, Clone)]
pub struct Evaluator {
    measure: Measure,
    query: Vec<Point>,
    state: EvalState,
    len: usize,
}

impl Evaluator {
    pub fn new(measure: Measure, query: &[Point]) -> Self {
        assert!(!query.is_empty(), "empty query");
        let state = match measure {
            Measure::GridEmbed { cell } => {
                let mut eq = Embedding::empty();
                query.iter().for_each(|p| eq.push(p, cell));
                EvalState::Embed { acc: Embedding::empty(), query: eq, cell }
            }
            _ => EvalState::Row(vec![f64::INFINITY; query.len()]),
        };
        Evaluator { measure, query: query.to_vec(), state, len: 0 }
    }

    /// Evaluator already started at `p`.
    pub fn started(measure: Measure, query: &[Point], p: &Point) -> Self {
        let mut ev = Self::new(measure, query);
        ev.start(p);
        ev
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn query(&self) -> &[Point] {
        &self.query
    }

    /// Number of points in the current prefix (0 before the first `start`).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Resets to the single-point prefix `<p>`.
    pub fn start(&mut self, p: &Point) -> f64 {
        match &mut self.state {
            EvalState::Row(row) => init_row(self.measure, row, p, &self.query),
            EvalState::Embed { acc, cell, .. } => {
                *acc = Embedding::empty();
                acc.push(p, *cell);
            }
        }
        self.len = 1;
        self.current()
    }

    pub fn extend(&mut self, p: &Point) -> f64 {
        assert!(self.len > 0, "extend before start");
        match &mut self.state {
            EvalState::Row(row) => extend_row(self.measure, row, p, &self.query),
            EvalState::Embed { acc, cell, .. } => acc.push(p, *cell),
        }
        self.len += 1;
        self.current()
    }

    pub fn current(&self) -> f64 {
        assert!(self.len > 0, "evaluator not started");
        match &self.state {
            EvalState::Row(row) => row[row.len() - 1],
            EvalState::Embed { acc, query, .. } => acc.distance_to(query),
        }
    }

    /// Current DP row, `None` for non-DP measures.
    pub fn row(&self) -> Option<&[f64]> {
        match &self.state {
            EvalState::Row(row) => Some(row),
            EvalState::Embed { .. } => None,
        }
    }
}

/// `table[i - 1] = distance(T[i, n]^R, Q^R)` for `i = 1..=n`, in one backward pass.
///
/// For DTW and Frechet this equals `distance(T[i, n], Q)`; for the grid
/// embedding the mean is order-independent so it is likewise exact.
pub fn suffix_table(measure: Measure, t: &[Point], q: &[Point]) -> Vec<f64> {
    let n = t.len();
    let rev_q: Vec<Point> = q.iter().rev().copied().collect();
    let mut ev = Evaluator::new(measure, &rev_q);
    let mut table = vec![0.0; n];
    table[n - 1] = ev.start(&t[n - 1]);
    for i in (0..n - 1).rev() {
        table[i] = ev.extend(&t[i]);
    }
    table
}
