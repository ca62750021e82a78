//! Same-length window search under banded DTW with cascaded lower bounds.
//!
//! Each length-`m` window `W_s = T[s, s+m-1]` goes through, in order:
//!
//! 1. `LB_KimFL`: distance of the first pair plus distance of the last pair.
//! 2. `LB_Keogh` of the window against the query envelope, summed over query
//!    positions sorted by descending `|x|` and abandoned once it exceeds the
//!    best-so-far.
//! 3. `LB_Keogh` with the roles reversed (query points against the window
//!    envelope); the larger of the two bounds is kept.
//! 4. Banded DTW, abandoned as soon as the row minimum plus the remaining
//!    `LB_Keogh` tail exceeds the best-so-far.
//!
//! A window is only discarded when a bound strictly exceeds the best-so-far.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::{band_radius, SearchOutcome};
use crate::trajectory::{Interval, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn of(points: &[Point]) -> Rect {
        points.iter().fold(
            Rect { min_x: f64::INFINITY, min_y: f64::INFINITY, max_x: f64::NEG_INFINITY, max_y: f64::NEG_INFINITY },
            |r, p| Rect { min_x: r.min_x.min(p.x), min_y: r.min_y.min(p.y), max_x: r.max_x.max(p.x), max_y: r.max_y.max(p.y) },
        )
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.min_x <= p.x && p.x <= self.max_x && self.min_y <= p.y && p.y <= self.max_y
    }

    /// Shortest distance from `p` to the rectangle, 0 inside.
    pub fn dist(&self, p: &Point) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        if dx == 0.0 {
            dy
        } else if dy == 0.0 {
            dx
        } else {
            (dx * dx + dy * dy).sqrt()
        }
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.min_x <= other.max_x && other.min_x <= self.max_x && self.min_y <= other.max_y && other.min_y <= self.max_y
    }
}

/// Per-position bounding rectangles `MBR(q[i - r ..= i + r])`, `r = floor(R * m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub rects: Vec<Rect>,
    pub band: f64,
    pub radius: usize,
}

impl Envelope {
    pub fn new(seq: &[Point], band: f64) -> Result<Envelope> {
        let radius = band_radius(Some(band), seq.len())?.unwrap_or(0);
        let m = seq.len();
        let rects = (0..m)
            .map(|i| Rect::of(&seq[i.saturating_sub(radius)..=(i + radius).min(m - 1)]))
            .collect();
        Ok(Envelope { rects, band, radius })
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }
}

/// Endpoint lower bound `d(q_1, w_1) + d(q_m, w_m)`; a single pair when `m = 1`.
pub fn lb_kim_fl(w: &[Point], q: &[Point]) -> Result<f64> {
    if w.len() != q.len() {
        return Err(Error::LengthMismatch { expected: q.len(), got: w.len() });
    }
    let m = q.len();
    let first = w[0].dist(&q[0]);
    Ok(if m == 1 { first } else { first + w[m - 1].dist(&q[m - 1]) })
}

/// Sum of point-to-rectangle distances of `w` against `env`.
pub fn lb_keogh(w: &[Point], env: &Envelope) -> Result<f64> {
    if w.len() != env.len() {
        return Err(Error::LengthMismatch { expected: env.len(), got: w.len() });
    }
    Ok(w.iter().zip(&env.rects).map(|(p, r)| r.dist(p)).sum())
}

/// Running `LB_Keogh` over `order`, abandoned (returns `None`) once the partial
/// sum exceeds `threshold` by more than its rounding error. A completed bound
/// is re-summed in sequence order, which keeps it below the DTW path cost in
/// floating point as well.
pub fn lb_keogh_abandoning(w: &[Point], env: &Envelope, order: &[usize], threshold: f64) -> Result<Option<f64>> {
    if w.len() != env.len() {
        return Err(Error::LengthMismatch { expected: env.len(), got: w.len() });
    }
    let mut acc = 0.0;
    for &i in order {
        acc += env.rects[i].dist(&w[i]);
        if exceeds(acc, threshold, w.len()) {
            return Ok(None);
        }
    }
    lb_keogh(w, env).map(Some)
}

/// `sum > threshold` with a margin covering the rounding of `terms` additions
/// in an arbitrary order.
fn exceeds(sum: f64, threshold: f64, terms: usize) -> bool {
    sum > threshold + threshold.abs() * (2 * terms) as f64 * f64::EPSILON
}

/// Positions sorted by descending distance to the y-axis (`|x|`), stable.
pub fn reorder_by_y_axis(q: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| q[b].x.abs().total_cmp(&q[a].x.abs()));
    order
}

/// DTW restricted to cells with `|i - j| <= radius` (equal lengths).
pub fn dtw_banded(w: &[Point], q: &[Point], band: f64) -> Result<f64> {
    if w.len() != q.len() {
        return Err(Error::LengthMismatch { expected: q.len(), got: w.len() });
    }
    let radius = band_radius(Some(band), q.len())?.unwrap_or(0);
    Ok(banded_dtw_abandoning(w, q, radius, None, f64::INFINITY))
}

/// Banded DTW over rows `w` and columns `q`. `tail[i]` is a lower bound on
/// the cost contributed by rows `i..`; when the row minimum plus `tail[i + 1]`
/// exceeds `bsf` the computation is abandoned and `+inf` returned.
fn banded_dtw_abandoning(w: &[Point], q: &[Point], radius: usize, tail: Option<&[f64]>, bsf: f64) -> f64 {
    let m = q.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for i in 0..w.len() {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(m - 1);
        cur.fill(f64::INFINITY);
        let mut row_min = f64::INFINITY;
        for j in lo..=hi {
            let d = w[i].dist(&q[j]);
            let v = if i == 0 && j == 0 {
                d
            } else if i == 0 {
                d + cur[j - 1]
            } else if j == 0 {
                d + prev[0]
            } else {
                d + prev[j - 1].min(prev[j]).min(cur[j - 1])
            };
            cur[j] = v;
            row_min = row_min.min(v);
        }
        let rest = tail.map_or(0.0, |t| t.get(i + 1).copied().unwrap_or(0.0));
        if exceeds(row_min + rest, bsf, 2 * m) {
            return f64::INFINITY;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    KimFl,
    Keogh,
    KeoghReversed,
    DtwAbandoned,
    Computed,
}

/// Per-window record of the bounds that were evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub start: usize,
    pub kim: f64,
    /// Completed forward `LB_Keogh`, `None` if not reached or abandoned.
    pub keogh: Option<f64>,
    pub keogh_reversed: Option<f64>,
    pub dtw: Option<f64>,
    pub stage: Stage,
    pub bsf_before: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneStats {
    pub windows: u64,
    pub kim: u64,
    pub keogh: u64,
    pub keogh_reversed: u64,
    pub dtw_abandoned: u64,
    pub computed: u64,
}

impl PruneStats {
    pub fn pruned(&self) -> u64 {
        self.kim + self.keogh + self.keogh_reversed + self.dtw_abandoned
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UcrOutcome {
    pub outcome: SearchOutcome,
    pub stats: PruneStats,
}

pub fn ucr_search(t: &[Point], q: &[Point], band: f64) -> Result<UcrOutcome> {
    ucr_search_with(t, q, band, f64::INFINITY, None)
}

/// Cascaded search seeded with an initial best-so-far threshold. Windows
/// strictly worse than `initial_bsf` are pruned; if every window is pruned the
/// result carries an infinite dissimilarity.
pub fn ucr_search_seeded(t: &[Point], q: &[Point], band: f64, initial_bsf: f64) -> Result<UcrOutcome> {
    ucr_search_with(t, q, band, initial_bsf, None)
}

pub fn ucr_search_traced(t: &[Point], q: &[Point], band: f64) -> Result<(UcrOutcome, Vec<WindowRecord>)> {
    let mut records = Vec::new();
    let out = ucr_search_with(t, q, band, f64::INFINITY, Some(&mut records))?;
    Ok((out, records))
}

fn ucr_search_with(
    t: &[Point],
    q: &[Point],
    band: f64,
    initial_bsf: f64,
    mut records: Option<&mut Vec<WindowRecord>>,
) -> Result<UcrOutcome> {
    let (n, m) = (t.len(), q.len());
    if n < m {
        return Err(Error::InvalidParam(format!("data length {n} shorter than query length {m}")));
    }
    let started = Instant::now();
    let env_q = Envelope::new(q, band)?;
    let radius = env_q.radius;
    let order = reorder_by_y_axis(q);
    let mut stats = PruneStats::default();
    let mut bsf = initial_bsf;
    let mut best: Option<Interval> = None;
    let mut tail = vec![0.0; m + 1];

    for s in 0..=n - m {
        stats.windows += 1;
        let w = &t[s..s + m];
        let mut rec = WindowRecord {
            start: s + 1,
            kim: lb_kim_fl(w, q)?,
            keogh: None,
            keogh_reversed: None,
            dtw: None,
            stage: Stage::KimFl,
            bsf_before: bsf,
        };
        let stage = 'cascade: {
            if rec.kim > bsf {
                stats.kim += 1;
                break 'cascade Stage::KimFl;
            }
            let Some(keogh) = lb_keogh_abandoning(w, &env_q, &order, bsf)? else {
                stats.keogh += 1;
                break 'cascade Stage::Keogh;
            };
            rec.keogh = Some(keogh);
            let env_w = Envelope::new(w, band)?;
            let reversed = lb_keogh(q, &env_w)?;
            rec.keogh_reversed = Some(reversed);
            if reversed > bsf {
                stats.keogh_reversed += 1;
                break 'cascade Stage::KeoghReversed;
            }
            // tail[i] = sum_{k >= i} d(w_k, env_q[k])
            tail[m] = 0.0;
            for k in (0..m).rev() {
                tail[k] = tail[k + 1] + env_q.rects[k].dist(&w[k]);
            }
            let d = banded_dtw_abandoning(w, q, radius, Some(&tail[..m]), bsf);
            if !d.is_finite() {
                stats.dtw_abandoned += 1;
                break 'cascade Stage::DtwAbandoned;
            }
            rec.dtw = Some(d);
            stats.computed += 1;
            if d < bsf || (best.is_none() && d <= bsf) {
                bsf = d;
                best = Some(Interval::new(s + 1, s + m));
            }
            Stage::Computed
        };
        rec.stage = stage;
        if let Some(r) = records.as_deref_mut() {
            r.push(rec);
        }
    }

    let interval = best.unwrap_or(Interval::new(1, m));
    let dissimilarity = if best.is_some() { bsf } else { f64::INFINITY };
    Ok(UcrOutcome {
        outcome: SearchOutcome {
            interval,
            dissimilarity,
            explored: stats.computed,
            skipped: 0,
            elapsed: started.elapsed(),
        },
        stats,
    })
}
