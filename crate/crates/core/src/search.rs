//! Non-learning subtrajectory searchers.
//!
//! All searchers minimize dissimilarity. When two candidates have the same
//! value the one with the smaller `(start, end)` wins.

use std::time::{Duration, Instant};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{distance, suffix_table, Evaluator, Measure};
use crate::rng::SimRng;
use crate::trajectory::{interval_count, Interval, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub interval: Interval,
    pub dissimilarity: f64,
    /// Candidate subtrajectories whose distance was materialized.
    pub explored: u64,
    /// Points skipped by skip actions.
    pub skipped: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Running arg-min under the tie rule.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Best {
    pub interval: Option<Interval>,
    pub value: f64,
}

impl Best {
    pub fn new() -> Self {
        Best { interval: None, value: f64::INFINITY }
    }

    /// Returns true if the candidate replaced the incumbent.
    pub fn offer(&mut self, iv: Interval, value: f64) -> bool {
        let better = match self.interval {
            None => true,
            Some(cur) => value < self.value || (value == self.value && iv < cur),
        };
        if better {
            self.interval = Some(iv);
            self.value = value;
        }
        better
    }

    pub fn into_outcome(self, explored: u64, skipped: u64, started: Instant) -> SearchOutcome {
        SearchOutcome {
            interval: self.interval.expect("search produced no candidate"),
            dissimilarity: self.value,
            explored,
            skipped,
            elapsed: started.elapsed(),
        }
    }
}

/// Exhaustive search over all `n(n+1)/2` intervals, incremental per start point.
pub fn exact_s(t: &[Point], q: &[Point], measure: Measure) -> SearchOutcome {
    let started = Instant::now();
    let n = t.len();
    let mut ev = Evaluator::new(measure, q);
    let mut best = Best::new();
    for s in 1..=n {
        best.offer(Interval::new(s, s), ev.start(&t[s - 1]));
        for e in s + 1..=n {
            best.offer(Interval::new(s, e), ev.extend(&t[e - 1]));
        }
    }
    best.into_outcome(interval_count(n), 0, started)
}

/// Admissible subtrajectory lengths for SizeS.
///
/// The window is `[max(1, m - xi), min(n, m + xi)]`. When `m - xi > n` no
/// length qualifies and the window falls back to `[1, n]`.
pub fn size_window(n: usize, m: usize, xi: usize) -> (usize, usize) {
    let lo = m.saturating_sub(xi).max(1);
    let hi = (m + xi).min(n);
    if lo > n {
        (1, n)
    } else {
        (lo, hi)
    }
}

/// Searches only subtrajectories whose length lies within `xi` of the query length.
pub fn size_s(t: &[Point], q: &[Point], measure: Measure, xi: usize) -> SearchOutcome {
    let started = Instant::now();
    let n = t.len();
    let (lo, hi) = size_window(n, q.len(), xi);
    let mut ev = Evaluator::new(measure, q);
    let mut best = Best::new();
    let mut explored = 0;
    for s in 1..=n + 1 - lo {
        let last = (s + hi - 1).min(n);
        let mut v = ev.start(&t[s - 1]);
        for e in s..=last {
            if e > s {
                v = ev.extend(&t[e - 1]);
            }
            if e + 1 - s >= lo {
                explored += 1;
                best.offer(Interval::new(s, e), v);
            }
        }
    }
    best.into_outcome(explored, 0, started)
}

/// One scanned position of a splitting search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanStep {
    /// Scanned point `p_i` (1-based).
    pub position: usize,
    /// Anchor `h` of the current prefix `T[h, i]`.
    pub anchor: usize,
    pub prefix: f64,
    /// `T[i, n]` value, when suffixes are considered.
    pub suffix: Option<f64>,
    pub split: bool,
}

fn split_scan(
    t: &[Point],
    q: &[Point],
    measure: Measure,
    with_suffix: bool,
    mut trace: Option<&mut Vec<ScanStep>>,
) -> SearchOutcome {
    let started = Instant::now();
    let n = t.len();
    let suffix = with_suffix.then(|| suffix_table(measure, t, q));
    let mut ev = Evaluator::new(measure, q);
    let mut best = Best::new();
    let mut h = 1;
    let mut explored = 0;
    for i in 1..=n {
        let pre = if i == h { ev.start(&t[i - 1]) } else { ev.extend(&t[i - 1]) };
        explored += 1;
        let mut cand = (Interval::new(h, i), pre);
        let suf = suffix.as_ref().map(|s| s[i - 1]);
        if let Some(sv) = suf {
            explored += 1;
            if sv < pre {
                cand = (Interval::new(i, n), sv);
            }
        }
        let split = cand.1 < best.value;
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(ScanStep { position: i, anchor: h, prefix: pre, suffix: suf, split });
        }
        if split {
            best.offer(cand.0, cand.1);
            h = i + 1;
        }
    }
    best.into_outcome(explored, 0, started)
}

/// Prefix-suffix search: split whenever the prefix `T[h, i]` or the suffix
/// `T[i, n]` beats the best so far.
pub fn pss(t: &[Point], q: &[Point], measure: Measure) -> SearchOutcome {
    split_scan(t, q, measure, true, None)
}

pub fn pss_traced(t: &[Point], q: &[Point], measure: Measure) -> (SearchOutcome, Vec<ScanStep>) {
    let mut trace = Vec::with_capacity(t.len());
    let out = split_scan(t, q, measure, true, Some(&mut trace));
    (out, trace)
}

/// Prefix-only search.
pub fn pos(t: &[Point], q: &[Point], measure: Measure) -> SearchOutcome {
    split_scan(t, q, measure, false, None)
}

pub fn pos_traced(t: &[Point], q: &[Point], measure: Measure) -> (SearchOutcome, Vec<ScanStep>) {
    let mut trace = Vec::with_capacity(t.len());
    let out = split_scan(t, q, measure, false, Some(&mut trace));
    (out, trace)
}

/// Prefix-only search with delay. After an improving prefix `T[h, i]` it
/// evaluates up to `delay` further extensions and splits at the end point with
/// the smallest prefix distance; scanning resumes right after the split.
pub fn pos_d(t: &[Point], q: &[Point], measure: Measure, delay: usize) -> Result<SearchOutcome> {
    if delay == 0 {
        return Err(Error::InvalidParam("delay must be >= 1".into()));
    }
    let started = Instant::now();
    let n = t.len();
    let mut ev = Evaluator::new(measure, q);
    let mut best = Best::new();
    let mut explored = 0;
    let mut h = 1;
    let mut i = 1;
    while i <= n {
        let pre = if i == h { ev.start(&t[i - 1]) } else { ev.extend(&t[i - 1]) };
        explored += 1;
        if pre < best.value {
            let (mut split_at, mut split_v) = (i, pre);
            for j in i + 1..=(i + delay).min(n) {
                let v = ev.extend(&t[j - 1]);
                explored += 1;
                if v < split_v {
                    split_at = j;
                    split_v = v;
                }
            }
            best.offer(Interval::new(h, split_at), split_v);
            h = split_at + 1;
            i = h;
        } else {
            i += 1;
        }
    }
    Ok(best.into_outcome(explored, 0, started))
}

/// Best of `samples` intervals drawn uniformly without replacement, each
/// evaluated from scratch.
pub fn random_s(
    t: &[Point],
    q: &[Point],
    measure: Measure,
    samples: usize,
    rng: &mut SimRng,
) -> Result<SearchOutcome> {
    let started = Instant::now();
    let n = t.len();
    let total = interval_count(n);
    if samples == 0 || samples as u64 > total {
        return Err(Error::InvalidParam(format!("samples must be in [1, {total}], got {samples}")));
    }
    let mut best = Best::new();
    for ord in index::sample(rng, total as usize, samples) {
        let iv = Interval::from_ordinal(n, ord as u64);
        best.offer(iv, distance(measure, &t[iv.range()], q));
    }
    Ok(best.into_outcome(samples as u64, 0, started))
}

/// Spring: one dynamic program over `T` with start tracking, the query padded
/// by a zero-cost fictitious point so that any point may start a match.
///
/// With `band = Some(r)` a cell `(i, j)` reached from start `s` is admissible
/// only if `|(i - s) - j| <= floor(r * m)` (0-based offsets).
pub fn spring(t: &[Point], q: &[Point], measure: Measure, band: Option<f64>) -> Result<SearchOutcome> {
    if !measure.is_dp() {
        return Err(Error::InvalidParam(format!("spring requires dtw or frechet, got {}", measure.name())));
    }
    let radius = band_radius(band, q.len())?;
    let started = Instant::now();
    let (n, m) = (t.len(), q.len());
    let combine = |d: f64, prev: f64| if measure == Measure::Dtw { d + prev } else { d.max(prev) };

    // (value, 0-based start) per query column
    let mut prev: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); m];
    let mut cur = prev.clone();
    let mut best = Best::new();
    for i in 0..n {
        for j in 0..m {
            let fresh = (0.0, i);
            let (left, diag) = if j == 0 { (fresh, fresh) } else { (cur[j - 1], prev[j - 1]) };
            let up = prev[j];
            let d = t[i].dist(&q[j]);
            // compare after combining, so equal cell values fall back to the smaller start
            let mut pick = (f64::INFINITY, 0);
            for c in [diag, up, left] {
                let admissible = match radius {
                    None => true,
                    Some(r) => (i - c.1).abs_diff(j) <= r,
                };
                if admissible && c.0.is_finite() {
                    let v = combine(d, c.0);
                    if v < pick.0 || (v == pick.0 && c.1 < pick.1) {
                        pick = (v, c.1);
                    }
                }
            }
            cur[j] = pick;
        }
        let (v, s) = cur[m - 1];
        if v.is_finite() {
            best.offer(Interval::new(s + 1, i + 1), v);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    if best.interval.is_none() {
        return Err(Error::NotFound("no subtrajectory fits inside the band".into()));
    }
    Ok(best.into_outcome(n as u64, 0, started))
}

pub(crate) fn band_radius(band: Option<f64>, m: usize) -> Result<Option<usize>> {
    match band {
        None => Ok(None),
        Some(r) if (0.0..=1.0).contains(&r) => Ok(Some((r * m as f64).floor() as usize)),
        Some(r) => Err(Error::InvalidParam(format!("band must be in [0, 1], got {r}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::new(x, 0.0)).collect()
    }

    #[test]
    fn exact_finds_contained_query() {
        let t = line(&[9., 7., 1., 2., 3., 8., 5.]);
        let q = &t[2..5];
        for m in [Measure::Dtw, Measure::Frechet] {
            let out = exact_s(&t, q, m);
            assert_eq!(out.dissimilarity, 0.0);
            assert_eq!(out.interval, Interval::new(3, 5));
            assert_eq!(out.explored, 28);
        }
    }

    #[test]
    fn single_point_data() {
        let t = line(&[1.0]);
        let q = line(&[0.0, 2.0]);
        assert_eq!(exact_s(&t, &q, Measure::Dtw).interval, Interval::new(1, 1));
        assert_eq!(pos(&t, &q, Measure::Dtw).interval, Interval::new(1, 1));
        assert_eq!(pos_d(&t, &q, Measure::Dtw, 3).unwrap().interval, Interval::new(1, 1));
    }

    #[test]
    fn size_window_fallback() {
        assert_eq!(size_window(10, 3, 1), (2, 4));
        assert_eq!(size_window(10, 3, 5), (1, 8));
        assert_eq!(size_window(4, 9, 2), (1, 4));
    }

    #[test]
    fn size_s_zero_xi_contained() {
        let t = line(&[9., 7., 1., 2., 3., 8., 5.]);
        let out = size_s(&t, &t[1..4], Measure::Dtw, 0);
        assert_eq!(out.dissimilarity, 0.0);
        assert_eq!(out.interval, Interval::new(2, 4));
        assert_eq!(out.explored, 5);
    }

    #[test]
    fn random_s_rejects_oversampling() {
        let t = line(&[1., 2., 3.]);
        let mut rng = seeded(1);
        assert!(matches!(random_s(&t, &t, Measure::Dtw, 7, &mut rng), Err(Error::InvalidParam(_))));
        assert!(matches!(random_s(&t, &t, Measure::Dtw, 0, &mut rng), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn spring_rejects_bad_inputs() {
        let t = line(&[1., 2., 3.]);
        assert!(spring(&t, &t, Measure::GridEmbed { cell: 1.0 }, None).is_err());
        assert!(spring(&t, &t, Measure::Dtw, Some(1.5)).is_err());
    }

    #[test]
    fn spring_contained_query() {
        let t = line(&[9., 7., 1., 2., 3., 8., 5.]);
        let out = spring(&t, &t[2..5], Measure::Dtw, None).unwrap();
        assert_eq!(out.dissimilarity, 0.0);
        assert_eq!(out.interval, Interval::new(3, 5));
    }

    #[test]
    fn pss_first_point_always_splits() {
        let t = line(&[4., 1., 2., 9.]);
        let (_, trace) = pss_traced(&t, &line(&[1.5]), Measure::Dtw);
        assert!(trace[0].split);
        assert_eq!(trace[1].anchor, 2);
    }

    #[test]
    fn pos_d_rejects_zero_delay() {
        let t = line(&[1.0]);
        assert!(pos_d(&t, &t, Measure::Dtw, 0).is_err());
    }
}
