#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use simsub::measures::{grid_cell, grid_slot, EMBED_DIM};
use simsub::rng::SimRng;
use simsub::{Interval, Measure, Point};

pub fn rand_points(rng: &mut SimRng, n: usize, lo: i32, hi: i32) -> Vec<Point> {
    (0..n).map(|_| Point::new(rng.random_range(lo..=hi) as f64, rng.random_range(lo..=hi) as f64)).collect()
}

pub fn rand_real_points(rng: &mut SimRng, n: usize, span: f64) -> Vec<Point> {
    (0..n).map(|_| Point::new(rng.random_range(-span..span), rng.random_range(-span..span))).collect()
}

fn euclid(a: &Point, b: &Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Top-down memoized recursion over the alignment lattice.
fn lattice(t: &[Point], q: &[Point], combine: fn(f64, f64) -> f64) -> f64 {
    fn go(
        i: usize,
        j: usize,
        t: &[Point],
        q: &[Point],
        combine: fn(f64, f64) -> f64,
        memo: &mut HashMap<(usize, usize), f64>,
    ) -> f64 {
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let d = euclid(&t[i], &q[j]);
        let v = if i == 0 && j == 0 {
            d
        } else {
            let mut best = f64::INFINITY;
            if i > 0 && j > 0 {
                best = best.min(go(i - 1, j - 1, t, q, combine, memo));
            }
            if i > 0 {
                best = best.min(go(i - 1, j, t, q, combine, memo));
            }
            if j > 0 {
                best = best.min(go(i, j - 1, t, q, combine, memo));
            }
            combine(d, best)
        };
        memo.insert((i, j), v);
        v
    }
    go(t.len() - 1, q.len() - 1, t, q, combine, &mut HashMap::new())
}

pub fn naive_dtw(t: &[Point], q: &[Point]) -> f64 {
    lattice(t, q, |d, b| d + b)
}

pub fn naive_frechet(t: &[Point], q: &[Point]) -> f64 {
    lattice(t, q, f64::max)
}

/// Grid embedding recomputed from slot histograms.
pub fn naive_grid(t: &[Point], q: &[Point], cell: f64) -> f64 {
    let hist = |s: &[Point]| {
        let mut h = vec![0.0; EMBED_DIM];
        for p in s {
            let (cx, cy) = grid_cell(p, cell);
            h[grid_slot(cx, cy)] += 1.0;
        }
        h.iter().map(|c| c / s.len() as f64).collect::<Vec<f64>>()
    };
    let (a, b) = (hist(t), hist(q));
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn naive_distance(measure: Measure, t: &[Point], q: &[Point]) -> f64 {
    match measure {
        Measure::Dtw => naive_dtw(t, q),
        Measure::Frechet => naive_frechet(t, q),
        Measure::GridEmbed { cell } => naive_grid(t, q, cell),
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Every interval with its oracle distance, in `(start, end)` order.
pub fn naive_all(measure: Measure, t: &[Point], q: &[Point]) -> Vec<(Interval, f64)> {
    let n = t.len();
    let mut out = Vec::new();
    for s in 1..=n {
        for e in s..=n {
            out.push((Interval::new(s, e), naive_distance(measure, &t[s - 1..e], q)));
        }
    }
    out
}

/// Smallest `(start, end)` among intervals whose distance equals the minimum
/// (equality up to 1e-12 relative, to absorb summation-order rounding).
pub fn naive_best(measure: Measure, t: &[Point], q: &[Point]) -> (Interval, f64) {
    let all = naive_all(measure, t, q);
    let min = all.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    *all.iter().find(|r| close(r.1, min, 1e-12)).unwrap()
}

/// Unpruned sweep over all length-`m` windows with banded DTW.
pub fn window_sweep(t: &[Point], q: &[Point], band: f64) -> (Interval, f64) {
    let m = q.len();
    let mut best = (Interval::new(1, m), f64::INFINITY);
    for s in 1..=t.len() + 1 - m {
        let d = banded_dtw_oracle(&t[s - 1..s - 1 + m], q, (band * m as f64).floor() as usize);
        if d < best.1 {
            best = (Interval::new(s, s + m - 1), d);
        }
    }
    best
}

/// Full-matrix banded DTW.
pub fn banded_dtw_oracle(w: &[Point], q: &[Point], r: usize) -> f64 {
    let (n, m) = (w.len(), q.len());
    let mut d = vec![vec![f64::INFINITY; m + 1]; n + 1];
    d[0][0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            if i.abs_diff(j) > r {
                continue;
            }
            let prev = d[i - 1][j - 1].min(d[i - 1][j]).min(d[i][j - 1]);
            d[i][j] = euclid(&w[i - 1], &q[j - 1]) + prev;
        }
    }
    d[n][m]
}

pub const MEASURES: [Measure; 3] = [Measure::Dtw, Measure::Frechet, Measure::GridEmbed { cell: 1.0 }];
