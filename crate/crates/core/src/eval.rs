//! Exhaustive ranking, AR/MR/RR scoring and adversarial instance generators.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Evaluator, Measure};
use crate::search::SearchOutcome;
use crate::trajectory::{interval_count, Interval, Point, Trajectory};

pub const DEFAULT_RANK_CAP: u64 = 1_000_000;

/// Relative tolerance used when matching a returned value to a table row.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Every interval of `T`, sorted ascending by dissimilarity to `Q`; equal
/// values keep `(start, end)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub n: usize,
    pub intervals: Vec<Interval>,
    pub values: Vec<f64>,
}

pub fn rank_all(t: &[Point], q: &[Point], measure: Measure, cap: u64) -> Result<RankTable> {
    let n = t.len();
    let entries = interval_count(n);
    if entries > cap {
        return Err(Error::TooLarge { entries, cap });
    }
    let mut rows: Vec<(f64, Interval)> = Vec::with_capacity(entries as usize);
    let mut ev = Evaluator::new(measure, q);
    for s in 1..=n {
        rows.push((ev.start(&t[s - 1]), Interval::new(s, s)));
        for e in s + 1..=n {
            rows.push((ev.extend(&t[e - 1]), Interval::new(s, e)));
        }
    }
    // rows are generated in interval order, so a stable sort keeps ties ordered
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (values, intervals) = rows.into_iter().unzip();
    Ok(RankTable { n, intervals, values })
}

impl RankTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn best(&self) -> (Interval, f64) {
        (self.intervals[0], self.values[0])
    }

    /// 1-based rank of the first row whose value matches `value` within tolerance.
    pub fn rank_of_value(&self, value: f64) -> Option<usize> {
        let lo = value - MATCH_TOLERANCE * value.abs();
        let first = self.values.partition_point(|&v| v < lo);
        (first < self.values.len() && values_match(self.values[first], value)).then_some(first + 1)
    }

    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("rank,start,end,distance\n");
        for (k, (iv, v)) in self.intervals.iter().zip(&self.values).enumerate() {
            let _ = writeln!(out, "{},{},{},{:?}", k + 1, iv.start, iv.end, v);
        }
        out
    }
}

fn values_match(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= MATCH_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `d_approx / d_opt`; `+inf` when the optimum is 0 and the answer is not.
    pub ar: f64,
    pub ar_infinite: bool,
    pub mr: usize,
    pub rr: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "ar,ar_infinite,mr,rr";

    pub fn csv_row(&self) -> String {
        format!("{:?},{},{},{:?}", self.ar, self.ar_infinite, self.mr, self.rr)
    }
}

/// Scores an outcome against the exhaustive ranking.
///
/// The rank is that of the returned interval; under ties it is the smallest
/// rank among rows with an equal value. If the interval is not in the table the
/// first row whose value matches the returned dissimilarity is used.
pub fn score(outcome: &SearchOutcome, table: &RankTable) -> Result<MetricsReport> {
    let value = if outcome.interval.is_valid_for(table.n) {
        let pos = table.intervals.iter().position(|iv| *iv == outcome.interval);
        pos.map(|p| table.values[p])
    } else {
        None
    };
    let value = match value {
        Some(v) if values_match(v, outcome.dissimilarity) => v,
        _ => outcome.dissimilarity,
    };
    let mr = table
        .rank_of_value(value)
        .ok_or_else(|| Error::NotFound(format!("{} with value {value} not in rank table", outcome.interval)))?;
    let opt = table.values[0];
    // the table value, so ulp drift in the searcher cannot push AR below 1
    let approx = value;
    let (ar, ar_infinite) = if opt == 0.0 {
        if approx == 0.0 {
            (1.0, false)
        } else {
            (f64::INFINITY, true)
        }
    } else {
        (approx / opt, false)
    };
    Ok(MetricsReport { ar, ar_infinite, mr, rr: mr as f64 / table.len() as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Sizes,
    Pss,
}

/// Closed-form quantities attached to a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicted {
    /// Upper bound on the optimal distance `D_o`.
    pub optimum_upper: f64,
    /// Lower bound on the heuristic's distance `D_a` (DTW).
    pub approx_lower_dtw: f64,
    /// Lower bound on the heuristic's distance under Frechet.
    pub approx_lower_frechet: f64,
    /// Lower bound on the approximation ratio (DTW).
    pub ar_lower_dtw: f64,
    pub ar_lower_frechet: f64,
    /// Lower bounds on MR and RR when known.
    pub mr_lower: Option<f64>,
    pub rr_lower: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryParams {
    pub kind: AdversaryKind,
    /// `m` for SizeS instances, `n` for splitting instances.
    pub size: usize,
    pub d_max: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryInstance {
    pub data: Trajectory,
    pub query: Trajectory,
    pub params: AdversaryParams,
    pub predicted: Predicted,
}

/// Instance on which fixed-length search is arbitrarily worse than optimal.
///
/// The query is `m` collinear points spaced `d = d_max / m` apart and centred
/// on the origin; the data trajectory has `m` points evenly spaced (starting at
/// angle 0) on a circle of radius `eps` around each query point, `m^2` in total.
pub fn gen_sizes_adversary(m: usize, d_max: f64, eps: f64) -> Result<AdversaryInstance> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::InvalidParam(format!("m must be even and >= 4, got {m}")));
    }
    let d = d_max / m as f64;
    if !(eps > 0.0 && eps < d) {
        return Err(Error::InvalidParam(format!("eps must be in (0, d = {d}), got {eps}")));
    }
    let l = m / 2;
    let centre = |i: usize| -> f64 {
        if i <= l {
            -((l - i) as f64 + 0.5) * d
        } else {
            ((i - l) as f64 - 0.5) * d
        }
    };
    let query: Vec<Point> = (1..=m).map(|i| Point::new(centre(i), 0.0)).collect();
    let mut data = Vec::with_capacity(m * m);
    for i in 1..=m {
        for j in 0..m {
            let angle = std::f64::consts::TAU * j as f64 / m as f64;
            data.push(Point::new(centre(i) + eps * angle.cos(), eps * angle.sin()));
        }
    }
    let (mf, lf) = (m as f64, l as f64);
    let optimum_upper = mf * mf * eps;
    // 2 * (sum_{i=1}^{l-1} ((l - i) d - eps) + eps)
    let approx_lower_dtw = 2.0 * ((1..l).map(|i| (lf - i as f64) * d - eps).sum::<f64>() + eps);
    let approx_lower_frechet = (lf - 1.0) * d - eps;
    Ok(AdversaryInstance {
        data: Trajectory::new("sizes_data", data)?,
        query: Trajectory::new("sizes_query", query)?,
        params: AdversaryParams { kind: AdversaryKind::Sizes, size: m, d_max, eps },
        predicted: Predicted {
            optimum_upper,
            approx_lower_dtw,
            approx_lower_frechet,
            ar_lower_dtw: approx_lower_dtw / optimum_upper,
            ar_lower_frechet: approx_lower_frechet / eps,
            mr_lower: None,
            rr_lower: None,
        },
    })
}

/// Instance on which splitting heuristics are arbitrarily worse than optimal.
///
/// `T = <p1', p2', p_1 .. p_n, p3'>` with `p1' = (-d/2, 0)`, `p2' = (-d, 0)`,
/// `p_i = (0, 0)`, `p3' = (d, 0)`, `d = d_max / 2`, and the single-point query
/// `(0, eps)`.
pub fn gen_pss_adversary(n: usize, d_max: f64, eps: f64) -> Result<AdversaryInstance> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be positive".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParam(format!("eps must be a finite non-negative number, got {eps}")));
    }
    let d = d_max / 2.0;
    let mut data = Vec::with_capacity(n + 3);
    data.push(Point::new(-d / 2.0, 0.0));
    data.push(Point::new(-d, 0.0));
    data.extend((0..n).map(|_| Point::new(0.0, 0.0)));
    data.push(Point::new(d, 0.0));
    let nf = n as f64;
    let approx = (d * d / 4.0 + eps * eps).sqrt();
    let mr_lower = nf * (nf + 1.0) / 2.0 + 1.0;
    Ok(AdversaryInstance {
        data: Trajectory::new("pss_data", data)?,
        query: Trajectory::new("pss_query", vec![Point::new(0.0, eps)])?,
        params: AdversaryParams { kind: AdversaryKind::Pss, size: n, d_max, eps },
        predicted: Predicted {
            optimum_upper: eps,
            approx_lower_dtw: approx,
            approx_lower_frechet: approx,
            ar_lower_dtw: d / (2.0 * eps),
            ar_lower_frechet: d / (2.0 * eps),
            mr_lower: Some(mr_lower),
            rr_lower: Some(mr_lower / ((nf + 3.0) * (nf + 4.0) / 2.0)),
        },
    })
}
