//! Database-level top-k search with an MBR pre-filter.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rstar::{primitives::GeomWithData, RTree, RTreeParams, RStarInsertionStrategy, AABB};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::pruning::{ucr_search, Rect};
use crate::rl::{rls_search, rls_skip_search, Policy};
use crate::rng::{child_seed, seeded};
use crate::search::{exact_s, pos, pos_d, pss, random_s, size_s, spring, SearchOutcome};
use crate::trajectory::{Dataset, Interval, Point};

pub const FAN_OUT: usize = 16;

struct Params16;

impl RTreeParams for Params16 {
    const MIN_SIZE: usize = 4;
    const MAX_SIZE: usize = FAN_OUT;
    const REINSERTION_COUNT: usize = 4;
    type DefaultInsertionStrategy = RStarInsertionStrategy;
}

type Entry = GeomWithData<rstar::primitives::Rectangle<[f64; 2]>, usize>;

/// Bulk-loaded R-tree over trajectory bounding rectangles.
pub struct MbrIndex {
    tree: RTree<Entry, Params16>,
    rects: Vec<Rect>,
}

impl std::fmt::Debug for MbrIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MbrIndex").field("len", &self.rects.len()).finish()
    }
}

pub fn build_index(db: &Dataset) -> Result<MbrIndex> {
    if db.is_empty() {
        return Err(Error::EmptyDataset("index database"));
    }
    let rects: Vec<Rect> = db.iter().map(|t| Rect::of(t.points())).collect();
    let entries = rects
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let rect = rstar::primitives::Rectangle::from_corners([r.min_x, r.min_y], [r.max_x, r.max_y]);
            GeomWithData::new(rect, i)
        })
        .collect();
    Ok(MbrIndex { tree: RTree::bulk_load_with_params(entries), rects })
}

impl MbrIndex {
    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn rect(&self, i: usize) -> Rect {
        self.rects[i]
    }

    /// Dataset positions (ascending) whose rectangle intersects `probe`.
    /// Touching boundaries count as intersecting.
    pub fn probe(&self, probe: &Rect) -> Vec<usize> {
        let env = AABB::from_corners([probe.min_x, probe.min_y], [probe.max_x, probe.max_y]);
        let mut ids: Vec<usize> = self.tree.locate_in_envelope_intersecting(&env).map(|e| e.data).collect();
        ids.sort_unstable();
        ids
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Exacts,
    Sizes,
    Pss,
    Pos,
    PosD,
    RandomS,
    Spring,
    Ucr,
    Rls,
    RlsSkip,
}

impl Algo {
    pub const ALL: [Algo; 10] = [
        Algo::Exacts,
        Algo::Sizes,
        Algo::Pss,
        Algo::Pos,
        Algo::PosD,
        Algo::RandomS,
        Algo::Spring,
        Algo::Ucr,
        Algo::Rls,
        Algo::RlsSkip,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algo::Exacts => "exacts",
            Algo::Sizes => "sizes",
            Algo::Pss => "pss",
            Algo::Pos => "pos",
            Algo::PosD => "pos-d",
            Algo::RandomS => "random-s",
            Algo::Spring => "spring",
            Algo::Ucr => "ucr",
            Algo::Rls => "rls",
            Algo::RlsSkip => "rls-skip",
        }
    }

    pub fn needs_policy(&self) -> bool {
        matches!(self, Algo::Rls | Algo::RlsSkip)
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algo> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let norm = match norm.as_str() {
            "exact-s" | "exact" => "exacts",
            "size-s" => "sizes",
            "posd" => "pos-d",
            "randoms" | "random" => "random-s",
            "rlsskip" => "rls-skip",
            other => other,
        };
        Algo::ALL.into_iter().find(|a| a.name() == norm).ok_or_else(|| Error::UnknownAlgo(s.to_string()))
    }
}

/// Algorithm parameters; unused fields are ignored by algorithms that do not need them.
#[derive(Debug, Clone, Copy)]
pub struct SearchParams<'a> {
    pub xi: usize,
    pub delay: usize,
    /// Random-S sample count; clamped to the number of intervals.
    pub samples: usize,
    pub seed: u64,
    /// Spring band (`None` = unconstrained) and UCR band (default 1.0).
    pub band: Option<f64>,
    pub policy: Option<&'a Policy>,
    pub k_skip: usize,
}

impl Default for SearchParams<'_> {
    fn default() -> Self {
        SearchParams { xi: 5, delay: 5, samples: 100, seed: 0, band: None, policy: None, k_skip: 3 }
    }
}

/// Runs one searcher on one `(T, Q)` pair. `stream` selects the Random-S
/// child seed so that results do not depend on scheduling.
pub fn run_algo(
    algo: Algo,
    t: &[Point],
    q: &[Point],
    measure: Measure,
    params: &SearchParams<'_>,
    stream: u64,
) -> Result<SearchOutcome> {
    let need_policy = || {
        params.policy.ok_or_else(|| Error::InvalidParam(format!("algorithm {algo} requires a policy")))
    };
    match algo {
        Algo::Exacts => Ok(exact_s(t, q, measure)),
        Algo::Sizes => Ok(size_s(t, q, measure, params.xi)),
        Algo::Pss => Ok(pss(t, q, measure)),
        Algo::Pos => Ok(pos(t, q, measure)),
        Algo::PosD => pos_d(t, q, measure, params.delay),
        Algo::RandomS => {
            let total = crate::trajectory::interval_count(t.len());
            let samples = (params.samples as u64).min(total) as usize;
            random_s(t, q, measure, samples, &mut seeded(child_seed(params.seed, stream)))
        }
        Algo::Spring => spring(t, q, measure, params.band),
        Algo::Ucr => {
            if measure != Measure::Dtw {
                return Err(Error::InvalidParam(format!("ucr requires dtw, got {}", measure.name())));
            }
            Ok(ucr_search(t, q, params.band.unwrap_or(1.0))?.outcome)
        }
        Algo::Rls => rls_search(t, q, measure, need_policy()?),
        Algo::RlsSkip => {
            let policy = need_policy()?;
            rls_skip_search(t, q, measure, policy, policy.k)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKEntry {
    pub traj_id: String,
    pub interval: Interval,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKResult {
    pub entries: Vec<TopKEntry>,
    /// Trajectories searched.
    pub candidates: usize,
    /// Trajectories removed by the filter.
    pub pruned: usize,
    /// Trajectories skipped because the algorithm could not run on them
    /// (UCR on data shorter than the query).
    pub skipped: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TopKResult {
    pub const CSV_HEADER: &'static str = "rank,traj_id,start,end,distance";

    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (r, e) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{},{:?}", r + 1, e.traj_id, e.interval.start, e.interval.end, e.distance);
        }
        out
    }
}

/// Global top-k over the database: the best interval per trajectory, merged by
/// distance, then trajectory id, then interval.
#[allow(clippy::too_many_arguments)]
pub fn query_topk(
    db: &Dataset,
    idx: Option<&MbrIndex>,
    q: &[Point],
    measure: Measure,
    k: usize,
    algo: Algo,
    params: &SearchParams<'_>,
    threads: usize,
) -> Result<TopKResult> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be at least 1".into()));
    }
    if q.is_empty() {
        return Err(Error::InvalidParam("empty query".into()));
    }
    let started = Instant::now();
    let candidates: Vec<usize> = match idx {
        Some(index) => index.probe(&Rect::of(q)),
        None => (0..db.len()).collect(),
    };
    let pruned = db.len() - candidates.len();

    let run_one = |i: usize| -> Result<Option<TopKEntry>> {
        let t = &db.trajectories[i];
        if algo == Algo::Ucr && t.len() < q.len() {
            return Ok(None);
        }
        let out = run_algo(algo, t.points(), q, measure, params, i as u64)?;
        Ok(out.dissimilarity.is_finite().then(|| TopKEntry {
            traj_id: t.id.clone(),
            interval: out.interval,
            distance: out.dissimilarity,
        }))
    };

    let threads = threads.max(1).min(candidates.len().max(1));
    let results: Vec<Result<Option<TopKEntry>>> = if threads == 1 {
        candidates.iter().map(|&i| run_one(i)).collect()
    } else {
        let chunk = candidates.len().div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = candidates
                .chunks(chunk)
                .map(|part| s.spawn(|| part.iter().map(|&i| run_one(i)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("search worker panicked")).collect()
        })
    };

    let mut entries = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(e) => entries.push(e),
            None => skipped += 1,
        }
    }
    entries.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.traj_id.cmp(&b.traj_id))
            .then_with(|| a.interval.cmp(&b.interval))
    });
    entries.truncate(k);
    Ok(TopKResult { entries, candidates: candidates.len() - skipped, pruned, skipped, elapsed: started.elapsed() })
}
