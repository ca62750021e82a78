//! Similar-subtrajectory search.
//!
//! Given a data trajectory `T` and a query `Q`, find the contiguous interval
//! `T[i, j]` minimizing a dissimilarity to `Q`. Measures (DTW, discrete Frechet
//! and a grid embedding) are evaluated incrementally, which is what makes the
//! exact and splitting searchers cheap.

pub mod error;
pub mod eval;
pub mod index;
pub mod measures;
pub mod pruning;
pub mod rl;
pub mod rng;
pub mod search;
pub mod store;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
pub use eval::{rank_all, score, MetricsReport, RankTable};
pub use index::{build_index, query_topk, Algo, MbrIndex, SearchParams, TopKResult};
pub use measures::{distance, suffix_table, Evaluator, Measure, MeasureKind};
pub use rl::{Policy, TrainConfig};
pub use search::{exact_s, pos, pos_d, pss, random_s, size_s, spring, SearchOutcome};
pub use trajectory::{enumerate_intervals, parse_dataset, DataFormat, Dataset, Interval, Point, Trajectory};
