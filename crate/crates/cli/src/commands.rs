use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use simsub::eval::{gen_pss_adversary, gen_sizes_adversary, DEFAULT_RANK_CAP};
use simsub::index::run_algo;
use simsub::rl::{FeatureConfig, TrainConfig};
use simsub::rng::{seeded, RNG_ALGORITHM};
use simsub::store::{decode, write_store, MAGIC};
use simsub::trajectory::{parse_dataset_bytes, to_csv};
use simsub::{
    build_index, query_topk, rank_all, score, Algo, DataFormat, Dataset, Error, Measure, Policy, SearchParams,
};

use crate::{AdvKind, AdvgenArgs, AlgoArgs, BenchArgs, FeaturesArg, FormatArg, IngestArgs, SearchArgs, TrainArgs};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParam(_) | Error::UnknownAlgo(_) | Error::PolicyMismatch(_) => CliError::Usage(msg),
            Error::EpisodeFinished => CliError::Internal(msg),
            _ => CliError::Data(msg),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Everything needed to reproduce an output file.
#[derive(Debug, Default, Serialize)]
struct RunConfig {
    version: &'static str,
    command: &'static str,
    rng: &'static str,
    seed: u64,
    measures: Vec<String>,
    cell: Option<f64>,
    algos: Vec<String>,
    xi: Option<usize>,
    delay: Option<usize>,
    samples: Option<usize>,
    band: Option<f64>,
    k: Option<usize>,
    k_skip: Option<usize>,
    features: Option<FeatureConfig>,
    index: Option<bool>,
    pairs: Option<usize>,
    train: Option<TrainConfig>,
    adversary: Option<serde_json::Value>,
    inputs: Vec<PathBuf>,
    output: Option<PathBuf>,
}

impl RunConfig {
    fn new(command: &'static str) -> Self {
        RunConfig { version: VERSION, command, rng: RNG_ALGORITHM, ..Default::default() }
    }

    fn header(&self) -> String {
        let json = serde_json::to_string(self).expect("run config serializes");
        format!("# simsub {VERSION} run_config={json}\n")
    }

    fn with_algo_args(mut self, a: &AlgoArgs) -> Self {
        self.seed = a.seed;
        self.xi = Some(a.xi);
        self.delay = Some(a.delay);
        self.samples = Some(a.samples);
        self.band = a.band;
        if let Some(p) = &a.policy {
            self.inputs.push(p.clone());
        }
        self
    }
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Loads a store, CSV or JSONL file. `Auto` sniffs the store magic, then the extension.
fn load(path: &Path, format: FormatArg) -> CliResult<Dataset> {
    let bytes = std::fs::read(path)
        .map_err(|source| CliError::from(Error::Io { path: path.to_path_buf(), source }))?;
    let format = match format {
        FormatArg::Auto if bytes.starts_with(MAGIC) => FormatArg::Store,
        FormatArg::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => FormatArg::Jsonl,
            _ => FormatArg::Csv,
        },
        f => f,
    };
    let mut ds = match format {
        FormatArg::Store => decode(&bytes)?,
        FormatArg::Jsonl => parse_dataset_bytes(&bytes, DataFormat::Jsonl)?,
        _ => parse_dataset_bytes(&bytes, DataFormat::Csv)?,
    };
    ds.provenance.source = path.to_path_buf();
    Ok(ds)
}

fn parse_measure(name: &str, cell: f64) -> CliResult<Measure> {
    Ok(Measure::parse(name.trim(), cell)?)
}

fn parse_list<T>(list: &str, f: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    let items: Vec<T> = list.split(',').filter(|s| !s.trim().is_empty()).map(|s| f(s.trim())).collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("empty list {list:?}")));
    }
    Ok(items)
}

fn load_policy(path: Option<&PathBuf>) -> CliResult<Option<Policy>> {
    path.map(|p| Policy::load(p).map_err(CliError::from)).transpose()
}

fn require_policy(algos: &[Algo], policy: Option<&Policy>) -> CliResult {
    if let Some(a) = algos.iter().find(|a| a.needs_policy()) {
        if policy.is_none() {
            return Err(CliError::Usage(format!("algorithm {a} requires --policy")));
        }
    }
    Ok(())
}

pub fn ingest(a: &IngestArgs) -> CliResult {
    let ds = load(&a.input, a.format)?;
    write_store(&a.out, &ds)?;
    if let Some(path) = &a.export_csv {
        let mut rc = RunConfig::new("ingest");
        rc.inputs.push(a.input.clone());
        rc.output = Some(path.clone());
        write_out(Some(path), &(rc.header() + &to_csv(&ds)))?;
    }
    println!("trajectories={} rows_rejected={}", ds.len(), ds.provenance.rows_rejected);
    Ok(())
}

pub fn train(a: &TrainArgs) -> CliResult {
    let measure = parse_measure(&a.measure.measure, a.measure.cell)?;
    let data = load(&a.data, FormatArg::Auto)?;
    let queries = load(&a.queries, FormatArg::Auto)?;
    let features = match a.features {
        FeaturesArg::Auto => FeatureConfig::default_for(measure),
        FeaturesArg::WithSuffix => FeatureConfig::WithSuffix,
        FeaturesArg::PrefixOnly => FeatureConfig::PrefixOnly,
    };
    let cfg = TrainConfig {
        episodes: a.episodes,
        batch_size: a.batch,
        learning_rate: a.lr,
        gamma: a.gamma,
        epsilon_start: a.eps_start,
        epsilon_min: a.eps_min,
        epsilon_decay: a.eps_decay,
        replay_capacity: a.replay,
        hidden: a.hidden,
        seed: a.seed,
    };
    let started = Instant::now();
    let out = simsub::rl::train(&data, &queries, measure, &cfg, features, a.k)?;
    let elapsed = started.elapsed();
    out.policy.save(&a.out)?;

    if let Some(path) = &a.log {
        let rc = RunConfig {
            seed: a.seed,
            measures: vec![measure.name().into()],
            cell: (!measure.is_dp()).then_some(a.measure.cell),
            k: Some(a.k),
            features: Some(features),
            train: Some(cfg.clone()),
            inputs: vec![a.data.clone(), a.queries.clone()],
            output: Some(a.out.clone()),
            ..RunConfig::new("train")
        };
        let mut text = rc.header();
        text.push_str("episode,theta_best,epsilon,mean_loss,steps\n");
        for e in &out.log {
            let _ = writeln!(text, "{},{:?},{:?},{:?},{}", e.episode, e.theta_best, e.epsilon, e.mean_loss, e.steps);
        }
        write_out(Some(path), &text)?;
    }
    eprintln!("episodes={} train_ms={:.3} policy={}", out.log.len(), elapsed.as_secs_f64() * 1e3, a.out.display());
    Ok(())
}

pub fn search(a: &SearchArgs) -> CliResult {
    let algo: Algo = a.algo.parse()?;
    let measure = parse_measure(&a.measure.measure, a.measure.cell)?;
    let policy = load_policy(a.algo_args.policy.as_ref())?;
    require_policy(&[algo], policy.as_ref())?;
    let db = load(&a.data, FormatArg::Auto)?;
    let queries = load(&a.query, FormatArg::Auto)?;
    let index = if a.index { Some(build_index(&db)?) } else { None };
    let params = SearchParams {
        xi: a.algo_args.xi,
        delay: a.algo_args.delay,
        samples: a.algo_args.samples,
        seed: a.algo_args.seed,
        band: a.algo_args.band,
        policy: policy.as_ref(),
        k_skip: policy.as_ref().map_or(0, |p| p.k),
    };

    let rc = RunConfig {
        measures: vec![measure.name().into()],
        cell: (!measure.is_dp()).then_some(a.measure.cell),
        algos: vec![algo.name().into()],
        k: Some(a.k),
        k_skip: policy.as_ref().map(|p| p.k),
        index: Some(a.index),
        inputs: vec![a.data.clone(), a.query.clone()],
        output: a.out.clone(),
        ..RunConfig::new("search").with_algo_args(&a.algo_args)
    };
    let mut text = rc.header();
    text.push_str("query_id,");
    text.push_str(simsub::TopKResult::CSV_HEADER);
    text.push('\n');
    let mut timings = String::new();
    for q in queries.iter() {
        let res = query_topk(&db, index.as_ref(), q.points(), measure, a.k, algo, &params, a.algo_args.threads)?;
        for (r, e) in res.entries.iter().enumerate() {
            let _ = writeln!(text, "{},{},{},{},{},{:?}", q.id, r + 1, e.traj_id, e.interval.start, e.interval.end, e.distance);
        }
        let _ = writeln!(
            timings,
            "# query={} candidates={} pruned={} skipped={} elapsed_ms={:.3}",
            q.id,
            res.candidates,
            res.pruned,
            res.skipped,
            res.elapsed.as_secs_f64() * 1e3
        );
    }
    write_out(a.out.as_deref(), &text)?;
    eprint!("{timings}");
    Ok(())
}

struct PairRow {
    measure: &'static str,
    algo: Algo,
    pair: usize,
    traj_id: String,
    query_id: String,
    start: usize,
    end: usize,
    distance: f64,
    metrics: simsub::MetricsReport,
    time_ms: f64,
}

pub fn bench(a: &BenchArgs) -> CliResult {
    let algos = parse_list(&a.algos, |s| Ok(s.parse::<Algo>()?))?;
    let measures = parse_list(&a.measures, |s| parse_measure(s, a.cell))?;
    if a.pairs == 0 {
        return Err(CliError::Usage("--pairs must be at least 1".into()));
    }
    if algos.contains(&Algo::Ucr) && measures.iter().any(|m| *m != Measure::Dtw) {
        return Err(CliError::Usage("ucr only runs with the dtw measure".into()));
    }
    let policy = load_policy(a.algo_args.policy.as_ref())?;
    require_policy(&algos, policy.as_ref())?;
    let data = load(&a.data, FormatArg::Auto)?;
    let queries = load(&a.queries, FormatArg::Auto)?;
    let params = SearchParams {
        xi: a.algo_args.xi,
        delay: a.algo_args.delay,
        samples: a.algo_args.samples,
        seed: a.algo_args.seed,
        band: a.algo_args.band,
        policy: policy.as_ref(),
        k_skip: policy.as_ref().map_or(0, |p| p.k),
    };

    let mut rng = seeded(a.algo_args.seed);
    let pairs: Vec<(usize, usize)> =
        (0..a.pairs).map(|_| (rng.random_range(0..data.len()), rng.random_range(0..queries.len()))).collect();

    let run_pair = |measure: Measure, p: usize| -> CliResult<Vec<PairRow>> {
        let (t, q) = (&data.trajectories[pairs[p].0], &queries.trajectories[pairs[p].1]);
        let table = rank_all(t.points(), q.points(), measure, DEFAULT_RANK_CAP)?;
        let mut rows = Vec::with_capacity(algos.len());
        for &algo in &algos {
            if algo == Algo::Ucr && t.len() < q.len() {
                continue;
            }
            let started = Instant::now();
            let out = run_algo(algo, t.points(), q.points(), measure, &params, p as u64)?;
            let time_ms = started.elapsed().as_secs_f64() * 1e3;
            rows.push(PairRow {
                measure: measure.name(),
                algo,
                pair: p,
                traj_id: t.id.clone(),
                query_id: q.id.clone(),
                start: out.interval.start,
                end: out.interval.end,
                distance: out.dissimilarity,
                metrics: score(&out, &table)?,
                time_ms,
            });
        }
        Ok(rows)
    };

    let threads = a.algo_args.threads.max(1);
    let mut rows = Vec::new();
    for &measure in &measures {
        let idx: Vec<usize> = (0..pairs.len()).collect();
        let chunk = idx.len().div_ceil(threads);
        let parts: Vec<CliResult<Vec<PairRow>>> = std::thread::scope(|s| {
            let handles: Vec<_> = idx
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || -> CliResult<Vec<PairRow>> {
                        let mut out = Vec::new();
                        for &p in part {
                            out.extend(run_pair(measure, p)?);
                        }
                        Ok(out)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Internal("bench worker panicked".into()))))
                .collect()
        });
        for part in parts {
            rows.extend(part?);
        }
    }

    let rc = RunConfig {
        measures: measures.iter().map(|m| m.name().to_string()).collect(),
        cell: measures.iter().any(|m| !m.is_dp()).then_some(a.cell),
        algos: algos.iter().map(|a| a.name().to_string()).collect(),
        k_skip: policy.as_ref().map(|p| p.k),
        pairs: Some(a.pairs),
        inputs: vec![a.data.clone(), a.queries.clone()],
        output: a.out.clone(),
        ..RunConfig::new("bench").with_algo_args(&a.algo_args)
    };
    let mut text = rc.header();
    let _ = writeln!(text, "kind,measure,algo,pair,traj_id,query_id,start,end,distance,{}", simsub::MetricsReport::CSV_HEADER);
    for r in &rows {
        let _ = writeln!(
            text,
            "pair,{},{},{},{},{},{},{},{:?},{}",
            r.measure,
            r.algo,
            r.pair,
            r.traj_id,
            r.query_id,
            r.start,
            r.end,
            r.distance,
            r.metrics.csv_row()
        );
    }
    // aggregate rows: mean AR over finite values, ar_infinite holds the count of infinite ones
    for &measure in &measures {
        for &algo in &algos {
            let sel: Vec<&PairRow> = rows.iter().filter(|r| r.measure == measure.name() && r.algo == algo).collect();
            if sel.is_empty() {
                continue;
            }
            let finite: Vec<f64> = sel.iter().filter(|r| !r.metrics.ar_infinite).map(|r| r.metrics.ar).collect();
            let n = sel.len() as f64;
            let mean_ar = if finite.is_empty() { f64::NAN } else { finite.iter().sum::<f64>() / finite.len() as f64 };
            let mean_mr = sel.iter().map(|r| r.metrics.mr as f64).sum::<f64>() / n;
            let mean_rr = sel.iter().map(|r| r.metrics.rr).sum::<f64>() / n;
            let _ = writeln!(
                text,
                "mean,{},{},{},,,,,,{:?},{},{:?},{:?}",
                measure.name(),
                algo,
                sel.len(),
                mean_ar,
                sel.len() - finite.len(),
                mean_mr,
                mean_rr
            );
        }
    }
    write_out(a.out.as_deref(), &text)?;

    if let Some(path) = &a.timing {
        let mut t = rc.header();
        t.push_str("measure,algo,pair,time_ms\n");
        for r in &rows {
            let _ = writeln!(t, "{},{},{},{:.6}", r.measure, r.algo, r.pair, r.time_ms);
        }
        write_out(Some(path), &t)?;
    }
    Ok(())
}

pub fn advgen(a: &AdvgenArgs) -> CliResult {
    let inst = match a.kind {
        AdvKind::Sizes => gen_sizes_adversary(a.size, a.d_max, a.eps)?,
        AdvKind::Pss => gen_pss_adversary(a.size, a.d_max, a.eps)?,
    };
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", a.out.display())))?;
    let rc = RunConfig {
        adversary: Some(serde_json::to_value(inst.params).expect("params serialize")),
        output: Some(a.out.clone()),
        ..RunConfig::new("advgen")
    };
    let data = Dataset::from_trajectories(vec![inst.data.clone()])?;
    let query = Dataset::from_trajectories(vec![inst.query.clone()])?;
    write_out(Some(&a.out.join("data.csv")), &(rc.header() + &to_csv(&data)))?;
    write_out(Some(&a.out.join("query.csv")), &(rc.header() + &to_csv(&query)))?;
    let sidecar = serde_json::json!({
        "run_config": rc,
        "params": inst.params,
        "predicted": inst.predicted,
        "data_points": inst.data.len(),
        "query_points": inst.query.len(),
    });
    let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    json.push('\n');
    write_out(Some(&a.out.join("predicted.json")), &json)?;
    println!("data_points={} query_points={}", inst.data.len(), inst.query.len());
    Ok(())
}
