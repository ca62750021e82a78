use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn simsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simsub")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = simsub(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// CSV rows with comment lines dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn walk(id: &str, n: usize, dx: f64, dy: f64, phase: f64) -> String {
    (0..n)
        .map(|i| {
            let f = i as f64;
            format!("{id},{i},{:.3},{:.3}\n", f * dx + (f * 0.7 + phase).sin(), f * dy + (f * 0.3 + phase).cos())
        })
        .collect()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    data: PathBuf,
    queries: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let mut data = String::from("traj_id,seq,x,y\n");
    for i in 0..8 {
        data.push_str(&walk(&format!("d{i}"), 12 + i, 1.0, 0.2 * i as f64, i as f64));
    }
    let mut queries = String::from("traj_id,seq,x,y\n");
    for i in 0..3 {
        queries.push_str(&walk(&format!("q{i}"), 4, 1.0, 0.3, 0.5 * i as f64));
    }
    std::fs::write(root.join("data.csv"), data).unwrap();
    std::fs::write(root.join("queries.csv"), queries).unwrap();
    let store = root.join("data.store");
    ok(&["ingest", "--input", p(&root.join("data.csv")), "--out", p(&store)]);
    Fixture { data: store, queries: root.join("queries.csv"), root, _dir: dir }
}

#[test]
fn ingest_summary_and_roundtrip() {
    let f = fixture();
    let out = ok(&["ingest", "--input", p(&f.root.join("data.csv")), "--out", p(&f.root.join("a.store")), "--export-csv", p(&f.root.join("a.csv"))]);
    assert_eq!(out.trim(), "trajectories=8 rows_rejected=0");
    let export = std::fs::read_to_string(f.root.join("a.csv")).unwrap();
    assert!(export.starts_with("# simsub "));
    ok(&["ingest", "--input", p(&f.root.join("a.csv")), "--out", p(&f.root.join("b.store"))]);
    assert_eq!(std::fs::read(f.root.join("a.store")).unwrap(), std::fs::read(f.root.join("b.store")).unwrap());
}

#[test]
fn ingest_missing_file_is_data_error() {
    let f = fixture();
    let out = simsub(&["ingest", "--input", p(&f.root.join("nope.csv")), "--out", p(&f.root.join("x.store"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn usage_errors_exit_2() {
    let f = fixture();
    assert_eq!(simsub(&["frobnicate"]).status.code(), Some(2));
    let base = ["search", "--data", p(&f.data), "--query", p(&f.queries)];
    let unknown = simsub(&[&base[..], &["--algo", "quantum"]].concat());
    assert_eq!(unknown.status.code(), Some(2));
    let no_policy = simsub(&[&base[..], &["--algo", "rls-skip"]].concat());
    assert_eq!(no_policy.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_policy.stderr).contains("--policy"));
}

#[test]
fn help_lists_paper_defaults() {
    let train = ok(&["train", "--help"]);
    for needle in ["0.95", "2000", "0.001", "0.05", "0.99"] {
        assert!(train.contains(needle), "train --help lacks {needle}");
    }
    let search = ok(&["search", "--help"]);
    assert!(search.contains("[default: 5]") && search.contains("[default: 3]"));
}

#[test]
fn search_exacts_on_single_trajectory() {
    let f = fixture();
    let one = f.root.join("one.csv");
    std::fs::write(&one, "a,0,0,0\na,1,1,0\na,2,5,5\na,3,2,0\n").unwrap();
    let q = f.root.join("q.csv");
    std::fs::write(&q, "q,0,1,0\nq,1,2,0\n").unwrap();
    let out = ok(&["search", "--data", p(&one), "--query", p(&q), "--algo", "exacts", "--k", "1"]);
    assert!(out.starts_with("# simsub "));
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    // the singletons <(1,0)> and <(2,0)> both reach DTW 1; the earlier start wins the tie
    assert_eq!(r[0], ["q", "1", "a", "2", "2", "1.0"]);
}

#[test]
fn pss_never_beats_exacts_and_index_agrees() {
    let f = fixture();
    let run = |algo: &str, extra: &[&str]| {
        let args = [&["search", "--data", p(&f.data), "--query", p(&f.queries), "--algo", algo, "--k", "8"][..], extra].concat();
        rows(&ok(&args))
    };
    let exact = run("exacts", &[]);
    let pss = run("pss", &["--threads", "3"]);
    for q in ["q0", "q1", "q2"] {
        let best = |r: &[Vec<String>]| r.iter().find(|row| row[0] == q).unwrap()[5].parse::<f64>().unwrap();
        assert!(best(&pss) >= best(&exact));
    }
    // k covers the whole database, so every filtered answer also appears unfiltered
    let key = |r: &Vec<String>| (r[0].clone(), r[2..].to_vec());
    let indexed = run("exacts", &["--index"]);
    assert!(indexed.len() <= exact.len());
    for row in &indexed {
        assert!(exact.iter().any(|e| key(e) == key(row)), "{row:?}");
    }
}

#[test]
fn train_is_deterministic_and_logs_episodes() {
    let f = fixture();
    let train = |name: &str, episodes: &str| {
        let pol = f.root.join(format!("{name}.json"));
        let log = f.root.join(format!("{name}.csv"));
        ok(&[
            "train", "--data", p(&f.data), "--queries", p(&f.queries), "--episodes", episodes, "--seed", "7", "--out",
            p(&pol), "--log", p(&log),
        ]);
        (std::fs::read(pol).unwrap(), std::fs::read_to_string(log).unwrap())
    };
    let (a, log) = train("a", "10");
    let (b, _) = train("b", "10");
    assert_eq!(a, b);
    assert_eq!(rows(&log).len(), 10);
    assert!(log.starts_with("# simsub "));

    let (init, log0) = train("c", "0");
    let policy = simsub::Policy::from_json(std::str::from_utf8(&init).unwrap()).unwrap();
    let fresh = simsub::rl::QNetwork::init(3, 20, 2, &mut simsub::rng::seeded(7));
    assert_eq!(policy.network, fresh);
    assert!(rows(&log0).is_empty());

    // the trained policy drives rls searches
    let pol = f.root.join("a.json");
    let out = ok(&["search", "--data", p(&f.data), "--query", p(&f.queries), "--algo", "rls", "--policy", p(&pol)]);
    assert_eq!(rows(&out).len(), 9);
}

#[test]
fn policy_measure_mismatch_is_usage_error() {
    let f = fixture();
    let pol = f.root.join("p.json");
    ok(&["train", "--data", p(&f.data), "--queries", p(&f.queries), "--episodes", "2", "--out", p(&pol)]);
    let out = simsub(&["search", "--data", p(&f.data), "--query", p(&f.queries), "--algo", "rls", "--policy", p(&pol), "--measure", "frechet"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_exacts_is_perfect_and_reproducible() {
    let f = fixture();
    let args = [
        "bench", "--data", p(&f.data), "--queries", p(&f.queries), "--algos", "exacts,pss,sizes,random-s", "--measures",
        "dtw,frechet", "--pairs", "6", "--seed", "3",
    ];
    let a = ok(&args);
    let b = ok(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(a, b);

    let all = rows(&a);
    let (pairs, means): (Vec<_>, Vec<_>) = all.iter().partition(|r| r[0] == "pair");
    assert_eq!(pairs.len(), 6 * 4 * 2);
    for m in &means {
        let sel: Vec<_> = pairs.iter().filter(|r| r[1] == m[1] && r[2] == m[2]).collect();
        let n = sel.len() as f64;
        let mean = |col: usize| sel.iter().map(|r| r[col].parse::<f64>().unwrap()).sum::<f64>() / n;
        assert_eq!(m[3].parse::<usize>().unwrap(), sel.len());
        assert!((m[9].parse::<f64>().unwrap() - mean(9)).abs() <= 1e-12 * mean(9));
        assert!((m[11].parse::<f64>().unwrap() - mean(11)).abs() <= 1e-12);
        assert!((m[12].parse::<f64>().unwrap() - mean(12)).abs() <= 1e-12);
        if m[2] == "exacts" {
            assert_eq!(m[9], "1.0");
            assert_eq!(m[11], "1.0");
        }
    }
}

#[test]
fn advgen_shapes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["advgen", "--kind", "sizes", "--size", "8", "--d-max", "1000", "--eps", "0.001", "--out", p(&a)]);
    let data = std::fs::read_to_string(a.join("data.csv")).unwrap();
    assert_eq!(rows(&data).len(), 64);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("predicted.json")).unwrap()).unwrap();
    assert!(side["predicted"]["ar_lower_dtw"].as_f64().unwrap() > 1.0);

    ok(&["advgen", "--kind", "pss", "--size", "50", "--d-max", "100", "--eps", "1e-6", "--out", p(&a)]);
    ok(&["advgen", "--kind", "pss", "--size", "50", "--d-max", "100", "--eps", "1e-6", "--out", p(&b)]);
    assert_eq!(rows(&std::fs::read_to_string(a.join("data.csv")).unwrap()).len(), 53);
    assert_eq!(std::fs::read(a.join("query.csv")).unwrap().len(), std::fs::read(b.join("query.csv")).unwrap().len());
    let strip = |path: PathBuf| {
        std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(a.join("data.csv")), strip(b.join("data.csv")));

    let bad = simsub(&["advgen", "--kind", "sizes", "--size", "5", "--out", p(&a)]);
    assert_eq!(bad.status.code(), Some(2));
}
