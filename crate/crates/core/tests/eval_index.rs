mod common;

use common::*;
use proptest::prelude::*;
use simsub::eval::{gen_pss_adversary, gen_sizes_adversary, DEFAULT_RANK_CAP};
use simsub::index::{build_index, query_topk, Algo, SearchParams};
use simsub::pruning::Rect;
use simsub::{distance, exact_s, pss, rank_all, score, size_s, Dataset, Measure, Point, Trajectory};

fn int_pts(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0..6i32, 0..6i32), 1..max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect())
}

proptest! {
    #[test]
    fn rank_table_values_match_naive(t in int_pts(15), q in int_pts(4)) {
        for m in MEASURES {
            let table = rank_all(&t, &q, m, DEFAULT_RANK_CAP).unwrap();
            prop_assert_eq!(table.len(), t.len() * (t.len() + 1) / 2);
            for (iv, v) in table.intervals.iter().zip(&table.values) {
                prop_assert!(close(*v, naive_distance(m, &t[iv.range()], &q), 1e-12));
            }
            // ties keep (start, end) order
            for k in 1..table.len() {
                if table.values[k] == table.values[k - 1] {
                    prop_assert!(table.intervals[k - 1] < table.intervals[k]);
                }
            }
        }
    }

    #[test]
    fn metric_ranges(t in int_pts(20), q in int_pts(5), xi in 0usize..4) {
        let table = rank_all(&t, &q, Measure::Dtw, DEFAULT_RANK_CAP).unwrap();
        for out in [pss(&t, &q, Measure::Dtw), size_s(&t, &q, Measure::Dtw, xi), exact_s(&t, &q, Measure::Dtw)] {
            let s = score(&out, &table).unwrap();
            prop_assert!(s.mr >= 1 && s.mr <= table.len());
            prop_assert!(s.rr > 0.0 && s.rr <= 1.0);
            prop_assert!(s.ar >= 1.0);
        }
    }

    #[test]
    fn pss_adversary_ar_nearly_doubles_when_eps_halves(exp in 3i32..9) {
        let eps = 10f64.powi(-exp);
        let ar = |e: f64| {
            let inst = gen_pss_adversary(10, 100.0, e).unwrap();
            let (t, q) = (inst.data.points(), inst.query.points());
            pss(t, q, Measure::Dtw).dissimilarity / exact_s(t, q, Measure::Dtw).dissimilarity
        };
        // sqrt(d^2/4 + e^2) / e with d = 50, so the ratio falls just short of 2
        let want = 2.0 * ((625.0 + eps * eps / 4.0) / (625.0 + eps * eps)).sqrt();
        prop_assert!(close(ar(eps / 2.0) / ar(eps), want, 1e-9));
    }
}

#[test]
fn rank_cap_enforced() {
    let t = vec![Point::new(0.0, 0.0); 2000];
    assert!(matches!(rank_all(&t, &t[..1], Measure::Dtw, DEFAULT_RANK_CAP), Err(simsub::Error::TooLarge { .. })));
}

#[test]
fn sizes_adversary_bounds() {
    let inst = gen_sizes_adversary(8, 1000.0, 1e-3).unwrap();
    let (t, q) = (inst.data.points(), inst.query.points());
    // the full trajectory aligns every circle to its centre
    assert!(distance(Measure::Dtw, t, q) <= inst.predicted.optimum_upper);
    let approx = size_s(t, q, Measure::Dtw, 0).dissimilarity;
    assert!(approx > inst.predicted.approx_lower_dtw);
    let fr = size_s(t, q, Measure::Frechet, 0).dissimilarity / exact_s(t, q, Measure::Frechet).dissimilarity;
    assert!(fr >= inst.predicted.ar_lower_frechet, "{fr} < {}", inst.predicted.ar_lower_frechet);
}

#[test]
fn pss_adversary_rr_bound() {
    for n in [20, 50, 100] {
        let inst = gen_pss_adversary(n, 100.0, 1e-6).unwrap();
        let (t, q) = (inst.data.points(), inst.query.points());
        let table = rank_all(t, q, Measure::Dtw, DEFAULT_RANK_CAP).unwrap();
        let s = score(&pss(t, q, Measure::Dtw), &table).unwrap();
        assert!(s.rr >= inst.predicted.rr_lower.unwrap(), "n={n}: {} < {:?}", s.rr, inst.predicted.rr_lower);
        assert!(s.mr as f64 >= inst.predicted.mr_lower.unwrap());
        assert_eq!(exact_s(t, q, Measure::Dtw).dissimilarity, 1e-6);
    }
}

fn db() -> Dataset {
    let mut rng = simsub::rng::seeded(21);
    let trajs = (0..40)
        .map(|i| Trajectory::new(format!("t{i:02}"), rand_real_points(&mut rng, 3 + i % 9, 30.0)).unwrap())
        .collect();
    Dataset::from_trajectories(trajs).unwrap()
}

#[test]
fn probe_matches_linear_scan() {
    let db = db();
    let idx = build_index(&db).unwrap();
    let mut rng = simsub::rng::seeded(22);
    for _ in 0..200 {
        let c = rand_real_points(&mut rng, 2, 40.0);
        let probe = Rect::of(&c);
        let brute: Vec<usize> =
            db.iter().enumerate().filter(|(_, t)| Rect::of(t.points()).intersects(&probe)).map(|(i, _)| i).collect();
        assert_eq!(idx.probe(&probe), brute);
    }
}

#[test]
fn unfiltered_topk_equals_flat_scan() {
    let db = db();
    let q = rand_real_points(&mut simsub::rng::seeded(23), 4, 30.0);
    let res = query_topk(&db, None, &q, Measure::Dtw, 10, Algo::Exacts, &SearchParams::default(), 4).unwrap();
    let mut flat: Vec<(f64, String)> =
        db.iter().map(|t| (exact_s(t.points(), &q, Measure::Dtw).dissimilarity, t.id.clone())).collect();
    flat.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let got: Vec<(f64, String)> = res.entries.iter().map(|e| (e.distance, e.traj_id.clone())).collect();
    assert_eq!(got, flat[..10].to_vec());
    for e in &res.entries {
        let t = db.get(&e.traj_id).unwrap();
        assert_eq!(e.distance, distance(Measure::Dtw, &t.points()[e.interval.range()], &q));
    }
}

#[test]
fn inert_filter_changes_nothing() {
    let db = db();
    let idx = build_index(&db).unwrap();
    // a query spanning the whole region intersects every rectangle
    let q = [Point::new(-100.0, -100.0), Point::new(100.0, 100.0)];
    for algo in [Algo::Exacts, Algo::Pss, Algo::Sizes, Algo::RandomS] {
        let p = SearchParams::default();
        let a = query_topk(&db, None, &q, Measure::Frechet, 5, algo, &p, 1).unwrap();
        let b = query_topk(&db, Some(&idx), &q, Measure::Frechet, 5, algo, &p, 2).unwrap();
        assert_eq!(a.entries, b.entries);
        assert_eq!(b.pruned, 0);
    }
}

#[test]
fn every_algorithm_runs_through_topk() {
    let db = db();
    let q = rand_real_points(&mut simsub::rng::seeded(24), 3, 30.0);
    let policy =
        simsub::Policy::new(Measure::Dtw, simsub::rl::FeatureConfig::WithSuffix, 3, simsub::rl::QNetwork::zeros(3, 20, 5))
            .unwrap();
    let params = SearchParams { policy: Some(&policy), ..SearchParams::default() };
    let opt = query_topk(&db, None, &q, Measure::Dtw, 1, Algo::Exacts, &params, 1).unwrap().entries[0].distance;
    for algo in Algo::ALL {
        if algo == Algo::Rls {
            continue;
        }
        let res = query_topk(&db, None, &q, Measure::Dtw, 3, algo, &params, 1).unwrap();
        assert!(!res.entries.is_empty(), "{algo}");
        assert!(res.entries[0].distance >= opt, "{algo}");
    }
}
