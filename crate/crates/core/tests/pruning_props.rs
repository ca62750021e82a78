mod common;

use common::*;
use proptest::prelude::*;
use simsub::pruning::{
    dtw_banded, lb_keogh, lb_kim_fl, ucr_search, ucr_search_seeded, ucr_search_traced, Envelope, Stage,
};
use simsub::Point;

fn pts(lo: usize, hi: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-20.0..20.0f64, -20.0..20.0f64), lo..hi)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

proptest! {
    #[test]
    fn bounds_are_sound(w in pts(6, 7), q in pts(6, 7), band in 0.0..=1.0f64) {
        let truth = dtw_banded(&w, &q, band).unwrap();
        prop_assert!(close(truth, banded_dtw_oracle(&w, &q, (band * 6.0).floor() as usize), 1e-12));
        prop_assert!(lb_kim_fl(&w, &q).unwrap() <= truth);
        prop_assert!(lb_keogh(&w, &Envelope::new(&q, band).unwrap()).unwrap() <= truth);
        prop_assert!(lb_keogh(&q, &Envelope::new(&w, band).unwrap()).unwrap() <= truth);
    }

    #[test]
    fn ucr_equals_sweep(t in pts(8, 40), q in pts(1, 8), band in 0.0..=1.0f64) {
        let out = ucr_search(&t, &q, band).unwrap();
        let (iv, d) = window_sweep(&t, &q, band);
        prop_assert_eq!(out.outcome.interval, iv);
        prop_assert_eq!(out.outcome.dissimilarity, d);
        let s = out.stats;
        prop_assert_eq!(s.windows as usize, t.len() + 1 - q.len());
        prop_assert_eq!(s.pruned() + s.computed, s.windows);
    }

    #[test]
    fn trace_is_consistent(t in pts(8, 30), q in pts(2, 6)) {
        let (out, records) = ucr_search_traced(&t, &q, 0.5).unwrap();
        prop_assert_eq!(records.len() as u64, out.stats.windows);
        for r in &records {
            match r.stage {
                Stage::KimFl => prop_assert!(r.kim > r.bsf_before),
                Stage::Computed => prop_assert!(r.dtw.is_some()),
                _ => prop_assert!(r.dtw.is_none()),
            }
        }
    }

    #[test]
    fn seeded_threshold_only_prunes_worse(t in pts(8, 30), q in pts(2, 6)) {
        let free = ucr_search(&t, &q, 1.0).unwrap().outcome;
        let seeded = ucr_search_seeded(&t, &q, 1.0, free.dissimilarity).unwrap().outcome;
        prop_assert_eq!(seeded.dissimilarity, free.dissimilarity);
        let tight = ucr_search_seeded(&t, &q, 1.0, free.dissimilarity * 0.5).unwrap().outcome;
        prop_assert!(free.dissimilarity == 0.0 || tight.dissimilarity.is_infinite());
    }
}

#[test]
fn query_longer_than_data_is_rejected() {
    let t = [Point::new(0.0, 0.0); 2];
    let q = [Point::new(0.0, 0.0); 3];
    assert!(ucr_search(&t, &q, 0.5).is_err());
}
