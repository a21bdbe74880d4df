mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topogland::metrics::{evaluate, object_f1, MatchCriterion};

#[test]
fn streaming_metrics_equal_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3E7);
    for case in 0..200 {
        let (pred, gt) = common::random_pair(&mut rng);
        let r = evaluate(&pred, &gt, MatchCriterion::GtFraction).unwrap();
        let (tp, fp, fn_) = common::brute_counts(&pred, &gt);
        assert_eq!((r.tp, r.fp, r.fn_), (tp, fp, fn_), "case {case}");
        assert_eq!(r.f1, common::brute_f1(&pred, &gt), "case {case} f1");
        assert_eq!(r.obj_dice, common::brute_dice(&pred, &gt), "case {case} dice");
        let hd = common::brute_hausdorff(&pred, &gt);
        assert!((r.obj_hausdorff - hd).abs() <= 1e-9, "case {case} hausdorff {} vs {hd}", r.obj_hausdorff);
    }
}

#[test]
fn perfect_prediction_scores_one_one_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let n = rng.gen_range(1..=5);
        let gt = common::random_shapes(&mut rng, 32, 32, n);
        let r = evaluate(&gt, &gt, MatchCriterion::GtFraction).unwrap();
        assert_eq!((r.f1, r.obj_dice, r.obj_hausdorff), (1.0, 1.0, 0.0));
    }
}

#[test]
fn f1_is_symmetric_in_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..50 {
        let (pred, gt) = common::random_pair(&mut rng);
        let f = object_f1(&pred, &gt).unwrap();
        assert_eq!(f.tp + f.fp, pred.n_labels() as usize);
        assert_eq!(f.tp + f.fn_, gt.n_labels() as usize);
    }
}
