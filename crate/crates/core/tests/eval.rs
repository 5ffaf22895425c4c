use fuzzyseg::eval::*;
use fuzzyseg::image::{LabelMap, DEFAULT_PALETTE};
use fuzzyseg::mofs::{segment, LinkTable, SeedSpec, TieRule};
use fuzzyseg::image::Spel;
use proptest::prelude::*;

#[test]
fn dice_examples() {
    let a = vec![true; 10];
    assert_eq!(dice(&a, &a).unwrap(), 1.0);
    let none = vec![false; 10];
    assert_eq!(dice(&none, &none).unwrap(), 1.0);
    let b: Vec<bool> = (0..10).map(|i| i < 5).collect();
    let c: Vec<bool> = (0..10).map(|i| i >= 5).collect();
    assert_eq!(dice(&b, &c).unwrap(), 0.0);
    let x: Vec<bool> = (0..200).map(|i| i < 100).collect();
    let y: Vec<bool> = (0..200).map(|i| (50..150).contains(&i)).collect();
    assert_eq!(dice(&x, &y).unwrap(), 0.5);
    assert!(matches!(dice(&a, &b[..3]), Err(EvalError::DimensionMismatch { .. })));
}

#[test]
fn weighted_dice_examples() {
    let gt = LabelMap::from_fn(20, 10, |x, _| if x < 10 { 1 } else { 2 });
    assert_eq!(weighted_dice(&gt, &gt).unwrap().0, 1.0);
    // object 2 predicted on only half its area, the rest unlabeled: dice 2*50/150
    let pred = LabelMap::from_fn(20, 10, |x, _| match x {
        0..=9 => 1,
        10..=14 => 2,
        _ => 0,
    });
    let (w, scores) = weighted_dice(&pred, &gt).unwrap();
    assert_eq!(scores[0].dice, 1.0);
    assert!((scores[1].dice - 2.0 / 3.0).abs() < 1e-12);
    assert!((w - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
    let other = LabelMap::filled(5, 5, 1);
    assert!(weighted_dice(&other, &gt).is_err());
}

#[test]
fn equal_objects_average() {
    // gt label 0 is outside every object; object 2 has dice 2*2/(4+4)
    let gt = LabelMap::from_fn(10, 1, |x, _| [1, 1, 1, 1, 2, 2, 2, 2, 0, 0][x]);
    let pred = LabelMap::from_fn(10, 1, |x, _| [1, 1, 1, 1, 2, 2, 3, 3, 2, 2][x]);
    let (w, scores) = weighted_dice(&pred, &gt).unwrap();
    assert_eq!(scores[1].dice, 0.5);
    assert!((w - 0.75).abs() < 1e-12);
}

#[test]
fn single_object_weighted_equals_plain_dice() {
    let gt = LabelMap::from_fn(10, 10, |x, y| u8::from(x + y < 12));
    let pred = LabelMap::from_fn(10, 10, |x, _| u8::from(x < 6));
    let (w, _) = weighted_dice(&pred, &gt).unwrap();
    assert_eq!(w, label_dice(&pred, &gt, 1).unwrap());
}

#[test]
fn matching_examples() {
    let gt = LabelMap::from_fn(9, 3, |x, _| (x / 3) as u8 + 1);
    let m = match_labels(&gt, &gt).unwrap();
    assert_eq!(m.pairs, vec![(1, 1), (2, 2), (3, 3)]);
    let swapped = gt.relabeled(&{
        let mut t = [0u8; 256];
        t[1] = 2;
        t[2] = 1;
        t[3] = 3;
        t
    });
    let m = match_labels(&swapped, &gt).unwrap();
    assert_eq!(m.pairs, vec![(1, 2), (2, 1), (3, 3)]);
    assert!(m.exact);
    assert_eq!(m.apply(&swapped), gt);
}

#[test]
fn surplus_predicted_labels_get_fresh_ids() {
    let gt = LabelMap::from_fn(4, 1, |x, _| if x < 2 { 1 } else { 2 });
    let pred = LabelMap::from_fn(4, 1, |x, _| x as u8 + 1);
    let m = match_labels(&pred, &gt).unwrap();
    let t = m.table();
    let mut ids: Vec<u8> = (1..=4).map(|p| t[p]).collect();
    ids.sort();
    assert_eq!(ids, vec![1, 2, 3, 4]);
    assert_eq!(weighted_dice(&m.apply(&pred), &gt).unwrap().0, 2.0 / 3.0);
}

fn permutations3() -> Vec<[u8; 3]> {
    vec![[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]]
}

fn overlap_of(pred: &LabelMap, gt: &LabelMap, perm: [u8; 3]) -> usize {
    pred.labels().iter().zip(gt.labels()).filter(|(&p, &g)| p > 0 && perm[p as usize - 1] == g).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matching_attains_best_of_all_permutations(
        pred in prop::collection::vec(1u8..=3, 30), gt in prop::collection::vec(1u8..=3, 30),
    ) {
        prop_assume!((1..=3).all(|l| pred.contains(&l) && gt.contains(&l)));
        let pred = LabelMap::new(6, 5, pred).unwrap();
        let gt = LabelMap::new(6, 5, gt).unwrap();
        let m = match_labels(&pred, &gt).unwrap();
        let t = m.table();
        let ours = overlap_of(&pred, &gt, [t[1], t[2], t[3]]);
        let best = permutations3().into_iter().map(|p| overlap_of(&pred, &gt, p)).max().unwrap();
        prop_assert_eq!(ours, best);
    }

    #[test]
    fn score_is_invariant_under_prediction_relabeling(
        pred in prop::collection::vec(0u8..=3, 30), gt in prop::collection::vec(1u8..=3, 30),
        perm in prop::sample::select(permutations3()),
    ) {
        let pred = LabelMap::new(6, 5, pred).unwrap();
        let gt = LabelMap::new(6, 5, gt).unwrap();
        prop_assume!(pred.objects() == vec![1, 2, 3]);
        let mut totals: Vec<usize> = permutations3().into_iter().map(|p| overlap_of(&pred, &gt, p)).collect();
        totals.sort();
        // with tied optimal assignments the choice depends on label order
        prop_assume!(totals[5] > totals[4]);
        let mut t = [0u8; 256];
        for i in 0..3 {
            t[i + 1] = perm[i];
        }
        let relabeled = pred.relabeled(&t);
        let a = weighted_dice(&match_labels(&pred, &gt).unwrap().apply(&pred), &gt).unwrap().0;
        let b = weighted_dice(&match_labels(&relabeled, &gt).unwrap().apply(&relabeled), &gt).unwrap().0;
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn rendered_hue_recovers_crisp_labels(values in prop::collection::vec(1u16..=1000, 8..30)) {
        let t = LinkTable::from_fn(8, 6, 3, |m, c, d| f64::from(values[(m * 31 + c.min(d) * 7 + c.max(d)) % values.len()]) / 1000.0);
        let seeds = SeedSpec::new(vec![vec![Spel::new(0, 0)], vec![Spel::new(7, 0)], vec![Spel::new(3, 5)]]);
        let seg = segment(8, 6, &seeds, &t).unwrap();
        let img = render_connectedness(&seg, &DEFAULT_PALETTE).unwrap();
        let labels = seg.crisp_labels_lenient(TieRule::LowestId);
        for (i, px) in img.pixels().enumerate() {
            let l = labels.labels()[i];
            prop_assume!(l > 0);
            // the brightest channel pattern identifies the palette entry
            let hue = (0..3)
                .max_by(|&a, &b| {
                    let sa = similarity(px.0, DEFAULT_PALETTE[a]);
                    let sb = similarity(px.0, DEFAULT_PALETTE[b]);
                    sa.partial_cmp(&sb).unwrap()
                })
                .unwrap();
            prop_assert_eq!(hue as u8 + 1, l);
        }
    }
}

fn similarity(px: [u8; 3], color: [u8; 3]) -> f64 {
    let dot: f64 = (0..3).map(|i| f64::from(px[i]) * f64::from(color[i])).sum();
    let n1: f64 = (0..3).map(|i| f64::from(px[i]).powi(2)).sum::<f64>().sqrt();
    let n2: f64 = (0..3).map(|i| f64::from(color[i]).powi(2)).sum::<f64>().sqrt();
    if n1 == 0.0 {
        0.0
    } else {
        dot / (n1 * n2)
    }
}

#[test]
fn rendering_examples() {
    let t = LinkTable::from_fn(3, 1, 1, |_, c, d| if c.min(d) == 0 { 0.5 } else { 0.0 });
    let seg = segment(3, 1, &SeedSpec::new(vec![vec![Spel::new(0, 0)]]), &t).unwrap();
    let img = render_connectedness(&seg, &[[200, 100, 50]]).unwrap();
    assert_eq!(img.get_pixel(0, 0).0, [200, 100, 50]);
    assert_eq!(img.get_pixel(1, 0).0, [100, 50, 25]);
    assert_eq!(img.get_pixel(2, 0).0, [0, 0, 0]);
    assert!(matches!(render_connectedness(&seg, &[]), Err(EvalError::PaletteTooSmall { .. })));
    let png = encode_rgb_png(&img);
    assert_eq!(&png[1..4], b"PNG");
}

#[test]
fn palette_colors_are_distinct() {
    let p = palette(64);
    assert_eq!(p.len(), 64);
    for i in 0..64 {
        assert!(p[i].iter().any(|&c| c > 0));
        for j in 0..i {
            assert_ne!(p[i], p[j]);
        }
    }
}
