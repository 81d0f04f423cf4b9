mod common;

use kineseq::classifier::{classify, EvaluationDataset, LabeledSample, DEFAULT_POSITION_SCALE};
use kineseq::geometry::{extract_features, AngleTable, FeatureVector, Point, RawFrame, ANGLE_COUNT, KEYPOINT_COUNT};
use kineseq::label::PoseLabel;
use kineseq::matcher::{levenshtein, levenshtein_within};
use kineseq::scorer::{align, locate_inaccuracies, total_accuracy};
use kineseq::sequencer::{expand_runs, format_runs, parse_runs, rle_encode, smooth_nulls, Run, TokenSeq};
use proptest::prelude::*;

use common::*;

fn word(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop::sample::select(b"ABCD".to_vec()), 0..=max)
}

fn runs() -> impl Strategy<Value = Vec<Run>> {
    prop::collection::vec(
        (
            prop::option::weighted(0.7, prop::sample::select(vec!["A", "B", "C"])),
            1usize..12,
        ),
        0..12,
    )
    .prop_map(|v| v.into_iter().map(|(l, n)| Run::new(l.map(label), n)).collect())
}

fn skeleton() -> impl Strategy<Value = RawFrame> {
    prop::collection::vec((0.0..640.0f64, 0.0..480.0f64), KEYPOINT_COUNT).prop_map(|v| {
        let mut pts = [Point::default(); KEYPOINT_COUNT];
        for (p, (x, y)) in pts.iter_mut().zip(v) {
            *p = Point::new(x, y);
        }
        RawFrame::from_points(0, pts)
    })
}

fn features() -> impl Strategy<Value = FeatureVector> {
    (prop::array::uniform12(0.0..180.0f64), 0.0..std::f64::consts::FRAC_PI_2)
        .prop_map(|(a, ang)| FeatureVector::new(a, ang))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn levenshtein_is_a_metric(a in word(16), b in word(16), c in word(16)) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(ab <= levenshtein(&a, &c) + levenshtein(&c, &b));
        prop_assert!(ab >= a.len().abs_diff(b.len()));
        prop_assert!(ab <= a.len().max(b.len()));
    }

    #[test]
    fn levenshtein_matches_oracle(a in word(10), b in word(10)) {
        prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&a, &b));
    }

    #[test]
    fn banded_agrees_with_full(a in word(40), b in word(40), limit in 0usize..15) {
        let full = levenshtein(&a, &b);
        let banded = levenshtein_within(&a, &b, limit);
        prop_assert_eq!(banded, (full <= limit).then_some(full));
    }

    #[test]
    fn alignment_is_optimal_and_consistent(p in word(24), q in word(24)) {
        let al = align(&p, &q);
        prop_assert_eq!(al.distance(), levenshtein(&p, &q));
        prop_assert_eq!(al.apply(&p, &q), q.clone());
        let kept = al.kept();
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(kept.iter().all(|&i| i < p.len()));
        let acc = vec![1.0; p.len()];
        let total = total_accuracy(&al, &acc);
        prop_assert!((0.0..=1.0).contains(&total));
        let (positions, worst) = locate_inaccuracies(&al, &acc, 4);
        prop_assert!(positions.iter().all(|&i| i < p.len()));
        prop_assert_eq!(positions.is_empty(), al.distance() == 0 || p.is_empty());
        prop_assert_eq!(worst.is_some(), !p.is_empty());
    }

    #[test]
    fn rle_round_trip(r in runs()) {
        let labels = expand_runs(&r);
        let frames: Vec<_> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| kineseq::classifier::ClassifiedFrame { label: l.clone(), accuracy: l.as_ref().map(|_| 1.0), timestamp: i as u64 })
            .collect();
        let encoded = rle_encode(&frames);
        prop_assert_eq!(expand_runs(&encoded), labels);
        prop_assert!(encoded.windows(2).all(|w| w[0].label != w[1].label));
        if !encoded.is_empty() {
            prop_assert_eq!(parse_runs(&format_runs(&encoded)).unwrap(), encoded);
        }
    }

    #[test]
    fn smoothing_invariants(r in runs(), sep in 1usize..10) {
        let smoothed = smooth_nulls(&r, sep);
        let total: usize = r.iter().map(|x| x.len).sum();
        prop_assert_eq!(smoothed.iter().map(|x| x.len).sum::<usize>(), total);
        prop_assert!(smoothed.windows(2).all(|w| w[0].label != w[1].label));
        let has_pose = r.iter().any(|x| x.label.is_some());
        for run in &smoothed {
            if run.label.is_none() {
                prop_assert!(run.len >= sep || !has_pose);
            }
        }
        prop_assert_eq!(smooth_nulls(&smoothed, sep), smoothed.clone());
    }

    #[test]
    fn token_text_round_trip(r in runs()) {
        let labels: Vec<PoseLabel> = expand_runs(&r).into_iter().flatten().collect();
        prop_assume!(!labels.is_empty());
        let seq = TokenSeq::from_labels(&labels);
        prop_assert_eq!(seq.expand(), labels);
        let text = seq.to_string();
        prop_assert_eq!(text.parse::<TokenSeq>().unwrap(), seq);
    }

    #[test]
    fn features_invariant_under_similarity(f in skeleton(), tx in -300.0..300.0f64, ty in -300.0..300.0f64, s in 0.25..4.0f64) {
        let table = AngleTable::default();
        if let Ok(base) = extract_features(&f, &table) {
            let moved = extract_features(&f.map_points(|p| Point::new(s * p.x + tx, s * p.y + ty)), &table).unwrap();
            for i in 0..ANGLE_COUNT {
                prop_assert!((base.angles[i] - moved.angles[i]).abs() < 1e-6);
                prop_assert!((0.0..=180.0).contains(&base.angles[i]));
            }
            prop_assert!((base.angular - moved.angular).abs() < 1e-9);
            prop_assert_eq!(base.position, moved.position);
            // a mirror image keeps every joint angle
            let mirrored = extract_features(&f.map_points(|p| Point::new(-p.x, p.y)), &table).unwrap();
            for i in 0..ANGLE_COUNT {
                prop_assert!((base.angles[i] - mirrored.angles[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn knn_agrees_with_oracle(
        query in features(),
        data in prop::collection::vec((features(), prop::sample::select(vec!["A", "B", "C"])), 7..60),
        k in prop::sample::select(vec![1usize, 3, 5, 7]),
    ) {
        let samples: Vec<LabeledSample> = data.into_iter().map(|(features, l)| LabeledSample { features, label: label(l) }).collect();
        prop_assume!(samples.iter().any(|s| s.label != samples[0].label));
        let ds = EvaluationDataset::new(samples.clone(), DEFAULT_POSITION_SCALE, k).unwrap();
        let got = classify(&query, &ds);
        let (want, acc) = knn_oracle(&query, &samples, DEFAULT_POSITION_SCALE, k);
        prop_assert_eq!(got.label, want);
        prop_assert_eq!(got.accuracy, acc);
        prop_assert!(got.accuracy * k as f64 >= (k as f64 / 3.0).ceil() - 1e-12);
    }
}
