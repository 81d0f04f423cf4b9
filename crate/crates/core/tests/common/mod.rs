//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use kineseq::classifier::{ClassifiedFrame, LabeledSample};
use kineseq::geometry::{FeatureVector, Point, RawFrame, KEYPOINT_COUNT};
use kineseq::label::PoseLabel;
use rand::Rng;

/// Edit distance straight from the recursive definition, memoised on suffix
/// positions.
pub fn lev_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

/// Every string over `alphabet` of length `0..=max_len`, shortest first.
/// `parent[i]` is the index of string `i` without its last symbol.
pub struct Strings {
    pub items: Vec<Vec<u8>>,
    pub parent: Vec<usize>,
}

pub fn all_strings(alphabet: &[u8], max_len: usize) -> Strings {
    let mut items = vec![Vec::new()];
    let mut parent = vec![0];
    let mut level = 0..1;
    for _ in 0..max_len {
        let start = items.len();
        for p in level.clone() {
            for &c in alphabet {
                let mut s = items[p].clone();
                s.push(c);
                items.push(s);
                parent.push(p);
            }
        }
        level = start..items.len();
    }
    Strings { items, parent }
}

pub fn embed_oracle(v: &FeatureVector, scale: f64) -> Vec<f64> {
    let mut e = v.angles.to_vec();
    e.push(v.angular);
    e.push(if v.angular < std::f64::consts::FRAC_PI_4 {
        -scale
    } else {
        scale
    });
    e
}

/// Label and accuracy by full sort of all distances. Ties in vote count go
/// to the smaller summed distance, then to the smaller label.
pub fn knn_oracle(query: &FeatureVector, samples: &[LabeledSample], scale: f64, k: usize) -> (PoseLabel, f64) {
    let q = embed_oracle(query, scale);
    let mut dist: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let e = embed_oracle(&s.features, scale);
            (q.iter().zip(&e).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut tally: Vec<(PoseLabel, usize, f64)> = Vec::new();
    for &(d, i) in &dist[..k] {
        let l = &samples[i].label;
        match tally.iter_mut().find(|t| &t.0 == l) {
            Some(t) => {
                t.1 += 1;
                t.2 += d;
            }
            None => tally.push((l.clone(), 1, d)),
        }
    }
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)));
    let (label, votes, _) = tally.swap_remove(0);
    (label, votes as f64 / k as f64)
}

pub fn random_skeleton<R: Rng>(rng: &mut R) -> RawFrame {
    let mut points = [Point::default(); KEYPOINT_COUNT];
    for p in &mut points {
        *p = Point::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
    }
    RawFrame::from_points(0, points)
}

pub fn label(s: &str) -> PoseLabel {
    PoseLabel::new(s).unwrap()
}

/// Classified frames from run syntax with full accuracy; `NULL` runs give
/// NULL frames.
pub fn classified(runs: &str) -> Vec<ClassifiedFrame> {
    let mut out = Vec::new();
    for tok in runs.split_whitespace() {
        let split = tok.find(|c: char| c.is_ascii_digit()).unwrap();
        let (name, n) = tok.split_at(split);
        for _ in 0..n.parse::<usize>().unwrap() {
            let t = out.len() as u64 * 150;
            out.push(if name == "NULL" {
                ClassifiedFrame::null(t)
            } else {
                ClassifiedFrame {
                    label: Some(label(name)),
                    accuracy: Some(1.0),
                    timestamp: t,
                }
            });
        }
    }
    out
}
