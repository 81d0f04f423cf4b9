//! k-nearest-neighbour pose classification over a labeled evaluation set.
//!
//! Feature vectors are embedded as 14 coordinates: the twelve joint angles in
//! degrees, the torso angle in radians and the position flag multiplied by
//! the dataset's position scale. With the default scale of 820 the flag
//! alone separates horizontal from vertical poses by at least 1640, far more
//! than any angle difference can contribute.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{FeatureVector, Position, ANGLE_COUNT};
use crate::label::PoseLabel;

/// Dimension of the embedded feature space.
pub const EMBED_DIM: usize = ANGLE_COUNT + 2;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_POSITION_SCALE: f64 = 820.0;
pub const DEFAULT_NULL_THRESHOLD: f64 = 0.60;

/// Column header of an evaluation CSV, in order.
pub const CSV_COLUMNS: [&str; EMBED_DIM + 1] = [
    "Left Armpit",
    "Right Armpit",
    "Left Shoulder",
    "Right Shoulder",
    "Left Elbow",
    "Right Elbow",
    "Left Hip",
    "Right Hip",
    "Left Groin",
    "Right Groin",
    "Left Knee",
    "Right Knee",
    "Angular",
    "Position",
    "action",
];

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: position magnitude {found} differs from {expected} seen earlier")]
    InconsistentScale { line: u64, expected: f64, found: f64 },
    #[error("the evaluation dataset is empty")]
    EmptyDataset,
    #[error("the dataset needs at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("the dataset needs at least two distinct labels")]
    SingleLabel,
    #[error("neighbour count k must be at least 1")]
    InvalidK,
    #[error("position scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: PoseLabel,
}

/// Immutable reference set for classification. Embedded coordinates are
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct EvaluationDataset {
    samples: Vec<LabeledSample>,
    position_scale: f64,
    k: usize,
    embedded: Vec<[f64; EMBED_DIM]>,
}

impl EvaluationDataset {
    pub fn new(samples: Vec<LabeledSample>, position_scale: f64, k: usize) -> Result<Self, ClassifierError> {
        if !(position_scale.is_finite() && position_scale > 0.0) {
            return Err(ClassifierError::InvalidScale(position_scale));
        }
        if k == 0 {
            return Err(ClassifierError::InvalidK);
        }
        if samples.is_empty() {
            return Err(ClassifierError::EmptyDataset);
        }
        if samples.len() < k {
            return Err(ClassifierError::TooFewSamples {
                needed: k,
                found: samples.len(),
            });
        }
        let labels: BTreeSet<_> = samples.iter().map(|s| &s.label).collect();
        if labels.len() < 2 {
            return Err(ClassifierError::SingleLabel);
        }
        let embedded = samples.iter().map(|s| embed(&s.features, position_scale)).collect();
        Ok(Self {
            samples,
            position_scale,
            k,
            embedded,
        })
    }

    pub fn with_k(self, k: usize) -> Result<Self, ClassifierError> {
        Self::new(self.samples, self.position_scale, k)
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn position_scale(&self) -> f64 {
        self.position_scale
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> BTreeSet<&PoseLabel> {
        self.samples.iter().map(|s| &s.label).collect()
    }

    pub fn embedded(&self) -> &[[f64; EMBED_DIM]] {
        &self.embedded
    }
}

/// Parses an evaluation CSV. Position values are reduced to their sign; their
/// common magnitude becomes the dataset's position scale.
pub fn load_dataset<R: Read>(source: R, k: usize) -> Result<EvaluationDataset, ClassifierError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r?,
        None => {
            return Err(ClassifierError::Parse {
                line: 1,
                message: "missing header row".into(),
            })
        }
    };
    if header.len() != CSV_COLUMNS.len() || header.iter().zip(CSV_COLUMNS).any(|(h, c)| h != c) {
        return Err(ClassifierError::Parse {
            line: 1,
            message: format!("expected header `{}`", CSV_COLUMNS.join(",")),
        });
    }

    let mut samples = Vec::new();
    let mut scale: Option<f64> = None;
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| ClassifierError::Parse { line, message };
        if record.len() != CSV_COLUMNS.len() {
            return Err(err(format!(
                "expected {} fields, found {}",
                CSV_COLUMNS.len(),
                record.len()
            )));
        }
        let number = |i: usize| -> Result<f64, ClassifierError> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("column `{}`: `{}` is not a number", CSV_COLUMNS[i], &record[i])))
        };

        let mut angles = [0.0; ANGLE_COUNT];
        for (i, slot) in angles.iter_mut().enumerate() {
            let v = number(i)?;
            if !(0.0..=180.0).contains(&v) {
                return Err(err(format!("column `{}`: angle {v} outside [0, 180]", CSV_COLUMNS[i])));
            }
            *slot = v;
        }
        let angular = number(ANGLE_COUNT)?;
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-9).contains(&angular) {
            return Err(err(format!("angular {angular} outside [0, pi/2]")));
        }
        let position_raw = number(ANGLE_COUNT + 1)?;
        if position_raw == 0.0 {
            return Err(err("position must be non-zero".into()));
        }
        let magnitude = position_raw.abs();
        match scale {
            None => scale = Some(magnitude),
            Some(expected) if expected != magnitude => {
                return Err(ClassifierError::InconsistentScale {
                    line,
                    expected,
                    found: magnitude,
                })
            }
            Some(_) => {}
        }
        let label = PoseLabel::new(&record[EMBED_DIM]).map_err(|e| err(e.to_string()))?;
        let position = if position_raw < 0.0 {
            Position::Horizontal
        } else {
            Position::Vertical
        };
        samples.push(LabeledSample {
            features: FeatureVector {
                angles,
                angular,
                position,
            },
            label,
        });
    }

    let scale = scale.ok_or(ClassifierError::Parse {
        line: 2,
        message: "no data rows".into(),
    })?;
    EvaluationDataset::new(samples, scale, k)
}

/// Writes samples in evaluation CSV form. Numbers use the shortest
/// representation that parses back to the same value.
pub fn write_dataset<W: Write>(samples: &[LabeledSample], position_scale: f64, sink: W) -> Result<(), ClassifierError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(CSV_COLUMNS)?;
    for s in samples {
        let mut row: Vec<String> = s.features.angles.iter().map(|a| a.to_string()).collect();
        row.push(s.features.angular.to_string());
        row.push((s.features.position.sign() * position_scale).to_string());
        row.push(s.label.to_string());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn embed(v: &FeatureVector, scale: f64) -> [f64; EMBED_DIM] {
    let mut out = [0.0; EMBED_DIM];
    out[..ANGLE_COUNT].copy_from_slice(&v.angles);
    out[ANGLE_COUNT] = v.angular;
    out[ANGLE_COUNT + 1] = v.position.sign() * scale;
    out
}

fn distance(a: &[f64; EMBED_DIM], b: &[f64; EMBED_DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub label: PoseLabel,
    /// Fraction of the k neighbours carrying `label`.
    pub accuracy: f64,
    pub votes: usize,
    pub k: usize,
}

/// Majority vote over the k nearest samples.
///
/// Neighbours at equal distance are ordered by dataset position. A vote tie
/// goes to the label whose neighbours have the smaller summed distance, then
/// to the lexicographically smaller label.
pub fn classify(v: &FeatureVector, ds: &EvaluationDataset) -> Classification {
    let k = ds.k;
    let query = embed(v, ds.position_scale);
    let mut nearest: Vec<(f64, usize)> = ds
        .embedded
        .iter()
        .enumerate()
        .map(|(i, e)| (distance(&query, e), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < nearest.len() {
        nearest.select_nth_unstable_by(k - 1, order);
        nearest.truncate(k);
    }

    let mut tally: BTreeMap<&PoseLabel, (usize, f64)> = BTreeMap::new();
    for &(d, i) in &nearest {
        let entry = tally.entry(&ds.samples[i].label).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += d;
    }
    // BTreeMap iterates labels in ascending order, so strict comparisons keep
    // the smallest label on a full tie.
    let mut best: Option<(&PoseLabel, usize, f64)> = None;
    for (label, (count, sum)) in tally {
        let better = match best {
            None => true,
            Some((_, bc, bs)) => count > bc || (count == bc && sum < bs),
        };
        if better {
            best = Some((label, count, sum));
        }
    }
    let (label, votes, _) = best.expect("dataset holds at least k >= 1 samples");
    Classification {
        label: label.clone(),
        accuracy: votes as f64 / k as f64,
        votes,
        k,
    }
}

/// One slot of the frame buffer: a pose label, or NULL when the frame was
/// rejected or classified below the acceptance threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedFrame {
    pub label: Option<PoseLabel>,
    pub accuracy: Option<f64>,
    pub timestamp: u64,
}

impl ClassifiedFrame {
    pub fn null(timestamp: u64) -> Self {
        Self {
            label: None,
            accuracy: None,
            timestamp,
        }
    }

    pub fn is_null(&self) -> bool {
        self.label.is_none()
    }
}

/// Keeps the label when `accuracy >= threshold`, otherwise yields a NULL frame.
pub fn gate_null(label: PoseLabel, accuracy: f64, threshold: f64, timestamp: u64) -> ClassifiedFrame {
    if accuracy >= threshold {
        ClassifiedFrame {
            label: Some(label),
            accuracy: Some(accuracy),
            timestamp,
        }
    } else {
        ClassifiedFrame::null(timestamp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedPoint {
    pub x: f64,
    pub y: f64,
    pub label: PoseLabel,
}

/// Projects the embedded dataset onto its two leading principal components.
///
/// Components come in descending eigenvalue order, each signed so that its
/// largest-magnitude loading is positive. Diagnostic only.
pub fn pca_project(ds: &EvaluationDataset) -> Result<Vec<ProjectedPoint>, ClassifierError> {
    let n = ds.embedded.len();
    if n < 3 {
        return Err(ClassifierError::TooFewSamples { needed: 3, found: n });
    }
    let data = DMatrix::from_fn(n, EMBED_DIM, |r, c| ds.embedded[r][c]);
    let mean = data.row_mean();
    let centered = DMatrix::from_fn(n, EMBED_DIM, |r, c| data[(r, c)] - mean[c]);
    let covariance = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eigen = SymmetricEigen::new(covariance);

    let mut order: Vec<usize> = (0..EMBED_DIM).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    let components: Vec<Vec<f64>> = order[..2]
        .iter()
        .map(|&i| {
            let col: Vec<f64> = eigen.eigenvectors.column(i).iter().copied().collect();
            let pivot = col
                .iter()
                .copied()
                .reduce(|a, b| if b.abs() > a.abs() { b } else { a })
                .unwrap_or(0.0);
            if pivot < 0.0 {
                col.into_iter().map(|v| -v).collect()
            } else {
                col
            }
        })
        .collect();

    Ok((0..n)
        .map(|r| {
            let row = centered.row(r);
            let project = |c: &[f64]| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            ProjectedPoint {
                x: project(&components[0]),
                y: project(&components[1]),
                label: ds.samples[r].label.clone(),
            }
        })
        .collect())
}

/// Writes projected points as `x,y,label` CSV.
pub fn write_projection<W: Write>(points: &[ProjectedPoint], sink: W) -> Result<(), ClassifierError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["x", "y", "label"])?;
    for p in points {
        writer.write_record([p.x.to_string(), p.y.to_string(), p.label.to_string()])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TABLE_ROWS: &str = "\
Left Armpit,Right Armpit,Left Shoulder,Right Shoulder,Left Elbow,Right Elbow,Left Hip,Right Hip,Left Groin,Right Groin,Left Knee,Right Knee,Angular,Position,action
51.36,8.39,53.24,8.12,137.18,87.67,175.84,11.2,172.12,10.9,112.65,122.17,0.25,-820,A
71.19,19.58,70.18,20.18,164.53,103.46,81.42,106.16,82.43,107.32,137.17,102.95,0.35,-820,A
45.78,0.64,45.78,0.64,164.35,66.07,120.37,51.18,121.02,50.08,134.28,98.01,0.13,-820,A
36.97,21.97,35.23,21.86,155.64,42.03,58.54,113.69,54.52,112.87,155.6,102.41,0.15,-820,A
45.79,20.11,43.59,20.32,145.53,51.94,84.42,94.85,85.42,93.15,139.88,100.78,0.05,-820,B
38.94,37.49,39.04,37.12,177.15,165.07,80.11,99.21,81.04,98.19,161.59,179.39,0.23,-820,B
32.14,34.71,35.11,35.21,164.68,164.65,92.53,78.19,91.25,79.15,163.06,166.16,0.88,820,C
44.61,37.11,41.67,40.11,178.96,179.45,114.36,80.75,112.78,83.90,161.06,166.53,1.01,820,C
42.53,41.07,41.43,42.84,166.24,173.97,78.26,103.57,79.16,105.13,161.79,141.02,0.97,820,C
47.22,41.55,48.76,41.55,174.16,177.18,101.72,87.01,104.25,85.14,157.89,135.75,0.91,820,C
";

    fn label(s: &str) -> PoseLabel {
        PoseLabel::new(s).unwrap()
    }

    /// Sample whose first angle is `x` and everything else fixed.
    fn at(x: f64, l: &str) -> LabeledSample {
        let mut angles = [90.0; ANGLE_COUNT];
        angles[0] = x;
        LabeledSample {
            features: FeatureVector::new(angles, 0.1),
            label: label(l),
        }
    }

    #[test]
    fn loads_reference_rows() {
        let ds = load_dataset(TABLE_ROWS.as_bytes(), 5).unwrap();
        assert_eq!(ds.samples().len(), 10);
        assert_eq!(ds.position_scale(), 820.0);
        let first = &ds.samples()[0];
        assert_eq!(first.label, label("A"));
        assert_eq!(first.features.angles[0], 51.36);
        assert_eq!(first.features.angular, 0.25);
        assert_eq!(first.features.position, Position::Horizontal);
        assert_eq!(ds.samples()[6].features.position, Position::Vertical);
        assert_eq!(ds.labels().len(), 3);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_dataset("".as_bytes(), 5),
            Err(ClassifierError::Parse { .. })
        ));
        let header = TABLE_ROWS.lines().next().unwrap();
        assert!(matches!(
            load_dataset(format!("{header}\n").as_bytes(), 5),
            Err(ClassifierError::Parse { .. })
        ));
        let bad_angle = TABLE_ROWS.replacen("51.36", "200.0", 1);
        assert!(matches!(
            load_dataset(bad_angle.as_bytes(), 5),
            Err(ClassifierError::Parse { line: 2, .. })
        ));
        let bad_scale = TABLE_ROWS.replacen(",820,C", ",410,C", 1);
        assert!(matches!(
            load_dataset(bad_scale.as_bytes(), 5),
            Err(ClassifierError::InconsistentScale { .. })
        ));
        let bad_header = TABLE_ROWS.replacen("Left Armpit", "Armpit", 1);
        assert!(matches!(
            load_dataset(bad_header.as_bytes(), 5),
            Err(ClassifierError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_dataset(TABLE_ROWS.as_bytes(), 11),
            Err(ClassifierError::TooFewSamples { needed: 11, found: 10 })
        ));
    }

    #[test]
    fn dataset_round_trips_through_csv() {
        let ds = load_dataset(TABLE_ROWS.as_bytes(), 3).unwrap();
        let mut out = Vec::new();
        write_dataset(ds.samples(), ds.position_scale(), &mut out).unwrap();
        let back = load_dataset(out.as_slice(), 3).unwrap();
        assert_eq!(back.samples(), ds.samples());
    }

    #[test]
    fn embed_examples() {
        let h = FeatureVector::new([10.0; ANGLE_COUNT], 0.2);
        let e = embed(&h, 820.0);
        assert_eq!(e[EMBED_DIM - 1], -820.0);
        assert_eq!(e[ANGLE_COUNT], 0.2);
        assert_eq!(
            embed(&FeatureVector::new([10.0; ANGLE_COUNT], 1.2), 1.0)[EMBED_DIM - 1],
            1.0
        );
        let mut flipped = h;
        flipped.position = Position::Vertical;
        assert!(distance(&embed(&h, 820.0), &embed(&flipped, 820.0)) >= 2.0 * 820.0);
    }

    #[test]
    fn classify_self_with_k1() {
        let ds = load_dataset(TABLE_ROWS.as_bytes(), 1).unwrap();
        for s in ds.samples() {
            let c = classify(&s.features, &ds);
            assert_eq!(c.label, s.label);
            assert_eq!(c.accuracy, 1.0);
        }
    }

    #[test]
    fn classify_planted_four_to_one() {
        // four A at distance 1..4, one B at 2.5, further B and A beyond
        let samples = vec![
            at(1.0, "A"),
            at(2.0, "A"),
            at(2.5, "B"),
            at(3.0, "A"),
            at(4.0, "A"),
            at(10.0, "B"),
            at(11.0, "B"),
            at(12.0, "A"),
        ];
        let ds = EvaluationDataset::new(samples, 820.0, 5).unwrap();
        let c = classify(&at(0.0, "A").features, &ds);
        assert_eq!((c.label.as_str(), c.accuracy, c.votes), ("A", 0.8, 4));
    }

    #[test]
    fn classify_vote_tie_uses_summed_distance() {
        let samples = vec![at(-3.0, "B"), at(1.0, "A"), at(3.5, "B"), at(-1.5, "A"), at(20.0, "A")];
        let ds = EvaluationDataset::new(samples, 820.0, 4).unwrap();
        let c = classify(&at(0.0, "A").features, &ds);
        assert_eq!((c.label.as_str(), c.accuracy), ("A", 0.5));
        // mirror the distances so B is closer
        let samples = vec![at(-1.0, "B"), at(3.0, "A"), at(1.5, "B"), at(-3.5, "A"), at(20.0, "A")];
        let ds = EvaluationDataset::new(samples, 820.0, 4).unwrap();
        assert_eq!(classify(&at(0.0, "A").features, &ds).label.as_str(), "B");
    }

    #[test]
    fn classify_full_tie_takes_smallest_label() {
        let samples = vec![at(1.0, "C"), at(-1.0, "B"), at(5.0, "C")];
        let ds = EvaluationDataset::new(samples, 820.0, 2).unwrap();
        assert_eq!(classify(&at(0.0, "A").features, &ds).label.as_str(), "B");
    }

    #[test]
    fn equidistant_boundary_uses_dataset_order() {
        // A and B both at distance 2; k=2 keeps the nearer C and the earlier of A/B
        let samples = vec![at(1.0, "C"), at(2.0, "B"), at(-2.0, "A")];
        let ds = EvaluationDataset::new(samples, 820.0, 2).unwrap();
        let c = classify(&at(0.0, "A").features, &ds);
        // C:1 vote sum 1, B:1 vote sum 2 -> C
        assert_eq!(c.label.as_str(), "C");
        let samples = vec![at(2.0, "B"), at(-2.0, "A"), at(9.0, "C")];
        let ds = EvaluationDataset::new(samples, 820.0, 1).unwrap();
        assert_eq!(classify(&at(0.0, "A").features, &ds).label.as_str(), "B");
    }

    #[test]
    fn dataset_invariants() {
        assert!(matches!(
            EvaluationDataset::new(vec![], 820.0, 1),
            Err(ClassifierError::EmptyDataset)
        ));
        assert!(matches!(
            EvaluationDataset::new(vec![at(1.0, "A"), at(2.0, "A")], 820.0, 1),
            Err(ClassifierError::SingleLabel)
        ));
        assert!(matches!(
            EvaluationDataset::new(vec![at(1.0, "A"), at(2.0, "B")], 0.0, 1),
            Err(ClassifierError::InvalidScale(_))
        ));
        assert!(matches!(
            EvaluationDataset::new(vec![at(1.0, "A"), at(2.0, "B")], 820.0, 0),
            Err(ClassifierError::InvalidK)
        ));
    }

    #[test]
    fn gate_examples() {
        assert!(gate_null(label("B"), 0.45, 0.60, 0).is_null());
        assert_eq!(gate_null(label("B"), 0.60, 0.60, 0).label, Some(label("B")));
        assert_eq!(gate_null(label("C"), 1.0, 0.60, 7).accuracy, Some(1.0));
    }

    #[test]
    fn pca_of_identical_vectors_is_origin() {
        let mut samples = vec![at(5.0, "A"); 3];
        samples.push(at(5.0, "B"));
        let ds = EvaluationDataset::new(samples, 820.0, 1).unwrap();
        for p in pca_project(&ds).unwrap() {
            assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pca_preserves_planar_distances() {
        // vary two angle coordinates only: the data spans a 2-D plane
        let samples: Vec<_> = [(0.0, 0.0), (10.0, 3.0), (4.0, 20.0), (7.0, 7.0), (1.0, 15.0)]
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let mut s = at(a + 30.0, if i % 2 == 0 { "A" } else { "B" });
                s.features.angles[5] = b + 40.0;
                s
            })
            .collect();
        let ds = EvaluationDataset::new(samples, 820.0, 1).unwrap();
        let proj = pca_project(&ds).unwrap();
        for i in 0..proj.len() {
            for j in 0..proj.len() {
                let orig = distance(&ds.embedded()[i], &ds.embedded()[j]);
                let p = (proj[i].x - proj[j].x).hypot(proj[i].y - proj[j].y);
                assert_abs_diff_eq!(orig, p, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn pca_components_are_uncorrelated() {
        let ds = load_dataset(TABLE_ROWS.as_bytes(), 1).unwrap();
        let proj = pca_project(&ds).unwrap();
        let n = proj.len() as f64;
        let mx = proj.iter().map(|p| p.x).sum::<f64>() / n;
        let my = proj.iter().map(|p| p.y).sum::<f64>() / n;
        let cov_xy = proj.iter().map(|p| (p.x - mx) * (p.y - my)).sum::<f64>() / (n - 1.0);
        let var_x = proj.iter().map(|p| (p.x - mx).powi(2)).sum::<f64>() / (n - 1.0);
        let var_y = proj.iter().map(|p| (p.y - my).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(cov_xy.abs() < 1e-8 * var_x.max(1.0));
        assert!(var_x >= var_y);
        // horizontal and vertical classes fall on opposite sides of the first axis
        assert!(proj[0].x * proj[9].x < 0.0);
        let mut csv = Vec::new();
        write_projection(&proj, &mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("x,y,label\n"));
    }
}
