//! Seeded synthetic skeletons and keypoint streams.
//!
//! Labeled segments render a canonical pose with Gaussian pixel jitter.
//! NULL segments render a scrambled skeleton whose shoulder midpoint is placed
//! exactly on the hip midpoint, so its torso axis is undefined and the frame
//! is always rejected before classification.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{write_dataset, ClassifierError, LabeledSample};
use crate::geometry::{
    extract_features, AngleTable, GeometryError, Keypoint, KeypointName, Point, RawFrame, KEYPOINT_COUNT,
};
use crate::label::PoseLabel;
use crate::sequencer::{parse_runs, Run, SequenceError};

const CANONICAL_POSES: &str = include_str!("../data/canonical_poses.json");

pub const CANVAS_WIDTH: f64 = 640.0;
pub const CANVAS_HEIGHT: f64 = 480.0;

/// Scrambled coordinates sit on a 1/64 px grid so midpoint arithmetic on them
/// is exact.
const GRID: f64 = 64.0;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no canonical pose for label `{0}`")]
    UnknownLabel(PoseLabel),
    #[error("canonical pose `{label}`: {source}")]
    Pose {
        label: PoseLabel,
        #[source]
        source: GeometryError,
    },
    #[error("canonical pose `{0}` is defined more than once")]
    DuplicatePose(PoseLabel),
    #[error("pose file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("script: {0}")]
    Script(#[from] SequenceError),
    #[error("script segment {0} has zero frames")]
    EmptySegment(usize),
    #[error("jitter must be finite and non-negative, got {0}")]
    InvalidJitter(f64),
    #[error("samples per pose must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Dataset(#[from] ClassifierError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPose {
    pub label: PoseLabel,
    pub frame: RawFrame,
}

#[derive(Deserialize, Serialize)]
struct PoseFile {
    poses: Vec<PoseRecord>,
}

#[derive(Deserialize, Serialize)]
struct PoseRecord {
    label: PoseLabel,
    kp: Vec<Keypoint>,
}

/// Canonical poses keyed by label.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSet(BTreeMap<PoseLabel, CanonicalPose>);

impl PoseSet {
    /// Validates that every pose has all keypoints and extracts features
    /// without degeneracy under `table`.
    pub fn new(poses: Vec<CanonicalPose>, table: &AngleTable) -> Result<Self, SynthError> {
        let mut map = BTreeMap::new();
        for pose in poses {
            extract_features(&pose.frame, table).map_err(|source| SynthError::Pose {
                label: pose.label.clone(),
                source,
            })?;
            if map.contains_key(&pose.label) {
                return Err(SynthError::DuplicatePose(pose.label));
            }
            map.insert(pose.label.clone(), pose);
        }
        Ok(Self(map))
    }

    /// Parses `{ "poses": [ { "label": "A", "kp": [ {name,x,y} ×17 ] } ] }`.
    pub fn from_json(json: &str, table: &AngleTable) -> Result<Self, SynthError> {
        let file: PoseFile = serde_json::from_str(json)?;
        let poses = file
            .poses
            .into_iter()
            .map(|r| {
                let frame = RawFrame::new(0, &r.kp).map_err(|source| SynthError::Pose {
                    label: r.label.clone(),
                    source,
                })?;
                Ok(CanonicalPose { label: r.label, frame })
            })
            .collect::<Result<Vec<_>, SynthError>>()?;
        Self::new(poses, table)
    }

    /// The three bundled poses: A lying, B sitting, C standing.
    pub fn bundled() -> Self {
        Self::from_json(CANONICAL_POSES, &AngleTable::default()).expect("bundled poses are valid")
    }

    pub fn get(&self, label: &PoseLabel) -> Option<&CanonicalPose> {
        self.0.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &PoseLabel> {
        self.0.keys()
    }

    pub fn poses(&self) -> impl Iterator<Item = &CanonicalPose> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_json(&self) -> String {
        let file = PoseFile {
            poses: self
                .poses()
                .map(|p| PoseRecord {
                    label: p.label.clone(),
                    kp: p.frame.keypoints(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("pose file serializes")
    }
}

/// A sequence of labeled or NULL segments to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthScript {
    /// Serialized in run syntax, e.g. `"A6 NULL7 B6"`.
    #[serde(with = "run_text")]
    pub segments: Vec<Run>,
    /// Pixel standard deviation of the per-coordinate noise.
    pub jitter: f64,
    pub seed: u64,
}

impl SynthScript {
    pub fn new(segments: Vec<Run>, jitter: f64, seed: u64) -> Result<Self, SynthError> {
        if let Some(i) = segments.iter().position(|r| r.len == 0) {
            return Err(SynthError::EmptySegment(i));
        }
        if !(jitter.is_finite() && jitter >= 0.0) {
            return Err(SynthError::InvalidJitter(jitter));
        }
        Ok(Self { segments, jitter, seed })
    }

    /// Parses run syntax such as `A6 B6 NULL7 A6`.
    pub fn parse(runs: &str, jitter: f64, seed: u64) -> Result<Self, SynthError> {
        Self::new(parse_runs(runs)?, jitter, seed)
    }

    pub fn frame_count(&self) -> usize {
        self.segments.iter().map(|r| r.len).sum()
    }
}

mod run_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::sequencer::{format_runs, parse_runs, Run};

    pub fn serialize<S: Serializer>(runs: &[Run], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_runs(runs))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Run>, D::Error> {
        parse_runs(&String::deserialize(d)?).map_err(D::Error::custom)
    }
}

fn jittered(frame: &RawFrame, noise: Option<&Normal<f64>>, rng: &mut ChaCha8Rng) -> RawFrame {
    match noise {
        None => frame.clone(),
        Some(n) => frame.map_points(|p| Point::new(p.x + n.sample(rng), p.y + n.sample(rng))),
    }
}

fn noise(jitter: f64) -> Option<Normal<f64>> {
    (jitter > 0.0).then(|| Normal::new(0.0, jitter).expect("jitter validated"))
}

/// A skeleton with uniformly scattered keypoints and a degenerate torso.
pub fn scrambled_frame(timestamp: u64, rng: &mut ChaCha8Rng) -> RawFrame {
    let mut points = [Point::default(); KEYPOINT_COUNT];
    for p in &mut points {
        let x = rng.random_range(0..(CANVAS_WIDTH * GRID) as u32) as f64 / GRID;
        let y = rng.random_range(0..(CANVAS_HEIGHT * GRID) as u32) as f64 / GRID;
        *p = Point::new(x, y);
    }
    let hips = points[KeypointName::LeftHip.index()].midpoint(points[KeypointName::RightHip.index()]);
    let left = points[KeypointName::LeftShoulder.index()];
    points[KeypointName::RightShoulder.index()] = Point::new(2.0 * hips.x - left.x, 2.0 * hips.y - left.y);
    RawFrame::from_points(timestamp, points)
}

/// Renders one frame per `period_ms`, starting at `start_ms`.
pub fn render_stream(
    script: &SynthScript,
    poses: &PoseSet,
    period_ms: u64,
    start_ms: u64,
) -> Result<Vec<RawFrame>, SynthError> {
    for label in script.segments.iter().filter_map(|r| r.label.as_ref()) {
        if poses.get(label).is_none() {
            return Err(SynthError::UnknownLabel(label.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let noise = noise(script.jitter);
    let mut out = Vec::with_capacity(script.frame_count());
    for run in &script.segments {
        for _ in 0..run.len {
            let t = start_ms + out.len() as u64 * period_ms;
            let frame = match &run.label {
                Some(l) => {
                    jittered(&poses.get(l).expect("checked above").frame, noise.as_ref(), &mut rng).with_timestamp(t)
                }
                None => scrambled_frame(t, &mut rng),
            };
            out.push(frame);
        }
    }
    Ok(out)
}

/// `per_pose` jittered feature samples for each canonical pose. Draws that
/// happen to land on a degenerate skeleton are redrawn.
pub fn build_samples(
    poses: &PoseSet,
    per_pose: usize,
    jitter: f64,
    seed: u64,
    table: &AngleTable,
) -> Result<Vec<LabeledSample>, SynthError> {
    if per_pose == 0 {
        return Err(SynthError::NoSamples);
    }
    if !(jitter.is_finite() && jitter >= 0.0) {
        return Err(SynthError::InvalidJitter(jitter));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = noise(jitter);
    let mut out = Vec::with_capacity(per_pose * poses.len());
    for pose in poses.poses() {
        let mut made = 0;
        while made < per_pose {
            let frame = jittered(&pose.frame, noise.as_ref(), &mut rng);
            if let Ok(features) = extract_features(&frame, table) {
                out.push(LabeledSample {
                    features,
                    label: pose.label.clone(),
                });
                made += 1;
            }
        }
    }
    Ok(out)
}

/// Writes a synthetic evaluation CSV in the dataset format.
pub fn build_dataset<W: Write>(
    poses: &PoseSet,
    per_pose: usize,
    jitter: f64,
    seed: u64,
    table: &AngleTable,
    position_scale: f64,
    sink: W,
) -> Result<(), SynthError> {
    let samples = build_samples(poses, per_pose, jitter, seed, table)?;
    write_dataset(&samples, position_scale, sink)?;
    Ok(())
}
