//! Keypoint geometry and the angle feature vector.
//!
//! A frame of 17 image-space keypoints is reduced to twelve joint angles
//! (degrees), the torso orientation against the horizontal image axis
//! (radians) and a binary horizontal/vertical flag. None of these depend on
//! image resolution, body size or where the body sits in the frame.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of keypoints every frame carries.
pub const KEYPOINT_COUNT: usize = 17;

/// Number of joint angles in a feature vector.
pub const ANGLE_COUNT: usize = 12;

const DEFAULT_ANGLE_SPECS: &str = include_str!("../data/angle_specs.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate triangle: the angle vertex coincides with one of its endpoints")]
    DegenerateTriangle,
    #[error("unknown keypoint name `{0}`")]
    UnknownKeypoint(String),
    #[error("keypoint `{0}` appears more than once")]
    DuplicateKeypoint(KeypointName),
    #[error("keypoint `{0}` is missing")]
    MissingKeypoint(KeypointName),
    #[error("keypoint `{name}` has score {score}, expected a value in [0, 1]")]
    ScoreOutOfRange { name: KeypointName, score: f64 },
    #[error("keypoint `{0}` has a non-finite coordinate")]
    NonFinite(KeypointName),
    #[error("invalid angle table: {0}")]
    InvalidAngleTable(String),
}

/// The 17 canonical body keypoints, in the order most single-person
/// estimators emit them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeypointName {
    Nose,
    LeftEye,
    RightEye,
    LeftEar,
    RightEar,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
}

impl KeypointName {
    pub const ALL: [KeypointName; KEYPOINT_COUNT] = [
        KeypointName::Nose,
        KeypointName::LeftEye,
        KeypointName::RightEye,
        KeypointName::LeftEar,
        KeypointName::RightEar,
        KeypointName::LeftShoulder,
        KeypointName::RightShoulder,
        KeypointName::LeftElbow,
        KeypointName::RightElbow,
        KeypointName::LeftWrist,
        KeypointName::RightWrist,
        KeypointName::LeftHip,
        KeypointName::RightHip,
        KeypointName::LeftKnee,
        KeypointName::RightKnee,
        KeypointName::LeftAnkle,
        KeypointName::RightAnkle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KeypointName::Nose => "nose",
            KeypointName::LeftEye => "left_eye",
            KeypointName::RightEye => "right_eye",
            KeypointName::LeftEar => "left_ear",
            KeypointName::RightEar => "right_ear",
            KeypointName::LeftShoulder => "left_shoulder",
            KeypointName::RightShoulder => "right_shoulder",
            KeypointName::LeftElbow => "left_elbow",
            KeypointName::RightElbow => "right_elbow",
            KeypointName::LeftWrist => "left_wrist",
            KeypointName::RightWrist => "right_wrist",
            KeypointName::LeftHip => "left_hip",
            KeypointName::RightHip => "right_hip",
            KeypointName::LeftKnee => "left_knee",
            KeypointName::RightKnee => "right_knee",
            KeypointName::LeftAnkle => "left_ankle",
            KeypointName::RightAnkle => "right_ankle",
        }
    }
}

impl fmt::Display for KeypointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KeypointName {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KeypointName::ALL
            .into_iter()
            .find(|name| name.as_str() == s)
            .ok_or_else(|| GeometryError::UnknownKeypoint(s.to_string()))
    }
}

/// An image-space point in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

/// One named keypoint as it appears on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub name: KeypointName,
    pub x: f64,
    pub y: f64,
    /// Detector confidence. Omitted scores read as 1.
    #[serde(rename = "s", default = "full_confidence")]
    pub score: f64,
}

fn full_confidence() -> f64 {
    1.0
}

/// Wire form of a frame: `{ "t": <ms>, "kp": [ { "name", "x", "y", "s" } ×17 ] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub t: u64,
    pub kp: Vec<Keypoint>,
}

/// A timestamped set of exactly 17 keypoints, one per canonical name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRecord", into = "FrameRecord")]
pub struct RawFrame {
    timestamp: u64,
    points: [Point; KEYPOINT_COUNT],
    scores: [f64; KEYPOINT_COUNT],
}

impl RawFrame {
    /// Builds a frame from named keypoints in any order.
    pub fn new(timestamp: u64, keypoints: &[Keypoint]) -> Result<Self, GeometryError> {
        let mut slots: [Option<(Point, f64)>; KEYPOINT_COUNT] = [None; KEYPOINT_COUNT];
        for kp in keypoints {
            if !kp.x.is_finite() || !kp.y.is_finite() {
                return Err(GeometryError::NonFinite(kp.name));
            }
            if !(0.0..=1.0).contains(&kp.score) {
                return Err(GeometryError::ScoreOutOfRange {
                    name: kp.name,
                    score: kp.score,
                });
            }
            let slot = &mut slots[kp.name.index()];
            if slot.is_some() {
                return Err(GeometryError::DuplicateKeypoint(kp.name));
            }
            *slot = Some((Point::new(kp.x, kp.y), kp.score));
        }
        let mut points = [Point::default(); KEYPOINT_COUNT];
        let mut scores = [0.0; KEYPOINT_COUNT];
        for name in KeypointName::ALL {
            let (p, s) = slots[name.index()].ok_or(GeometryError::MissingKeypoint(name))?;
            points[name.index()] = p;
            scores[name.index()] = s;
        }
        Ok(Self {
            timestamp,
            points,
            scores,
        })
    }

    /// Builds a fully confident frame from points in [`KeypointName::ALL`] order.
    pub fn from_points(timestamp: u64, points: [Point; KEYPOINT_COUNT]) -> Self {
        Self {
            timestamp,
            points,
            scores: [1.0; KEYPOINT_COUNT],
        }
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn point(&self, name: KeypointName) -> Point {
        self.points[name.index()]
    }

    pub fn points(&self) -> &[Point; KEYPOINT_COUNT] {
        &self.points
    }

    pub fn score(&self, name: KeypointName) -> f64 {
        self.scores[name.index()]
    }

    pub fn min_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn with_timestamp(mut self, timestamp: u64) -> Self {
        self.timestamp = timestamp;
        self
    }

    /// Applies `f` to every keypoint position, keeping names and scores.
    pub fn map_points(&self, f: impl FnMut(Point) -> Point) -> Self {
        Self {
            timestamp: self.timestamp,
            points: self.points.map(f),
            scores: self.scores,
        }
    }

    pub fn keypoints(&self) -> Vec<Keypoint> {
        KeypointName::ALL
            .iter()
            .map(|&name| {
                let p = self.point(name);
                Keypoint {
                    name,
                    x: p.x,
                    y: p.y,
                    score: self.score(name),
                }
            })
            .collect()
    }
}

impl TryFrom<FrameRecord> for RawFrame {
    type Error = GeometryError;

    fn try_from(record: FrameRecord) -> Result<Self, Self::Error> {
        RawFrame::new(record.t, &record.kp)
    }
}

impl From<RawFrame> for FrameRecord {
    fn from(frame: RawFrame) -> Self {
        FrameRecord {
            t: frame.timestamp,
            kp: frame.keypoints(),
        }
    }
}

/// The keypoint triple defining one joint angle: the angle is measured at
/// `vertex` between the rays towards `end_a` and `end_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleSpec {
    pub feature_name: String,
    pub vertex: KeypointName,
    pub end_a: KeypointName,
    pub end_b: KeypointName,
}

/// Exactly twelve angle definitions, in feature-column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AngleTable(Vec<AngleSpec>);

impl AngleTable {
    pub fn new(specs: Vec<AngleSpec>) -> Result<Self, GeometryError> {
        if specs.len() != ANGLE_COUNT {
            return Err(GeometryError::InvalidAngleTable(format!(
                "expected {ANGLE_COUNT} angle specs, found {}",
                specs.len()
            )));
        }
        for spec in &specs {
            if spec.vertex == spec.end_a || spec.vertex == spec.end_b || spec.end_a == spec.end_b {
                return Err(GeometryError::InvalidAngleTable(format!(
                    "`{}` uses the same keypoint twice",
                    spec.feature_name
                )));
            }
        }
        Ok(Self(specs))
    }

    pub fn from_json(json: &str) -> Result<Self, GeometryError> {
        let specs: Vec<AngleSpec> =
            serde_json::from_str(json).map_err(|e| GeometryError::InvalidAngleTable(e.to_string()))?;
        Self::new(specs)
    }

    pub fn specs(&self) -> &[AngleSpec] {
        &self.0
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.feature_name.as_str())
    }
}

impl Default for AngleTable {
    fn default() -> Self {
        Self::from_json(DEFAULT_ANGLE_SPECS).expect("bundled angle table is valid")
    }
}

/// Torso orientation: horizontal when the torso axis lies within π/4 of the
/// image x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Position {
    Horizontal,
    Vertical,
}

impl Position {
    /// π/4 itself counts as vertical.
    pub fn from_angular(angular: f64) -> Self {
        if angular < FRAC_PI_4 {
            Position::Horizontal
        } else {
            Position::Vertical
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Position::Horizontal => -1.0,
            Position::Vertical => 1.0,
        }
    }
}

impl From<Position> for i8 {
    fn from(p: Position) -> i8 {
        match p {
            Position::Horizontal => -1,
            Position::Vertical => 1,
        }
    }
}

impl TryFrom<i8> for Position {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Position::Horizontal),
            1 => Ok(Position::Vertical),
            other => Err(format!("position must be -1 or 1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Joint angles in degrees, each in [0, 180].
    pub angles: [f64; ANGLE_COUNT],
    /// Torso angle against the horizontal, radians in [0, π/2].
    pub angular: f64,
    pub position: Position,
}

impl FeatureVector {
    /// Assembles a vector, deriving the position flag from `angular`.
    pub fn new(angles: [f64; ANGLE_COUNT], angular: f64) -> Self {
        Self {
            angles,
            angular,
            position: Position::from_angular(angular),
        }
    }
}

pub fn euclidean_distance(p1: Point, p2: Point) -> f64 {
    (p1.x - p2.x).hypot(p1.y - p2.y)
}

/// Law-of-cosines angle (radians) opposite side `d3`, between sides `d1` and
/// `d2`. The cosine is clamped to [-1, 1] so near-collinear input stays in
/// the domain of `acos`.
pub fn triangle_angle(d1: f64, d2: f64, d3: f64) -> Result<f64, GeometryError> {
    if d1 == 0.0 || d2 == 0.0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    let cos = (d1 * d1 + d2 * d2 - d3 * d3) / (2.0 * d1 * d2);
    Ok(cos.clamp(-1.0, 1.0).acos())
}

/// Joint angle in degrees, in [0, 180].
pub fn joint_angle(frame: &RawFrame, spec: &AngleSpec) -> Result<f64, GeometryError> {
    let vertex = frame.point(spec.vertex);
    let a = frame.point(spec.end_a);
    let b = frame.point(spec.end_b);
    let d1 = euclidean_distance(vertex, a);
    let d2 = euclidean_distance(vertex, b);
    let d3 = euclidean_distance(a, b);
    Ok(triangle_angle(d1, d2, d3)?.to_degrees())
}

/// Acute angle between the hip-midpoint → shoulder-midpoint axis and the
/// horizontal image axis, in [0, π/2].
pub fn angular_metric(frame: &RawFrame) -> Result<f64, GeometryError> {
    let hips = frame
        .point(KeypointName::LeftHip)
        .midpoint(frame.point(KeypointName::RightHip));
    let shoulders = frame
        .point(KeypointName::LeftShoulder)
        .midpoint(frame.point(KeypointName::RightShoulder));
    let dx = (shoulders.x - hips.x).abs();
    let dy = (shoulders.y - hips.y).abs();
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::DegenerateTriangle);
    }
    Ok(dy.atan2(dx).clamp(0.0, FRAC_PI_2))
}

pub fn extract_features(frame: &RawFrame, table: &AngleTable) -> Result<FeatureVector, GeometryError> {
    let mut angles = [0.0; ANGLE_COUNT];
    for (slot, spec) in angles.iter_mut().zip(table.specs()) {
        *slot = joint_angle(frame, spec)?;
    }
    Ok(FeatureVector::new(angles, angular_metric(frame)?))
}
