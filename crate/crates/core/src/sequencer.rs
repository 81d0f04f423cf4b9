//! Rolling frame buffer and run-length pose sequences.
//!
//! Classified frames are kept in a bounded sliding window. Every time the
//! window is segmented it is run-length encoded; short NULL runs are treated
//! as misclassified frames and absorbed into a neighbouring pose, while long
//! NULL runs (and NULL runs touching the buffer edges) separate candidate
//! movements.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::ClassifiedFrame;
use crate::label::{split_token, PoseLabel, NULL_TOKEN};

pub const DEFAULT_CAPACITY: usize = 100;
pub const DEFAULT_FRAME_PERIOD_MS: u64 = 150;
pub const DEFAULT_SEPARATOR_LEN: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("frame at {got} ms arrived after a frame at {previous} ms")]
    OutOfOrderFrame { previous: u64, got: u64 },
    #[error("span {span} exceeds buffer length {len}")]
    SpanOutOfRange { span: Span, len: usize },
    #[error("invalid token `{0}`: expected a label followed by a run length, e.g. `C10`")]
    InvalidToken(String),
    #[error("adjacent tokens share the label `{0}`")]
    RepeatedLabel(PoseLabel),
    #[error("empty token sequence")]
    Empty,
}

/// Half-open index range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn shifted(&self, by: usize) -> Span {
        Span::new(self.start + by, self.end + by)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A maximal run of one label, or of NULL frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub label: Option<PoseLabel>,
    pub len: usize,
}

impl Run {
    pub fn new(label: Option<PoseLabel>, len: usize) -> Self {
        Self { label, len }
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{l}{}", self.len),
            None => write!(f, "{NULL_TOKEN}{}", self.len),
        }
    }
}

/// Parses whitespace-separated runs such as `A6 NULL2 B3`.
pub fn parse_runs(s: &str) -> Result<Vec<Run>, SequenceError> {
    s.split_whitespace()
        .map(|tok| {
            let (label, len) = split_token(tok).ok_or_else(|| SequenceError::InvalidToken(tok.into()))?;
            if len == 0 {
                return Err(SequenceError::InvalidToken(tok.into()));
            }
            let label = if label == NULL_TOKEN {
                None
            } else {
                Some(PoseLabel::new(label).map_err(|_| SequenceError::InvalidToken(tok.into()))?)
            };
            Ok(Run::new(label, len))
        })
        .collect()
}

pub fn format_runs(runs: &[Run]) -> String {
    runs.iter().map(Run::to_string).collect::<Vec<_>>().join(" ")
}

/// A non-NULL run in a pose sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RleToken {
    pub label: PoseLabel,
    pub run: usize,
}

impl RleToken {
    pub fn new(label: PoseLabel, run: usize) -> Self {
        Self { label, run }
    }
}

impl fmt::Display for RleToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label, self.run)
    }
}

/// Run-length pose sequence, e.g. `A6 B6 C10 B6 A6`. Runs are at least 1 and
/// neighbouring tokens never share a label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TokenSeq(Vec<RleToken>);

impl TokenSeq {
    pub fn new(tokens: Vec<RleToken>) -> Result<Self, SequenceError> {
        for t in &tokens {
            if t.run == 0 {
                return Err(SequenceError::InvalidToken(format!("{}0", t.label)));
            }
        }
        for pair in tokens.windows(2) {
            if pair[0].label == pair[1].label {
                return Err(SequenceError::RepeatedLabel(pair[0].label.clone()));
            }
        }
        Ok(Self(tokens))
    }

    /// Run-length encodes a per-frame label sequence.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a PoseLabel>) -> Self {
        let mut tokens: Vec<RleToken> = Vec::new();
        for label in labels {
            match tokens.last_mut() {
                Some(t) if &t.label == label => t.run += 1,
                _ => tokens.push(RleToken::new(label.clone(), 1)),
            }
        }
        Self(tokens)
    }

    pub fn tokens(&self) -> &[RleToken] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of frames after expansion.
    pub fn frame_len(&self) -> usize {
        self.0.iter().map(|t| t.run).sum()
    }

    /// One label per frame.
    pub fn expand(&self) -> Vec<PoseLabel> {
        self.0
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.label.clone(), t.run))
            .collect()
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for TokenSeq {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tokens = Vec::new();
        for run in parse_runs(s)? {
            match run.label {
                Some(label) => tokens.push(RleToken::new(label, run.len)),
                None => return Err(SequenceError::InvalidToken(run.to_string())),
            }
        }
        if tokens.is_empty() {
            return Err(SequenceError::Empty);
        }
        Self::new(tokens)
    }
}

impl TryFrom<String> for TokenSeq {
    type Error = SequenceError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TokenSeq> for String {
    fn from(t: TokenSeq) -> String {
        t.to_string()
    }
}

/// Maximal runs of equal labels, NULL runs included.
pub fn rle_encode<'a>(frames: impl IntoIterator<Item = &'a ClassifiedFrame>) -> Vec<Run> {
    encode_labels(frames.into_iter().map(|f| f.label.as_ref()))
}

fn encode_labels<'a>(labels: impl IntoIterator<Item = Option<&'a PoseLabel>>) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for label in labels {
        match runs.last_mut() {
            Some(r) if r.label.as_ref() == label => r.len += 1,
            _ => runs.push(Run::new(label.cloned(), 1)),
        }
    }
    runs
}

/// Inverse of [`rle_encode`]: one entry per frame.
pub fn expand_runs(runs: &[Run]) -> Vec<Option<PoseLabel>> {
    runs.iter()
        .flat_map(|r| std::iter::repeat_n(r.label.clone(), r.len))
        .collect()
}

/// Absorbs every NULL run shorter than `separator_len` into a neighbour.
///
/// With equal flanks the NULL frames join (and merge) both sides; with
/// differing flanks they join the preceding run, or the following run at the
/// start of the list. Longer NULL runs are kept.
pub fn smooth_nulls(runs: &[Run], separator_len: usize) -> Vec<Run> {
    let runs = normalize(runs);
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let label = match &run.label {
            None if run.len < separator_len => out
                .last()
                .and_then(|r| r.label.clone())
                .or_else(|| runs.get(i + 1).and_then(|r| r.label.clone())),
            other => other.clone(),
        };
        match out.last_mut() {
            Some(last) if last.label == label => last.len += run.len,
            _ => out.push(Run::new(label, run.len)),
        }
    }
    out
}

fn normalize(runs: &[Run]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for r in runs.iter().filter(|r| r.len > 0) {
        match out.last_mut() {
            Some(last) if last.label == r.label => last.len += r.len,
            _ => out.push(r.clone()),
        }
    }
    out
}

/// A candidate movement cut out of the buffer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseSequence {
    pub tokens: TokenSeq,
    /// Position in the buffer at segmentation time.
    pub span: Span,
    /// Per-frame accuracy aligned with `tokens.expand()`; absorbed NULL frames
    /// count as 0.
    pub frame_accuracies: Vec<f64>,
    /// Whether a full separator follows the sequence, i.e. the movement has
    /// ended.
    pub closed: bool,
}

#[derive(Debug, Clone)]
struct Slot {
    frame: ClassifiedFrame,
    consumed: bool,
}

/// Bounded sliding window of classified frames. The oldest frame is evicted
/// once `capacity` is reached.
#[derive(Debug, Clone)]
pub struct FrameBuffer {
    slots: VecDeque<Slot>,
    capacity: usize,
    evicted: u64,
}

impl Default for FrameBuffer {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

impl FrameBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        Self {
            slots: VecDeque::with_capacity(capacity),
            capacity,
            evicted: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stream index of the frame currently at buffer position 0.
    pub fn origin(&self) -> u64 {
        self.evicted
    }

    pub fn get(&self, i: usize) -> Option<&ClassifiedFrame> {
        self.slots.get(i).map(|s| &s.frame)
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &ClassifiedFrame> {
        self.slots.iter().map(|s| &s.frame)
    }

    /// Appends a frame, returning the evicted one when the buffer was full.
    pub fn push_frame(&mut self, frame: ClassifiedFrame) -> Result<Option<ClassifiedFrame>, SequenceError> {
        if let Some(last) = self.slots.back() {
            if frame.timestamp < last.frame.timestamp {
                return Err(SequenceError::OutOfOrderFrame {
                    previous: last.frame.timestamp,
                    got: frame.timestamp,
                });
            }
        }
        let evicted = if self.is_full() {
            self.evicted += 1;
            self.slots.pop_front().map(|s| s.frame)
        } else {
            None
        };
        self.slots.push_back(Slot { frame, consumed: false });
        Ok(evicted)
    }

    /// Sets every frame in `span` to NULL. Consumed frames always act as a
    /// separator, however short the span.
    pub fn consume(&mut self, span: Span) -> Result<(), SequenceError> {
        if span.end > self.slots.len() || span.start > span.end {
            return Err(SequenceError::SpanOutOfRange {
                span,
                len: self.slots.len(),
            });
        }
        for slot in self.slots.range_mut(span.start..span.end) {
            slot.frame.label = None;
            slot.frame.accuracy = None;
            slot.consumed = true;
        }
        Ok(())
    }

    /// Splits the buffer into candidate pose sequences.
    pub fn segment(&self, separator_len: usize) -> Vec<PoseSequence> {
        #[derive(PartialEq)]
        enum Kind<'a> {
            Pose(&'a PoseLabel),
            Null,
            Consumed,
        }
        fn kind(s: &Slot) -> Kind<'_> {
            match (&s.frame.label, s.consumed) {
                (_, true) => Kind::Consumed,
                (Some(l), false) => Kind::Pose(l),
                (None, false) => Kind::Null,
            }
        }
        // runs of (kind, start, len)
        let mut runs: Vec<(Kind<'_>, usize, usize)> = Vec::new();
        for (i, slot) in self.slots.iter().enumerate() {
            let k = kind(slot);
            match runs.last_mut() {
                Some((rk, _, len)) if *rk == k => *len += 1,
                _ => runs.push((k, i, 1)),
            }
        }

        // resolved label per frame; None marks a separator frame
        let mut resolved: Vec<Option<&PoseLabel>> = vec![None; self.slots.len()];
        let mut absorbed = vec![false; self.slots.len()];
        let last = runs.len().saturating_sub(1);
        for (r, (k, start, len)) in runs.iter().enumerate() {
            let range = *start..*start + *len;
            match k {
                Kind::Pose(l) => resolved[range].fill(Some(*l)),
                Kind::Consumed => {}
                Kind::Null => {
                    let touches_consumed = (r > 0 && runs[r - 1].0 == Kind::Consumed)
                        || runs.get(r + 1).is_some_and(|n| n.0 == Kind::Consumed);
                    let separator = *len >= separator_len || r == 0 || r == last || touches_consumed;
                    if !separator {
                        // the previous run is a pose run: runs are maximal and
                        // consumed neighbours were excluded above
                        let Kind::Pose(prev) = runs[r - 1].0 else {
                            unreachable!("short interior NULL run follows a pose run")
                        };
                        resolved[range.clone()].fill(Some(prev));
                        absorbed[range].fill(true);
                    }
                }
            }
        }

        let mut out = Vec::new();
        let mut i = 0;
        let n = self.slots.len();
        while i < n {
            if resolved[i].is_none() {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && resolved[i].is_some() {
                i += 1;
            }
            let end = i;
            // the separator region that follows, if any
            let mut j = end;
            let mut has_consumed = false;
            while j < n && resolved[j].is_none() {
                has_consumed |= self.slots[j].consumed;
                j += 1;
            }
            let closed = end < n && (j - end >= separator_len || has_consumed);
            let tokens = TokenSeq::from_labels(resolved[start..end].iter().map(|l| l.expect("pose frame")));
            let frame_accuracies = (start..end)
                .map(|f| {
                    if absorbed[f] {
                        0.0
                    } else {
                        self.slots[f].frame.accuracy.unwrap_or(0.0)
                    }
                })
                .collect();
            out.push(PoseSequence {
                tokens,
                span: Span::new(start, end),
                frame_accuracies,
                closed,
            });
        }
        out
    }
}
