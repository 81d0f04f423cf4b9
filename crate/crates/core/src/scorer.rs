//! Accuracy scoring of a produced frame sequence against its reference.
//!
//! The produced sequence is aligned to the reference with an optimal edit
//! script. Frames the script leaves untouched are "kept"; the total accuracy
//! is the sum of their classification accuracies over the reference length.

use serde::Serialize;

use crate::label::PoseLabel;
use crate::matcher::MovementEntry;
use crate::sequencer::Span;

pub const DEFAULT_SEGMENT_LEN: usize = 10;

/// One step of an edit script turning the produced sequence into the ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Keep {
        produced: usize,
        ideal: usize,
    },
    Substitute {
        produced: usize,
        ideal: usize,
    },
    Delete {
        produced: usize,
    },
    /// Inserts `ideal` before produced index `at` (`at == len` appends).
    Insert {
        at: usize,
        ideal: usize,
    },
}

impl EditOp {
    pub fn is_edit(&self) -> bool {
        !matches!(self, EditOp::Keep { .. })
    }
}

/// Optimal alignment between a produced and an ideal sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alignment {
    steps: Vec<EditOp>,
    produced_len: usize,
    ideal_len: usize,
}

impl Alignment {
    /// Builds an alignment from an explicit script, which must walk both
    /// sequences in order exactly once.
    pub fn from_steps(steps: Vec<EditOp>, produced_len: usize, ideal_len: usize) -> Option<Self> {
        let (mut p, mut q) = (0, 0);
        for step in &steps {
            match *step {
                EditOp::Keep { produced, ideal } | EditOp::Substitute { produced, ideal } => {
                    if produced != p || ideal != q {
                        return None;
                    }
                    p += 1;
                    q += 1;
                }
                EditOp::Delete { produced } => {
                    if produced != p {
                        return None;
                    }
                    p += 1;
                }
                EditOp::Insert { at, ideal } => {
                    if at != p || ideal != q {
                        return None;
                    }
                    q += 1;
                }
            }
        }
        (p == produced_len && q == ideal_len).then_some(Self {
            steps,
            produced_len,
            ideal_len,
        })
    }

    /// The full script including keeps, in sequence order.
    pub fn steps(&self) -> &[EditOp] {
        &self.steps
    }

    /// Edits only.
    pub fn ops(&self) -> impl Iterator<Item = &EditOp> {
        self.steps.iter().filter(|s| s.is_edit())
    }

    pub fn distance(&self) -> usize {
        self.ops().count()
    }

    /// Produced indices untouched by any edit, ascending.
    pub fn kept(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                EditOp::Keep { produced, .. } => Some(*produced),
                _ => None,
            })
            .collect()
    }

    pub fn produced_len(&self) -> usize {
        self.produced_len
    }

    pub fn ideal_len(&self) -> usize {
        self.ideal_len
    }

    pub fn count(&self, pred: impl Fn(&EditOp) -> bool) -> usize {
        self.steps.iter().filter(|s| pred(s)).count()
    }

    /// Runs the script over `produced`, taking inserted and substituted
    /// symbols from `ideal`.
    pub fn apply<T: Clone>(&self, produced: &[T], ideal: &[T]) -> Vec<T> {
        self.steps
            .iter()
            .filter_map(|s| match *s {
                EditOp::Keep { produced: p, .. } => Some(produced[p].clone()),
                EditOp::Substitute { ideal: q, .. } | EditOp::Insert { ideal: q, .. } => Some(ideal[q].clone()),
                EditOp::Delete { .. } => None,
            })
            .collect()
    }
}

/// Aligns `produced` to `ideal` with a minimum-cost edit script.
///
/// Among minimum-cost scripts the one keeping the most produced frames is
/// chosen. Remaining ties are resolved while backtracking from the end,
/// preferring keep, then delete, then insert, then substitute.
pub fn align<T: PartialEq>(produced: &[T], ideal: &[T]) -> Alignment {
    let (n, m) = (produced.len(), ideal.len());
    let w = m + 1;
    // (edits, -keeps): lexicographically smaller is better
    let mut cost = vec![(0u32, 0i32); (n + 1) * w];
    for i in 0..=n {
        cost[i * w] = (i as u32, 0);
    }
    for (j, c) in cost[..=m].iter_mut().enumerate() {
        *c = (j as u32, 0);
    }
    let step = |c: (u32, i32), edit: bool| if edit { (c.0 + 1, c.1) } else { (c.0, c.1 - 1) };
    for i in 1..=n {
        for j in 1..=m {
            let diag = cost[(i - 1) * w + j - 1];
            let same = produced[i - 1] == ideal[j - 1];
            cost[i * w + j] = step(diag, !same)
                .min(step(cost[(i - 1) * w + j], true))
                .min(step(cost[i * w + j - 1], true));
        }
    }

    let mut steps = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * w + j];
        if i > 0 && j > 0 && produced[i - 1] == ideal[j - 1] && step(cost[(i - 1) * w + j - 1], false) == here {
            steps.push(EditOp::Keep {
                produced: i - 1,
                ideal: j - 1,
            });
            i -= 1;
            j -= 1;
        } else if i > 0 && step(cost[(i - 1) * w + j], true) == here {
            steps.push(EditOp::Delete { produced: i - 1 });
            i -= 1;
        } else if j > 0 && step(cost[i * w + j - 1], true) == here {
            steps.push(EditOp::Insert { at: i, ideal: j - 1 });
            j -= 1;
        } else {
            steps.push(EditOp::Substitute {
                produced: i - 1,
                ideal: j - 1,
            });
            i -= 1;
            j -= 1;
        }
    }
    steps.reverse();
    Alignment {
        steps,
        produced_len: n,
        ideal_len: m,
    }
}

/// Sum of kept frames' accuracies over the ideal length.
pub fn total_accuracy(alignment: &Alignment, frame_accuracies: &[f64]) -> f64 {
    if alignment.ideal_len == 0 {
        return 0.0;
    }
    let kept: f64 = alignment.kept().iter().map(|&p| frame_accuracies[p]).sum();
    kept / alignment.ideal_len as f64
}

/// Like [`total_accuracy`], but a substituted frame earns half weight when
/// the produced and ideal poses are adjacent in the movement.
pub fn weighted_accuracy<T>(
    alignment: &Alignment,
    produced: &[T],
    ideal: &[T],
    frame_accuracies: &[f64],
    adjacent: impl Fn(&T, &T) -> bool,
) -> f64 {
    if alignment.ideal_len == 0 {
        return 0.0;
    }
    let sum: f64 = alignment
        .steps
        .iter()
        .map(|s| match *s {
            EditOp::Keep { produced: p, .. } => frame_accuracies[p],
            EditOp::Substitute { produced: p, ideal: q } if adjacent(&produced[p], &ideal[q]) => {
                0.5 * frame_accuracies[p]
            }
            _ => 0.0,
        })
        .sum();
    sum / alignment.ideal_len as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstSegment {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub mean_accuracy: f64,
}

impl WorstSegment {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

/// Produced-frame positions touched by edits, plus the fixed-stride window
/// of `segment_len` frames with the lowest mean accuracy (first on ties).
///
/// An insertion is reported at the produced frame just before the gap, or at
/// frame 0 for a gap at the very start.
pub fn locate_inaccuracies(
    alignment: &Alignment,
    frame_accuracies: &[f64],
    segment_len: usize,
) -> (Vec<usize>, Option<WorstSegment>) {
    assert!(segment_len >= 1, "segment length must be at least 1");
    let n = alignment.produced_len;
    let mut positions: Vec<usize> = alignment
        .steps
        .iter()
        .filter_map(|s| match *s {
            EditOp::Substitute { produced, .. } | EditOp::Delete { produced } => Some(produced),
            EditOp::Insert { at, .. } if n > 0 => Some(at.saturating_sub(1).min(n - 1)),
            _ => None,
        })
        .collect();
    positions.sort_unstable();
    positions.dedup();

    let mut worst: Option<WorstSegment> = None;
    for (w, chunk) in frame_accuracies[..n].chunks(segment_len).enumerate() {
        let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
        if worst.is_none_or(|b| mean < b.mean_accuracy) {
            let start = w * segment_len;
            worst = Some(WorstSegment {
                start,
                end: start + chunk.len(),
                mean_accuracy: mean,
            });
        }
    }
    (positions, worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub total_accuracy: f64,
    pub weighted_accuracy: f64,
    pub edit_positions: Vec<usize>,
    pub worst_segment: Option<WorstSegment>,
}

/// Aligns, scores and localizes in one pass, using the movement's ideal for
/// pose adjacency.
pub fn score(
    produced: &[PoseLabel],
    reference: &[PoseLabel],
    frame_accuracies: &[f64],
    movement: &MovementEntry,
    segment_len: usize,
) -> AccuracyReport {
    let alignment = align(produced, reference);
    let (edit_positions, worst_segment) = locate_inaccuracies(&alignment, frame_accuracies, segment_len);
    AccuracyReport {
        total_accuracy: total_accuracy(&alignment, frame_accuracies),
        weighted_accuracy: weighted_accuracy(&alignment, produced, reference, frame_accuracies, |a, b| {
            movement.is_adjacent(a, b)
        }),
        edit_positions,
        worst_segment,
    }
}
