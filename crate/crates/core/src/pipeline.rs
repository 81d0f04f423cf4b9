//! Streaming engine: keypoint frames in, movement identifications out.
//!
//! Each accepted frame is classified and pushed into the frame buffer; the
//! buffer is then segmented and every candidate that has ended is matched
//! against the dictionary. A candidate has ended once a full separator
//! follows it, once it reaches the front of a full buffer, or when the
//! stream finishes. Matched spans are consumed from the buffer.

use std::io::BufRead;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{classify, gate_null, ClassifiedFrame, EvaluationDataset};
use crate::config::{ConfigError, EngineConfig};
use crate::geometry::{extract_features, AngleTable, RawFrame};
use crate::matcher::{match_movement, MatchResult, MovementDictionary, MovementEntry};
use crate::scorer::{score, WorstSegment};
use crate::sequencer::{FrameBuffer, PoseSequence, RleToken, SequenceError, Span, TokenSeq};
use crate::synth::{build_samples, render_stream, PoseSet, SynthScript};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stream line {line}: {message}")]
    StreamFormat { line: usize, message: String },
    #[error("frame at {got} ms arrived after a frame at {previous} ms")]
    OutOfOrder { previous: u64, got: u64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] crate::classifier::ClassifierError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// One recognised movement. Frame spans are absolute stream slot indices;
/// edit positions and the worst segment are relative to the span start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identification {
    pub movement: String,
    pub variant: String,
    pub variant_index: usize,
    pub distance: usize,
    pub span: Span,
    pub start_ms: u64,
    pub end_ms: u64,
    pub performed: String,
    pub total_accuracy: f64,
    pub weighted_accuracy: f64,
    pub edit_positions: Vec<usize>,
    pub worst_segment: Option<WorstSegment>,
}

/// A finished candidate with no dictionary variant within the edit limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unmatched {
    pub span: Span,
    pub start_ms: u64,
    pub end_ms: u64,
    pub performed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ReportEvent {
    Identified(Identification),
    Unmatched(Unmatched),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub identified: Vec<Identification>,
    pub unmatched: Vec<Unmatched>,
}

impl AnalysisReport {
    fn record(&mut self, event: &ReportEvent) {
        match event {
            ReportEvent::Identified(i) => self.identified.push(i.clone()),
            ReportEvent::Unmatched(u) => self.unmatched.push(u.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The frame awaiting commit for the current time slot.
#[derive(Debug, Clone)]
struct Clock {
    t0: u64,
    slot: u64,
    pending: RawFrame,
}

pub struct Engine {
    dataset: EvaluationDataset,
    dictionary: MovementDictionary,
    table: AngleTable,
    config: EngineConfig,
    buffer: FrameBuffer,
    clock: Option<Clock>,
    /// Absolute slot index up to which candidates have been settled.
    watermark: usize,
    report: AnalysisReport,
}

impl Engine {
    /// The dataset's `k` and the dictionary's edit limit are replaced by the
    /// configured values.
    pub fn new(
        dataset: EvaluationDataset,
        dictionary: MovementDictionary,
        table: AngleTable,
        config: EngineConfig,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        let dataset = dataset.with_k(config.k)?;
        let dictionary = dictionary.with_edit_limit(config.edit_limit);
        Ok(Self {
            dataset,
            dictionary,
            table,
            buffer: FrameBuffer::new(config.buffer_capacity),
            config,
            clock: None,
            watermark: 0,
            report: AnalysisReport::default(),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn buffer(&self) -> &FrameBuffer {
        &self.buffer
    }

    pub fn report(&self) -> &AnalysisReport {
        &self.report
    }

    pub fn into_report(self) -> AnalysisReport {
        self.report
    }

    /// Classifies one frame. Low-confidence or degenerate skeletons and
    /// votes below the threshold yield NULL.
    pub fn classify_frame(&self, frame: &RawFrame) -> ClassifiedFrame {
        let t = frame.timestamp();
        if frame.min_score() < self.config.min_keypoint_score {
            return ClassifiedFrame::null(t);
        }
        match extract_features(frame, &self.table) {
            Ok(v) => {
                let c = classify(&v, &self.dataset);
                gate_null(c.label, c.accuracy, self.config.null_threshold, t)
            }
            Err(_) => ClassifiedFrame::null(t),
        }
    }

    /// Feeds one raw frame. Frames sharing a time slot replace each other;
    /// a slot is committed once a frame for a later slot arrives, and slots
    /// skipped entirely are committed as NULL.
    pub fn push(&mut self, frame: RawFrame) -> Result<Vec<ReportEvent>, PipelineError> {
        let t = frame.timestamp();
        let Some(mut clock) = self.clock.take() else {
            self.clock = Some(Clock {
                t0: t,
                slot: 0,
                pending: frame,
            });
            return Ok(Vec::new());
        };
        let previous = clock.pending.timestamp();
        if t < previous {
            self.clock = Some(clock);
            return Err(PipelineError::OutOfOrder { previous, got: t });
        }
        let period = self.config.frame_period_ms;
        let slot = (t - clock.t0) / period;
        if slot == clock.slot {
            clock.pending = frame;
            self.clock = Some(clock);
            return Ok(Vec::new());
        }
        let done = std::mem::replace(&mut clock.pending, frame);
        let (t0, from) = (clock.t0, clock.slot);
        clock.slot = slot;
        self.clock = Some(clock);

        let mut events = self.commit(self.classify_frame(&done))?;
        for s in from + 1..slot {
            events.extend(self.commit(ClassifiedFrame::null(t0 + s * period))?);
        }
        Ok(events)
    }

    /// Commits the last pending frame and settles every remaining candidate.
    pub fn finish(&mut self) -> Result<Vec<ReportEvent>, PipelineError> {
        let mut events = Vec::new();
        if let Some(clock) = self.clock.take() {
            events = self.commit(self.classify_frame(&clock.pending))?;
        }
        events.extend(self.settle(true)?);
        Ok(events)
    }

    /// Pushes an already classified frame, bypassing the slot clock.
    pub fn commit(&mut self, frame: ClassifiedFrame) -> Result<Vec<ReportEvent>, PipelineError> {
        self.buffer.push_frame(frame)?;
        self.settle(false)
    }

    fn settle(&mut self, flush: bool) -> Result<Vec<ReportEvent>, PipelineError> {
        let origin = self.buffer.origin() as usize;
        let full = self.buffer.is_full();
        let mut events = Vec::new();
        for seq in self.buffer.segment(self.config.separator_len) {
            let abs = seq.span.shifted(origin);
            if abs.end <= self.watermark {
                continue;
            }
            let wrapped = full && seq.span.start == 0;
            if !(seq.closed || flush || wrapped) {
                continue;
            }
            let event = match match_movement(&seq, &self.dictionary) {
                Some(m) => {
                    let id = self.identify(&seq, &m, abs);
                    self.buffer.consume(seq.span)?;
                    ReportEvent::Identified(id)
                }
                None if seq.closed || flush => ReportEvent::Unmatched(Unmatched {
                    span: abs,
                    start_ms: self.timestamp_at(seq.span.start),
                    end_ms: self.timestamp_at(seq.span.end - 1),
                    performed: seq.tokens.to_string(),
                }),
                None => continue,
            };
            self.watermark = abs.end;
            self.report.record(&event);
            events.push(event);
        }
        Ok(events)
    }

    fn timestamp_at(&self, i: usize) -> u64 {
        self.buffer.get(i).map_or(0, |f| f.timestamp)
    }

    fn identify(&self, seq: &PoseSequence, m: &MatchResult, abs: Span) -> Identification {
        let entry: &MovementEntry = &self.dictionary.entries()[m.entry_index];
        let produced = seq.tokens.expand();
        let reference = m.variant.expand();
        let acc = score(
            &produced,
            &reference,
            &seq.frame_accuracies,
            entry,
            self.config.segment_len,
        );
        Identification {
            movement: m.movement.clone(),
            variant: m.variant.to_string(),
            variant_index: m.variant_index,
            distance: m.distance,
            span: abs,
            start_ms: self.timestamp_at(seq.span.start),
            end_ms: self.timestamp_at(seq.span.end - 1),
            performed: seq.tokens.to_string(),
            total_accuracy: acc.total_accuracy,
            weighted_accuracy: acc.weighted_accuracy,
            edit_positions: acc.edit_positions,
            worst_segment: acc.worst_segment,
        }
    }
}

/// Runs a whole stream through a fresh engine.
pub fn run_stream(
    frames: impl IntoIterator<Item = RawFrame>,
    dataset: EvaluationDataset,
    dictionary: MovementDictionary,
    config: EngineConfig,
) -> Result<AnalysisReport, PipelineError> {
    let mut engine = Engine::new(dataset, dictionary, AngleTable::default(), config)?;
    for f in frames {
        engine.push(f)?;
    }
    engine.finish()?;
    Ok(engine.into_report())
}

/// Parses one stream line; blank lines yield `None`.
pub fn parse_frame_line(line: &str, line_no: usize) -> Result<Option<RawFrame>, PipelineError> {
    if line.trim().is_empty() {
        return Ok(None);
    }
    serde_json::from_str(line)
        .map(Some)
        .map_err(|e| PipelineError::StreamFormat {
            line: line_no,
            message: e.to_string(),
        })
}

/// Reads a stream given either as one JSON array or as one object per line.
pub fn read_stream(text: &str) -> Result<Vec<RawFrame>, PipelineError> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| PipelineError::StreamFormat {
            line: e.line(),
            message: e.to_string(),
        });
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        out.extend(parse_frame_line(line, i + 1)?);
    }
    Ok(out)
}

/// Line-by-line reader for streaming mode.
pub fn stream_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<RawFrame, PipelineError>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) => parse_frame_line(&l, i + 1).transpose(),
        Err(e) => Some(Err(PipelineError::StreamFormat {
            line: i + 1,
            message: e.to_string(),
        })),
    })
}

/// Serializes frames as JSON lines.
pub fn write_stream(frames: &[RawFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        out.push_str(&serde_json::to_string(f).expect("frame serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub iterations: usize,
    pub buffer_frames: usize,
    pub variants: usize,
    pub median_ms: f64,
    pub max_ms: f64,
    pub budget_ms: f64,
}

/// `count` distinct tempo variants spread over the sample movements, each
/// run scaled independently by a factor in [0.5, 2].
pub fn synthetic_dictionary(count: usize, seed: u64, edit_limit: usize) -> MovementDictionary {
    let sample = MovementDictionary::sample();
    let n = sample.entries().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = sample
        .entries()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let want = count / n + usize::from(i < count % n);
            let mut variants = vec![e.ideal.clone()];
            while variants.len() < want {
                let tokens = e
                    .ideal
                    .tokens()
                    .iter()
                    .map(|t| {
                        let run = (t.run as f64 * rng.random_range(0.5..=2.0)).round().max(1.0);
                        RleToken::new(t.label.clone(), run as usize)
                    })
                    .collect();
                let v = TokenSeq::new(tokens).expect("scaled tokens stay valid");
                if !variants.contains(&v) {
                    variants.push(v);
                }
            }
            MovementEntry::new(e.name.clone(), e.ideal.clone(), variants).expect("labels come from the ideal")
        })
        .collect();
    MovementDictionary::new(entries, edit_limit).expect("names are unique")
}

/// Times the per-frame path (extract, classify, buffer, segment, and a
/// dictionary match of every candidate) on a full buffer.
pub fn run_benchmark(iterations: usize, variants: usize) -> BenchReport {
    let config = EngineConfig::default();
    let table = AngleTable::default();
    let poses = PoseSet::bundled();
    let samples = build_samples(&poses, 40, 2.0, 1, &table).expect("bundled poses");
    let dataset = EvaluationDataset::new(samples, config.position_scale, config.k).expect("synthetic dataset is valid");
    let dictionary = synthetic_dictionary(variants, 2, config.edit_limit);
    // 100 frames: two finished movements and one in progress
    let script = SynthScript::parse("A7 B7 C11 B7 A7 NULL7 A8 B11 A9 NULL7 B5 C14", 3.0, 3).expect("valid script");
    let frames = render_stream(&script, &poses, config.frame_period_ms, 0).expect("known labels");

    let mut engine = Engine::new(dataset, dictionary, table, config).expect("default config");
    for f in &frames {
        let c = engine.classify_frame(f);
        engine.buffer.push_frame(c).expect("ordered timestamps");
    }

    let mut times = Vec::with_capacity(iterations);
    let period = engine.config.frame_period_ms;
    for i in 0..iterations {
        let t = (frames.len() + i) as u64 * period;
        let frame = frames[i % frames.len()].clone().with_timestamp(t);
        let start = Instant::now();
        let c = engine.classify_frame(&frame);
        engine.buffer.push_frame(c).expect("ordered timestamps");
        for seq in engine.buffer.segment(engine.config.separator_len) {
            std::hint::black_box(match_movement(&seq, &engine.dictionary));
        }
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(f64::total_cmp);
    BenchReport {
        iterations,
        buffer_frames: engine.buffer.len(),
        variants: engine.dictionary.variant_count(),
        median_ms: times.get(times.len() / 2).copied().unwrap_or(0.0),
        max_ms: times.last().copied().unwrap_or(0.0),
        budget_ms: period as f64,
    }
}
