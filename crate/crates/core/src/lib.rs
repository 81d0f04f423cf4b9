//! Exercise-movement recognition from 2-D body keypoints.
//!
//! Frames of 17 keypoints become 14-dimensional angle features, are labelled
//! by k-nearest-neighbour voting, buffered and run-length encoded into pose
//! sequences, matched against a movement dictionary by edit distance and
//! finally scored frame by frame.

pub mod classifier;
pub mod config;
pub mod geometry;
pub mod label;
pub mod matcher;
pub mod pipeline;
pub mod scorer;
pub mod sequencer;
pub mod synth;
