//! Browser bindings for the kineseq demo page.
//!
//! Every export takes and returns JSON strings. The plain functions in
//! [`ops`] do the work and are tested natively; the `#[wasm_bindgen]`
//! wrappers only convert errors.

use wasm_bindgen::prelude::*;

pub mod ops {
    use std::sync::OnceLock;

    use kineseq::classifier::{classify, pca_project, EvaluationDataset, DEFAULT_K, DEFAULT_POSITION_SCALE};
    use kineseq::config::EngineConfig;
    use kineseq::geometry::{extract_features, AngleTable, Keypoint, RawFrame};
    use kineseq::label::PoseLabel;
    use kineseq::matcher::MovementDictionary;
    use kineseq::pipeline::Engine;
    use kineseq::synth::{build_samples, render_stream, PoseSet, SynthScript};
    use serde::Serialize;
    use serde_json::json;

    const DATASET_PER_POSE: usize = 20;
    const DATASET_JITTER: f64 = 4.0;
    const DATASET_SEED: u64 = 7;

    fn dataset() -> &'static EvaluationDataset {
        static DS: OnceLock<EvaluationDataset> = OnceLock::new();
        DS.get_or_init(|| {
            let samples = build_samples(
                &PoseSet::bundled(),
                DATASET_PER_POSE,
                DATASET_JITTER,
                DATASET_SEED,
                &AngleTable::default(),
            )
            .expect("bundled poses");
            EvaluationDataset::new(samples, DEFAULT_POSITION_SCALE, DEFAULT_K).expect("synthetic dataset")
        })
    }

    fn to_json<T: Serialize>(v: &T) -> String {
        serde_json::to_string(v).expect("serializable")
    }

    /// Keypoints of a bundled pose, as `[{name, x, y, s}]`.
    pub fn canonical_pose(label: &str) -> Result<String, String> {
        let label = PoseLabel::new(label).map_err(|e| e.to_string())?;
        let poses = PoseSet::bundled();
        let pose = poses.get(&label).ok_or_else(|| format!("no pose `{label}`"))?;
        Ok(to_json(&pose.frame.keypoints()))
    }

    /// Features and kNN vote for a skeleton given as `[{name, x, y}]`.
    pub fn classify_pose(keypoints_json: &str) -> Result<String, String> {
        let kp: Vec<Keypoint> = serde_json::from_str(keypoints_json).map_err(|e| e.to_string())?;
        let frame = RawFrame::new(0, &kp).map_err(|e| e.to_string())?;
        let features = extract_features(&frame, &AngleTable::default()).map_err(|e| e.to_string())?;
        let c = classify(&features, dataset());
        let threshold = EngineConfig::default().null_threshold;
        Ok(to_json(&json!({
            "label": c.label,
            "accuracy": c.accuracy,
            "votes": c.votes,
            "k": c.k,
            "accepted": c.accuracy >= threshold,
            "features": features,
        })))
    }

    /// First two principal components of every demo dataset sample.
    pub fn pca_scatter() -> Result<String, String> {
        let points = pca_project(dataset()).map_err(|e| e.to_string())?;
        Ok(to_json(&points))
    }

    /// Renders a synthetic stream, runs the engine over it and returns the
    /// per-slot labels together with the report.
    pub fn simulate_and_analyze(script: &str, jitter: f64, seed: u64) -> Result<String, String> {
        let script = SynthScript::parse(script, jitter, seed).map_err(|e| e.to_string())?;
        let config = EngineConfig::default();
        let frames =
            render_stream(&script, &PoseSet::bundled(), config.frame_period_ms, 0).map_err(|e| e.to_string())?;
        let mut engine = Engine::new(
            dataset().clone(),
            MovementDictionary::sample(),
            AngleTable::default(),
            config,
        )
        .map_err(|e| e.to_string())?;
        let mut timeline = Vec::with_capacity(frames.len());
        for f in frames {
            let c = engine.classify_frame(&f);
            timeline.push(json!({ "label": c.label, "accuracy": c.accuracy }));
            engine.push(f).map_err(|e| e.to_string())?;
        }
        engine.finish().map_err(|e| e.to_string())?;
        Ok(to_json(&json!({
            "frames": timeline,
            "report": engine.report(),
        })))
    }

    /// The movement dictionary used by the demo.
    pub fn dictionary() -> String {
        MovementDictionary::sample().to_json()
    }
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen(js_name = canonicalPose)]
pub fn canonical_pose(label: &str) -> Result<String, JsValue> {
    ops::canonical_pose(label).map_err(js_err)
}

#[wasm_bindgen(js_name = classifyPose)]
pub fn classify_pose(keypoints_json: &str) -> Result<String, JsValue> {
    ops::classify_pose(keypoints_json).map_err(js_err)
}

#[wasm_bindgen(js_name = pcaScatter)]
pub fn pca_scatter() -> Result<String, JsValue> {
    ops::pca_scatter().map_err(js_err)
}

#[wasm_bindgen(js_name = simulateAndAnalyze)]
pub fn simulate_and_analyze(script: &str, jitter: f64, seed: u32) -> Result<String, JsValue> {
    ops::simulate_and_analyze(script, jitter, u64::from(seed)).map_err(js_err)
}

#[wasm_bindgen]
pub fn dictionary() -> String {
    ops::dictionary()
}
