//! Browser bindings for the static demo page in `www/`.

use dynatrack::lifecycle::classify_events;
use dynatrack::render::{render_svg, RenderOptions};
use dynatrack::sweep::sweep;
use dynatrack::synthetic::{generate, ScenarioSpec};
use dynatrack::{track, ClusteringSequence, InputFormat};
use wasm_bindgen::prelude::*;

fn parse(input: &str) -> Result<ClusteringSequence, String> {
    ClusteringSequence::parse(input.as_bytes(), InputFormat::Json).map_err(|e| e.to_string())
}

fn alluvial(input: &str, history: usize, block_width: f64, gap: f64) -> Result<String, String> {
    let seq = parse(input)?;
    let dc = track(&seq, history);
    let opts = RenderOptions {
        block_width,
        gap,
        scale: 1.0,
        ..RenderOptions::default()
    };
    Ok(render_svg(&seq, &dc, &opts))
}

fn sweep_rows(input: &str, min: usize, max: usize) -> Result<String, String> {
    let seq = parse(input)?;
    let rows = sweep(&seq, min..=max).map_err(|e| e.to_string())?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

fn scenario(spec: &str) -> Result<String, String> {
    let spec: ScenarioSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    let generated = generate(&spec).map_err(|e| e.to_string())?;
    Ok(generated.sequence.to_json())
}

fn events(input: &str, history: usize) -> Result<String, String> {
    let seq = parse(input)?;
    let dc = track(&seq, history);
    serde_json::to_string(&classify_events(&dc, &seq)).map_err(|e| e.to_string())
}

/// Tracks a clustering sequence (JSON) and returns the alluvial diagram as SVG.
#[wasm_bindgen]
pub fn render_alluvial(
    input: &str,
    history: usize,
    block_width: f64,
    gap: f64,
) -> Result<String, JsError> {
    alluvial(input, history, block_width, gap).map_err(|e| JsError::new(&e))
}

/// Sweep rows for every history value in `min..=max`, as a JSON array.
#[wasm_bindgen]
pub fn sweep_table(input: &str, min: usize, max: usize) -> Result<String, JsError> {
    sweep_rows(input, min, max).map_err(|e| JsError::new(&e))
}

/// Generates a clustering sequence (JSON) from a scenario description.
#[wasm_bindgen]
pub fn generate_scenario(spec: &str) -> Result<String, JsError> {
    scenario(spec).map_err(|e| JsError::new(&e))
}

/// Life-cycle events of the tracked sequence, as a JSON array.
#[wasm_bindgen]
pub fn lifecycle_events(input: &str, history: usize) -> Result<String, JsError> {
    events(input, history).map_err(|e| JsError::new(&e))
}
