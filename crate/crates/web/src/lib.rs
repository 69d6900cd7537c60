//! In-browser front end for the engine.
//!
//! The page keeps the scene as a JSON document and calls into this module
//! to edit it, to read the mixes, to paint a field of one mix over every
//! receptor position and to render a short preview with built-in tones.

mod demo;

pub use demo::{apply_mutation, mix_field, parameterize_json, render_preview, FieldQuantity, PREVIEW_SAMPLE_RATE};

use wasm_bindgen::prelude::*;

fn js_error(message: String) -> JsValue {
    JsValue::from_str(&message)
}

/// Parameterizes a scene document and returns the snapshot as JSON.
#[wasm_bindgen(js_name = parameterize)]
pub fn parameterize_js(scene_json: &str) -> Result<String, JsValue> {
    parameterize_json(scene_json).map_err(js_error)
}

/// Applies one mutation (JSON, tagged by `op`) and returns the new document.
#[wasm_bindgen(js_name = applyMutation)]
pub fn apply_mutation_js(scene_json: &str, mutation_json: &str) -> Result<String, JsValue> {
    apply_mutation(scene_json, mutation_json).map_err(js_error)
}

/// Row-major `cols * rows` grid of `quantity` ("d_mix", "r_mix" or
/// "t_mix") for one emitter, with the receptor moved to each cell centre.
#[wasm_bindgen(js_name = mixField)]
pub fn mix_field_js(
    scene_json: &str,
    emitter_index: usize,
    cols: usize,
    rows: usize,
    quantity: &str,
) -> Result<Vec<f64>, JsValue> {
    let quantity = quantity.parse::<FieldQuantity>().map_err(js_error)?;
    mix_field(scene_json, emitter_index, cols, rows, quantity).map_err(js_error)
}

/// Mono samples at [`PREVIEW_SAMPLE_RATE`], one synthetic tone per track.
#[wasm_bindgen(js_name = renderPreview)]
pub fn render_preview_js(scene_json: &str, seconds: f64) -> Result<Vec<f32>, JsValue> {
    render_preview(scene_json, seconds).map_err(js_error)
}

#[wasm_bindgen(js_name = previewSampleRate)]
pub fn preview_sample_rate() -> u32 {
    PREVIEW_SAMPLE_RATE
}
