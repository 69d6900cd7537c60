//! Scene documents and WAV assets on disk.

mod document;
mod wav;

pub use document::{
    load_assets, load_scene, parse_scene, save_scene, scene_to_json, AssetProblem,
    SceneDocument, SceneIoError, FORMAT_VERSION,
};
pub use wav::{load_wav, resample_linear, save_wav, WavError, WavTrack};
