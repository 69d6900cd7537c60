use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::wav::{load_wav, WavError};
use crate::engine::TrackStore;
use crate::ids::TrackId;
use crate::scene::{
    BarrierWeighting, Emitter, Material, Receptor, Scene, SceneError, SceneParts, Wall,
    DEFAULT_C, DEFAULT_D, DEFAULT_MAX_SEGMENT_LENGTH,
};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk JSON form of a scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub format_version: u32,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_d")]
    pub d: f64,
    #[serde(default = "default_max_segment_length")]
    pub max_segment_length: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub length_weighted: bool,
    pub receptor: Receptor,
    #[serde(default)]
    pub emitters: Vec<Emitter>,
    #[serde(default)]
    pub materials: Vec<Material>,
    #[serde(default)]
    pub walls: Vec<Wall>,
    #[serde(default)]
    pub assets: BTreeMap<TrackId, String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

fn default_c() -> f64 {
    DEFAULT_C
}

fn default_d() -> f64 {
    DEFAULT_D
}

fn default_max_segment_length() -> f64 {
    DEFAULT_MAX_SEGMENT_LENGTH
}

impl SceneDocument {
    pub fn from_scene(scene: &Scene) -> Self {
        let parts = scene.to_parts();
        Self {
            format_version: FORMAT_VERSION,
            c: parts.c,
            d: parts.d,
            max_segment_length: parts.max_segment_length,
            length_weighted: parts.weighting == BarrierWeighting::LengthWeighted,
            receptor: parts.receptor,
            emitters: parts.emitters,
            materials: parts.materials,
            walls: parts.walls,
            assets: parts.assets,
            extra: parts.extra,
        }
    }

    pub fn into_scene(self) -> Result<Scene, SceneIoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(SceneIoError::Version(self.format_version));
        }
        Ok(Scene::new(SceneParts {
            emitters: self.emitters,
            receptor: self.receptor,
            walls: self.walls,
            materials: self.materials,
            c: self.c,
            d: self.d,
            max_segment_length: self.max_segment_length,
            weighting: if self.length_weighted {
                BarrierWeighting::LengthWeighted
            } else {
                BarrierWeighting::Unit
            },
            assets: self.assets,
            extra: self.extra,
        })?)
    }
}

#[derive(Debug, Error)]
pub enum SceneIoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },
    #[error("unsupported format_version {0} (supported: {FORMAT_VERSION})")]
    Version(u32),
    #[error(transparent)]
    Invalid(#[from] SceneError),
}

/// Parses and validates a scene document.
pub fn parse_scene(json: &str) -> Result<Scene, SceneIoError> {
    let value: serde_json::Value = serde_json::from_str(json).map_err(|e| SceneIoError::Parse {
        field: ".".into(),
        message: e.to_string(),
    })?;
    // check the version before the schema, so future documents get a clear error
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        Some(v) => return Err(SceneIoError::Version(v.min(u32::MAX as u64) as u32)),
        None => {
            return Err(SceneIoError::Parse {
                field: "format_version".into(),
                message: "missing or not an integer".into(),
            })
        }
    }
    let doc: SceneDocument =
        serde_path_to_error::deserialize(value).map_err(|e| SceneIoError::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    doc.into_scene()
}

pub fn scene_to_json(scene: &Scene) -> String {
    serde_json::to_string_pretty(&SceneDocument::from_scene(scene)).expect("scene serializes")
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SceneIoError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_scene(&text)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<(), SceneIoError> {
    let path = path.as_ref();
    let mut text = scene_to_json(scene);
    text.push('\n');
    fs::write(path, text).map_err(|source| SceneIoError::Io {
        path: path.to_owned(),
        source,
    })
}

/// A track an emitter needs that could not be loaded.
#[derive(Debug)]
pub struct AssetProblem {
    pub track: TrackId,
    pub reason: String,
}

/// Loads every asset used by an emitter, resolving paths against `base_dir`.
/// Tracks that fail to load are reported and left out of the store.
pub fn load_assets(
    scene: &Scene,
    base_dir: &Path,
    sample_rate: u32,
) -> (TrackStore, Vec<AssetProblem>) {
    let mut store = TrackStore::new();
    let mut problems = Vec::new();
    for emitter in scene.emitters() {
        let track = &emitter.track;
        if store.contains(track.as_str()) || problems.iter().any(|p: &AssetProblem| p.track == *track) {
            continue;
        }
        let Some(rel) = scene.assets().get(track.as_str()) else {
            problems.push(AssetProblem {
                track: track.clone(),
                reason: "not listed in the asset table".into(),
            });
            continue;
        };
        let path = base_dir.join(rel);
        match load_wav(&path, sample_rate) {
            Ok(wav) => store.insert(track.clone(), Arc::from(wav.samples)),
            Err(err) => problems.push(AssetProblem {
                track: track.clone(),
                reason: describe(&path, &err),
            }),
        }
    }
    (store, problems)
}

fn describe(path: &Path, err: &WavError) -> String {
    format!("{}: {err}", path.display())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"format_version": 1, "receptor": {"x": 1, "y": 2}}"#;

    #[test]
    fn minimal_document_is_an_empty_scene() {
        let scene = parse_scene(MINIMAL).unwrap();
        assert!(scene.emitters().is_empty());
        assert_eq!(scene.receptor().pos, crate::Vec2::new(1.0, 2.0));
        assert_eq!(scene.c(), DEFAULT_C);
    }

    #[test]
    fn zero_c_rejected() {
        let err = parse_scene(r#"{"format_version": 1, "c": 0, "receptor": {"x": 0, "y": 0}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("c must be > 0"), "{err}");
    }

    #[test]
    fn dangling_material_rejected_with_wall_id() {
        let json = r#"{"format_version": 1, "receptor": {"x": 0, "y": 0},
            "walls": [{"id": "north", "material_id": "glass", "vertices": [[0,0],[1,0]]}]}"#;
        let err = parse_scene(json).unwrap_err();
        assert!(err.to_string().contains("walls[0].material_id"), "{err}");
        assert!(err.to_string().contains("'north'"), "{err}");
    }

    #[test]
    fn version_checked() {
        let err = parse_scene(r#"{"format_version": 2, "receptor": {"x": 0, "y": 0}}"#).unwrap_err();
        assert!(matches!(err, SceneIoError::Version(2)));
    }

    #[test]
    fn parse_errors_carry_field_path() {
        let json = r#"{"format_version": 1, "receptor": {"x": 0, "y": 0},
            "emitters": [{"id": "a", "x": 0, "y": 0, "track": "t"}, {"id": "b", "x": "far", "y": 0, "track": "t"}]}"#;
        match parse_scene(json).unwrap_err() {
            SceneIoError::Parse { field, .. } => assert!(field.starts_with("emitters[1]"), "{field}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_fields_survive_rewrite() {
        let json = r#"{"format_version": 1, "receptor": {"x": 0, "y": 0}, "future": {"a": [1, 2]}}"#;
        let scene = parse_scene(json).unwrap();
        let again = parse_scene(&scene_to_json(&scene)).unwrap();
        assert_eq!(again.extra()["future"], serde_json::json!({"a": [1, 2]}));
        assert_eq!(again, scene);
    }

    #[test]
    fn nine_digit_positions_round_trip() {
        let json = r#"{"format_version": 1, "receptor": {"x": 1.234567891, "y": -9.87654321}}"#;
        let scene = parse_scene(json).unwrap();
        let text = scene_to_json(&scene);
        assert!(text.contains("1.234567891"), "{text}");
        assert_eq!(parse_scene(&text).unwrap(), scene);
    }
}
