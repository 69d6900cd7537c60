//! The scene graph: emitters, the receptor, walls and their materials.
//!
//! A [`Scene`] is an immutable revision. Edits go through
//! [`Scene::apply`], which validates the result and returns a new revision;
//! a rejected edit leaves the original untouched. Walls are stored already
//! tessellated and shared between revisions, so only walls an edit touches
//! are re-tessellated.

mod mutation;
mod tessellate;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{EffectSpec, ParamMap};
use crate::geometry::{Barrier, Vec2};
use crate::ids::{EmitterId, MaterialId, TrackId, WallId};

pub use mutation::SceneMutation;
pub use tessellate::tessellate;

pub const DEFAULT_C: f64 = 0.5;
pub const DEFAULT_D: f64 = 1.0;
pub const DEFAULT_MAX_SEGMENT_LENGTH: f64 = 0.25;
/// Side of the default square room, in world units.
pub const DEFAULT_ROOM_SIZE: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Emitter {
    pub id: EmitterId,
    #[serde(flatten)]
    pub pos: Vec2,
    pub track: TrackId,
    #[serde(default = "unit_gain")]
    pub gain: f64,
    #[serde(rename = "loop", default)]
    pub looping: bool,
    #[serde(default)]
    pub start_offset: f64,
}

fn unit_gain() -> f64 {
    1.0
}

impl Emitter {
    pub fn new(id: impl Into<EmitterId>, pos: Vec2, track: impl Into<TrackId>) -> Self {
        Self {
            id: id.into(),
            pos,
            track: track.into(),
            gain: 1.0,
            looping: false,
            start_offset: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Receptor {
    #[serde(flatten)]
    pub pos: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub id: MaterialId,
    #[serde(rename = "r_filter")]
    pub reflection: EffectSpec,
    #[serde(rename = "t_filter")]
    pub transmission: EffectSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_map: Option<ParamMap>,
}

impl Material {
    pub fn new(id: impl Into<MaterialId>, reflection: EffectSpec, transmission: EffectSpec) -> Self {
        Self {
            id: id.into(),
            reflection,
            transmission,
            param_map: None,
        }
    }
}

/// An open polyline drawn with one material.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub id: WallId,
    pub material_id: MaterialId,
    #[serde(with = "vertex_list")]
    pub vertices: Vec<Vec2>,
}

impl Wall {
    pub fn new(id: impl Into<WallId>, material_id: impl Into<MaterialId>, vertices: Vec<Vec2>) -> Self {
        Self {
            id: id.into(),
            material_id: material_id.into(),
            vertices,
        }
    }

    pub fn polyline_length(&self) -> f64 {
        self.vertices.windows(2).map(|e| e[0].distance(e[1])).sum()
    }
}

/// Serializes vertices as `[[x, y], ...]`.
pub(crate) mod vertex_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geometry::Vec2;

    pub fn serialize<S: Serializer>(v: &[Vec2], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec2>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
    }
}

/// How much each barrier's intensity counts toward the material sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierWeighting {
    /// Every barrier counts once.
    #[default]
    Unit,
    /// Barriers count in proportion to their length, so totals do not depend
    /// on how finely walls are tessellated.
    LengthWeighted,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SceneError {
    #[error("unknown id: {kind} '{id}'")]
    UnknownId { kind: &'static str, id: String },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

impl SceneError {
    fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        SceneError::Invalid {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// A wall together with its barrier chain.
#[derive(Clone, Debug, PartialEq)]
pub struct TessellatedWall {
    pub wall: Wall,
    pub barriers: Vec<Barrier>,
}

impl TessellatedWall {
    fn new(wall: Wall, max_len: f64) -> Self {
        let barriers = tessellate(&wall, max_len);
        Self { wall, barriers }
    }
}

/// Everything a scene is made of, before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneParts {
    pub emitters: Vec<Emitter>,
    pub receptor: Receptor,
    pub walls: Vec<Wall>,
    pub materials: Vec<Material>,
    pub c: f64,
    pub d: f64,
    pub max_segment_length: f64,
    pub weighting: BarrierWeighting,
    pub assets: BTreeMap<TrackId, String>,
    /// Unrecognized top-level document fields, kept for rewriting.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Default for SceneParts {
    fn default() -> Self {
        let half = DEFAULT_ROOM_SIZE / 2.0;
        Self {
            emitters: Vec::new(),
            receptor: Receptor {
                pos: Vec2::new(half, half),
            },
            walls: Vec::new(),
            materials: Vec::new(),
            c: DEFAULT_C,
            d: DEFAULT_D,
            max_segment_length: DEFAULT_MAX_SEGMENT_LENGTH,
            weighting: BarrierWeighting::Unit,
            assets: BTreeMap::new(),
            extra: serde_json::Map::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    revision: u64,
    emitters: Vec<Emitter>,
    receptor: Receptor,
    walls: Vec<Arc<TessellatedWall>>,
    materials: Vec<Material>,
    c: f64,
    d: f64,
    max_segment_length: f64,
    weighting: BarrierWeighting,
    assets: BTreeMap<TrackId, String>,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Default for Scene {
    fn default() -> Self {
        Scene::new(SceneParts::default()).expect("default scene is valid")
    }
}

impl Scene {
    /// Validates `parts` and tessellates every wall. The result is revision 0.
    pub fn new(parts: SceneParts) -> Result<Self, SceneError> {
        check_constants(parts.c, parts.d, parts.max_segment_length)?;
        let max_len = parts.max_segment_length;
        let scene = Scene {
            revision: 0,
            emitters: parts.emitters,
            receptor: parts.receptor,
            walls: parts
                .walls
                .into_iter()
                .map(|w| Arc::new(TessellatedWall::new(w, max_len)))
                .collect(),
            materials: parts.materials,
            c: parts.c,
            d: parts.d,
            max_segment_length: max_len,
            weighting: parts.weighting,
            assets: parts.assets,
            extra: parts.extra,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_parts(&self) -> SceneParts {
        SceneParts {
            emitters: self.emitters.clone(),
            receptor: self.receptor,
            walls: self.walls().cloned().collect(),
            materials: self.materials.clone(),
            c: self.c,
            d: self.d,
            max_segment_length: self.max_segment_length,
            weighting: self.weighting,
            assets: self.assets.clone(),
            extra: self.extra.clone(),
        }
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn emitters(&self) -> &[Emitter] {
        &self.emitters
    }

    pub fn emitter(&self, id: &str) -> Option<&Emitter> {
        self.emitters.iter().find(|e| e.id.as_str() == id)
    }

    pub fn receptor(&self) -> Receptor {
        self.receptor
    }

    pub fn walls(&self) -> impl Iterator<Item = &Wall> + '_ {
        self.walls.iter().map(|t| &t.wall)
    }

    pub fn tessellated_walls(&self) -> &[Arc<TessellatedWall>] {
        &self.walls
    }

    pub fn wall(&self, id: &str) -> Option<&Wall> {
        self.walls().find(|w| w.id.as_str() == id)
    }

    /// Every barrier in the scene, wall by wall.
    pub fn barriers(&self) -> impl Iterator<Item = &Barrier> + '_ {
        self.walls.iter().flat_map(|t| t.barriers.iter())
    }

    pub fn barrier_count(&self) -> usize {
        self.walls.iter().map(|t| t.barriers.len()).sum()
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn material(&self, id: &str) -> Option<&Material> {
        self.materials.iter().find(|m| m.id.as_str() == id)
    }

    pub fn material_index(&self, id: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.id.as_str() == id)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn max_segment_length(&self) -> f64 {
        self.max_segment_length
    }

    pub fn weighting(&self) -> BarrierWeighting {
        self.weighting
    }

    pub fn assets(&self) -> &BTreeMap<TrackId, String> {
        &self.assets
    }

    pub fn extra(&self) -> &serde_json::Map<String, serde_json::Value> {
        &self.extra
    }

    /// Applies one edit, returning the next revision.
    pub fn apply(&self, mutation: &SceneMutation) -> Result<Scene, SceneError> {
        let mut next = self.clone();
        mutation.apply_to(&mut next)?;
        next.validate()?;
        next.revision = self.revision + 1;
        Ok(next)
    }

    /// Same content with a different revision number. Used when a freshly
    /// loaded scene replaces a live one and revisions must keep increasing.
    pub fn with_revision(mut self, revision: u64) -> Scene {
        self.revision = revision;
        self
    }

    fn validate(&self) -> Result<(), SceneError> {
        check_constants(self.c, self.d, self.max_segment_length)?;
        if !self.receptor.pos.is_finite() {
            return Err(SceneError::invalid("receptor", "position must be finite"));
        }

        let mut seen = HashSet::new();
        for (i, e) in self.emitters.iter().enumerate() {
            let path = || format!("emitters[{i}]");
            if !seen.insert(e.id.as_str()) {
                return Err(SceneError::invalid(path() + ".id", format!("duplicate emitter id '{}'", e.id)));
            }
            if !e.pos.is_finite() {
                return Err(SceneError::invalid(path(), format!("emitter '{}' position must be finite", e.id)));
            }
            if !(e.gain.is_finite() && e.gain >= 0.0) {
                return Err(SceneError::invalid(path() + ".gain", "gain must be finite and >= 0"));
            }
            if !(e.start_offset.is_finite() && e.start_offset >= 0.0) {
                return Err(SceneError::invalid(path() + ".start_offset", "start_offset must be finite and >= 0"));
            }
        }

        let mut seen = HashSet::new();
        for (i, m) in self.materials.iter().enumerate() {
            let path = format!("materials[{i}]");
            if !seen.insert(m.id.as_str()) {
                return Err(SceneError::invalid(path + ".id", format!("duplicate material id '{}'", m.id)));
            }
            m.reflection
                .validate()
                .map_err(|e| SceneError::invalid(format!("{path}.r_filter"), e.to_string()))?;
            m.transmission
                .validate()
                .map_err(|e| SceneError::invalid(format!("{path}.t_filter"), e.to_string()))?;
            if let Some(map) = &m.param_map {
                let [lo, hi] = map.range;
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(SceneError::invalid(path + ".param_map.range", "range must be finite with lo <= hi"));
                }
                let known = m.reflection.get(&map.target).is_some() || m.transmission.get(&map.target).is_some();
                if !known {
                    return Err(SceneError::invalid(
                        path + ".param_map.target",
                        format!("'{}' is not a parameter of material '{}' effects", map.target, m.id),
                    ));
                }
            }
        }

        let mut seen = HashSet::new();
        for (i, t) in self.walls.iter().enumerate() {
            let w = &t.wall;
            let path = format!("walls[{i}]");
            if !seen.insert(w.id.as_str()) {
                return Err(SceneError::invalid(path + ".id", format!("duplicate wall id '{}'", w.id)));
            }
            if self.material(w.material_id.as_str()).is_none() {
                return Err(SceneError::invalid(
                    path + ".material_id",
                    format!("wall '{}' references unknown material '{}'", w.id, w.material_id),
                ));
            }
            if w.vertices.len() < 2 {
                return Err(SceneError::invalid(path + ".vertices", format!("wall '{}' needs at least 2 vertices", w.id)));
            }
            if let Some(k) = w.vertices.iter().position(|v| !v.is_finite()) {
                return Err(SceneError::invalid(format!("{path}.vertices[{k}]"), "vertex must be finite"));
            }
            if let Some(k) = w.vertices.windows(2).position(|e| e[0] == e[1]) {
                return Err(SceneError::invalid(
                    format!("{path}.vertices[{}]", k + 1),
                    format!("wall '{}' repeats a vertex", w.id),
                ));
            }
        }

        for (track, rel) in &self.assets {
            if Path::new(rel).is_absolute() {
                return Err(SceneError::invalid(
                    format!("assets.{track}"),
                    "asset paths must be relative to the scene file",
                ));
            }
        }
        Ok(())
    }
}

fn check_constants(c: f64, d: f64, max_segment_length: f64) -> Result<(), SceneError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(SceneError::invalid("c", "c must be > 0"));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(SceneError::invalid("d", "d must be in [0, 1]"));
    }
    if !(max_segment_length.is_finite() && max_segment_length > 0.0) {
        return Err(SceneError::invalid("max_segment_length", "max_segment_length must be > 0"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_parts() -> SceneParts {
        SceneParts {
            emitters: vec![Emitter::new("e1", Vec2::new(1.0, 1.0), "t1")],
            materials: vec![Material::new("brick", EffectSpec::default(), EffectSpec::LowPass { cutoff: 800.0 })],
            walls: vec![Wall::new("w1", "brick", vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)])],
            ..SceneParts::default()
        }
    }

    #[test]
    fn new_tessellates_walls() {
        let scene = Scene::new(sample_parts()).unwrap();
        assert_eq!(scene.barrier_count(), 8);
        assert_eq!(scene.revision(), 0);
    }

    #[test]
    fn rejects_bad_constants() {
        let err = Scene::new(SceneParts { c: 0.0, ..sample_parts() }).unwrap_err();
        assert_eq!(err.to_string(), "c: c must be > 0");
        assert!(Scene::new(SceneParts { d: 1.5, ..sample_parts() }).is_err());
        assert!(Scene::new(SceneParts {
            max_segment_length: 0.0,
            ..sample_parts()
        })
        .is_err());
    }

    #[test]
    fn dangling_material_names_the_wall() {
        let mut parts = sample_parts();
        parts.walls[0].material_id = "glass".into();
        let err = Scene::new(parts).unwrap_err();
        assert!(matches!(&err, SceneError::Invalid { path, .. } if path == "walls[0].material_id"));
        assert!(err.to_string().contains("wall 'w1'"));
    }

    #[test]
    fn rejects_duplicate_ids_and_repeated_vertices() {
        let mut parts = sample_parts();
        parts.emitters.push(parts.emitters[0].clone());
        assert!(Scene::new(parts).is_err());

        let mut parts = sample_parts();
        parts.walls[0].vertices.push(Vec2::new(2.0, 0.0));
        assert!(Scene::new(parts).unwrap_err().to_string().contains("repeats a vertex"));
    }

    #[test]
    fn param_map_target_must_exist() {
        let mut parts = sample_parts();
        parts.materials[0].param_map = Some(ParamMap {
            target: "time".into(),
            source: crate::dsp::MixSource::MaterialMix,
            range: [0.0, 1.0],
        });
        assert!(Scene::new(parts.clone()).is_err());
        parts.materials[0].param_map.as_mut().unwrap().target = "cutoff".into();
        assert!(Scene::new(parts).is_ok());
    }

    #[test]
    fn absolute_asset_paths_rejected() {
        let mut parts = sample_parts();
        parts.assets.insert("t1".into(), "/tmp/a.wav".into());
        assert!(Scene::new(parts).is_err());
    }
}
