use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Emitter, Material, Scene, SceneError, TessellatedWall, Wall};
use crate::geometry::Vec2;
use crate::ids::{EmitterId, MaterialId, WallId};

/// One edit to a scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SceneMutation {
    AddEmitter {
        emitter: Emitter,
    },
    /// Replaces the emitter with the same id.
    UpdateEmitter {
        emitter: Emitter,
    },
    RemoveEmitter {
        id: EmitterId,
    },
    MoveEmitter {
        id: EmitterId,
        x: f64,
        y: f64,
    },
    MoveReceptor {
        x: f64,
        y: f64,
    },
    /// Adds a wall; a fresh id is generated when none is given.
    AddWall {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<WallId>,
        material_id: MaterialId,
        #[serde(with = "super::vertex_list")]
        vertices: Vec<Vec2>,
    },
    RemoveWall {
        id: WallId,
    },
    SetWallMaterial {
        id: WallId,
        material_id: MaterialId,
    },
    AddMaterial {
        material: Material,
    },
    /// Replaces the material with the same id.
    UpdateMaterial {
        material: Material,
    },
    /// Fails while any wall still uses the material.
    RemoveMaterial {
        id: MaterialId,
    },
    SetConstants {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<f64>,
    },
    /// Re-tessellates every wall.
    SetMaxSegmentLength {
        value: f64,
    },
    SetLengthWeighted {
        enabled: bool,
    },
}

fn unknown(kind: &'static str, id: &str) -> SceneError {
    SceneError::UnknownId {
        kind,
        id: id.to_owned(),
    }
}

impl SceneMutation {
    pub(super) fn apply_to(&self, scene: &mut Scene) -> Result<(), SceneError> {
        let max_len = scene.max_segment_length;
        match self {
            SceneMutation::AddEmitter { emitter } => scene.emitters.push(emitter.clone()),
            SceneMutation::UpdateEmitter { emitter } => {
                let slot = emitter_mut(scene, emitter.id.as_str())?;
                *slot = emitter.clone();
            }
            SceneMutation::RemoveEmitter { id } => {
                let i = scene
                    .emitters
                    .iter()
                    .position(|e| e.id == *id)
                    .ok_or_else(|| unknown("emitter", id.as_str()))?;
                scene.emitters.remove(i);
            }
            SceneMutation::MoveEmitter { id, x, y } => {
                emitter_mut(scene, id.as_str())?.pos = Vec2::new(*x, *y);
            }
            SceneMutation::MoveReceptor { x, y } => scene.receptor.pos = Vec2::new(*x, *y),
            SceneMutation::AddWall {
                id,
                material_id,
                vertices,
            } => {
                let id = id.clone().unwrap_or_else(|| fresh_wall_id(scene));
                let wall = Wall::new(id, material_id.clone(), vertices.clone());
                // tessellation assumes distinct consecutive vertices, so check first
                if wall.vertices.len() < 2 || wall.vertices.windows(2).any(|e| e[0] == e[1]) {
                    return Err(SceneError::invalid(
                        "vertices",
                        "a wall needs at least 2 vertices with no repeats",
                    ));
                }
                scene.walls.push(Arc::new(TessellatedWall::new(wall, max_len)));
            }
            SceneMutation::RemoveWall { id } => {
                let i = wall_index(scene, id.as_str())?;
                scene.walls.remove(i);
            }
            SceneMutation::SetWallMaterial { id, material_id } => {
                let i = wall_index(scene, id.as_str())?;
                let mut wall = scene.walls[i].wall.clone();
                wall.material_id = material_id.clone();
                scene.walls[i] = Arc::new(TessellatedWall::new(wall, max_len));
            }
            SceneMutation::AddMaterial { material } => scene.materials.push(material.clone()),
            SceneMutation::UpdateMaterial { material } => {
                let slot = scene
                    .materials
                    .iter_mut()
                    .find(|m| m.id == material.id)
                    .ok_or_else(|| unknown("material", material.id.as_str()))?;
                *slot = material.clone();
            }
            SceneMutation::RemoveMaterial { id } => {
                let i = scene
                    .materials
                    .iter()
                    .position(|m| m.id == *id)
                    .ok_or_else(|| unknown("material", id.as_str()))?;
                if let Some(w) = scene.walls().find(|w| w.material_id == *id) {
                    return Err(SceneError::invalid(
                        "material_id",
                        format!("material '{id}' is still used by wall '{}'", w.id),
                    ));
                }
                scene.materials.remove(i);
            }
            SceneMutation::SetConstants { c, d } => {
                if let Some(c) = c {
                    scene.c = *c;
                }
                if let Some(d) = d {
                    scene.d = *d;
                }
            }
            SceneMutation::SetMaxSegmentLength { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(SceneError::invalid(
                        "max_segment_length",
                        "max_segment_length must be > 0",
                    ));
                }
                scene.max_segment_length = *value;
                scene.walls = scene
                    .walls
                    .iter()
                    .map(|t| Arc::new(TessellatedWall::new(t.wall.clone(), *value)))
                    .collect();
            }
            SceneMutation::SetLengthWeighted { enabled } => {
                scene.weighting = if *enabled {
                    super::BarrierWeighting::LengthWeighted
                } else {
                    super::BarrierWeighting::Unit
                };
            }
        }
        Ok(())
    }
}

fn emitter_mut<'a>(scene: &'a mut Scene, id: &str) -> Result<&'a mut Emitter, SceneError> {
    scene
        .emitters
        .iter_mut()
        .find(|e| e.id.as_str() == id)
        .ok_or_else(|| unknown("emitter", id))
}

fn wall_index(scene: &Scene, id: &str) -> Result<usize, SceneError> {
    scene
        .walls
        .iter()
        .position(|t| t.wall.id.as_str() == id)
        .ok_or_else(|| unknown("wall", id))
}

fn fresh_wall_id(scene: &Scene) -> WallId {
    (scene.walls.len() + 1..)
        .map(|n| format!("wall-{n}"))
        .find(|id| scene.wall(id).is_none())
        .map(WallId::from)
        .expect("unbounded search")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::EffectSpec;
    use crate::scene::SceneParts;

    fn scene() -> Scene {
        Scene::new(SceneParts {
            emitters: vec![Emitter::new("e1", Vec2::new(1.0, 1.0), "t1")],
            materials: vec![Material::new("brick", EffectSpec::default(), EffectSpec::default())],
            walls: vec![Wall::new("w1", "brick", vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)])],
            ..SceneParts::default()
        })
        .unwrap()
    }

    #[test]
    fn move_emitter_bumps_revision() {
        let s = scene();
        let next = s
            .apply(&SceneMutation::MoveEmitter {
                id: "e1".into(),
                x: 3.0,
                y: 4.0,
            })
            .unwrap();
        assert_eq!(next.emitter("e1").unwrap().pos, Vec2::new(3.0, 4.0));
        assert_eq!(next.revision(), s.revision() + 1);
    }

    #[test]
    fn unknown_wall_is_rejected() {
        let s = scene();
        let err = s.apply(&SceneMutation::RemoveWall { id: "nope".into() }).unwrap_err();
        assert!(err.to_string().starts_with("unknown id"), "{err}");
        assert_eq!(s.revision(), 0);
    }

    #[test]
    fn add_wall_tessellates_and_shares_untouched_walls() {
        let s = scene();
        let next = s
            .apply(&SceneMutation::AddWall {
                id: None,
                material_id: "brick".into(),
                vertices: vec![Vec2::new(0.0, 2.0), Vec2::new(1.0, 2.0)],
            })
            .unwrap();
        assert_eq!(next.tessellated_walls().len(), 2);
        assert_eq!(next.tessellated_walls()[1].barriers.len(), 4);
        assert_eq!(next.tessellated_walls()[1].wall.id.as_str(), "wall-2");
        assert!(Arc::ptr_eq(&s.tessellated_walls()[0], &next.tessellated_walls()[0]));
    }

    #[test]
    fn invalid_constant_leaves_scene_identical() {
        let s = scene();
        let before = s.clone();
        assert!(s
            .apply(&SceneMutation::SetConstants {
                c: Some(-1.0),
                d: None
            })
            .is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn material_in_use_cannot_be_removed() {
        let s = scene();
        assert!(s.apply(&SceneMutation::RemoveMaterial { id: "brick".into() }).is_err());
        let s = s.apply(&SceneMutation::RemoveWall { id: "w1".into() }).unwrap();
        assert!(s.apply(&SceneMutation::RemoveMaterial { id: "brick".into() }).is_ok());
    }

    #[test]
    fn segment_length_change_retessellates() {
        let s = scene()
            .apply(&SceneMutation::SetMaxSegmentLength { value: 0.1 })
            .unwrap();
        assert_eq!(s.barrier_count(), 10);
    }

    #[test]
    fn json_shape() {
        let m: SceneMutation =
            serde_json::from_str(r#"{"op":"move_emitter","id":"e1","x":3,"y":4}"#).unwrap();
        assert_eq!(
            m,
            SceneMutation::MoveEmitter {
                id: "e1".into(),
                x: 3.0,
                y: 4.0
            }
        );
        let m: SceneMutation = serde_json::from_str(
            r#"{"op":"add_wall","material_id":"brick","vertices":[[0,0],[1,1]]}"#,
        )
        .unwrap();
        assert!(matches!(m, SceneMutation::AddWall { id: None, .. }));
    }
}
