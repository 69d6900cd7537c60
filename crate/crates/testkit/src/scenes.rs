//! Scene fixtures: hand-built scenes and a seeded random generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonospace_core::dsp::{EffectKind, EffectSpec};
use sonospace_core::geometry::Vec2;
use sonospace_core::scene::{BarrierWeighting, Emitter, Material, Receptor, SceneParts, Wall};
use sonospace_core::Scene;

/// One Gain/Gain material over the barrier (0,0)-(2,0), emitter at (1,2),
/// receptor at (1,1), c = 0.5, d = 1. One barrier, seen perpendicularly
/// from both nodes on the same side.
pub fn single_barrier_scene() -> Scene {
    Scene::new(SceneParts {
        emitters: vec![Emitter::new("e1", Vec2::new(1.0, 2.0), "t1")],
        receptor: Receptor {
            pos: Vec2::new(1.0, 1.0),
        },
        walls: vec![Wall::new(
            "w1",
            "m1",
            vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)],
        )],
        materials: vec![Material::new(
            "m1",
            EffectSpec::Gain { g: 1.0 },
            EffectSpec::Gain { g: 1.0 },
        )],
        max_segment_length: 2.0,
        ..SceneParts::default()
    })
    .expect("valid fixture")
}

/// One emitter and a straight wall cut into `barriers` pieces, between the
/// emitter and the receptor.
pub fn barrier_scene(barriers: usize) -> Scene {
    let (y0, y1) = (0.5, 9.5);
    Scene::new(SceneParts {
        emitters: vec![Emitter::new("e1", Vec2::new(2.0, 4.0), "t1")],
        receptor: Receptor {
            pos: Vec2::new(7.0, 5.0),
        },
        walls: vec![Wall::new(
            "w1",
            "m1",
            vec![Vec2::new(4.5, y0), Vec2::new(4.5, y1)],
        )],
        materials: vec![Material::new(
            "m1",
            EffectSpec::LowPass { cutoff: 800.0 },
            EffectSpec::LowPass { cutoff: 400.0 },
        )],
        // Slightly above len/n so that ceil() lands on n despite rounding.
        max_segment_length: (y1 - y0) / barriers as f64 * (1.0 + 1e-9),
        ..SceneParts::default()
    })
    .expect("valid fixture")
}

#[derive(Clone, Copy, Debug)]
pub struct SceneLimits {
    pub max_emitters: usize,
    pub max_barriers: usize,
    pub max_materials: usize,
}

impl Default for SceneLimits {
    fn default() -> Self {
        Self {
            max_emitters: 8,
            max_barriers: 200,
            max_materials: 4,
        }
    }
}

pub fn random_effect(rng: &mut impl Rng) -> EffectSpec {
    let kinds = [
        EffectKind::Gain,
        EffectKind::Delay,
        EffectKind::Phaser,
        EffectKind::LowPass,
    ];
    let mut spec = kinds[rng.random_range(0..kinds.len())].default_spec();
    for info in spec.kind().params() {
        let value = rng.random_range(info.min..=info.max);
        spec.set(info.name, value).expect("value inside legal range");
    }
    spec
}

fn point(rng: &mut impl Rng) -> Vec2 {
    Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))
}

/// A random scene within `limits`. A share of nodes is placed on purpose
/// at awkward spots: on a wall's supporting line, on a barrier midpoint,
/// on top of the receptor or within the minimum distance of it.
pub fn random_scene(seed: u64, limits: SceneLimits) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_materials = rng.random_range(1..=limits.max_materials);
    let materials: Vec<Material> = (0..n_materials)
        .map(|i| {
            let r = random_effect(&mut rng);
            let t = random_effect(&mut rng);
            Material::new(format!("m{i}"), r, t)
        })
        .collect();

    let n_walls = rng.random_range(0..=4usize);
    let mut walls = Vec::new();
    for i in 0..n_walls {
        let n_vertices = rng.random_range(2..=4usize);
        let mut vertices = vec![point(&mut rng)];
        while vertices.len() < n_vertices {
            let v = if rng.random_bool(0.3) {
                // Axis-aligned edge so that nodes can sit exactly on its line.
                let last = *vertices.last().unwrap();
                if rng.random_bool(0.5) {
                    Vec2::new(rng.random_range(0.0..10.0), last.y)
                } else {
                    Vec2::new(last.x, rng.random_range(0.0..10.0))
                }
            } else {
                point(&mut rng)
            };
            if v != *vertices.last().unwrap() {
                vertices.push(v);
            }
        }
        let material = materials[rng.random_range(0..n_materials)].id.clone();
        walls.push(Wall::new(format!("w{i}"), material, vertices));
    }

    let receptor = Receptor {
        pos: point(&mut rng),
    };
    let n_emitters = rng.random_range(1..=limits.max_emitters);
    let mut emitters = Vec::new();
    for i in 0..n_emitters {
        let pos = match rng.random_range(0..10) {
            0 => receptor.pos,
            1 => Vec2::new(receptor.pos.x + 0.05, receptor.pos.y),
            2 | 3 if !walls.is_empty() => {
                let wall = &walls[rng.random_range(0..walls.len())];
                let a = wall.vertices[0];
                let b = wall.vertices[1];
                if rng.random_bool(0.5) {
                    // On the first edge's supporting line, possibly past its end.
                    let t = rng.random_range(-0.5..1.5);
                    Vec2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
                } else {
                    Vec2::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
                }
            }
            _ => point(&mut rng),
        };
        emitters.push(Emitter::new(format!("e{i}"), pos, format!("t{}", i % 3)));
    }

    let total_edges: usize = walls.iter().map(|w| w.vertices.len() - 1).sum();
    let total_len: f64 = walls.iter().map(Wall::polyline_length).sum();
    let budget = rng.random_range(total_edges.max(1)..=limits.max_barriers.max(total_edges.max(1)));
    // Each edge rounds up by at most one piece.
    let mut max_segment_length = if total_len > 0.0 {
        total_len / budget.saturating_sub(total_edges).max(1) as f64
    } else {
        0.25
    };

    loop {
        let scene = Scene::new(SceneParts {
            emitters: emitters.clone(),
            receptor,
            walls: walls.clone(),
            materials: materials.clone(),
            c: rng.random_range(0.05..2.0),
            d: rng.random_range(0.0..=1.0),
            max_segment_length,
            weighting: if rng.random_bool(0.2) {
                BarrierWeighting::LengthWeighted
            } else {
                BarrierWeighting::Unit
            },
            ..SceneParts::default()
        })
        .expect("generator builds valid scenes");
        if scene.barrier_count() <= limits.max_barriers {
            return scene;
        }
        max_segment_length *= 1.5;
    }
}

/// A random scene exercising every serialized field: asset table, emitter
/// gain, looping and offsets, parameter maps and unknown top-level fields.
pub fn decorated_scene(seed: u64) -> Scene {
    use sonospace_core::dsp::{MixSource, ParamMap};

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let mut parts = random_scene(seed, SceneLimits::default()).to_parts();
    for e in &mut parts.emitters {
        e.gain = rng.random_range(0.0..2.0);
        e.looping = rng.random_bool(0.5);
        e.start_offset = rng.random_range(0.0..5.0);
        parts
            .assets
            .insert(e.track.clone(), format!("audio/{}.wav", e.track));
    }
    for m in &mut parts.materials {
        if rng.random_bool(0.5) {
            let info = &m.reflection.kind().params().first().copied();
            if let Some(info) = info {
                let lo = rng.random_range(info.min..=info.max);
                let hi = rng.random_range(lo..=info.max);
                m.param_map = Some(ParamMap {
                    target: info.name.to_string(),
                    source: if rng.random_bool(0.5) {
                        MixSource::MaterialMix
                    } else {
                        MixSource::GlobalMix
                    },
                    range: [lo, hi],
                });
            }
        }
    }
    if rng.random_bool(0.5) {
        parts.extra.insert(
            "ui".into(),
            serde_json::json!({"zoom": rng.random_range(0.5..4.0), "grid": true}),
        );
    }
    Scene::new(parts).expect("decorated scene is valid")
}
