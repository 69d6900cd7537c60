//! Brute-force reference parameterization.
//!
//! Shares no code with the engine beyond the scene accessors: it splits the
//! walls itself, measures |sin| as |u x v| / (|u| |v|), tests sides with the
//! left normal of each barrier and re-sums every barrier once per material.

use sonospace_core::geometry::{Vec2, MIN_DISTANCE, SIDE_EPSILON};
use sonospace_core::param::{EmitterMix, MaterialMix, ParamSnapshot, REFERENCE_SEGMENT_LENGTH};
use sonospace_core::scene::BarrierWeighting;
use sonospace_core::Scene;

#[derive(Clone, Debug)]
pub struct RefBarrier {
    pub p0: Vec2,
    pub p1: Vec2,
    pub material: String,
}

/// Each polyline edge cut into `ceil(len / max_len)` equal pieces.
pub fn split_walls(scene: &Scene) -> Vec<RefBarrier> {
    let max_len = scene.max_segment_length();
    let mut out = Vec::new();
    for wall in scene.walls() {
        for edge in wall.vertices.windows(2) {
            let (a, b) = (edge[0], edge[1]);
            // Piece counts are discontinuous in the length, so this must
            // round exactly like the scene model: hypot, not a bare sqrt.
            let len = (b.x - a.x).hypot(b.y - a.y);
            if len == 0.0 {
                continue;
            }
            let n = (len / max_len).ceil().max(1.0) as usize;
            let point = |k: usize| {
                if k == n {
                    b
                } else {
                    let t = k as f64 / n as f64;
                    Vec2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
                }
            };
            for k in 0..n {
                out.push(RefBarrier {
                    p0: point(k),
                    p1: point(k + 1),
                    material: wall.material_id.to_string(),
                });
            }
        }
    }
    out
}

fn length(v: Vec2) -> f64 {
    (v.x * v.x + v.y * v.y).sqrt()
}

/// 1 / max(dist, 0.1) times |sin| of the incidence angle.
pub fn intensity(b: &RefBarrier, node: Vec2) -> f64 {
    let u = Vec2::new(b.p1.x - b.p0.x, b.p1.y - b.p0.y);
    let mid = Vec2::new((b.p0.x + b.p1.x) / 2.0, (b.p0.y + b.p1.y) / 2.0);
    let v = Vec2::new(node.x - mid.x, node.y - mid.y);
    let dist = length(v);
    let sin = if dist == 0.0 {
        1.0
    } else {
        (u.x * v.y - u.y * v.x).abs() / (length(u) * dist)
    };
    sin / dist.max(MIN_DISTANCE)
}

/// -1, 0 or 1 by the signed perpendicular distance along the left normal.
pub fn side(b: &RefBarrier, node: Vec2) -> i8 {
    let u = Vec2::new(b.p1.x - b.p0.x, b.p1.y - b.p0.y);
    let normal = Vec2::new(-u.y, u.x);
    let offset = (normal.x * (node.x - b.p0.x) + normal.y * (node.y - b.p0.y)) / length(u);
    if offset.abs() <= SIDE_EPSILON {
        0
    } else if offset > 0.0 {
        1
    } else {
        -1
    }
}

pub fn parameterize(scene: &Scene) -> ParamSnapshot {
    let barriers = split_walls(scene);
    let r = scene.receptor().pos;
    let weight = |b: &RefBarrier| match scene.weighting() {
        BarrierWeighting::Unit => 1.0,
        BarrierWeighting::LengthWeighted => length(Vec2::new(b.p1.x - b.p0.x, b.p1.y - b.p0.y)) / REFERENCE_SEGMENT_LENGTH,
    };
    let mut per_emitter = Vec::new();
    for e in scene.emitters() {
        let sums = |material: Option<&str>| {
            let (mut rs, mut ts) = (0.0, 0.0);
            for b in &barriers {
                if material.is_some_and(|m| m != b.material) {
                    continue;
                }
                let (se, sr) = (side(b, e.pos), side(b, r));
                if se == 0 || sr == 0 {
                    continue;
                }
                let ti = weight(b) * intensity(b, e.pos) * intensity(b, r);
                if se == sr {
                    rs += ti;
                } else {
                    ts += ti;
                }
            }
            (rs, ts)
        };
        let (r_total, t_total) = sums(None);
        let materials = scene
            .materials()
            .iter()
            .map(|m| {
                let (rs, ts) = sums(Some(m.id.as_str()));
                MaterialMix {
                    material_id: m.id.clone(),
                    r_mix: if r_total > 0.0 { rs / r_total } else { 0.0 },
                    t_mix: if t_total > 0.0 { ts / t_total } else { 0.0 },
                }
            })
            .collect();
        let all = r_total + t_total;
        let c = scene.c();
        let (r_mix, t_mix) = if all > 0.0 {
            (
                r_total / all * (r_total / (r_total + c)),
                t_total / all * (t_total / (t_total + c)),
            )
        } else {
            (0.0, 0.0)
        };
        let dist = length(Vec2::new(e.pos.x - r.x, e.pos.y - r.y)).max(MIN_DISTANCE);
        let d_mix = ((1.0 - (r_mix + t_mix) * scene.d()) / dist).max(0.0);
        per_emitter.push(EmitterMix {
            emitter_id: e.id.clone(),
            d_mix,
            r_mix,
            t_mix,
            r_total,
            t_total,
            materials,
        });
    }
    ParamSnapshot {
        revision: scene.revision(),
        per_emitter,
    }
}
