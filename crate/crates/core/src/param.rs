//! Turns scene geometry into per-emitter mix scalars.
//!
//! For each emitter the pass is linear in the number of barriers plus the
//! number of materials:
//!
//! - every barrier gets an emitter intensity `ei = (1/dist) * |sin(angle)|`
//!   and a receptor intensity `ri` computed the same way; `ti = ei * ri`,
//! - `ti` lands in the barrier material's reflected sum when emitter and
//!   receptor are on the same side of the barrier, in its transmitted sum
//!   when they are on opposite sides, and nowhere when either is colinear,
//! - material mixes are each material's share of the path totals,
//! - global wet mixes are `rMix = rT/(rT+tT) * rT/(rT+c)` (and the mirror
//!   image for `tMix`), and the dry mix is `(1/dist(se, r)) * (1 - (rMix+tMix)*d)`.
//!
//! Receptor intensities do not depend on the emitter, so they are computed
//! once per pass.

use serde::{Deserialize, Serialize};

use crate::geometry::{self, Barrier, Side, Vec2};
use crate::ids::{EmitterId, MaterialId};
use crate::scene::{BarrierWeighting, Emitter, Material, Scene, DEFAULT_MAX_SEGMENT_LENGTH};

/// Barrier length that weighs 1 in length-weighted mode.
pub const REFERENCE_SEGMENT_LENGTH: f64 = DEFAULT_MAX_SEGMENT_LENGTH;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    Reflection,
    Transmission,
    /// Emitter or receptor lies on the barrier's line; contributes nothing.
    Colinear,
}

impl Propagation {
    pub fn classify(emitter_side: Side, receptor_side: Side) -> Propagation {
        match (emitter_side, receptor_side) {
            (Side::Colinear, _) | (_, Side::Colinear) => Propagation::Colinear,
            (a, b) if a == b => Propagation::Reflection,
            _ => Propagation::Transmission,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierIntensity {
    pub ei: f64,
    pub ri: f64,
    pub ti: f64,
    pub path: Propagation,
}

/// `(1/dist) * |sin(angle)|` between a barrier and one node.
pub fn node_intensity(b: &Barrier, node: Vec2) -> f64 {
    geometry::angle(b, node).sin().abs() / geometry::dist(b, node)
}

pub fn barrier_weight(b: &Barrier, weighting: BarrierWeighting) -> f64 {
    match weighting {
        BarrierWeighting::Unit => 1.0,
        BarrierWeighting::LengthWeighted => b.length / REFERENCE_SEGMENT_LENGTH,
    }
}

/// Intensities of one barrier for an emitter at `emitter` and the receptor at `receptor`.
/// The barrier weight scales `ei` (and so `ti`) once.
pub fn barrier_intensity(
    b: &Barrier,
    emitter: Vec2,
    receptor: Vec2,
    weighting: BarrierWeighting,
) -> BarrierIntensity {
    let ei = barrier_weight(b, weighting) * node_intensity(b, emitter);
    let ri = node_intensity(b, receptor);
    BarrierIntensity {
        ei,
        ri,
        ti: ei * ri,
        path: Propagation::classify(geometry::side(b, emitter), geometry::side(b, receptor)),
    }
}

/// Reflected and transmitted intensity sums for one emitter, indexed like
/// the scene's material list.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSums {
    pub r_sum: Vec<f64>,
    pub t_sum: Vec<f64>,
    pub r_total: f64,
    pub t_total: f64,
}

impl PathSums {
    fn zeroed(materials: usize) -> Self {
        Self {
            r_sum: vec![0.0; materials],
            t_sum: vec![0.0; materials],
            r_total: 0.0,
            t_total: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialMix {
    pub material_id: MaterialId,
    pub r_mix: f64,
    pub t_mix: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterMix {
    pub emitter_id: EmitterId,
    pub d_mix: f64,
    pub r_mix: f64,
    pub t_mix: f64,
    pub r_total: f64,
    pub t_total: f64,
    /// One entry per scene material, in scene order.
    pub materials: Vec<MaterialMix>,
}

/// Result of one parameterization pass over a scene revision.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamSnapshot {
    pub revision: u64,
    pub per_emitter: Vec<EmitterMix>,
}

impl ParamSnapshot {
    pub fn emitter(&self, id: &str) -> Option<&EmitterMix> {
        self.per_emitter.iter().find(|m| m.emitter_id.as_str() == id)
    }
}

/// Barrier data that depends only on the receptor.
struct ReceptorView<'a> {
    barrier: &'a Barrier,
    material: usize,
    ri: f64,
    side: Side,
    weight: f64,
}

fn receptor_view(scene: &Scene) -> Vec<ReceptorView<'_>> {
    let receptor = scene.receptor().pos;
    let weighting = scene.weighting();
    let mut out = Vec::with_capacity(scene.barrier_count());
    for tw in scene.tessellated_walls() {
        let material = scene
            .material_index(tw.wall.material_id.as_str())
            .expect("validated scene resolves wall materials");
        out.extend(tw.barriers.iter().map(|b| ReceptorView {
            barrier: b,
            material,
            ri: node_intensity(b, receptor),
            side: geometry::side(b, receptor),
            weight: barrier_weight(b, weighting),
        }));
    }
    out
}

fn accumulate_view(view: &[ReceptorView<'_>], materials: usize, emitter: Vec2) -> PathSums {
    let mut sums = PathSums::zeroed(materials);
    for v in view {
        let path = Propagation::classify(geometry::side(v.barrier, emitter), v.side);
        let slot = match path {
            Propagation::Reflection => &mut sums.r_sum[v.material],
            Propagation::Transmission => &mut sums.t_sum[v.material],
            Propagation::Colinear => continue,
        };
        let ti = v.weight * node_intensity(v.barrier, emitter) * v.ri;
        *slot += ti;
        match path {
            Propagation::Reflection => sums.r_total += ti,
            _ => sums.t_total += ti,
        }
    }
    sums
}

/// Single pass over the scene's barriers for one emitter.
pub fn accumulate(scene: &Scene, emitter: &Emitter) -> PathSums {
    accumulate_view(&receptor_view(scene), scene.materials().len(), emitter.pos)
}

fn ratio(part: f64, total: f64) -> f64 {
    if total > 0.0 {
        part / total
    } else {
        0.0
    }
}

pub fn material_mixes(materials: &[Material], sums: &PathSums) -> Vec<MaterialMix> {
    materials
        .iter()
        .enumerate()
        .map(|(i, m)| MaterialMix {
            material_id: m.id.clone(),
            r_mix: ratio(sums.r_sum[i], sums.r_total),
            t_mix: ratio(sums.t_sum[i], sums.t_total),
        })
        .collect()
}

/// Global `(rMix, tMix)`; both are 0 when there is no intensity at all.
pub fn global_mixes(r_total: f64, t_total: f64, c: f64) -> (f64, f64) {
    let total = r_total + t_total;
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let r = (r_total / total) * (r_total / (r_total + c));
    let t = (t_total / total) * (t_total / (t_total + c));
    (r, t)
}

/// Dry mix, clamped at 0. Uses the same distance clamp as barriers.
pub fn dry_mix(emitter: Vec2, receptor: Vec2, r_mix: f64, t_mix: f64, d: f64) -> f64 {
    let dry = (1.0 - (r_mix + t_mix) * d) / geometry::node_distance(emitter, receptor);
    dry.max(0.0)
}

fn emitter_mix(scene: &Scene, emitter: &Emitter, sums: &PathSums) -> EmitterMix {
    let (r_mix, t_mix) = global_mixes(sums.r_total, sums.t_total, scene.c());
    EmitterMix {
        emitter_id: emitter.id.clone(),
        d_mix: dry_mix(emitter.pos, scene.receptor().pos, r_mix, t_mix, scene.d()),
        r_mix,
        t_mix,
        r_total: sums.r_total,
        t_total: sums.t_total,
        materials: material_mixes(scene.materials(), sums),
    }
}

/// Mixes for every emitter of `scene`, in scene order.
pub fn parameterize(scene: &Scene) -> ParamSnapshot {
    let view = receptor_view(scene);
    let materials = scene.materials().len();
    let per_emitter = scene
        .emitters()
        .iter()
        .map(|e| emitter_mix(scene, e, &accumulate_view(&view, materials, e.pos)))
        .collect();
    ParamSnapshot {
        revision: scene.revision(),
        per_emitter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::EffectSpec;
    use crate::scene::{SceneParts, Wall};
    use approx::assert_relative_eq;

    fn barrier() -> Barrier {
        Barrier::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), "m".into(), "w".into())
    }

    #[test]
    fn reflection_example() {
        let i = barrier_intensity(&barrier(), Vec2::new(1.0, 2.0), Vec2::new(1.0, 1.0), BarrierWeighting::Unit);
        assert_relative_eq!(i.ei, 0.5, epsilon = 1e-15);
        assert_relative_eq!(i.ri, 1.0, epsilon = 1e-15);
        assert_relative_eq!(i.ti, 0.5, epsilon = 1e-15);
        assert_eq!(i.path, Propagation::Reflection);
    }

    #[test]
    fn transmission_example() {
        let i = barrier_intensity(&barrier(), Vec2::new(1.0, 2.0), Vec2::new(1.0, -1.0), BarrierWeighting::Unit);
        assert_relative_eq!(i.ti, 0.5, epsilon = 1e-15);
        assert_eq!(i.path, Propagation::Transmission);
    }

    #[test]
    fn colinear_emitter_contributes_nothing() {
        let i = barrier_intensity(&barrier(), Vec2::new(3.0, 0.0), Vec2::new(1.0, 1.0), BarrierWeighting::Unit);
        assert_eq!(i.path, Propagation::Colinear);
    }

    #[test]
    fn length_weighting_scales_ei_once() {
        let b = barrier();
        let unit = barrier_intensity(&b, Vec2::new(1.0, 2.0), Vec2::new(1.0, 1.0), BarrierWeighting::Unit);
        let weighted = barrier_intensity(&b, Vec2::new(1.0, 2.0), Vec2::new(1.0, 1.0), BarrierWeighting::LengthWeighted);
        assert_relative_eq!(weighted.ei, unit.ei * 8.0);
        assert_relative_eq!(weighted.ri, unit.ri);
        assert_relative_eq!(weighted.ti, weighted.ei * weighted.ri);
    }

    fn sums(r_sum: Vec<f64>, t_sum: Vec<f64>) -> PathSums {
        PathSums {
            r_total: r_sum.iter().sum(),
            t_total: t_sum.iter().sum(),
            r_sum,
            t_sum,
        }
    }

    fn materials(n: usize) -> Vec<Material> {
        (0..n)
            .map(|i| Material::new(format!("m{i}"), EffectSpec::default(), EffectSpec::default()))
            .collect()
    }

    #[test]
    fn material_mix_examples() {
        let mixes = material_mixes(&materials(1), &sums(vec![0.5], vec![0.0]));
        assert_eq!((mixes[0].r_mix, mixes[0].t_mix), (1.0, 0.0));

        let mixes = material_mixes(&materials(2), &sums(vec![0.0, 0.0], vec![0.0, 0.0]));
        assert!(mixes.iter().all(|m| m.r_mix == 0.0 && m.t_mix == 0.0));

        let mixes = material_mixes(&materials(2), &sums(vec![0.3, 0.1], vec![0.0, 0.0]));
        assert_relative_eq!(mixes[0].r_mix, 0.75, epsilon = 1e-15);
        assert_relative_eq!(mixes[1].r_mix, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn global_mix_examples() {
        let c = 0.7;
        assert_eq!(global_mixes(c, 0.0, c), (0.5, 0.0));
        let (r, t) = global_mixes(c, c, c);
        assert_relative_eq!(r, 0.25, epsilon = 1e-15);
        assert_relative_eq!(t, 0.25, epsilon = 1e-15);
        assert_eq!(global_mixes(0.0, 0.0, c), (0.0, 0.0));
        // values evaluated independently: (5/7)*(1/2) and (2/7)^2
        let (r, t) = global_mixes(0.5, 0.2, 0.5);
        assert_relative_eq!(r, 0.357142857142857, epsilon = 1e-12);
        assert_relative_eq!(t, 0.0816326530612245, epsilon = 1e-12);
    }

    #[test]
    fn dry_mix_examples() {
        let o = Vec2::new(0.0, 0.0);
        assert_relative_eq!(dry_mix(o, Vec2::new(2.0, 0.0), 0.3, 0.2, 1.0), 0.25);
        assert_eq!(dry_mix(o, Vec2::new(1.0, 0.0), 0.0, 0.0, 1.0), 1.0);
        assert_eq!(dry_mix(o, Vec2::new(0.05, 0.0), 0.0, 0.0, 1.0), 10.0);
    }

    fn single_barrier_scene(receptor: Vec2) -> Scene {
        Scene::new(SceneParts {
            emitters: vec![crate::scene::Emitter::new("se", Vec2::new(1.0, 2.0), "t")],
            receptor: crate::scene::Receptor { pos: receptor },
            materials: materials(2),
            walls: vec![Wall::new("w", "m0", vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)])],
            max_segment_length: 2.0,
            c: 0.5,
            d: 1.0,
            ..SceneParts::default()
        })
        .unwrap()
    }

    #[test]
    fn accumulate_examples() {
        let scene = Scene::new(SceneParts {
            emitters: vec![crate::scene::Emitter::new("se", Vec2::new(1.0, 2.0), "t")],
            ..SceneParts::default()
        })
        .unwrap();
        let s = accumulate(&scene, &scene.emitters()[0]);
        assert_eq!((s.r_total, s.t_total), (0.0, 0.0));

        let scene = single_barrier_scene(Vec2::new(1.0, 1.0));
        let s = accumulate(&scene, &scene.emitters()[0]);
        assert_relative_eq!(s.r_sum[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.r_total, 0.5, epsilon = 1e-15);
        assert_eq!(s.t_total, 0.0);
        assert_eq!(s.r_sum[1], 0.0);
    }

    #[test]
    fn single_barrier_reflection_scene() {
        let snap = parameterize(&single_barrier_scene(Vec2::new(1.0, 1.0)));
        let m = &snap.per_emitter[0];
        assert_relative_eq!(m.r_mix, 0.5, epsilon = 1e-15);
        assert_eq!(m.t_mix, 0.0);
        assert_relative_eq!(m.materials[0].r_mix, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.d_mix, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn no_walls_gives_pure_dry() {
        let scene = Scene::new(SceneParts {
            emitters: vec![crate::scene::Emitter::new("se", Vec2::new(5.0, 4.0), "t")],
            ..SceneParts::default()
        })
        .unwrap();
        let m = &parameterize(&scene).per_emitter[0];
        assert_eq!((m.d_mix, m.r_mix, m.t_mix), (1.0, 0.0, 0.0));
    }
}
