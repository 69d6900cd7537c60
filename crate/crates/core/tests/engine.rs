use std::sync::Arc;

use sonospace_core::engine::{render_offline, Automation, EngineConfig, TrackStore};
use sonospace_core::geometry::Vec2;
use sonospace_core::scene::{Emitter, SceneParts};
use sonospace_core::Scene;
use sonospace_testkit::checks;
use sonospace_testkit::scenes::single_barrier_scene;
use sonospace_testkit::signal::{constant, noise};

#[test]
fn constant_input_renders_exactly() {
    checks::constant_input(1.0).assert();
}

#[test]
fn offline_and_lockstep_realtime_agree_bit_for_bit() {
    checks::offline_equals_realtime(5, 2.0).assert();
}

#[test]
fn output_is_linear_in_the_tracks() {
    let config = EngineConfig::default();
    let render = |scale: f32| {
        let mut tracks = TrackStore::new();
        let n: Vec<f32> = noise(3, 44100).iter().map(|x| x * 0.25 * scale).collect();
        tracks.insert("t1".into(), Arc::from(n));
        render_offline(&single_barrier_scene(), tracks, config, 1.0, &Automation::default())
            .unwrap()
            .samples
    };
    let (one, half) = (render(1.0), render(0.5));
    for (a, b) in one.iter().zip(&half) {
        assert!((a * 0.5 - b).abs() <= 1e-6, "{a} vs {b}");
    }
}

#[test]
fn loud_scenes_clip_and_count() {
    let scene = Scene::new(SceneParts {
        emitters: (0..4)
            .map(|i| {
                let mut e = Emitter::new(format!("e{i}"), Vec2::new(5.0, 5.05), "t");
                e.gain = 2.0;
                e
            })
            .collect(),
        ..SceneParts::default()
    })
    .unwrap();
    let mut tracks = TrackStore::new();
    tracks.insert("t".into(), Arc::from(constant(0.9, 44100)));
    let out = render_offline(&scene, tracks, EngineConfig::default(), 0.5, &Automation::default()).unwrap();
    assert!(out.samples.iter().all(|s| (-1.0..=1.0).contains(s)));
    // Counted per rendered block, including the tail past the duration.
    assert!(out.stats.clipped_samples >= out.samples.len() as u64);
}

#[test]
fn rendering_is_fast_enough_for_realtime() {
    let config = EngineConfig::default();
    let (scene, tracks, automation) = checks::busy_scene_and_automation(1, 5.0, &config);
    let started = std::time::Instant::now();
    render_offline(&scene, tracks, config, 5.0, &automation).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "5 s of audio took {elapsed:.2} s");
}
