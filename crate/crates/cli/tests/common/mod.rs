#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sonospace_core::io::{save_scene, save_wav};
use sonospace_core::Scene;
use sonospace_testkit::signal::sine;

/// Writes `scene` as `scene.json` plus a one-second tone for every asset it
/// lists, and returns the scene path.
pub fn write_fixture(dir: &Path, scene: &Scene) -> PathBuf {
    for rel in scene.assets().values() {
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        save_wav(&sine(220.0, 0.5, 44100, 44100), &path, 44100).unwrap();
    }
    let path = dir.join("scene.json");
    save_scene(scene, &path).unwrap();
    path
}

/// The scene with `tracks/<track>.wav` listed for every emitter track.
pub fn with_assets(scene: Scene) -> Scene {
    let mut parts = scene.to_parts();
    for e in &parts.emitters {
        parts
            .assets
            .insert(e.track.clone(), format!("tracks/{}.wav", e.track));
    }
    Scene::new(parts).unwrap()
}
