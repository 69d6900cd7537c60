//! Acceptance run for the engine, renderer and service.
//!
//! Runs every criterion, prints one `[PASS]` or `[FAIL]` line each and
//! exits non-zero if any failed.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sonospace_cli::{cmd_render, Overrides};
use sonospace_core::engine::{EngineConfig, TrackStore};
use sonospace_core::io::{load_assets, load_scene, load_wav, save_scene, save_wav};
use sonospace_core::protocol::{ServerMessage, AUDIO_HEADER_BYTES};
use sonospace_core::script::TrajectoryScript;
use sonospace_service::{serve, ServiceConfig};
use sonospace_testkit::capture::scripted_realtime;
use sonospace_testkit::checks::{self, Outcome};
use sonospace_testkit::scenes::barrier_scene;
use sonospace_testkit::signal::sine;
use sonospace_testkit::ws::WsClient;

const SEED: u64 = 20_240_601;

/// All outcomes pass, with their details joined.
fn all(parts: &[(&str, Outcome)]) -> Outcome {
    let detail = parts
        .iter()
        .map(|(name, o)| format!("{name}: {}{}", if o.passed { "" } else { "FAILED " }, o.detail))
        .collect::<Vec<_>>()
        .join("; ");
    if parts.iter().all(|(_, o)| o.passed) {
        Outcome::pass(detail)
    } else {
        Outcome::fail(detail)
    }
}

fn generalization() -> Outcome {
    all(&[
        ("distance", checks::distance_monotonicity(200, SEED + 1)),
        ("angle", checks::angle_monotonicity(200, SEED + 2)),
        ("side test", checks::side_classification(200, SEED + 3)),
    ])
}

fn hand_computed() -> Outcome {
    all(&[
        ("mixes", checks::hand_scene()),
        ("constant 0.4 render", checks::constant_input(2.0)),
    ])
}

/// Writes the busy scene with its tracks as float WAVs and a random script.
fn write_busy_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf, f64) {
    let seconds = 4.0;
    let config = EngineConfig::default();
    let (scene, tracks, _) = checks::busy_scene_and_automation(SEED, seconds, &config);
    let mut parts = scene.to_parts();
    for e in &parts.emitters {
        let rel = format!("tracks/{}.wav", e.track);
        if !parts.assets.contains_key(&e.track) {
            let path = dir.join(&rel);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            save_wav(tracks.get(e.track.as_str()).unwrap(), &path, config.sample_rate).unwrap();
        }
        parts.assets.insert(e.track.clone(), rel);
    }
    let scene = sonospace_core::Scene::new(parts).unwrap();
    let scene_path = dir.join("busy.json");
    save_scene(&scene, &scene_path).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut times: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..seconds)).collect();
    times.sort_by(f64::total_cmp);
    let mut script = String::from("time,op,args\n");
    for t in times {
        let line = match rng.random_range(0..4) {
            0 => format!("{t},move_emitter,a,{},{}", rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
            1 => format!("{t},move_emitter,b,{},{}", rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
            2 => format!("{t},move_receptor,{},{}", rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
            _ if rng.random_bool(0.5) => format!("{t},set_constant,c,{}", rng.random_range(0.1..2.0)),
            _ => format!("{t},set_constant,d,{}", rng.random_range(0.0..1.0)),
        };
        script.push_str(&line);
        script.push('\n');
    }
    let script_path = dir.join("busy.csv");
    std::fs::write(&script_path, script).unwrap();
    (scene_path, script_path, seconds)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (scene_path, script_path, seconds) = write_busy_fixture(dir.path());
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    let overrides = Overrides::default();
    if let Err(e) = cmd_render(&scene_path, &a, seconds, Some(&script_path), &overrides)
        .and_then(|_| cmd_render(&scene_path, &b, seconds, Some(&script_path), &overrides))
    {
        return Outcome::fail(format!("render failed: {e:#}"));
    }
    let identical_files = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();

    let config = EngineConfig::default();
    let scene = load_scene(&scene_path).unwrap();
    let (tracks, problems) = load_assets(&scene, dir.path(), config.sample_rate);
    assert!(problems.is_empty());
    let automation = TrajectoryScript::from_path(&script_path)
        .unwrap()
        .to_automation(&config);
    let live = scripted_realtime(scene, tracks, config, seconds, &automation);
    let offline = load_wav(&a, config.sample_rate).unwrap().samples;
    let same = live.len() == offline.len() && live.iter().zip(&offline).all(|(x, y)| x.to_bits() == y.to_bits());
    let detail = format!(
        "two cmd_render runs ({} s, {} script events) byte-identical: {identical_files}; \
         offline WAV equals scripted realtime capture bit-exactly: {same}",
        seconds,
        automation.events().len()
    );
    let engine = checks::offline_equals_realtime(SEED + 4, 3.0);
    let summary = format!("{detail}; engine-level automation run: {}", engine.detail);
    if identical_files && same && engine.passed {
        Outcome::pass(summary)
    } else {
        Outcome::fail(summary)
    }
}

fn dsp() -> Outcome {
    all(&[
        ("stability", checks::dsp_stability(60.0, SEED + 5)),
        ("512 vs 1024", checks::block_size_independence(SEED + 6)),
    ])
}

fn round_trips() -> Outcome {
    all(&[
        ("scenes", checks::scene_round_trip(1000, SEED + 7)),
        ("wav", checks::wav_round_trip(SEED + 8)),
    ])
}

async fn live_service() -> Outcome {
    let scene = barrier_scene(10_000);
    let barriers = scene.barrier_count();
    let mut tracks = TrackStore::new();
    tracks.insert("t1".into(), Arc::from(sine(220.0, 0.5, 44100, 44100)));
    let config = ServiceConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        ..ServiceConfig::default()
    };
    let handle = match serve(config, scene, tracks).await {
        Ok(h) => h,
        Err(e) => return Outcome::fail(format!("service did not start: {e}")),
    };
    let mut client = WsClient::connect(handle.local_addr()).await;
    client.send(json!({"type": "hello"})).await;
    for _ in 0..3 {
        client.message().await;
    }

    let mut worst = Duration::ZERO;
    let mut updated = true;
    let mut previous_d_mix = None;
    for k in 0..20 {
        let y = 1.0 + 0.4 * k as f64;
        let sent = Instant::now();
        client
            .send(json!({"type": "mutate", "mutation": {"op": "move_emitter", "id": "e1", "x": 2.0, "y": y}}))
            .await;
        let snapshot = loop {
            if let ServerMessage::Snapshot { snapshot } = client.message().await.message {
                break snapshot;
            }
        };
        worst = worst.max(sent.elapsed());
        let d_mix = snapshot.per_emitter[0].d_mix;
        updated &= snapshot.revision == k + 1 && previous_d_mix != Some(d_mix);
        previous_d_mix = Some(d_mix);
    }

    let (frame, bytes) = client.audio().await;
    let framed = bytes == AUDIO_HEADER_BYTES + 4 * frame.samples.len() && frame.samples.len() == 512;
    client.close().await;
    let _ = handle.shutdown().await;

    let detail = format!(
        "{barriers} barriers, worst MoveEmitter to snapshot {:.1} ms over 20 moves (budget 100 ms), \
         dMix updated each time: {updated}; live frame {bytes} bytes for {} samples",
        worst.as_secs_f64() * 1e3,
        frame.samples.len()
    );
    if worst < Duration::from_millis(100) && updated && framed {
        Outcome::pass(detail)
    } else {
        Outcome::fail(detail)
    }
}

fn service() -> Outcome {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    all(&[
        ("fuzzed round trips", checks::protocol_round_trip(1000, SEED + 9)),
        ("live", runtime.block_on(live_service())),
        ("framing", checks::audio_framing(SEED + 10)),
    ])
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        // Nothing to enumerate for test-listing tools.
        return ExitCode::SUCCESS;
    }
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", || {
            checks::oracle_equivalence(1000, SEED, Duration::from_secs(30))
        }),
        ("linear time", || {
            checks::linear_time(&[100, 1_000, 10_000, 100_000], 0.99, Duration::from_millis(50))
        }),
        ("generalization suite", generalization),
        ("mix bounds", || checks::mix_bounds(1000, SEED + 11)),
        ("hand-computed scene", hand_computed),
        ("determinism", determinism),
        ("dsp stability", dsp),
        ("scene and wav round trips", round_trips),
        ("service protocol", service),
    ];

    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        println!(
            "[{}] {name} ({:.2} s): {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
