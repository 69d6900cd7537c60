mod common;

use std::process::Command;

use sonospace_cli::{autosave_path, cmd_mixes, cmd_render, cmd_serve, Overrides, ServeOptions, MIXES_HEADER};
use sonospace_core::io::{load_scene, load_wav};
use sonospace_core::scene::SceneParts;
use sonospace_core::{Scene, Vec2};
use sonospace_testkit::scenes::single_barrier_scene;

use common::{with_assets, write_fixture};

fn mixes(scene: &std::path::Path, emitter: Option<&str>, script: Option<&std::path::Path>) -> csv::Reader<std::io::Cursor<Vec<u8>>> {
    let mut out = Vec::new();
    cmd_mixes(scene, emitter, script, &Overrides::default(), &mut out).unwrap();
    csv::Reader::from_reader(std::io::Cursor::new(out))
}

#[test]
fn render_writes_the_requested_duration_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_fixture(dir.path(), &with_assets(single_barrier_scene()));
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    let report = cmd_render(&scene, &a, 10.0, None, &Overrides::default()).unwrap();
    cmd_render(&scene, &b, 10.0, None, &Overrides::default()).unwrap();
    assert_eq!(report.samples, 441_000);
    assert_eq!(load_wav(&a, 44100).unwrap().samples.len(), 441_000);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn missing_asset_fails_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let scene = with_assets(single_barrier_scene());
    let path = write_fixture(dir.path(), &scene);
    std::fs::remove_file(dir.path().join("tracks/t1.wav")).unwrap();

    let err = cmd_render(&path, &dir.path().join("out.wav"), 1.0, None, &Overrides::default()).unwrap_err();
    assert!(format!("{err:#}").contains("t1"), "{err:#}");

    let output = Command::new(env!("CARGO_BIN_EXE_sonospace"))
        .args(["render"])
        .arg(&path)
        .args(["-o"])
        .arg(dir.path().join("out.wav"))
        .args(["-d", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("t1"));
}

#[test]
fn binary_renders_and_reports_clipping() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &with_assets(single_barrier_scene()));
    let out = dir.path().join("out.wav");
    let output = Command::new(env!("CARGO_BIN_EXE_sonospace"))
        .arg("render")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(["--duration", "0.5", "--block-size", "256", "--c", "1.0"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("clipped samples: 0"), "{stdout}");
    assert!(stdout.contains("render time"), "{stdout}");
    assert_eq!(load_wav(&out, 44100).unwrap().samples.len(), 22050);
}

#[test]
fn static_scene_dumps_a_single_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &single_barrier_scene());
    let mut reader = mixes(&path, None, None);
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), MIXES_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(&row[0], "0");
    assert_eq!(&row[1], "e1");
    assert_eq!(&row[2], "m1");
    let values: Vec<f64> = (3..10).map(|i| row[i].parse().unwrap()).collect();
    assert_eq!(values, vec![0.5, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0]);
}

#[test]
fn sweep_toward_a_wall_gives_monotone_r_mix() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &single_barrier_scene());
    let script = dir.path().join("sweep.csv");
    let mut text = String::from("time,op,args\n");
    for k in 1..=20 {
        text.push_str(&format!("{},move_emitter,e1,1,{}\n", k as f64 * 0.1, 4.0 - 0.15 * k as f64));
    }
    std::fs::write(&script, text).unwrap();

    let rows: Vec<csv::StringRecord> = mixes(&path, Some("e1"), Some(&script))
        .records()
        .map(Result::unwrap)
        .collect();
    assert_eq!(rows.len(), 21);
    let r_mix: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(r_mix.windows(2).skip(1).all(|w| w[1] > w[0]), "{r_mix:?}");
    for row in &rows {
        let m_r: f64 = row[6].parse().unwrap();
        assert!(m_r == 0.0 || m_r == 1.0);
    }
}

#[test]
fn no_walls_gives_zero_wet_mixes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = Scene::new(SceneParts {
        emitters: vec![
            sonospace_core::scene::Emitter::new("a", Vec2::new(1.0, 1.0), "t"),
            sonospace_core::scene::Emitter::new("b", Vec2::new(8.0, 3.0), "t"),
        ],
        ..SceneParts::default()
    })
    .unwrap();
    let path = write_fixture(dir.path(), &scene);
    let rows: Vec<csv::StringRecord> = mixes(&path, None, None).records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(&row[2], "");
        assert_eq!(&row[4], "0");
        assert_eq!(&row[5], "0");
    }
}

#[test]
fn unknown_emitter_exits_with_status_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &single_barrier_scene());
    let output = Command::new(env!("CARGO_BIN_EXE_sonospace"))
        .arg("mixes")
        .arg(&path)
        .args(["--emitter", "nobody"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("nobody"));
}

#[tokio::test(flavor = "multi_thread")]
async fn serve_loads_the_scene_and_autosaves_on_stop() {
    use serde_json::json;
    use sonospace_core::protocol::ServerMessage;
    use sonospace_testkit::ws::WsClient;

    let dir = tempfile::tempdir().unwrap();
    let scene = with_assets(single_barrier_scene());
    let path = write_fixture(dir.path(), &scene);
    let (addr_tx, addr_rx) = tokio::sync::oneshot::channel();
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let options = ServeOptions {
        scene: Some(path.clone()),
        port: 0,
        ..ServeOptions::default()
    };
    let server = tokio::spawn(cmd_serve(
        options,
        move |addr| addr_tx.send(addr).unwrap(),
        async move {
            let _ = stop_rx.await;
        },
    ));
    let addr = addr_rx.await.unwrap();

    let mut client = WsClient::connect(addr).await;
    client.send(json!({"type": "hello"})).await;
    client.message().await;
    match client.message().await.message {
        ServerMessage::SceneState { scene: doc, .. } => {
            assert_eq!(doc.into_scene().unwrap().to_parts(), scene.to_parts());
        }
        other => panic!("expected scene_state, got {other:?}"),
    }
    let seq = client
        .send(json!({"type": "mutate", "mutation": {"op": "move_emitter", "id": "e1", "x": 1.5, "y": 3.0}}))
        .await;
    loop {
        match client.message().await.message {
            ServerMessage::Ack { client_seq, .. } if client_seq == seq => break,
            ServerMessage::Error { reason, .. } => panic!("mutation refused: {reason}"),
            _ => {}
        }
    }
    client.close().await;

    stop_tx.send(()).unwrap();
    let saved = server.await.unwrap().unwrap().expect("autosave written");
    assert_eq!(saved, autosave_path(&path));
    let reloaded = load_scene(&saved).unwrap();
    assert_eq!(reloaded.emitter("e1").unwrap().pos, Vec2::new(1.5, 3.0));
}

#[test]
fn port_in_use_is_an_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let result = runtime.block_on(cmd_serve(
        ServeOptions {
            port,
            ..ServeOptions::default()
        },
        |_| {},
        async {},
    ));
    assert!(result.is_err());
}
