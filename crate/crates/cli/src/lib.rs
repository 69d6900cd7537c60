//! Command implementations behind the `sonospace` binary.
//!
//! Each command is a plain function so the test suites can drive it
//! without spawning processes.

use std::future::Future;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use sonospace_core::engine::{render_offline, Automation, EngineConfig, TrackStore};
use sonospace_core::io::{load_assets, load_scene, save_scene, save_wav};
use sonospace_core::param::parameterize;
use sonospace_core::scene::{BarrierWeighting, SceneParts};
use sonospace_core::script::TrajectoryScript;
use sonospace_core::Scene;
use sonospace_service::{serve, ServiceConfig};
use tracing::{info, warn};

/// Command-line adjustments to the scene constants and the engine.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub length_weighted: bool,
    pub block_size: Option<usize>,
    pub sample_rate: Option<u32>,
}

impl Overrides {
    pub fn engine(&self) -> Result<EngineConfig> {
        let mut config = EngineConfig::default();
        if let Some(n) = self.block_size {
            if n == 0 {
                bail!("block size must be positive");
            }
            config.block_size = n;
        }
        if let Some(rate) = self.sample_rate {
            if rate == 0 {
                bail!("sample rate must be positive");
            }
            config.sample_rate = rate;
        }
        Ok(config)
    }

    /// Rebuilds `scene` with the overridden constants, keeping its revision.
    pub fn apply(&self, scene: Scene) -> Result<Scene> {
        if self.c.is_none() && self.d.is_none() && !self.length_weighted {
            return Ok(scene);
        }
        let revision = scene.revision();
        let mut parts: SceneParts = scene.to_parts();
        if let Some(c) = self.c {
            parts.c = c;
        }
        if let Some(d) = self.d {
            parts.d = d;
        }
        if self.length_weighted {
            parts.weighting = BarrierWeighting::LengthWeighted;
        }
        Ok(Scene::new(parts)
            .context("overridden constants are invalid")?
            .with_revision(revision))
    }
}

fn base_dir(scene_path: &Path) -> &Path {
    scene_path.parent().unwrap_or(Path::new("."))
}

/// Loads the scene at `path` with overrides applied.
pub fn open_scene(path: &Path, overrides: &Overrides) -> Result<Scene> {
    let scene = load_scene(path).with_context(|| format!("cannot load scene {}", path.display()))?;
    overrides.apply(scene)
}

/// Loads every track the scene needs. Any failure is fatal and names the track.
pub fn required_assets(scene: &Scene, scene_path: &Path, sample_rate: u32) -> Result<TrackStore> {
    let (tracks, problems) = load_assets(scene, base_dir(scene_path), sample_rate);
    if let Some(first) = problems.first() {
        let names: Vec<_> = problems.iter().map(|p| p.track.as_str()).collect();
        bail!(
            "missing asset{} {}: {}",
            if names.len() > 1 { "s" } else { "" },
            names.join(", "),
            first.reason
        );
    }
    Ok(tracks)
}

fn automation(script: Option<&Path>, config: &EngineConfig) -> Result<Automation> {
    match script {
        Some(path) => Ok(TrajectoryScript::from_path(path)
            .with_context(|| format!("cannot read script {}", path.display()))?
            .to_automation(config)),
        None => Ok(Automation::default()),
    }
}

#[derive(Clone, Debug)]
pub struct RenderReport {
    pub samples: usize,
    pub sample_rate: u32,
    pub clipped_samples: u64,
    pub effect_faults: u64,
    pub elapsed: Duration,
}

impl RenderReport {
    /// Rendered audio seconds per wall-clock second.
    pub fn speed(&self) -> f64 {
        self.samples as f64 / self.sample_rate as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

pub fn cmd_render(
    scene_path: &Path,
    out: &Path,
    duration: f64,
    script: Option<&Path>,
    overrides: &Overrides,
) -> Result<RenderReport> {
    let config = overrides.engine()?;
    let scene = open_scene(scene_path, overrides)?;
    let tracks = required_assets(&scene, scene_path, config.sample_rate)?;
    let automation = automation(script, &config)?;
    let started = Instant::now();
    let render = render_offline(&scene, tracks, config, duration, &automation)?;
    let elapsed = started.elapsed();
    save_wav(&render.samples, out, config.sample_rate)
        .with_context(|| format!("cannot write {}", out.display()))?;
    Ok(RenderReport {
        samples: render.samples.len(),
        sample_rate: config.sample_rate,
        clipped_samples: render.stats.clipped_samples,
        effect_faults: render.stats.effect_faults,
        elapsed,
    })
}

pub const MIXES_HEADER: [&str; 10] = [
    "block",
    "emitter_id",
    "material_id",
    "dMix",
    "rMix",
    "tMix",
    "m_rMix",
    "m_tMix",
    "rTotal",
    "tTotal",
];

/// Writes one CSV row per (block, emitter, material) for block 0 and every
/// block the script touches. An emitter without materials in the scene gets
/// one row with an empty material id.
pub fn cmd_mixes(
    scene_path: &Path,
    emitter: Option<&str>,
    script: Option<&Path>,
    overrides: &Overrides,
    out: impl Write,
) -> Result<()> {
    let config = overrides.engine()?;
    let mut scene = open_scene(scene_path, overrides)?;
    if let Some(id) = emitter {
        if scene.emitter(id).is_none() {
            bail!("unknown emitter '{id}'");
        }
    }
    let automation = automation(script, &config)?;
    let mut blocks: Vec<u64> = automation.events().iter().map(|(b, _)| *b).collect();
    blocks.insert(0, 0);
    blocks.dedup();

    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(MIXES_HEADER)?;
    for block in blocks {
        for m in automation.at(block) {
            scene = scene
                .apply(m)
                .with_context(|| format!("script fails at block {block}"))?;
        }
        let params = parameterize(&scene);
        for mix in &params.per_emitter {
            if emitter.is_some_and(|id| id != mix.emitter_id.as_str()) {
                continue;
            }
            let head = [
                block.to_string(),
                mix.emitter_id.to_string(),
            ];
            let tail = [
                mix.d_mix, mix.r_mix, mix.t_mix,
            ];
            let totals = [mix.r_total.to_string(), mix.t_total.to_string()];
            let mut write = |material: &str, m_r: f64, m_t: f64| {
                let mut row: Vec<String> = head.to_vec();
                row.push(material.to_string());
                row.extend(tail.iter().map(f64::to_string));
                row.push(m_r.to_string());
                row.push(m_t.to_string());
                row.extend(totals.iter().cloned());
                csv.write_record(&row)
            };
            if mix.materials.is_empty() {
                write("", 0.0, 0.0)?;
            }
            for m in &mix.materials {
                write(m.material_id.as_str(), m.r_mix, m.t_mix)?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub scene: Option<PathBuf>,
    pub port: u16,
    pub host: [u8; 4],
    pub static_dir: Option<PathBuf>,
    pub autosave: bool,
    pub overrides: Overrides,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            scene: None,
            port: sonospace_service::DEFAULT_PORT,
            host: [127, 0, 0, 1],
            static_dir: None,
            autosave: true,
            overrides: Overrides::default(),
        }
    }
}

/// `<scene>.autosave` next to the scene file.
pub fn autosave_path(scene: &Path) -> PathBuf {
    let mut name = scene.as_os_str().to_owned();
    name.push(".autosave");
    PathBuf::from(name)
}

/// Runs the service until `stop` resolves. `ready` receives the bound address.
/// Returns the autosave path when one was written.
pub async fn cmd_serve(
    options: ServeOptions,
    ready: impl FnOnce(SocketAddr),
    stop: impl Future<Output = ()>,
) -> Result<Option<PathBuf>> {
    let engine = options.overrides.engine()?;
    let (scene, tracks, asset_dir) = match &options.scene {
        Some(path) => {
            let scene = open_scene(path, &options.overrides)?;
            let (tracks, problems) = load_assets(&scene, base_dir(path), engine.sample_rate);
            for p in problems {
                warn!(track = %p.track, "{}", p.reason);
            }
            (scene, tracks, base_dir(path).to_path_buf())
        }
        None => (
            options.overrides.apply(Scene::new(SceneParts::default())?)?,
            TrackStore::new(),
            PathBuf::from("."),
        ),
    };
    let config = ServiceConfig {
        addr: SocketAddr::from((options.host, options.port)),
        engine,
        static_dir: options.static_dir.clone(),
        asset_dir,
        ..ServiceConfig::default()
    };
    let handle = serve(config, scene, tracks).await?;
    ready(handle.local_addr());
    stop.await;
    info!("shutting down");
    let scene = handle.shutdown().await?;
    match (&options.scene, options.autosave) {
        (Some(path), true) => {
            let target = autosave_path(path);
            save_scene(&scene, &target).with_context(|| format!("cannot autosave to {}", target.display()))?;
            Ok(Some(target))
        }
        _ => Ok(None),
    }
}
