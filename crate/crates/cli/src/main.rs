use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sonospace_cli::{cmd_mixes, cmd_render, cmd_serve, Overrides, ServeOptions};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "sonospace", version, about = "Spatial audio scene renderer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene to a mono float WAV file.
    Render {
        scene: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Seconds of audio to render.
        #[arg(short, long)]
        duration: f64,
        /// Trajectory CSV applied during the render.
        #[arg(long)]
        script: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print the parameterization as CSV.
    Mixes {
        scene: PathBuf,
        /// Only rows for this emitter.
        #[arg(long)]
        emitter: Option<String>,
        #[arg(long)]
        script: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Serve the WebSocket endpoint until interrupted.
    Serve {
        scene: Option<PathBuf>,
        #[arg(short, long, default_value_t = sonospace_service::DEFAULT_PORT)]
        port: u16,
        /// Directory with the browser UI, served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Do not write `<scene>.autosave` on shutdown.
        #[arg(long)]
        no_autosave: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    sample_rate: Option<u32>,
    /// Weight barriers by their length.
    #[arg(long)]
    length_weighted: bool,
    /// Override the scene's wet-level constant.
    #[arg(long)]
    c: Option<f64>,
    /// Override the scene's dry-attenuation constant.
    #[arg(long)]
    d: Option<f64>,
}

impl From<EngineArgs> for Overrides {
    fn from(a: EngineArgs) -> Self {
        Overrides {
            c: a.c,
            d: a.d,
            length_weighted: a.length_weighted,
            block_size: a.block_size,
            sample_rate: a.sample_rate,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Render {
            scene,
            out,
            duration,
            script,
            engine,
        } => {
            let report = cmd_render(&scene, &out, duration, script.as_deref(), &engine.into())?;
            println!(
                "wrote {} ({} samples at {} Hz)",
                out.display(),
                report.samples,
                report.sample_rate
            );
            println!("clipped samples: {}", report.clipped_samples);
            if report.effect_faults > 0 {
                println!("effect faults: {}", report.effect_faults);
            }
            println!(
                "render time: {:.3} s ({:.1}x real time)",
                report.elapsed.as_secs_f64(),
                report.speed()
            );
        }
        Command::Mixes {
            scene,
            emitter,
            script,
            engine,
        } => {
            let stdout = std::io::stdout().lock();
            cmd_mixes(&scene, emitter.as_deref(), script.as_deref(), &engine.into(), stdout)?;
        }
        Command::Serve {
            scene,
            port,
            static_dir,
            no_autosave,
            engine,
        } => {
            let options = ServeOptions {
                scene,
                port,
                static_dir,
                autosave: !no_autosave,
                overrides: engine.into(),
                ..ServeOptions::default()
            };
            let runtime = tokio::runtime::Runtime::new()?;
            let saved = runtime.block_on(cmd_serve(
                options,
                |addr| println!("listening on ws://{addr}/ws"),
                async {
                    let _ = tokio::signal::ctrl_c().await;
                },
            ))?;
            if let Some(path) = saved {
                println!("autosaved scene to {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
