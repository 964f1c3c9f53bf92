use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flock_core::exec::ExecMode;
use flock_core::experiment::{
    list_presets, parse_override_value, preset, run_scenario_with, ScenarioConfig,
};
use flock_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flock",
    version,
    about = "Run flocking and consensus scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON scenario config.
    Run {
        /// Preset name or path to a config file.
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "T")]
        horizon: Option<f64>,
        /// Dotted-path override, e.g. `model.radius_d=0.58`. Repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Run variants one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Print the preset registry.
    ListPresets,
    /// Check a config (or preset) without running it.
    Validate { target: String },
}

fn load(target: &str) -> Result<ScenarioConfig, Error> {
    let path = Path::new(target);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        ScenarioConfig::load(path)
    } else {
        preset(target)
    }
}

fn apply_overrides(
    mut cfg: ScenarioConfig,
    params: &[String],
    seed: Option<u64>,
    out: Option<PathBuf>,
    dt: Option<f64>,
    horizon: Option<f64>,
) -> Result<ScenarioConfig, Error> {
    for p in params {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| Error::ConfigInvalid(format!("--param expects KEY=VALUE, got `{p}`")))?;
        cfg = cfg.with_override(key.trim(), parse_override_value(value.trim()))?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    if let Some(t) = horizon {
        cfg.horizon = t;
    }
    Ok(cfg)
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    let loading = matches!(e, Error::Io { path, .. } if path.extension().is_some_and(|x| x == "json") && !path.ends_with("manifest.json"));
    if e.is_config_error() || loading {
        ExitCode::from(EXIT_CONFIG)
    } else {
        ExitCode::from(EXIT_RUNTIME)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListPresets => {
            for p in list_presets() {
                println!("{:<26} {}\n{:<26} {}", p.name, p.anchor, "", p.description);
            }
            Ok(())
        }
        Command::Validate { target } => load(&target).and_then(|cfg| {
            cfg.validate()?;
            let runs = cfg.resolve_runs()?.len();
            println!(
                "ok: {} ({runs} run{})",
                cfg.name,
                if runs == 1 { "" } else { "s" }
            );
            Ok(())
        }),
        Command::Run {
            target,
            seed,
            out,
            dt,
            horizon,
            params,
            sequential,
        } => {
            let cfg = match load(&target)
                .and_then(|c| apply_overrides(c, &params, seed, out, dt, horizon))
            {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            if let Err(e) = cfg.validate() {
                return exit_for(&e);
            }
            let mode = if sequential {
                ExecMode::Sequential
            } else {
                ExecMode::Parallel
            };
            run_scenario_with(&cfg, mode).map(|m| {
                println!(
                    "{}: {} files in {} ({:.1} s)",
                    cfg.name,
                    m.files.len() + 1,
                    cfg.out_dir.display(),
                    m.duration_secs
                );
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
