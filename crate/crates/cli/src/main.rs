use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lwir_core::{Error, Result};
use lwir_harness::commands;
use lwir_harness::{apply_atmosphere, presets, Config, ExperimentSpec};

#[derive(Parser)]
#[command(name = "lwir", version, about = "Passive ranging from LWIR hyperspectral radiance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in preset name (fig1-like, panel-scene, ramp-scene).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Atmosphere from a preset name or an attenuation CSV.
    #[arg(long)]
    atmo: Option<String>,
    /// Air temperature in K.
    #[arg(long = "t-air")]
    t_air: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Render a radiance cube and its truth files.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate range per pixel of a cube.
    Estimate {
        /// Cube file (HSRC).
        #[arg(long)]
        cube: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated noisy estimates at fixed truth.
    Montecarlo {
        #[command(flatten)]
        common: Common,
    },
    /// Per-channel range information and the optimal attenuation.
    Fisher {
        #[command(flatten)]
        common: Common,
    },
    /// Flag pixels contaminated by reflected sky radiance.
    Mask {
        #[arg(long)]
        cube: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Group pixels by estimated emissivity.
    Cluster {
        /// Emissivity estimates written by `estimate`.
        #[arg(long)]
        estimates: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load_spec(c: &Common) -> Result<ExperimentSpec> {
    let mut config = match (&c.preset, &c.config) {
        (Some(name), _) => presets::load(name)?,
        (None, Some(path)) => Config::load(path)?,
        (None, None) => Config::default(),
    };
    for s in &c.set {
        config.apply_override(s)?;
    }
    if let Some(a) = &c.atmo {
        apply_atmosphere(&mut config, a)?;
    }
    if let Some(t) = c.t_air {
        config.set("t_air", t.to_string());
    }
    if let Some(s) = c.seed {
        config.set("seed", s.to_string());
    }
    ExperimentSpec::from_config(config)
}

fn run(cmd: Command) -> Result<()> {
    let common = match &cmd {
        Command::Simulate { common }
        | Command::Estimate { common, .. }
        | Command::Montecarlo { common }
        | Command::Fisher { common }
        | Command::Mask { common, .. }
        | Command::Cluster { common, .. } => common.clone(),
    };
    if common.workers == Some(0) {
        return Err(Error::field("workers", "must be >= 1"));
    }
    let spec = load_spec(&common)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::field("workers", e.to_string()))?;
    let out = &common.out;
    // the cube carries its own air temperature; only an explicit flag overrides it
    let t_air = common.t_air;
    pool.install(|| match cmd {
        Command::Simulate { .. } => {
            let s = commands::cmd_simulate(&spec, out, None)?;
            println!("seed {}", s.seed);
            println!("wrote {} ({} pixels)", s.cube.display(), s.pixels);
            Ok(())
        }
        Command::Estimate { cube, .. } => {
            let s = commands::cmd_estimate(&spec, &cube, out, t_air)?;
            println!(
                "{} pixels, {} unconverged, {} undefined, {} flagged",
                s.pixels, s.unconverged, s.undefined, s.flagged
            );
            Ok(())
        }
        Command::Montecarlo { .. } => {
            let r = commands::cmd_montecarlo(&spec, out, None)?;
            println!("seed {}", r.seed);
            println!("estimator,delta_t,rmse_m,bias_m,std_m,undefined");
            for row in &r.rows {
                println!(
                    "{},{},{:.4},{:.4},{:.4},{}",
                    row.estimator.name(),
                    row.delta_t,
                    row.rmse,
                    row.bias,
                    row.std,
                    row.undefined
                );
            }
            Ok(())
        }
        Command::Fisher { .. } => {
            for r in commands::cmd_fisher(&spec, out, None)? {
                let crlb = r.crlb_m.map_or("inf".to_string(), |c| format!("{c:.4}"));
                println!(
                    "d {} m: alpha* {:.6} dB/m, crlb {crlb} m{}",
                    r.range_m,
                    r.alpha_star,
                    if r.degenerate { ", degenerate" } else { "" }
                );
            }
            Ok(())
        }
        Command::Mask { cube, .. } => {
            let s = commands::cmd_mask(&spec, &cube, out)?;
            println!("{} of {} pixels flagged", s.flagged, s.pixels);
            Ok(())
        }
        Command::Cluster { estimates, .. } => {
            let s = commands::cmd_cluster(&spec, &estimates, out)?;
            println!("{} pixels in {} clusters, sizes {:?}", s.pixels, s.k, s.sizes);
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("error[{}]: {e}", class.tag());
            ExitCode::from(class.exit_code() as u8)
        }
    }
}
