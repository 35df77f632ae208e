//! `wgmopo`: batch front end for whispering-gallery OPO modeling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgmopo_core::correlation::{Family, Histogram};
use wgmopo_core::material::MaterialModel;
use wgmopo_core::phasematch::Arm;

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{sha256_hex, Emitter, Format, Provenance};

#[derive(Parser, Debug)]
#[command(name = "wgmopo", version, about = "Whispering-gallery OPO dispersion, phase matching, tuning and coincidence fitting")]
struct Cli {
    /// Material asset (TOML); the bundled MgO:LiNbO3 data when omitted.
    #[arg(long, global = true, env = "WGMOPO_MATERIAL")]
    material: Option<PathBuf>,
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "WGMOPO_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "WGMOPO_OUT", default_value = ".")]
    out: PathBuf,
    /// Worker threads for scans.
    #[arg(long, global = true, env = "WGMOPO_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, env = "WGMOPO_FORMAT", value_enum, default_value = "both")]
    format: Format,
    /// Overrides the config seed.
    #[arg(long, global = true, env = "WGMOPO_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mode spectrum over one pump free spectral range.
    Spectrum,
    /// Phase-matching curves of the configured channels over the temperature window.
    Channels,
    /// Continuous curves, degeneracy and target crossings versus radius or pump wavelength.
    Map,
    /// Triplet phase-matched at a target line, with its coarse and fine neighbors.
    Triplet {
        #[arg(long)]
        line: Option<String>,
        #[arg(long)]
        lambda_nm: Option<f64>,
        #[arg(long, value_parser = parse_arm)]
        arm: Option<Arm>,
    },
    /// Threshold, pair rates and output power over a pump-power sweep.
    Opo,
    /// Retune the signal by a frequency offset with a second mechanism.
    Tune {
        #[arg(long, allow_hyphen_values = true)]
        target_mhz: Option<f64>,
        /// `substrate`, `electrooptic`, `none` or a mechanism file.
        #[arg(long)]
        mechanism: Option<String>,
        #[arg(long)]
        line: Option<String>,
    },
    /// Fit a coincidence histogram (`time_ns,counts`).
    Corrfit {
        histogram: Option<PathBuf>,
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        /// Fit a Poisson histogram drawn from the configured model instead of a file.
        #[arg(long, conflicts_with = "histogram")]
        simulate: bool,
    },
}

fn parse_arm(s: &str) -> Result<Arm, String> {
    match s {
        "signal" => Ok(Arm::Signal),
        "idler" => Ok(Arm::Idler),
        _ => Err(format!("expected signal or idler, got '{s}'")),
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: wgmopo_core::Error| e.to_string())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum => "spectrum",
        Command::Channels => "channels",
        Command::Map => "map",
        Command::Triplet { .. } => "triplet",
        Command::Opo => "opo",
        Command::Tune { .. } => "tune",
        Command::Corrfit { .. } => "corrfit",
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_toml_str(&read(p)?, p.parent().unwrap_or(Path::new(".")))?,
        None => RunConfig::default(),
    };
    if let Some(m) = &cli.material {
        cfg.material = Some(m.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match &cli.command {
        Command::Triplet { line, lambda_nm, arm } => {
            if line.is_some() || lambda_nm.is_some() {
                cfg.triplet.line = line.clone();
                cfg.triplet.lambda_nm = *lambda_nm;
            }
            if let Some(a) = arm {
                cfg.triplet.arm = *a;
            }
        }
        Command::Tune { target_mhz, mechanism, line } => {
            if let Some(t) = target_mhz {
                cfg.tune.target_mhz = vec![*t];
            }
            if let Some(m) = mechanism {
                cfg.tune.mechanism = m.clone();
            }
            if let Some(l) = line {
                cfg.triplet.line = Some(l.clone());
                cfg.triplet.lambda_nm = None;
            }
        }
        Command::Corrfit { histogram, family, .. } => {
            if let Some(h) = histogram {
                cfg.corrfit.histogram = Some(h.clone());
            }
            if let Some(f) = family {
                cfg.corrfit.family = *f;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = load_config(&cli)?;
    let material_text = match &cfg.material {
        Some(p) => read(p)?,
        None => MaterialModel::default_asset().to_string(),
    };
    let material = MaterialModel::from_toml_str(&material_text)?;
    let config_json = serde_json::to_value(&cfg).expect("config serializes");
    let provenance = Provenance {
        tool: "wgmopo",
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command),
        config_sha256: sha256_hex(config_json.to_string().as_bytes()),
        material_sha256: sha256_hex(material_text.as_bytes()),
        seed: cfg.seed,
    };
    let histogram = match &cli.command {
        Command::Corrfit { simulate: false, .. } => {
            let path = cfg
                .corrfit
                .histogram
                .clone()
                .ok_or_else(|| CliError::Config("corrfit needs a histogram path or --simulate".into()))?;
            Some(Histogram::parse(&read(&path)?)?)
        }
        _ => None,
    };
    let ctx = Context::new(cfg, material)?;
    let mut out = Emitter::new(&cli.out, cli.format, provenance, config_json)?;
    let result = match &cli.command {
        Command::Spectrum => commands::spectrum(&ctx, &mut out),
        Command::Channels => commands::channels(&ctx, &mut out),
        Command::Map => commands::map(&ctx, &mut out),
        Command::Triplet { .. } => commands::triplet(&ctx, &mut out),
        Command::Opo => commands::opo(&ctx, &mut out),
        Command::Tune { .. } => commands::tune(&ctx, &mut out),
        Command::Corrfit { .. } => {
            let h = match histogram {
                Some(h) => h,
                None => commands::simulate_histogram(&ctx)?,
            };
            commands::corrfit(&ctx, &h, &mut out)
        }
    };
    for p in &out.written {
        eprintln!("wrote {}", p.display());
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wgmopo: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
