use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use noslip::config::{config_from_header, header_lines, parse_config, Mode, RunConfig};
use noslip::csvio::{read_table, write_trace};
use noslip::error::{exit, AppError, AppResult};
use noslip::experiments::{run_and_write, ExperimentName, ExperimentSpec};
use noslip::plot::{heatmap, line_plot};
use noslip::run::{check, simulate};

/// Environment variable overriding the output directory.
const OUT_ENV: &str = "NOSLIP_OUT_DIR";

#[derive(Parser)]
#[command(name = "noslip", version, about = "No-slip and rolling billiard simulations")]
struct Cli {
    /// Output directory (overrides the config and the NOSLIP_OUT_DIR variable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use no random numbers anywhere (the invariant suite samples a fixed sequence).
    #[arg(long, global = true)]
    seedless: bool,
    /// Integrator tolerances as REL,ABS.
    #[arg(long, global = true, value_parser = parse_tol)]
    tol: Option<(f64, f64)>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a configuration and write its trace as CSV.
    Simulate { config: PathBuf },
    /// Run a named experiment (reference parameters unless a config overrides them).
    Experiment { name: String, config: Option<PathBuf> },
    /// Run the invariant suite for a configuration.
    Check { config: PathBuf },
    /// Render a CSV file as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = "t")]
        x: String,
        #[arg(long, default_value = "x3")]
        y: String,
        /// Column whose values separate the curves.
        #[arg(long)]
        group: Option<String>,
        /// Draw a heatmap of this column over the (x, y) grid instead.
        #[arg(long)]
        heat: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_tol(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected REL,ABS")?;
    let r: f64 = a.trim().parse().map_err(|_| format!("bad relative tolerance {a:?}"))?;
    let t: f64 = b.trim().parse().map_err(|_| format!("bad absolute tolerance {b:?}"))?;
    if !(r > 0.0 && t > 0.0 && r.is_finite() && t.is_finite()) {
        return Err("tolerances must be positive".into());
    }
    Ok((r, t))
}

fn read_config(path: &Path) -> AppResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "csv") {
        config_from_header(&text)
    } else {
        parse_config(&text)
    }
}

fn out_dir(cli: &Cli, cfg: Option<&RunConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn with_tol(mut cfg: RunConfig, tol: Option<(f64, f64)>) -> RunConfig {
    if let Some((r, a)) = tol {
        cfg.integrator.rel_tol = Some(r);
        cfg.integrator.abs_tol = Some(a);
    }
    cfg
}

fn run(cli: &Cli) -> AppResult<()> {
    match &cli.cmd {
        Cmd::Simulate { config } => {
            let cfg = with_tol(read_config(config)?, cli.tol);
            let res = cfg.resolve()?;
            if cfg.mode == Mode::Experiment {
                let spec = res.experiment.clone().expect("resolved experiment");
                let w = run_and_write(&spec, &out_dir(cli, Some(&cfg)), cli.tol)?;
                info!("wrote {}", w.summary.display());
                return Ok(());
            }
            let sim = simulate(&res)?;
            let path = out_dir(cli, Some(&cfg)).join(format!("{}.csv", stem(config)));
            write_trace(&sim.trace, &header_lines(&res), &path)?;
            info!("wrote {} rows to {}", sim.trace.len(), path.display());
            match sim.termination {
                Some(e) => {
                    warn!("run ended early: {e}");
                    Err(e.into())
                }
                None => Ok(()),
            }
        }
        Cmd::Experiment { name, config } => {
            let name: ExperimentName = name.parse()?;
            let (spec, cfg) = match config {
                Some(p) => {
                    let cfg = read_config(p)?;
                    let ov = cfg.experiment.clone().unwrap_or_else(|| ExperimentSpec::defaults(name).to_overrides());
                    if ov.name != name {
                        return Err(AppError::Parse(format!("config describes experiment {:?}", ov.name.as_str())));
                    }
                    (ExperimentSpec::from_overrides(&ov)?, Some(cfg))
                }
                None => (ExperimentSpec::defaults(name), None),
            };
            let w = run_and_write(&spec, &out_dir(cli, cfg.as_ref()), cli.tol)?;
            if let Some(s) = &w.series {
                println!("{}", s.display());
            }
            println!("{}", w.summary.display());
            Ok(())
        }
        Cmd::Check { config } => {
            let res = with_tol(read_config(config)?, cli.tol).resolve()?;
            let lines = check(&res, cli.seedless)?;
            let mut failed = Vec::new();
            for l in &lines {
                let tag = if l.pass() { "ok  " } else { "FAIL" };
                println!("{tag} {:<28} {:.3e} (tol {:.0e})", l.name, l.value, l.tol);
                if !l.pass() {
                    failed.push(l.name.clone());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(AppError::Check(failed.join(", ")))
            }
        }
        Cmd::Plot { csv, x, y, group, heat, output } => {
            let (_, cols, rows) = read_table(csv)?;
            let svg = match heat {
                Some(z) => heatmap(&cols, &rows, x, y, z)?,
                None => line_plot(&cols, &rows, x, y, group.as_deref())?,
            };
            let path = output.clone().unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&path, svg).map_err(|e| AppError::io(&path, e))?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
