use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::config::{build_config, canonical_key, parse_config};
use super::output::{
    write_coefficients_csv, write_energy_csv, write_error_report_csv, write_manifest,
    write_simulation_csv, write_stability_csv, Manifest,
};
use super::runs::{run_convergence, run_energy_trace, run_stability_report, simulate};
use super::RunConfig;
use crate::error::{Error, Result};
use crate::stability::GrowthProbe;

#[derive(Parser, Debug)]
#[command(
    name = "ltswave",
    version,
    about = "Local time-stepping for the damped wave equation in 1-D"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// L2 errors and observed rates over a sequence of coarse mesh sizes.
    Converge(Common),
    /// Largest stable step ratios for each refinement ratio and overlap.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Comma-separated refinement ratios (default: --p).
        #[arg(long)]
        p_list: Option<String>,
        /// Comma-separated overlaps (default: --overlap).
        #[arg(long)]
        e_list: Option<String>,
    },
    /// Discrete energy after every step of LTS-LF2 or LTS-LFCN2.
    Energy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Final-time field on the first mesh.
    Simulate(Common),
    /// Exact alpha, beta, gamma and alpha_j^p tables.
    Coeffs {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[command(flatten)]
        io: Outputs,
    },
}

#[derive(Args, Debug)]
struct Outputs {
    /// CSV destination (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON manifest destination (default: `<out>.json` when --out is given).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    /// Plain-text `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cg, ipdg or nodal-dg.
    #[arg(long)]
    disc: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    /// lf2, lfme4, lfcn2, ab (with --k) or ab2..ab4.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// Comma-separated coarse mesh sizes, coarsest first.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Interior-penalty parameter.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Explicit time step.
    #[arg(long, conflicts_with = "dt_fraction")]
    dt: Option<f64>,
    /// Time step as a fraction of the global scheme's reference step.
    #[arg(long)]
    dt_fraction: Option<f64>,
    /// upwind or central (nodal DG).
    #[arg(long)]
    flux: Option<String>,
    #[command(flatten)]
    io: Outputs,
}

impl Common {
    fn settings(&self) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(canonical_key(k), v);
            }
        };
        set("disc", self.disc.clone());
        set("order", self.order.map(|v| v.to_string()));
        set("scheme", self.scheme.clone());
        set("k", self.k.map(|v| v.to_string()));
        set("p", self.p.map(|v| v.to_string()));
        set("overlap", self.overlap.map(|v| v.to_string()));
        set("h", self.h.clone());
        set("sigma", self.sigma.map(|v| v.to_string()));
        set("c", self.c.map(|v| v.to_string()));
        set("penalty", self.penalty.map(|v| v.to_string()));
        set("t_final", self.t_final.map(|v| v.to_string()));
        set("dt", self.dt.map(|v| v.to_string()));
        set("dt_fraction", self.dt_fraction.map(|v| v.to_string()));
        set("flux", self.flux.clone());
        if self.dt.is_some() {
            map.remove("dt_fraction");
        }
        if self.dt_fraction.is_some() {
            map.remove("dt");
        }
        Ok(map)
    }
}

/// Entry point of the `ltswave` binary. Returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ltswave: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::Converge(common) => {
            let (cfg, extras) = build_config(&common.settings()?)?;
            reject_extras(
                extras.steps.is_some() || extras.p_list.is_some() || extras.e_list.is_some(),
            )?;
            let report = run_convergence(&cfg)?;
            let mut csv = Vec::new();
            write_error_report_csv(&mut csv, &report)?;
            let summary =
                json!({ "fitted_rate": report.fitted_rate, "min_rate": report.min_rate() });
            emit(
                &common.io,
                "converge",
                Some(&cfg),
                json!({}),
                csv,
                summary,
                start,
            )
        }
        Command::Stability {
            common,
            p_list,
            e_list,
        } => {
            let mut map = common.settings()?;
            if let Some(v) = p_list {
                map.insert("p_list".into(), v);
            }
            if let Some(v) = e_list {
                map.insert("e_list".into(), v);
            }
            let (cfg, extras) = build_config(&map)?;
            reject_extras(extras.steps.is_some())?;
            let ps = extras.p_list.unwrap_or_else(|| vec![cfg.p]);
            let es = extras.e_list.unwrap_or_else(|| vec![cfg.overlap]);
            let scans = run_stability_report(&cfg, &ps, &es)?;
            let mut csv = Vec::new();
            write_stability_csv(&mut csv, &scans)?;
            let summary: Vec<_> = scans
                .iter()
                .map(|s| json!({ "p": s.p, "overlap": s.overlap, "nu_max": s.nu_max, "monotone": s.monotone }))
                .collect();
            let params = json!({ "p_list": ps, "e_list": es });
            emit(
                &common.io,
                "stability",
                Some(&cfg),
                params,
                csv,
                json!(summary),
                start,
            )
        }
        Command::Energy { common, steps } => {
            let mut map = common.settings()?;
            if let Some(n) = steps {
                map.insert("steps".into(), n.to_string());
            }
            let (cfg, extras) = build_config(&map)?;
            reject_extras(extras.p_list.is_some() || extras.e_list.is_some())?;
            let n = extras.steps.unwrap_or(10_000);
            let trace = run_energy_trace(&cfg, n)?;
            let mut csv = Vec::new();
            write_energy_csv(&mut csv, &trace)?;
            let summary = json!({
                "dt": trace.dt,
                "max_relative_drift": trace.max_relative_drift(),
                "max_relative_increase": trace.max_relative_increase(),
            });
            emit(
                &common.io,
                "energy",
                Some(&cfg),
                json!({ "steps": n }),
                csv,
                summary,
                start,
            )
        }
        Command::Simulate(common) => {
            let (cfg, extras) = build_config(&common.settings()?)?;
            reject_extras(
                extras.steps.is_some() || extras.p_list.is_some() || extras.e_list.is_some(),
            )?;
            let sim = simulate(&cfg)?;
            let mut csv = Vec::new();
            write_simulation_csv(&mut csv, &sim)?;
            let summary =
                serde_json::to_value(&sim.summary).map_err(|e| Error::Output(e.to_string()))?;
            emit(
                &common.io,
                "simulate",
                Some(&cfg),
                json!({}),
                csv,
                summary,
                start,
            )
        }
        Command::Coeffs { k, p, io } => {
            let mut csv = Vec::new();
            write_coefficients_csv(&mut csv, k, p)?;
            emit(
                &io,
                "coeffs",
                None,
                json!({ "k": k, "p": p }),
                csv,
                serde_json::Value::Null,
                start,
            )
        }
    }
}

fn reject_extras(present: bool) -> Result<()> {
    if present {
        return Err(Error::input("setting not used by this subcommand"));
    }
    Ok(())
}

fn manifest_path(io: &Outputs) -> Option<PathBuf> {
    io.manifest.clone().or_else(|| {
        io.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    })
}

fn emit(
    io: &Outputs,
    command: &str,
    cfg: Option<&RunConfig>,
    parameters: serde_json::Value,
    csv: Vec<u8>,
    summary: serde_json::Value,
    start: Instant,
) -> Result<()> {
    let mut outputs = Vec::new();
    match &io.out {
        Some(path) => {
            write_file(path, &csv)?;
            outputs.push(path.display().to_string());
        }
        None => std::io::stdout().lock().write_all(&csv)?,
    }
    if let Some(path) = manifest_path(io) {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: cfg,
            parameters,
            seed: GrowthProbe::default().seeds[0],
            outputs,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            summary,
        };
        let mut buf = Vec::new();
        write_manifest(&mut buf, &manifest)?;
        write_file(&path, &buf)?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(Error::from)
}
