use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{HarnessError, Result};
use crate::results::{print_summary, summarize, write_rows_file, write_summary};

#[derive(Debug, Parser)]
#[command(name = "fairshift", version, about = "Fair risk minimization under subpopulation shift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthetic sweep over the training minority mass.
    Simulate(CommonArgs),
    /// Counterexample check and threshold sweep.
    Geometry(CommonArgs),
    /// Repeated runs on a tabular dataset (COMPAS, Adult or custom).
    Tabular(CommonArgs),
    /// Recovery verdict for supplied profiles and marginals.
    Audit(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML config file; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides the config); 0 picks automatically.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Command {
    pub fn parts(&self) -> (Mode, &CommonArgs) {
        match self {
            Command::Simulate(a) => (Mode::Simulate, a),
            Command::Geometry(a) => (Mode::Geometry, a),
            Command::Tabular(a) => (Mode::Tabular, a),
            Command::Audit(a) => (Mode::Audit, a),
        }
    }
}

/// Config file plus command-line overrides, validated for `mode`.
pub fn resolve_config(mode: Mode, args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    // relative paths inside a config file are taken from the file's directory
    if let Some(base) = args.config.as_deref().and_then(Path::parent) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.geometry.counterexample.as_mut() {
            fix(p);
        }
        cfg.geometry.sweep_files.iter_mut().for_each(fix);
        if let Some(p) = cfg.tabular.path.as_mut() {
            fix(p);
        }
        for p in [&mut cfg.audit.instance, &mut cfg.audit.profiles, &mut cfg.audit.p_star, &mut cfg.audit.p_tilde]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }
    cfg.validate(mode)?;
    Ok(cfg)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Runs one subcommand and writes its outputs into the configured directory.
pub fn run(mode: Mode, cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    let out = cfg.out.as_path();
    match mode {
        Mode::Simulate | Mode::Tabular => {
            let rows = pool(cfg.workers)?.install(|| match mode {
                Mode::Simulate => crate::simulate::run_simulate(cfg),
                _ => crate::tabular::run_tabular(cfg),
            })?;
            write_rows_file(&out.join("results.csv"), &rows)?;
            let summary = summarize(&rows);
            write_summary(std::fs::File::create(out.join("summary.csv"))?, &summary)?;
            print_summary(&format!("{} (mean ± sd over repetitions)", mode.name()), &summary);
        }
        Mode::Geometry => {
            let report = pool(cfg.workers)?.install(|| crate::geometry::run_geometry(cfg))?;
            crate::geometry::write_geometry(&report, out)?;
            let c = &report.counterexample;
            println!(
                "counterexample {}: target risk {:.6} unconstrained vs {:.6} fair -> {}",
                c.source,
                c.target_risk,
                c.target_risk_fair,
                if c.holds { "HARM" } else { "not reproduced" }
            );
            let n_ok = report.crossings.iter().filter(|c| c.consistent).count();
            println!("threshold sweep: {n_ok}/{} instances consistent", report.crossings.len());
            let failures = report.failures();
            if !failures.is_empty() {
                return Err(HarnessError::Assertion(failures.join("; ")));
            }
        }
        Mode::Audit => {
            let report = crate::audit::run_audit(&cfg.audit)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            std::fs::write(out.join("audit.json"), &text)?;
            print!("{text}");
        }
    }
    Ok(())
}
