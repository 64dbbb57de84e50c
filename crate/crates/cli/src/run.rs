//! `rml run`: one or more chains from a config file, with their artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rml_core::oracle::{compare_samples_to_grid, default_axes, grid_marginal, GridAxis, GridDensity};
use rml_core::output::{fmt_real, write_summary_json, write_trace_csv, RunSummary};
use rml_core::rng::derive_chain_seed;
use rml_core::sampler::{run_chain_augmented, run_chain_legacy_1d, Algorithm};
use rml_core::{ChainRecord, ProblemSpec};

use crate::config::RunConfig;

pub struct RunArgs {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub chains: usize,
}

/// Per-chain outcome reported back to the caller.
pub struct ChainOutcome {
    pub dir: PathBuf,
    pub seed: u64,
    pub result: std::result::Result<RunSummary, String>,
}

pub fn apply_overrides(cfg: &mut RunConfig, args: &RunArgs) {
    if let Some(s) = args.seed {
        cfg.chain.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
}

/// Runs every requested chain. A failing chain leaves an `error.json` in its
/// directory and does not stop the others.
pub fn cmd_run(mut cfg: RunConfig, args: &RunArgs) -> Result<Vec<ChainOutcome>> {
    apply_overrides(&mut cfg, args);
    let problem = cfg.problem_spec()?;
    let root = cfg.output.dir.clone();
    fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;

    let grid = if problem.dim_x() <= 2 {
        let g = model_grid(&cfg, &problem)?;
        let f = File::create(root.join("grid.csv"))?;
        g.write_csv(BufWriter::new(f))?;
        Some(g)
    } else {
        None
    };

    let mut outcomes = Vec::new();
    for i in 0..args.chains.max(1) {
        let mut chain_cfg = cfg.clone();
        let dir = if args.chains > 1 {
            chain_cfg.chain.seed = derive_chain_seed(cfg.chain.seed, i as u64);
            root.join(format!("chain_{i}"))
        } else {
            root.clone()
        };
        chain_cfg.output.dir = dir.clone();
        fs::create_dir_all(&dir)?;
        let seed = chain_cfg.chain.seed;
        let result = run_one(&chain_cfg, &problem, grid.as_ref(), &dir).map_err(|e| {
            let msg = format!("{e:#}");
            let body = serde_json::json!({ "error": msg, "seed": seed });
            let _ = fs::write(dir.join("error.json"), serde_json::to_string_pretty(&body).unwrap_or_default());
            msg
        });
        outcomes.push(ChainOutcome { dir, seed, result });
    }
    Ok(outcomes)
}

/// Marginal target on the configured grid.
pub fn model_grid(cfg: &RunConfig, p: &ProblemSpec) -> Result<GridDensity> {
    let n = cfg.output.grid_nodes;
    let axes = match (&cfg.output.grid_lo, &cfg.output.grid_hi) {
        (None, None) => default_axes(p, n)?,
        (lo, hi) => {
            let defaults = default_axes(p, n)?;
            defaults
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let l = lo.as_ref().map_or(a.lo, |v| v[i]);
                    let h = hi.as_ref().map_or(a.hi, |v| v[i]);
                    GridAxis::new(l, h, n)
                })
                .collect::<rml_core::Result<Vec<_>>>()?
        }
    };
    Ok(grid_marginal(p, &axes)?)
}

fn run_one(cfg: &RunConfig, p: &ProblemSpec, grid: Option<&GridDensity>, dir: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let c = &cfg.chain;
    let record: ChainRecord = match c.algorithm {
        Algorithm::Augmented => run_chain_augmented(p, &cfg.hyper()?, &cfg.optimizer, c.n_steps, c.seed, c.jacobian)?,
        Algorithm::Legacy1d => run_chain_legacy_1d(p, &cfg.optimizer, c.n_steps, c.seed, c.quadrature)?,
    };
    let wall = start.elapsed().as_secs_f64();

    let mut w = BufWriter::new(File::create(dir.join("trace.csv"))?);
    write_trace_csv(&record, &mut w)?;
    w.flush()?;

    let summary = RunSummary::from_record(&record, wall, serde_json::to_value(cfg)?);
    let mut w = BufWriter::new(File::create(dir.join("summary.json"))?);
    write_summary_json(&summary, &mut w)?;
    w.flush()?;

    if let Some(g) = grid {
        let samples = record.samples(c.discard_prefix);
        let report = compare_samples_to_grid(&samples, g, cfg.output.histogram_bins)?;
        write_histogram_csv(g, cfg.output.histogram_bins, &report.histogram, &report.bin_masses, dir.join("histogram.csv"))?;
        println!(
            "{}: TV distance to quadrature {:.4} ({} bins per axis, {} samples)",
            dir.display(),
            report.tv_distance,
            cfg.output.histogram_bins,
            samples.len()
        );
    }
    Ok(summary)
}

/// One row per bin: bin indices, bin edges, sample fraction and grid mass.
fn write_histogram_csv(g: &GridDensity, bins: usize, hist: &[f64], masses: &[f64], path: PathBuf) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let dim = g.dim();
    let mut header = Vec::new();
    for k in 1..=dim {
        header.push(format!("bin_{k}"));
    }
    for k in 1..=dim {
        header.push(format!("x_{k}_lo"));
        header.push(format!("x_{k}_hi"));
    }
    header.push("sample_fraction".into());
    header.push("grid_mass".into());
    writeln!(w, "{}", header.join(","))?;
    for (flat, (h, m)) in hist.iter().zip(masses).enumerate() {
        let idx: Vec<usize> = if dim == 1 { vec![flat] } else { vec![flat / bins, flat % bins] };
        let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        for (i, a) in idx.iter().zip(&g.axes) {
            let width = (a.hi - a.lo) / bins as f64;
            row.push(fmt_real(a.lo + width * *i as f64));
            row.push(fmt_real(a.lo + width * (*i + 1) as f64));
        }
        row.push(fmt_real(*h));
        row.push(fmt_real(*m));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}
