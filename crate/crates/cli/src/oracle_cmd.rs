//! `rml oracle`: quadrature ground truth on a grid.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Result};
use rml_core::oracle::{grid_joint_proposal, grid_joint_target, mean_conditional_sd, GridAxis, GridDensity};
use rml_core::{HyperParams, ProblemSpec};
use serde::Serialize;

use crate::config::RunConfig;
use crate::run::model_grid;

pub struct OracleArgs {
    pub joint: bool,
    pub gammas: Vec<f64>,
    pub rhos: Vec<f64>,
}

#[derive(Serialize)]
struct ModeReport {
    problem: String,
    n_modes: usize,
    modes: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

#[derive(Serialize)]
struct JointReport {
    gammas: Vec<f64>,
    /// Average standard deviation of `d` given `x`; `sqrt(γ(1−γ)C_d)` for
    /// a linear model, so it peaks at γ = 0.5.
    mean_conditional_sd: Vec<f64>,
    /// Correlation of `x` and `d` under the joint target.
    correlation: Vec<f64>,
    /// Whether `|correlation|` falls as γ grows.
    dependence_decreasing: bool,
    rhos: Vec<f64>,
}

fn write_grid(g: &GridDensity, path: &Path) -> Result<()> {
    g.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn cmd_oracle(cfg: &RunConfig, args: &OracleArgs) -> Result<()> {
    let p = cfg.problem_spec()?;
    if p.dim_x() > 2 {
        bail!("unsupported dimension: grid quadrature needs at most 2 model variables, {} has {}", p.name, p.dim_x());
    }
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;

    let grid = model_grid(cfg, &p)?;
    write_grid(&grid, &dir.join("marginal.csv"))?;
    let modes = grid.find_modes();
    let report = ModeReport {
        problem: p.name.clone(),
        n_modes: modes.len(),
        modes: modes.iter().map(|m| grid.coords(*m)).collect(),
        masses: grid.mode_masses(),
    };
    println!("{}: {} mode(s)", p.name, report.n_modes);
    for (c, m) in report.modes.iter().zip(&report.masses) {
        let coords: Vec<String> = c.iter().map(|v| format!("{v:.4}")).collect();
        println!("  mode at ({}) with mass {m:.4}", coords.join(", "));
    }
    fs::write(dir.join("modes.json"), serde_json::to_string_pretty(&report)?)?;

    if args.joint {
        joint_grids(&p, cfg.output.grid_nodes, args, dir)?;
    }
    Ok(())
}

/// `(x, d)` axes: prior mean ± 6σ for `x`; for `d`, the range of `g` over
/// the `x` axis widened by 6 data standard deviations.
fn joint_axes(p: &ProblemSpec, n: usize) -> Result<(GridAxis, GridAxis)> {
    let sx = p.prior_cov.matrix()[(0, 0)].sqrt();
    let xa = GridAxis::new(p.prior_mean[0] - 6.0 * sx, p.prior_mean[0] + 6.0 * sx, n)?;
    let (mut lo, mut hi) = (p.obs[0], p.obs[0]);
    for i in 0..n {
        let g = p.g(&nalgebra::DVector::from_element(1, xa.coord(i)))?[0];
        lo = lo.min(g);
        hi = hi.max(g);
    }
    let sd = p.obs_cov.matrix()[(0, 0)].sqrt();
    Ok((xa, GridAxis::new(lo - 6.0 * sd, hi + 6.0 * sd, n)?))
}

fn joint_grids(p: &ProblemSpec, n: usize, args: &OracleArgs, dir: &Path) -> Result<()> {
    if p.dim_x() != 1 || p.dim_d() != 1 {
        bail!(
            "unsupported dimension: joint (x, d) grids need one model and one data variable, {} has {} and {}",
            p.name,
            p.dim_x(),
            p.dim_d()
        );
    }
    let (xa, da) = joint_axes(p, n)?;
    let mut sds = Vec::new();
    let mut corrs = Vec::new();
    for &gamma in &args.gammas {
        let h = HyperParams::new(gamma, 0.5)?;
        let g = grid_joint_target(p, &h, xa, da)?;
        write_grid(&g, &dir.join(format!("joint_gamma_{gamma}.csv")))?;
        let sd = mean_conditional_sd(&g);
        let c = g.covariance();
        let corr = c[(0, 1)] / (c[(0, 0)] * c[(1, 1)]).sqrt();
        println!("joint target, gamma {gamma}: correlation of x and d {corr:.5}, mean conditional sd of d given x {sd:.5}");
        sds.push(sd);
        corrs.push(corr);
    }
    for &rho in &args.rhos {
        let h = HyperParams::new(0.5, rho)?;
        let g = grid_joint_proposal(p, &h, xa, da)?;
        write_grid(&g, &dir.join(format!("proposal_rho_{rho}.csv")))?;
        println!("proposal density, rho {rho}: written");
    }
    let decreasing = corrs.windows(2).all(|w| w[1].abs() < w[0].abs());
    if !corrs.is_empty() {
        println!("x and d become less dependent as gamma grows: {decreasing}");
    }
    let report = JointReport {
        gammas: args.gammas.clone(),
        mean_conditional_sd: sds,
        correlation: corrs,
        dependence_decreasing: decreasing,
        rhos: args.rhos.clone(),
    };
    fs::write(dir.join("joint.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(())
}
