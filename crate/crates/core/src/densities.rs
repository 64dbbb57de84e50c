//! Unnormalized log densities on model space and on the augmented
//! model/data space. Normalizing constants are dropped everywhere; they
//! cancel in the Metropolis-Hastings ratio.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// Modelization split `γ` used by the joint target and partitioning
/// parameter `ρ` used by the proposal objective. Both lie strictly in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    gamma: f64,
    rho: f64,
}

impl HyperParams {
    pub fn new(gamma: f64, rho: f64) -> Result<Self> {
        check_open_unit("gamma", gamma)?;
        check_open_unit("rho", rho)?;
        Ok(Self { gamma, rho })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie strictly between 0 and 1, got {v}"),
        })
    }
}

/// `−½(x−μ)ᵀC_x⁻¹(x−μ) − ½(g(x)−d_obs)ᵀC_d⁻¹(g(x)−d_obs)`.
pub fn log_target_marginal(p: &ProblemSpec, x: &DVector<f64>) -> Result<f64> {
    p.check_x(x)?;
    let gx = p.g(x)?;
    Ok(-0.5 * p.prior_cov.quad_form(&(x - &p.prior_mean)) - 0.5 * p.obs_cov.quad_form(&(gx - &p.obs)))
}

/// Joint target over `(x, d)` with modelization error `γ C_d` and
/// observation error `(1−γ) C_d`. Its `x`-marginal is
/// [`log_target_marginal`] for every `γ`.
pub fn log_target_joint(p: &ProblemSpec, h: &HyperParams, x: &DVector<f64>, d: &DVector<f64>) -> Result<f64> {
    p.check_x(x)?;
    p.check_d(d)?;
    let gx = p.g(x)?;
    Ok(joint_from_parts(p, h, x, d, &gx))
}

pub(crate) fn joint_from_parts(
    p: &ProblemSpec,
    h: &HyperParams,
    x: &DVector<f64>,
    d: &DVector<f64>,
    gx: &DVector<f64>,
) -> f64 {
    let gamma = h.gamma();
    -0.5 * p.prior_cov.quad_form(&(x - &p.prior_mean))
        - 0.5 / gamma * p.obs_cov.quad_form(&(gx - d))
        - 0.5 / (1.0 - gamma) * p.obs_cov.quad_form(&(d - &p.obs))
}

/// Joint Gaussian density of the unconditional draw `(x_uc, d_uc)`.
pub fn log_prior_joint(p: &ProblemSpec, x_uc: &DVector<f64>, d_uc: &DVector<f64>) -> Result<f64> {
    p.check_x(x_uc)?;
    p.check_d(d_uc)?;
    Ok(-0.5 * p.prior_cov.quad_form(&(x_uc - &p.prior_mean)) - 0.5 * p.obs_cov.quad_form(&(d_uc - &p.obs)))
}
