//! RML candidates and their density.
//!
//! A candidate `(x*, d*)` is the minimizer of the augmented objective for an
//! unconditional draw `(x_uc, d_uc)`. The stationarity conditions give the
//! inverse map explicitly,
//!
//! ```text
//! x_uc = x* + (1/ρ) C_x Gᵀ C_d⁻¹ (g(x*) − d*)
//! d_uc = (1/ρ) d* − ((1−ρ)/ρ) g(x*)
//! ```
//!
//! so the proposal density is the prior density of the pre-image times the
//! absolute Jacobian determinant of this map.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densities::{joint_from_parts, log_prior_joint, HyperParams};
use crate::error::{Error, Result};
use crate::linalg::log_abs_det;
use crate::model::ProblemSpec;
use crate::optimizer::{minimize, OptResult, OptSettings};

/// How the Jacobian of the inverse map enters the Metropolis-Hastings test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    /// Exact Jacobian, including the residual-weighted second-derivative term.
    Full,
    /// Drops the second-derivative term.
    GaussNewton,
    /// No Jacobian and no MH test: every converged candidate is accepted.
    None,
}

impl JacobianMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            JacobianMode::Full => "full",
            JacobianMode::GaussNewton => "gauss-newton",
            JacobianMode::None => "none",
        }
    }
}

impl fmt::Display for JacobianMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JacobianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(JacobianMode::Full),
            "gauss-newton" => Ok(JacobianMode::GaussNewton),
            "none" => Ok(JacobianMode::None),
            other => Err(Error::InvalidParameter {
                name: "jacobian",
                reason: format!("expected full, gauss-newton or none, got {other:?}"),
            }),
        }
    }
}

/// The four blocks of `∂(x_uc, d_uc)/∂(x*, d*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBlocks {
    pub dxuc_dxstar: DMatrix<f64>,
    pub dxuc_ddstar: DMatrix<f64>,
    pub dduc_dxstar: DMatrix<f64>,
    pub dduc_ddstar: DMatrix<f64>,
}

impl JacobianBlocks {
    pub fn assemble(&self) -> DMatrix<f64> {
        let nx = self.dxuc_dxstar.nrows();
        let nd = self.dduc_ddstar.nrows();
        let mut m = DMatrix::zeros(nx + nd, nx + nd);
        m.view_mut((0, 0), (nx, nx)).copy_from(&self.dxuc_dxstar);
        m.view_mut((0, nx), (nx, nd)).copy_from(&self.dxuc_ddstar);
        m.view_mut((nx, 0), (nd, nx)).copy_from(&self.dduc_dxstar);
        m.view_mut((nx, nx), (nd, nd)).copy_from(&self.dduc_ddstar);
        m
    }
}

/// Outcome of a single proposal attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProposalStatus {
    Valid,
    /// The optimizer did not reach a stationary point (or the forward model
    /// failed along the way).
    NotConverged,
    /// The transformation Jacobian is exactly singular at the candidate.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateState {
    /// The unconditional draw that produced this candidate.
    pub x_uc: DVector<f64>,
    pub d_uc: DVector<f64>,
    pub x_star: DVector<f64>,
    pub d_star: DVector<f64>,
    /// Unnormalized `log q(x*, d*)`; NaN when no density was computed.
    pub log_q: f64,
    pub log_pi_joint: f64,
    /// NaN when no determinant was computed.
    pub log_abs_det_j: f64,
    /// Mode used for the density; `None` for failed candidates and for
    /// runs without an MH test.
    pub jacobian_mode: JacobianMode,
    pub status: ProposalStatus,
    pub opt: OptResult,
}

impl CandidateState {
    pub fn is_valid(&self) -> bool {
        self.status == ProposalStatus::Valid
    }
}

/// `(x*, d*) ↦ (x_uc, d_uc)`.
pub fn inverse_transform(
    p: &ProblemSpec,
    h: &HyperParams,
    x_star: &DVector<f64>,
    d_star: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    p.check_x(x_star)?;
    p.check_d(d_star)?;
    let rho = h.rho();
    let gx = p.g(x_star)?;
    let jac = p.jacobian(x_star)?;
    let w = p.obs_cov.solve(&(&gx - d_star));
    let x_uc = x_star + p.prior_cov.matrix() * (jac.transpose() * w) / rho;
    let d_uc = d_star / rho - gx * ((1.0 - rho) / rho);
    Ok((x_uc, d_uc))
}

/// Jacobian blocks of [`inverse_transform`] at `(x*, d*)`.
pub fn jacobian_blocks(
    p: &ProblemSpec,
    h: &HyperParams,
    x_star: &DVector<f64>,
    d_star: &DVector<f64>,
    mode: JacobianMode,
) -> Result<JacobianBlocks> {
    p.check_x(x_star)?;
    p.check_d(d_star)?;
    let rho = h.rho();
    let (nx, nd) = (p.dim_x(), p.dim_d());
    let jac = p.jacobian(x_star)?;
    let cx = p.prior_cov.matrix();
    // C_d⁻¹ G and Gᵀ C_d⁻¹ G
    let cd_inv_g = p.obs_cov.solve_matrix(&jac);
    let mut curvature = jac.transpose() * &cd_inv_g;
    match mode {
        JacobianMode::Full => {
            let gx = p.g(x_star)?;
            let w = p.obs_cov.solve(&(gx - d_star));
            let second = p
                .forward
                .second_derivative(x_star)
                .ok_or(Error::SecondDerivativeUnavailable)??;
            curvature += second.contract(&w);
        }
        JacobianMode::GaussNewton => {}
        JacobianMode::None => {
            return Err(Error::InvalidParameter {
                name: "jacobian",
                reason: "blocks are defined only for full and gauss-newton modes".into(),
            })
        }
    }
    Ok(JacobianBlocks {
        dxuc_dxstar: DMatrix::identity(nx, nx) + cx * curvature / rho,
        dxuc_ddstar: -(cx * cd_inv_g.transpose()) / rho,
        dduc_dxstar: -jac * ((1.0 - rho) / rho),
        dduc_ddstar: DMatrix::identity(nd, nd) / rho,
    })
}

/// `log |det J|` of the assembled block matrix.
pub fn log_abs_det_jacobian(b: &JacobianBlocks) -> Result<f64> {
    log_abs_det(b.assemble()).ok_or(Error::SingularJacobian)
}

/// Unnormalized proposal log-density at `(x*, d*)` and its `log |det J|`.
pub fn log_proposal_density(
    p: &ProblemSpec,
    h: &HyperParams,
    x_star: &DVector<f64>,
    d_star: &DVector<f64>,
    mode: JacobianMode,
) -> Result<(f64, f64)> {
    let (x_uc, d_uc) = inverse_transform(p, h, x_star, d_star)?;
    let blocks = jacobian_blocks(p, h, x_star, d_star, mode)?;
    let log_det = log_abs_det_jacobian(&blocks)?;
    Ok((log_prior_joint(p, &x_uc, &d_uc)? + log_det, log_det))
}

/// Builds the candidate for a given unconditional draw.
pub fn propose_from(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    x_uc: DVector<f64>,
    d_uc: DVector<f64>,
    mode: JacobianMode,
) -> Result<CandidateState> {
    let opt = match minimize(p, h, s, &x_uc, &d_uc) {
        Ok(opt) => opt,
        Err(Error::Evaluation(msg)) => {
            log::debug!("forward model failed during minimization: {msg}");
            return Ok(failed(x_uc, d_uc, ProposalStatus::NotConverged, None));
        }
        Err(e) => return Err(e),
    };
    if !opt.converged {
        return Ok(failed(x_uc, d_uc, ProposalStatus::NotConverged, Some(opt)));
    }
    let x_star = opt.x_star.clone();
    let d_star = opt.d_star.clone();
    let gx = p.g(&x_star)?;
    let log_pi_joint = joint_from_parts(p, h, &x_star, &d_star, &gx);

    let (log_q, log_abs_det_j) = match mode {
        JacobianMode::None => (f64::NAN, f64::NAN),
        _ => match log_proposal_density(p, h, &x_star, &d_star, mode) {
            Ok(v) => v,
            Err(Error::SingularJacobian) => {
                return Ok(failed(x_uc, d_uc, ProposalStatus::Degenerate, Some(opt)));
            }
            Err(e) => return Err(e),
        },
    };
    Ok(CandidateState {
        x_uc,
        d_uc,
        x_star,
        d_star,
        log_q,
        log_pi_joint,
        log_abs_det_j,
        jacobian_mode: mode,
        status: ProposalStatus::Valid,
        opt,
    })
}

fn failed(x_uc: DVector<f64>, d_uc: DVector<f64>, status: ProposalStatus, opt: Option<OptResult>) -> CandidateState {
    let opt = opt.unwrap_or_else(|| OptResult {
        x_star: x_uc.clone(),
        d_star: d_uc.clone(),
        converged: false,
        iters: 0,
        final_grad_norm: f64::NAN,
        objective_value: f64::NAN,
    });
    CandidateState {
        x_star: opt.x_star.clone(),
        d_star: opt.d_star.clone(),
        x_uc,
        d_uc,
        log_q: f64::NAN,
        log_pi_joint: f64::NEG_INFINITY,
        log_abs_det_j: f64::NAN,
        jacobian_mode: JacobianMode::None,
        status,
        opt,
    }
}

/// Draws `(x_uc, d_uc)` from the joint prior and maps it to a candidate.
pub fn propose<R: Rng + ?Sized>(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    rng: &mut R,
    mode: JacobianMode,
) -> Result<CandidateState> {
    let (x_uc, d_uc) = p.draw_unconditional(rng);
    propose_from(p, h, s, x_uc, d_uc, mode)
}
