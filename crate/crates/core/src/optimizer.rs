//! Minimization of the randomized augmented objective
//!
//! ```text
//! ½(x−x_uc)ᵀC_x⁻¹(x−x_uc) + 1/(2ρ)(g(x)−d)ᵀC_d⁻¹(g(x)−d) + 1/(2(1−ρ))(d−d_uc)ᵀC_d⁻¹(d−d_uc)
//! ```
//!
//! The objective is quadratic in `d`, with exact minimizer
//! `d(x) = ρ d_uc + (1−ρ) g(x)`. Substituting it leaves the x-only problem
//! `½|x−x_uc|²_{C_x} + ½|g(x)−d_uc|²_{C_d}`, which [`minimize`] solves with
//! Levenberg-Marquardt. [`minimize_joint`] runs the same solver on `(x, d)`
//! directly and exists to cross-check the elimination.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::densities::HyperParams;
use crate::error::{Error, Result};
use crate::linalg::sup_norm;
use crate::model::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptSettings {
    pub max_iters: usize,
    /// Convergence threshold on the sup-norm of the objective gradient.
    pub grad_tol: f64,
    /// Alternative convergence threshold on the undamped Gauss-Newton step,
    /// relative to `1 + |x|`. Scale-free, so it holds at stationary points
    /// where curvature keeps the rounded gradient above `grad_tol`.
    pub x_tol: f64,
    /// Relative step size below which the iteration stops.
    pub step_tol: f64,
    pub lm_lambda0: f64,
    pub lm_shrink: f64,
    pub lm_grow: f64,
}

impl Default for OptSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-8,
            x_tol: 1e-10,
            step_tol: 1e-12,
            lm_lambda0: 1e-3,
            lm_shrink: 0.33,
            lm_grow: 3.0,
        }
    }
}

impl OptSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.max_iters < 1 {
            return bad("max_iters", "must be at least 1");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol", "must be strictly positive");
        }
        if !(self.x_tol > 0.0) {
            return bad("x_tol", "must be strictly positive");
        }
        if !(self.step_tol > 0.0) {
            return bad("step_tol", "must be strictly positive");
        }
        if !(self.lm_lambda0 > 0.0) {
            return bad("lm_lambda0", "must be strictly positive");
        }
        if !(self.lm_shrink > 0.0 && self.lm_shrink < 1.0) {
            return bad("lm_shrink", "must lie in (0, 1)");
        }
        if !(self.lm_grow > 1.0) {
            return bad("lm_grow", "must exceed 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub x_star: DVector<f64>,
    pub d_star: DVector<f64>,
    pub converged: bool,
    pub iters: usize,
    /// Sup-norm of the augmented-objective gradient at `(x_star, d_star)`.
    pub final_grad_norm: f64,
    pub objective_value: f64,
}

/// The augmented objective at `(x, d)` for the unconditional draw `(x_uc, d_uc)`.
pub fn augmented_objective(
    p: &ProblemSpec,
    h: &HyperParams,
    x: &DVector<f64>,
    d: &DVector<f64>,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<f64> {
    check_shapes(p, x, d, x_uc, d_uc)?;
    let gx = p.g(x)?;
    Ok(objective_from_parts(p, h, x, d, x_uc, d_uc, &gx))
}

fn objective_from_parts(
    p: &ProblemSpec,
    h: &HyperParams,
    x: &DVector<f64>,
    d: &DVector<f64>,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
    gx: &DVector<f64>,
) -> f64 {
    let rho = h.rho();
    0.5 * p.prior_cov.quad_form(&(x - x_uc))
        + 0.5 / rho * p.obs_cov.quad_form(&(gx - d))
        + 0.5 / (1.0 - rho) * p.obs_cov.quad_form(&(d - d_uc))
}

/// Gradient of [`augmented_objective`] with respect to `(x, d)`, stacked.
pub fn augmented_gradient(
    p: &ProblemSpec,
    h: &HyperParams,
    x: &DVector<f64>,
    d: &DVector<f64>,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_shapes(p, x, d, x_uc, d_uc)?;
    let rho = h.rho();
    let gx = p.g(x)?;
    let jac = p.jacobian(x)?;
    let w = p.obs_cov.solve(&(&gx - d));
    let gx_part = p.prior_cov.solve(&(x - x_uc)) + jac.transpose() * &w / rho;
    let gd_part = -&w / rho + p.obs_cov.solve(&(d - d_uc)) / (1.0 - rho);
    let mut out = DVector::zeros(x.len() + d.len());
    out.rows_mut(0, x.len()).copy_from(&gx_part);
    out.rows_mut(x.len(), d.len()).copy_from(&gd_part);
    Ok(out)
}

/// Left-hand sides of the two stationarity conditions,
/// `x − x_uc + (1/ρ)C_x Gᵀ C_d⁻¹(g(x)−d)` and `d − ρ d_uc − (1−ρ) g(x)`.
pub fn stationarity_residuals(
    p: &ProblemSpec,
    h: &HyperParams,
    x: &DVector<f64>,
    d: &DVector<f64>,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_shapes(p, x, d, x_uc, d_uc)?;
    let rho = h.rho();
    let gx = p.g(x)?;
    let jac = p.jacobian(x)?;
    let model = x - x_uc + p.prior_cov.matrix() * jac.transpose() * p.obs_cov.solve(&(&gx - d)) / rho;
    let data = d - d_uc * rho - gx * (1.0 - rho);
    Ok((model, data))
}

/// Exact minimizer of the augmented objective over `d` for fixed `x`.
pub fn eliminate_d(p: &ProblemSpec, h: &HyperParams, x: &DVector<f64>, d_uc: &DVector<f64>) -> Result<DVector<f64>> {
    p.check_x(x)?;
    p.check_d(d_uc)?;
    let gx = p.g(x)?;
    Ok(d_uc * h.rho() + gx * (1.0 - h.rho()))
}

fn check_shapes(
    p: &ProblemSpec,
    x: &DVector<f64>,
    d: &DVector<f64>,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<()> {
    p.check_x(x)?;
    p.check_x(x_uc)?;
    p.check_d(d)?;
    p.check_d(d_uc)
}

struct LmOutcome {
    x: DVector<f64>,
    converged: bool,
    iters: usize,
}

/// Residual vector, its Jacobian, and when available the second-order term
/// `Σ_i r_i ∇²r_i` of the Hessian of `½|r|²`.
struct LmModel {
    r: DVector<f64>,
    jac: DMatrix<f64>,
    second_order: Option<DMatrix<f64>>,
}

impl LmModel {
    fn cost(&self) -> f64 {
        0.5 * self.r.norm_squared()
    }

    fn gradient(&self) -> DVector<f64> {
        self.jac.transpose() * &self.r
    }

    fn gauss_newton(&self) -> DMatrix<f64> {
        self.jac.transpose() * &self.jac
    }

    /// Exact Hessian when the second-order term is known, else `JᵀJ`.
    fn hessian(&self) -> DMatrix<f64> {
        match &self.second_order {
            Some(s) => self.gauss_newton() + s,
            None => self.gauss_newton(),
        }
    }
}

/// Gradient below `grad_tol`, undamped Newton step below `x_tol`, or
/// predicted decrease below the rounding error of the cost. The Newton step
/// uses the Hessian when it is positive definite, `JᵀJ` otherwise.
fn is_stationary(x: &DVector<f64>, m: &LmModel, s: &OptSettings) -> bool {
    let grad = m.gradient();
    if sup_norm(&grad) <= s.grad_tol {
        return true;
    }
    let step = match m.hessian().cholesky().or_else(|| m.gauss_newton().cholesky()) {
        Some(c) => c.solve(&grad),
        None => return false,
    };
    if !step.iter().all(|v| v.is_finite()) {
        return false;
    }
    let predicted_decrease = 0.5 * grad.dot(&step);
    sup_norm(&step) <= s.x_tol * (1.0 + sup_norm(x)) || predicted_decrease <= 64.0 * f64::EPSILON * m.cost()
}

/// Undamped Newton steps from a point already judged stationary, kept while
/// they shrink the gradient. Stationarity by step size, predicted decrease or
/// even `grad_tol` can leave a gradient well above its rounding floor, and the
/// inverse transform reproduces that gradient as round-trip error. On a
/// linear model the first step lands on the exact solution.
fn polish<F>(mut x: DVector<f64>, mut model: LmModel, residual: &mut F) -> DVector<f64>
where
    F: FnMut(&DVector<f64>) -> Result<LmModel>,
{
    for _ in 0..4 {
        let grad = model.gradient();
        let g_norm = sup_norm(&grad);
        if g_norm == 0.0 {
            break;
        }
        let Some(c) = model.hessian().cholesky() else { break };
        let candidate = &x - c.solve(&grad);
        match residual(&candidate) {
            Ok(m) if m.cost().is_finite() && sup_norm(&m.gradient()) < g_norm => {
                x = candidate;
                model = m;
            }
            _ => break,
        }
    }
    x
}

/// Levenberg-Marquardt on `½|r(x)|²`, damping with `λ diag(JᵀJ)`.
///
/// The model matrix is the exact Hessian when `residual` supplies the
/// second-order term, so convergence stays quadratic on large-residual
/// problems; it is `JᵀJ` otherwise. A damped matrix that is not positive
/// definite counts as a rejected step. Convergence is declared by
/// [`is_stationary`].
fn levenberg_marquardt<F>(x0: DVector<f64>, s: &OptSettings, mut residual: F) -> Result<LmOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<LmModel>,
{
    let mut x = x0;
    let mut model = residual(&x)?;
    let mut lambda = s.lm_lambda0;

    for iter in 0..s.max_iters {
        if is_stationary(&x, &model, s) {
            let x = polish(x, model, &mut residual);
            return Ok(LmOutcome {
                x,
                converged: true,
                iters: iter,
            });
        }
        let grad = model.gradient();
        let hess = model.hessian();
        let scale = model.gauss_newton().diagonal().map(|v| v.max(1e-12));
        let cost = model.cost();

        loop {
            let mut damped = hess.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * scale[i];
            }
            let accepted = match damped.cholesky() {
                Some(c) => {
                    let step = c.solve(&(-&grad));
                    if sup_norm(&step) <= s.step_tol * (1.0 + sup_norm(&x)) {
                        let converged = is_stationary(&x, &model, s);
                        let x = if converged { polish(x, model, &mut residual) } else { x };
                        return Ok(LmOutcome { x, converged, iters: iter });
                    }
                    let candidate = &x + &step;
                    match residual(&candidate) {
                        Ok(m) if m.cost().is_finite() && m.cost() < cost => Some((candidate, m)),
                        _ => None,
                    }
                }
                None => None,
            };
            match accepted {
                Some((candidate, m)) => {
                    x = candidate;
                    model = m;
                    lambda = (lambda * s.lm_shrink).max(1e-20);
                    break;
                }
                None => {
                    lambda *= s.lm_grow;
                    if lambda > 1e20 {
                        let converged = is_stationary(&x, &model, s);
                        let x = if converged { polish(x, model, &mut residual) } else { x };
                        return Ok(LmOutcome { x, converged, iters: iter });
                    }
                }
            }
        }
    }
    let converged = is_stationary(&x, &model, s);
    let x = if converged { polish(x, model, &mut residual) } else { x };
    Ok(LmOutcome {
        converged,
        x,
        iters: s.max_iters,
    })
}

fn finish(
    p: &ProblemSpec,
    h: &HyperParams,
    x_star: DVector<f64>,
    d_star: DVector<f64>,
    lm_converged: bool,
    iters: usize,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<OptResult> {
    let grad = augmented_gradient(p, h, &x_star, &d_star, x_uc, d_uc)?;
    let final_grad_norm = sup_norm(&grad);
    let objective_value = augmented_objective(p, h, &x_star, &d_star, x_uc, d_uc)?;
    Ok(OptResult {
        converged: lm_converged && final_grad_norm.is_finite(),
        x_star,
        d_star,
        iters,
        final_grad_norm,
        objective_value,
    })
}

/// Minimizes the augmented objective starting from `x₀ = x_uc`,
/// `d₀ = d(x_uc)`, searching over `x` only with `d` eliminated exactly.
///
/// Returns the first stationary point reached. Forward-model failures at the
/// starting point propagate; failures at trial points count as rejected steps.
pub fn minimize(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<OptResult> {
    minimize_from(p, h, s, x_uc, x_uc, d_uc)
}

/// [`minimize`] with an explicit starting point `x0`.
pub fn minimize_from(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    x0: &DVector<f64>,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<OptResult> {
    p.check_x(x0)?;
    p.check_x(x_uc)?;
    p.check_d(d_uc)?;
    let whitened_prior = p.prior_cov.whiten_matrix(&DMatrix::identity(p.dim_x(), p.dim_x()));
    let outcome = levenberg_marquardt(x0.clone(), s, |x| {
        let gx = p.g(x)?;
        let jac = p.jacobian(x)?;
        let (nx, nd) = (p.dim_x(), p.dim_d());
        let mut r = DVector::zeros(nx + nd);
        r.rows_mut(0, nx).copy_from(&p.prior_cov.whiten(&(x - x_uc)));
        r.rows_mut(nx, nd).copy_from(&p.obs_cov.whiten(&(&gx - d_uc)));
        let mut j = DMatrix::zeros(nx + nd, nx);
        j.view_mut((0, 0), (nx, nx)).copy_from(&whitened_prior);
        j.view_mut((nx, 0), (nd, nx)).copy_from(&p.obs_cov.whiten_matrix(&jac));
        let second_order = match p.forward.second_derivative(x) {
            Some(h2) => Some(h2?.contract(&p.obs_cov.solve(&(gx - d_uc)))),
            None => None,
        };
        Ok(LmModel { r, jac: j, second_order })
    })?;
    let d_star = eliminate_d(p, h, &outcome.x, d_uc)?;
    finish(p, h, outcome.x, d_star, outcome.converged, outcome.iters, x_uc, d_uc)
}

/// Same objective and start as [`minimize`], searched over `(x, d)` jointly.
pub fn minimize_joint(
    p: &ProblemSpec,
    h: &HyperParams,
    s: &OptSettings,
    x_uc: &DVector<f64>,
    d_uc: &DVector<f64>,
) -> Result<OptResult> {
    p.check_x(x_uc)?;
    p.check_d(d_uc)?;
    let (nx, nd) = (p.dim_x(), p.dim_d());
    let rho = h.rho();
    let a = 1.0 / rho.sqrt();
    let b = 1.0 / (1.0 - rho).sqrt();
    let wx = p.prior_cov.whiten_matrix(&DMatrix::identity(nx, nx));
    let wd = p.obs_cov.whiten_matrix(&DMatrix::identity(nd, nd));

    let mut start = DVector::zeros(nx + nd);
    start.rows_mut(0, nx).copy_from(x_uc);
    start.rows_mut(nx, nd).copy_from(&eliminate_d(p, h, x_uc, d_uc)?);

    let outcome = levenberg_marquardt(start, s, |z| {
        let x = z.rows(0, nx).into_owned();
        let d = z.rows(nx, nd).into_owned();
        let gx = p.g(&x)?;
        let jac = p.jacobian(&x)?;
        let mut r = DVector::zeros(nx + 2 * nd);
        r.rows_mut(0, nx).copy_from(&p.prior_cov.whiten(&(&x - x_uc)));
        r.rows_mut(nx, nd).copy_from(&(p.obs_cov.whiten(&(&gx - &d)) * a));
        r.rows_mut(nx + nd, nd).copy_from(&(p.obs_cov.whiten(&(&d - d_uc)) * b));
        let mut j = DMatrix::zeros(nx + 2 * nd, nx + nd);
        j.view_mut((0, 0), (nx, nx)).copy_from(&wx);
        j.view_mut((nx, 0), (nd, nx)).copy_from(&(p.obs_cov.whiten_matrix(&jac) * a));
        j.view_mut((nx, nx), (nd, nd)).copy_from(&(&wd * -a));
        j.view_mut((nx + nd, nx), (nd, nd)).copy_from(&(&wd * b));
        let second_order = match p.forward.second_derivative(&x) {
            Some(h2) => {
                let mut so = DMatrix::zeros(nx + nd, nx + nd);
                let xx = h2?.contract(&(p.obs_cov.solve(&(gx - &d)) * (a * a)));
                so.view_mut((0, 0), (nx, nx)).copy_from(&xx);
                Some(so)
            }
            None => None,
        };
        Ok(LmModel { r, jac: j, second_order })
    })?;
    let x_star = outcome.x.rows(0, nx).into_owned();
    let d_star = outcome.x.rows(nx, nd).into_owned();
    finish(p, h, x_star, d_star, outcome.converged, outcome.iters, x_uc, d_uc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example1, gauss_linear_toy};
    use approx::assert_abs_diff_eq;

    fn s(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn hp(rho: f64) -> HyperParams {
        HyperParams::new(0.01, rho).unwrap()
    }

    #[test]
    fn settings_validation() {
        assert!(OptSettings::default().validate().is_ok());
        let mut bad = OptSettings::default();
        bad.lm_shrink = 1.5;
        assert!(bad.validate().is_err());
        bad = OptSettings::default();
        bad.max_iters = 0;
        assert!(bad.validate().is_err());
        bad = OptSettings::default();
        bad.grad_tol = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn objective_examples() {
        let p1 = example1();
        let x = s(1.9);
        let g = p1.g(&x).unwrap();
        assert_eq!(augmented_objective(&p1, &hp(0.3), &x, &g, &x, &g).unwrap(), 0.0);

        let toy = gauss_linear_toy();
        assert_abs_diff_eq!(
            augmented_objective(&toy, &hp(0.5), &s(0.0), &s(1.0), &s(0.0), &s(1.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );

        // 40-digit reference: (0.0299474487)²/(2·0.65·0.01)
        assert_abs_diff_eq!(
            augmented_objective(&p1, &hp(0.65), &s(1.9), &s(0.8), &s(1.9), &s(0.8)).unwrap(),
            0.068_988_437_409_996_21,
            epsilon = 1e-12
        );
    }

    #[test]
    fn eliminate_d_examples() {
        let toy = gauss_linear_toy();
        assert_eq!(eliminate_d(&toy, &hp(0.3), &s(0.7), &s(0.7)).unwrap()[0], 0.7);
        // g(x)=x=1, d_uc=2, ρ=0.5
        assert_eq!(eliminate_d(&toy, &hp(0.5), &s(1.0), &s(2.0)).unwrap()[0], 1.5);
        assert_abs_diff_eq!(
            eliminate_d(&example1(), &hp(0.65), &s(1.9), &s(0.8)).unwrap()[0],
            0.810_481_607_060_724,
            epsilon = 1e-12
        );
    }

    #[test]
    fn minimize_linear_toy() {
        let toy = gauss_linear_toy();
        let st = OptSettings::default();
        for rho in [0.1, 0.5, 0.9] {
            let r = minimize(&toy, &hp(rho), &st, &s(1.0), &s(1.0)).unwrap();
            assert!(r.converged);
            assert_abs_diff_eq!(r.x_star[0], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(r.d_star[0], 1.0, epsilon = 1e-10);
        }
        let r = minimize(&toy, &hp(0.5), &st, &s(0.0), &s(2.0)).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.x_star[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.d_star[0], 1.5, epsilon = 1e-10);
    }

    #[test]
    fn minimize_at_stationary_point_returns_immediately() {
        // g(x_uc) = d_uc makes the start point a zero-gradient point
        for p in [example1(), crate::model::example2(), crate::model::example3_transformed()] {
            let x_uc = p.prior_mean.add_scalar(0.1);
            let d_uc = p.g(&x_uc).unwrap();
            let r = minimize(&p, &hp(0.5), &OptSettings::default(), &x_uc, &d_uc).unwrap();
            assert!(r.converged);
            assert!(r.iters <= 1);
            assert_eq!(r.x_star, x_uc);
        }
    }

    #[test]
    fn stationarity_holds_at_convergence() {
        let p = example1();
        let st = OptSettings::default();
        let h = hp(0.65);
        let r = minimize(&p, &h, &st, &s(2.3), &s(0.7)).unwrap();
        assert!(r.converged);
        assert!(r.final_grad_norm <= st.grad_tol);
        let (m, d) = stationarity_residuals(&p, &h, &r.x_star, &r.d_star, &s(2.3), &s(0.7)).unwrap();
        assert!(sup_norm(&m) <= 10.0 * st.grad_tol);
        assert!(sup_norm(&d) <= 10.0 * st.grad_tol);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let p = example1();
        let st = OptSettings {
            max_iters: 1,
            ..OptSettings::default()
        };
        let r = minimize(&p, &hp(0.5), &st, &s(3.0), &s(0.8)).unwrap();
        assert!(!r.converged);
        assert!(r.final_grad_norm > st.grad_tol);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = example1();
        let h = hp(0.4);
        let (x, d, xu, du) = (s(2.2), s(0.6), s(1.8), s(0.75));
        let g = augmented_gradient(&p, &h, &x, &d, &xu, &du).unwrap();
        let f = |x: f64, d: f64| augmented_objective(&p, &h, &s(x), &s(d), &xu, &du).unwrap();
        let e = 1e-6;
        let fx = (f(2.2 + e, 0.6) - f(2.2 - e, 0.6)) / (2.0 * e);
        let fd = (f(2.2, 0.6 + e) - f(2.2, 0.6 - e)) / (2.0 * e);
        assert!(((g[0] - fx) / fx).abs() < 1e-6);
        assert!(((g[1] - fd) / fd).abs() < 1e-6);
    }
}
