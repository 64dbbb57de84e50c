//! `rml validate`: the numerical property suite as a pass/fail table.

use std::sync::Arc;

use anyhow::Result;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rml_core::linalg::sup_norm;
use rml_core::model::{example1, example2, example3_transformed, finite_difference_jacobian, gauss_linear_toy, SecondDerivative};
use rml_core::optimizer::minimize;
use rml_core::oracle::{default_axes, grid_marginal};
use rml_core::proposal::{inverse_transform, jacobian_blocks, propose};
use rml_core::sampler::run_chain_augmented;
use rml_core::{ForwardModel, HyperParams, JacobianMode, OptSettings, ProblemSpec};

pub struct ValidateArgs {
    pub seed: u64,
    pub sweep_steps: usize,
    /// Flip the sign of every forward Jacobian before the derivative checks.
    pub corrupt_jacobian: bool,
}

pub struct Row {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Negates the Jacobian of the wrapped model; values and second derivatives
/// are untouched.
#[derive(Debug)]
pub struct SignFlippedJacobian(pub Arc<dyn ForwardModel>);

impl ForwardModel for SignFlippedJacobian {
    fn dim_x(&self) -> usize {
        self.0.dim_x()
    }

    fn dim_d(&self) -> usize {
        self.0.dim_d()
    }

    fn eval(&self, x: &DVector<f64>) -> rml_core::Result<DVector<f64>> {
        self.0.eval(x)
    }

    fn jacobian(&self, x: &DVector<f64>) -> rml_core::Result<DMatrix<f64>> {
        Ok(-self.0.jacobian(x)?)
    }

    fn second_derivative(&self, x: &DVector<f64>) -> Option<rml_core::Result<SecondDerivative>> {
        self.0.second_derivative(x)
    }
}

fn corrupted(p: &ProblemSpec) -> ProblemSpec {
    let mut q = p.clone();
    q.forward = Arc::new(SignFlippedJacobian(p.forward.clone()));
    q
}

fn examples() -> Vec<ProblemSpec> {
    vec![example1(), example2(), example3_transformed(), gauss_linear_toy()]
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max().max(1e-12)
}

fn stack(x: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(x.len() + d.len(), x.iter().chain(d.iter()).cloned())
}

/// Worst relative error of the analytic forward Jacobian against central
/// differences over 100 prior draws.
fn forward_jacobian_error(p: &ProblemSpec, seed: u64) -> Result<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, _) = p.draw_unconditional(&mut r);
        let fd = finite_difference_jacobian(p.forward.as_ref(), &x)?;
        worst = worst.max(rel_err(&p.jacobian(&x)?, &fd));
    }
    Ok(worst)
}

/// Worst relative error of the assembled inverse-transform Jacobian
/// against central differences of the inverse transform.
fn transform_jacobian_error(p: &ProblemSpec, h: &HyperParams, seed: u64) -> Result<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let nx = p.dim_x();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, d) = p.draw_unconditional(&mut r);
        let z = stack(&x, &d);
        let analytic = jacobian_blocks(p, h, &x, &d, JacobianMode::Full)?.assemble();
        let mut fd = DMatrix::zeros(z.len(), z.len());
        for b in 0..z.len() {
            let step = 1e-6 * (1.0 + z[b].abs());
            let eval = |sign: f64| -> Result<DVector<f64>> {
                let mut zz = z.clone();
                zz[b] += sign * step;
                let (xu, du) = inverse_transform(p, h, &zz.rows(0, nx).into_owned(), &zz.rows(nx, zz.len() - nx).into_owned())?;
                Ok(stack(&xu, &du))
            };
            fd.set_column(b, &((eval(1.0)? - eval(-1.0)?) / (2.0 * step)));
        }
        worst = worst.max(rel_err(&analytic, &fd));
    }
    Ok(worst)
}

fn round_trip_error(p: &ProblemSpec, h: &HyperParams, s: &OptSettings, seed: u64) -> Result<(f64, usize)> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    for _ in 0..1000 {
        let c = propose(p, h, s, &mut r, JacobianMode::Full)?;
        if !c.is_valid() {
            failed += 1;
            continue;
        }
        let (xu, du) = inverse_transform(p, h, &c.x_star, &c.d_star)?;
        worst = worst.max(sup_norm(&(xu - &c.x_uc))).max(sup_norm(&(du - &c.d_uc)));
    }
    Ok((worst, failed))
}

fn gauss_linear_error(s: &OptSettings, seed: u64) -> Result<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |n: usize, m: usize| DMatrix::from_fn(n, m, |_, _| standard_normal(&mut r));
    let a = normal(3, 3);
    let cx = &a * a.transpose() + DMatrix::identity(3, 3) * 0.5;
    let b = normal(2, 2);
    let cd = &b * b.transpose() + DMatrix::identity(2, 2) * 0.5;
    let g = normal(2, 3);
    let mu = normal(3, 1).column(0).into_owned();
    let obs = normal(2, 1).column(0).into_owned();
    let p = ProblemSpec::linear("random-linear", mu, cx.clone(), g.clone(), obs, cd.clone())?;
    let cx_inv = cx.try_inverse().expect("positive definite");
    let cd_inv = cd.try_inverse().expect("positive definite");
    let h = HyperParams::new(0.01, 0.5)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (xu, du) = p.draw_unconditional(&mut r);
        let lhs = &cx_inv + g.transpose() * &cd_inv * &g;
        let rhs = &cx_inv * &xu + g.transpose() * &cd_inv * &du;
        let exact = lhs.lu().solve(&rhs).expect("nonsingular normal equations");
        worst = worst.max(sup_norm(&(minimize(&p, &h, s, &xu, &du)?.x_star - exact)));
    }
    Ok(worst)
}

fn standard_normal(r: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    r.sample(rand_distr::StandardNormal)
}

fn rho_invariance_error(p: &ProblemSpec, s: &OptSettings, seed: u64) -> Result<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (xu, du) = p.draw_unconditional(&mut r);
        let xs = [0.1, 0.5, 0.9]
            .iter()
            .map(|rho| Ok(minimize(p, &HyperParams::new(0.01, *rho)?, s, &xu, &du)?.x_star))
            .collect::<Result<Vec<_>>>()?;
        for x in &xs[1..] {
            worst = worst.max(sup_norm(&(x - &xs[0])));
        }
    }
    Ok(worst)
}

fn quadrature_change(p: &ProblemSpec) -> Result<f64> {
    let n = if p.dim_x() == 1 { 2001 } else { 401 };
    let coarse = grid_marginal(p, &default_axes(p, n)?)?;
    let fine = grid_marginal(p, &default_axes(p, 2 * n - 1)?)?;
    Ok(((fine.normalizer - coarse.normalizer).exp() - 1.0).abs())
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<Vec<Row>> {
    let s = OptSettings::default();
    let h = HyperParams::new(0.01, 0.5)?;
    let mut rows = Vec::new();
    let mut row = |name: String, pass: bool, detail: String| rows.push(Row { name, pass, detail });

    for p in examples() {
        let checked = if args.corrupt_jacobian { corrupted(&p) } else { p.clone() };
        let e = forward_jacobian_error(&checked, args.seed)?;
        row(format!("forward Jacobian vs FD [{}]", p.name), e <= 1e-4, format!("max rel err {e:.2e} (<= 1e-4)"));
        let e = transform_jacobian_error(&checked, &h, args.seed)?;
        row(format!("transform Jacobian vs FD [{}]", p.name), e <= 1e-4, format!("max rel err {e:.2e} (<= 1e-4)"));
    }
    for p in examples() {
        let (e, failed) = round_trip_error(&p, &h, &s, args.seed)?;
        row(
            format!("round trip [{}]", p.name),
            e <= 1e-6 && failed == 0,
            format!("max err {e:.2e} (<= 1e-6), {failed} optimizer failures in 1000"),
        );
    }
    let e = gauss_linear_error(&s, args.seed)?;
    row("Gauss-linear exactness".into(), e <= 1e-10, format!("max err {e:.2e} (<= 1e-10)"));
    for p in examples() {
        let e = rho_invariance_error(&p, &s, args.seed)?;
        row(format!("rho invariance of x* [{}]", p.name), e <= 10.0 * s.grad_tol, format!("max spread {e:.2e} (<= {:.0e})", 10.0 * s.grad_tol));
    }
    for p in examples() {
        let e = quadrature_change(&p)?;
        row(format!("quadrature convergence [{}]", p.name), e < 1e-6, format!("relative change {e:.2e} (< 1e-6)"));
    }

    // the corrupted model must be caught by the same check
    let e = forward_jacobian_error(&corrupted(&example2()), args.seed)?;
    row("negative control: flipped Jacobian sign".into(), e > 1e-4, format!("FD check reports {e:.2e}, must exceed 1e-4"));

    let p = example2();
    let rate = |rho: f64| -> Result<f64> {
        Ok(run_chain_augmented(&p, &HyperParams::new(0.01, rho)?, &s, args.sweep_steps, args.seed, JacobianMode::Full)?.acceptance_rate())
    };
    let (a, b) = (rate(0.35)?, rate(0.60)?);
    row(
        "example2 rho sweep 0.35 vs 0.60".into(),
        (a - b).abs() < 0.01,
        format!("{a:.4} vs {b:.4}, gap {:.2} pp (< 1 pp, {} steps each)", 100.0 * (a - b).abs(), args.sweep_steps),
    );
    Ok(rows)
}

pub fn print_table(rows: &[Row]) {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in rows {
        println!("{:<width$}  {}  {}", r.name, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("{} checks, {failed} failed", rows.len());
}
