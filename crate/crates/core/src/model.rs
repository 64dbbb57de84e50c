//! Inverse-problem definitions.
//!
//! A [`ProblemSpec`] bundles a Gaussian prior `N(μ, C_x)`, observed data
//! `d_obs` with Gaussian noise covariance `C_d`, and a [`ForwardModel`]
//! `g: R^n → R^m` together with its derivatives.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

/// Second derivatives of a forward model, stored as one `dim_x × dim_x`
/// matrix per data component: `slices[i][(a, b)] = ∂G^{ia}/∂x^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivative {
    pub slices: Vec<DMatrix<f64>>,
}

impl SecondDerivative {
    pub fn zeros(dim_d: usize, dim_x: usize) -> Self {
        Self {
            slices: vec![DMatrix::zeros(dim_x, dim_x); dim_d],
        }
    }

    /// `Σ_i w_i ∂G^{i·}/∂x^·`, the residual-weighted curvature term.
    pub fn contract(&self, weights: &DVector<f64>) -> DMatrix<f64> {
        let n = self.slices.first().map_or(0, |s| s.nrows());
        let mut out = DMatrix::zeros(n, n);
        for (slice, w) in self.slices.iter().zip(weights.iter()) {
            out += slice * *w;
        }
        out
    }
}

/// The observation operator `g(x)` and its derivatives.
///
/// Implementations must be pure: the sampler evaluates them concurrently.
pub trait ForwardModel: Send + Sync + fmt::Debug {
    fn dim_x(&self) -> usize;
    fn dim_d(&self) -> usize;

    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>>;

    /// `G(x)`, shape `dim_d × dim_x`, `G^{iα} = ∂g^i/∂x^α`.
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Analytic second derivatives, if the model provides them.
    fn second_derivative(&self, _x: &DVector<f64>) -> Option<Result<SecondDerivative>> {
        None
    }
}

fn check_len(what: &'static str, v: &DVector<f64>, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Central-difference step used for derivative synthesis: `1e-5·(1+|x|)`.
pub fn fd_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

/// Central finite-difference Jacobian of `model.eval`.
pub fn finite_difference_jacobian(
    model: &dyn ForwardModel,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let mut jac = DMatrix::zeros(model.dim_d(), model.dim_x());
    for b in 0..x.len() {
        let h = fd_step(x[b]);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[b] += h;
        xm[b] -= h;
        let col = (model.eval(&xp)? - model.eval(&xm)?) / (2.0 * h);
        jac.set_column(b, &col);
    }
    Ok(jac)
}

/// Central finite differences of `model.jacobian`.
pub fn finite_difference_second_derivative(
    model: &dyn ForwardModel,
    x: &DVector<f64>,
) -> Result<SecondDerivative> {
    let mut out = SecondDerivative::zeros(model.dim_d(), model.dim_x());
    for b in 0..x.len() {
        let h = fd_step(x[b]);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[b] += h;
        xm[b] -= h;
        let diff = (model.jacobian(&xp)? - model.jacobian(&xm)?) / (2.0 * h);
        for (i, slice) in out.slices.iter_mut().enumerate() {
            for a in 0..x.len() {
                slice[(a, b)] = diff[(i, a)];
            }
        }
    }
    Ok(out)
}

/// Wraps a model that lacks analytic second derivatives and synthesizes them
/// by central differences of its Jacobian.
#[derive(Debug, Clone)]
pub struct FiniteDifferenceHessian {
    inner: Arc<dyn ForwardModel>,
}

impl FiniteDifferenceHessian {
    pub fn new(inner: Arc<dyn ForwardModel>) -> Self {
        Self { inner }
    }
}

impl ForwardModel for FiniteDifferenceHessian {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_d(&self) -> usize {
        self.inner.dim_d()
    }
    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.inner.eval(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.inner.jacobian(x)
    }
    fn second_derivative(&self, x: &DVector<f64>) -> Option<Result<SecondDerivative>> {
        match self.inner.second_derivative(x) {
            Some(analytic) => Some(analytic),
            None => Some(finite_difference_second_derivative(self.inner.as_ref(), x)),
        }
    }
}

/// `g(x) = A x + b`.
#[derive(Debug, Clone)]
pub struct LinearForward {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl LinearForward {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        let offset = DVector::zeros(matrix.nrows());
        Self { matrix, offset }
    }

    pub fn with_offset(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        check_len("linear forward offset", &offset, matrix.nrows())?;
        Ok(Self { matrix, offset })
    }
}

impl ForwardModel for LinearForward {
    fn dim_x(&self) -> usize {
        self.matrix.ncols()
    }
    fn dim_d(&self) -> usize {
        self.matrix.nrows()
    }
    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("model vector", x, self.dim_x())?;
        Ok(&self.matrix * x + &self.offset)
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len("model vector", x, self.dim_x())?;
        Ok(self.matrix.clone())
    }
    fn second_derivative(&self, _x: &DVector<f64>) -> Option<Result<SecondDerivative>> {
        Some(Ok(SecondDerivative::zeros(self.dim_d(), self.dim_x())))
    }
}

/// Scalar downward parabola `g(x) = peak − curvature·(x − center)²/2`.
#[derive(Debug, Clone, Copy)]
pub struct Parabola {
    pub peak: f64,
    pub curvature: f64,
    pub center: f64,
}

impl ForwardModel for Parabola {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_d(&self) -> usize {
        1
    }
    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("model vector", x, 1)?;
        let u = x[0] - self.center;
        Ok(DVector::from_element(1, self.peak - 0.5 * self.curvature * u * u))
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len("model vector", x, 1)?;
        Ok(DMatrix::from_element(1, 1, -self.curvature * (x[0] - self.center)))
    }
    fn second_derivative(&self, _x: &DVector<f64>) -> Option<Result<SecondDerivative>> {
        Some(Ok(SecondDerivative {
            slices: vec![DMatrix::from_element(1, 1, -self.curvature)],
        }))
    }
}

/// Sum of isotropic Gaussian bumps, `g(x) = Σ_k exp(−|x − ω_k|²/(2ε))`.
#[derive(Debug, Clone)]
pub struct GaussianKernelSum {
    pub centers: Vec<DVector<f64>>,
    pub width: f64,
}

impl GaussianKernelSum {
    fn terms<'a>(&'a self, x: &'a DVector<f64>) -> impl Iterator<Item = (DVector<f64>, f64)> + 'a {
        self.centers.iter().map(move |c| {
            let r = x - c;
            let e = (-r.norm_squared() / (2.0 * self.width)).exp();
            (r, e)
        })
    }
}

impl ForwardModel for GaussianKernelSum {
    fn dim_x(&self) -> usize {
        self.centers[0].len()
    }
    fn dim_d(&self) -> usize {
        1
    }
    fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("model vector", x, self.dim_x())?;
        Ok(DVector::from_element(1, self.terms(x).map(|(_, e)| e).sum()))
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len("model vector", x, self.dim_x())?;
        let mut grad = DVector::zeros(self.dim_x());
        for (r, e) in self.terms(x) {
            grad -= r * (e / self.width);
        }
        Ok(DMatrix::from_row_slice(1, grad.len(), grad.as_slice()))
    }
    fn second_derivative(&self, x: &DVector<f64>) -> Option<Result<SecondDerivative>> {
        if let Err(e) = check_len("model vector", x, self.dim_x()) {
            return Some(Err(e));
        }
        let n = self.dim_x();
        let mut h = DMatrix::zeros(n, n);
        let w = self.width;
        for (r, e) in self.terms(x) {
            h += (&r * r.transpose() / (w * w) - DMatrix::identity(n, n) / w) * e;
        }
        Some(Ok(SecondDerivative { slices: vec![h] }))
    }
}

/// Non-Gaussian scalar prior marginals supported by [`Anamorphosis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarPrior {
    /// `F(x) = 1 − exp(−rate·x)` on `x ≥ 0`.
    Exponential { rate: f64 },
}

const P_CLAMP: f64 = 1e-15;

/// Scalar Gaussian anamorphosis `z = Φ⁻¹(F_x(x))` and its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anamorphosis {
    pub prior: ScalarPrior,
}

impl Anamorphosis {
    pub fn exponential(rate: f64) -> Self {
        Self {
            prior: ScalarPrior::Exponential { rate },
        }
    }

    /// `F_x(x)`.
    pub fn forward_cdf(&self, x: f64) -> f64 {
        match self.prior {
            ScalarPrior::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// `1 − F_x(x)`, evaluated without cancellation.
    pub fn forward_survival(&self, x: f64) -> f64 {
        match self.prior {
            ScalarPrior::Exponential { rate } => (-rate * x.max(0.0)).exp(),
        }
    }

    /// `F_x⁻¹(p)`, with `p` clamped to `[1e-15, 1 − 1e-15]`.
    pub fn inverse_cdf(&self, p: f64) -> f64 {
        let p = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
        match self.prior {
            ScalarPrior::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// Prior density of the original variable.
    pub fn prior_log_pdf(&self, x: f64) -> f64 {
        match self.prior {
            ScalarPrior::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
        }
    }

    pub fn gauss_cdf(&self, z: f64) -> f64 {
        normal_cdf(z)
    }

    pub fn gauss_inv_cdf(&self, p: f64) -> f64 {
        normal_inv_cdf(p.clamp(P_CLAMP, 1.0 - P_CLAMP))
    }

    /// `z = Φ⁻¹(F_x(x))`.
    pub fn to_gaussian(&self, x: f64) -> f64 {
        let p = self.forward_cdf(x);
        if p > 0.5 {
            // upper tail through the survival function keeps digits near p = 1
            -normal_inv_cdf(self.forward_survival(x).clamp(P_CLAMP, 1.0 - P_CLAMP))
        } else {
            self.gauss_inv_cdf(p)
        }
    }

    /// `x = F_x⁻¹(Φ(z))`.
    pub fn from_gaussian(&self, z: f64) -> f64 {
        match self.prior {
            ScalarPrior::Exponential { rate } => -normal_log_sf(z) / rate,
        }
    }

    /// `dx/dz` and `d²x/dz²` of [`Anamorphosis::from_gaussian`].
    pub fn from_gaussian_derivatives(&self, z: f64) -> (f64, f64) {
        match self.prior {
            ScalarPrior::Exponential { rate } => {
                // inverse Mills ratio r = φ(z)/Φ(−z), r' = r(r − z)
                let r = (normal_log_pdf(z) - normal_log_sf(z)).exp();
                (r / rate, r * (r - z) / rate)
            }
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn normal_log_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * PI).ln()
}

/// `ln(1 − Φ(z))`, accurate far into the upper tail.
pub fn normal_log_sf(z: f64) -> f64 {
    let q = 0.5 * libm::erfc(z / SQRT_2);
    if q > 0.0 {
        q.ln()
    } else {
        // asymptotic Mills ratio for z beyond ~38
        normal_log_pdf(z) - z.ln() + (-1.0 / (z * z)).ln_1p()
    }
}

/// Inverse standard normal CDF: Acklam's rational approximation
/// (relative error below 1.15e-9) followed by one Halley refinement step.
pub fn normal_inv_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Observation of the original (non-Gaussian) scalar variable through the
/// inverse anamorphosis: `g(z) = F_x⁻¹(Φ(z))`.
#[derive(Debug, Clone, Copy)]
pub struct InverseAnamorphosisForward {
    pub anamorphosis: Anamorphosis,
}

impl ForwardModel for InverseAnamorphosisForward {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_d(&self) -> usize {
        1
    }
    fn eval(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("model vector", z, 1)?;
        let x = self.anamorphosis.from_gaussian(z[0]);
        if !x.is_finite() {
            return Err(Error::Evaluation(format!("inverse anamorphosis at z = {}", z[0])));
        }
        Ok(DVector::from_element(1, x))
    }
    fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_len("model vector", z, 1)?;
        let (d1, _) = self.anamorphosis.from_gaussian_derivatives(z[0]);
        Ok(DMatrix::from_element(1, 1, d1))
    }
    fn second_derivative(&self, z: &DVector<f64>) -> Option<Result<SecondDerivative>> {
        if let Err(e) = check_len("model vector", z, 1) {
            return Some(Err(e));
        }
        let (_, d2) = self.anamorphosis.from_gaussian_derivatives(z[0]);
        Some(Ok(SecondDerivative {
            slices: vec![DMatrix::from_element(1, 1, d2)],
        }))
    }
}

/// One Bayesian inverse problem: Gaussian prior, Gaussian observation noise,
/// forward operator.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub prior_mean: DVector<f64>,
    pub prior_cov: SpdMatrix,
    pub obs: DVector<f64>,
    pub obs_cov: SpdMatrix,
    pub forward: Arc<dyn ForwardModel>,
    /// Set when the model variable is the Gaussian image of a non-Gaussian
    /// scalar; samples map back through [`Anamorphosis::from_gaussian`].
    pub anamorphosis: Option<Anamorphosis>,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        prior_mean: DVector<f64>,
        prior_cov: DMatrix<f64>,
        obs: DVector<f64>,
        obs_cov: DMatrix<f64>,
        forward: Arc<dyn ForwardModel>,
    ) -> Result<Self> {
        let dim_x = forward.dim_x();
        let dim_d = forward.dim_d();
        check_len("prior mean", &prior_mean, dim_x)?;
        check_len("observations", &obs, dim_d)?;
        if prior_cov.nrows() != dim_x {
            return Err(Error::DimensionMismatch {
                what: "prior covariance",
                expected: dim_x,
                actual: prior_cov.nrows(),
            });
        }
        if obs_cov.nrows() != dim_d {
            return Err(Error::DimensionMismatch {
                what: "observation covariance",
                expected: dim_d,
                actual: obs_cov.nrows(),
            });
        }
        Ok(Self {
            name: name.into(),
            prior_cov: SpdMatrix::new(prior_cov, "prior covariance")?,
            obs_cov: SpdMatrix::new(obs_cov, "observation covariance")?,
            prior_mean,
            obs,
            forward,
            anamorphosis: None,
        })
    }

    pub fn dim_x(&self) -> usize {
        self.prior_mean.len()
    }

    pub fn dim_d(&self) -> usize {
        self.obs.len()
    }

    pub fn g(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let out = self.forward.eval(x)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("non-finite forward model output".into()));
        }
        Ok(out)
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.forward.jacobian(x)
    }

    pub fn check_x(&self, x: &DVector<f64>) -> Result<()> {
        check_len("model vector", x, self.dim_x())
    }

    pub fn check_d(&self, d: &DVector<f64>) -> Result<()> {
        check_len("data vector", d, self.dim_d())
    }

    /// `x_uc ~ N(μ, C_x)`, `d_uc ~ N(d_obs, C_d)`.
    pub fn draw_unconditional<R: Rng + ?Sized>(&self, rng: &mut R) -> (DVector<f64>, DVector<f64>) {
        let zx = DVector::from_fn(self.dim_x(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let zd = DVector::from_fn(self.dim_d(), |_, _| rng.sample::<f64, _>(StandardNormal));
        (
            &self.prior_mean + self.prior_cov.color(&zx),
            &self.obs + self.obs_cov.color(&zd),
        )
    }

    /// Maps a model-space sample back to the original variable when the
    /// problem was built through an anamorphosis; identity otherwise.
    pub fn to_original(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.anamorphosis {
            Some(a) => x.map(|z| a.from_gaussian(z)),
            None => x.clone(),
        }
    }

    /// Scalar linear problem `g(x) = G x` with scalar variances.
    pub fn scalar_linear(
        prior_mean: f64,
        prior_var: f64,
        gain: f64,
        obs: f64,
        obs_var: f64,
    ) -> Result<Self> {
        Self::new(
            "scalar-linear",
            DVector::from_element(1, prior_mean),
            DMatrix::from_element(1, 1, prior_var),
            DVector::from_element(1, obs),
            DMatrix::from_element(1, 1, obs_var),
            Arc::new(LinearForward::new(DMatrix::from_element(1, 1, gain))),
        )
    }

    /// Linear problem with an explicit `dim_d × dim_x` operator.
    pub fn linear(
        name: impl Into<String>,
        prior_mean: DVector<f64>,
        prior_cov: DMatrix<f64>,
        operator: DMatrix<f64>,
        obs: DVector<f64>,
        obs_cov: DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(
            name,
            prior_mean,
            prior_cov,
            obs,
            obs_cov,
            Arc::new(LinearForward::new(operator)),
        )
    }

    /// Looks up a built-in problem by name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "example1" => Some(example1()),
            "example2" => Some(example2()),
            "example3" => Some(example3_transformed()),
            "gauss-linear" => Some(gauss_linear_toy()),
            _ => None,
        }
    }
}

pub const BUILTIN_PROBLEMS: [&str; 4] = ["example1", "example2", "example3", "gauss-linear"];

/// Scalar bimodal problem: `μ = 1.9`, `σ_x² = 0.1`, `d_obs = 0.8`,
/// `σ_d² = 0.01`, `g(x) = 1 − 9(x − 2π/3)²/2`.
pub fn example1() -> ProblemSpec {
    let forward = Parabola {
        peak: 1.0,
        curvature: 9.0,
        center: 2.0 * PI / 3.0,
    };
    let mut p = ProblemSpec::scalar_linear(1.9, 0.1, 1.0, 0.8, 0.01).expect("valid constants");
    p.name = "example1".into();
    p.forward = Arc::new(forward);
    p
}

/// Kernel centers of the two-dimensional multimodal problem.
pub const EXAMPLE2_CENTERS: [[f64; 2]; 4] = [[0.62, -0.09], [0.17, -0.04], [-0.76, 0.16], [-0.89, 0.78]];

/// Two-dimensional multimodal problem: standard-normal prior, one observation
/// `d_obs = 1.1` with variance 0.05 of a sum of four Gaussian bumps (ε = 0.05).
pub fn example2() -> ProblemSpec {
    let forward = GaussianKernelSum {
        centers: EXAMPLE2_CENTERS
            .iter()
            .map(|c| DVector::from_column_slice(c))
            .collect(),
        width: 0.05,
    };
    ProblemSpec::new(
        "example2",
        DVector::zeros(2),
        DMatrix::identity(2, 2),
        DVector::from_element(1, 1.1),
        DMatrix::from_element(1, 1, 0.05),
        Arc::new(forward),
    )
    .expect("valid constants")
}

/// Exponential prior (mean 1) observed directly with noise variance 0.36,
/// `d_obs = 1`, posed in the Gaussian latent variable `z`.
pub fn example3_transformed() -> ProblemSpec {
    let anamorphosis = Anamorphosis::exponential(1.0);
    let mut p = ProblemSpec::new(
        "example3",
        DVector::zeros(1),
        DMatrix::identity(1, 1),
        DVector::from_element(1, 1.0),
        DMatrix::from_element(1, 1, 0.36),
        Arc::new(InverseAnamorphosisForward { anamorphosis }),
    )
    .expect("valid constants");
    p.anamorphosis = Some(anamorphosis);
    p
}

/// `μ = 0`, `C_x = 1`, `g(x) = x`, `d_obs = 0`, `C_d = 1`.
pub fn gauss_linear_toy() -> ProblemSpec {
    let mut p = ProblemSpec::scalar_linear(0.0, 1.0, 1.0, 0.0, 1.0).expect("valid constants");
    p.name = "gauss-linear".into();
    p
}
