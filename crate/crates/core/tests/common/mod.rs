#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rml_core::model::{example1, example2, example3_transformed, gauss_linear_toy};
use rml_core::ProblemSpec;

pub fn examples() -> Vec<ProblemSpec> {
    vec![example1(), example2(), example3_transformed(), gauss_linear_toy()]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Arbitrary evaluation point: `x` from the prior, `d` from the data prior.
pub fn random_point(p: &ProblemSpec, rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>) {
    p.draw_unconditional(rng)
}

/// `|a − b|_max / max(|b|_max, floor)`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).abs().max() / b.abs().max().max(floor)
}

/// Central differences of a vector function, step `1e-6·(1+|z|)` per coordinate.
pub fn fd_jacobian<F>(f: F, z: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let m = f(z).len();
    let mut jac = DMatrix::zeros(m, z.len());
    for b in 0..z.len() {
        let h = 1e-6 * (1.0 + z[b].abs());
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[b] += h;
        zm[b] -= h;
        jac.set_column(b, &((f(&zp) - f(&zm)) / (2.0 * h)));
    }
    jac
}

pub fn stack(x: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(x.len() + d.len(), x.iter().chain(d.iter()).cloned())
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let len = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let (_, v) = mean_var(&means);
    (v / batches as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * (-1.0f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    (d, p.clamp(0.0, 1.0))
}
