//! Ground truth for low-dimensional problems: trapezoid quadrature on uniform
//! grids, conjugate Gaussian posteriors, and histogram comparisons of chain
//! output against gridded densities.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{log_target_joint, log_target_marginal, HyperParams};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::proposal::{log_proposal_density, JacobianMode};

/// Uniform grid `lo, lo + h, ..., hi` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo < hi) || n < 2 {
            return Err(Error::InvalidParameter {
                name: "grid axis",
                reason: format!("need lo < hi and n >= 2, got [{lo}, {hi}] with n = {n}"),
            });
        }
        Ok(Self { lo, hi, n })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + self.step() * i as f64
        }
    }

    fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.step()
        } else {
            self.step()
        }
    }
}

/// A density tabulated on a one- or two-dimensional tensor grid.
///
/// Values are stored row-major (last axis fastest). `normalizer` is the log
/// of the trapezoid integral of `exp(log_values)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub axes: Vec<GridAxis>,
    pub log_values: Vec<f64>,
    pub normalizer: f64,
}

impl GridDensity {
    /// Tabulates `log_density` at every node. Evaluation order does not
    /// affect the result.
    pub fn from_log_fn<F>(axes: Vec<GridAxis>, log_density: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::UnsupportedDimension(format!(
                "grid quadrature supports 1 or 2 axes, got {}",
                axes.len()
            )));
        }
        let total: usize = axes.iter().map(|a| a.n).product();
        let log_values = (0..total)
            .into_par_iter()
            .map(|idx| {
                let point = coords_of(&axes, idx);
                log_density(&point).map(|v| if v.is_nan() { f64::NEG_INFINITY } else { v })
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut grid = Self {
            axes,
            log_values,
            normalizer: 0.0,
        };
        let max = grid.log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "grid density",
                reason: "density vanishes on the whole grid".into(),
            });
        }
        let sum: f64 = (0..grid.len()).map(|i| grid.weight(i) * (grid.log_values[i] - max).exp()).sum();
        grid.normalizer = max + sum.ln();
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        coords_of(&self.axes, idx)
    }

    fn multi_index(&self, idx: usize) -> Vec<usize> {
        multi_index_of(&self.axes, idx)
    }

    fn flat_index(&self, mi: &[usize]) -> usize {
        mi.iter().zip(&self.axes).fold(0, |acc, (i, a)| acc * a.n + i)
    }

    /// Trapezoid weight of node `idx`.
    pub fn weight(&self, idx: usize) -> f64 {
        self.multi_index(idx)
            .iter()
            .zip(&self.axes)
            .map(|(i, a)| a.trapezoid_weight(*i))
            .product()
    }

    /// Normalized density at node `idx`.
    pub fn density(&self, idx: usize) -> f64 {
        (self.log_values[idx] - self.normalizer).exp()
    }

    /// Trapezoid integral of the normalized density (1 up to rounding).
    pub fn total_mass(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i) * self.density(i)).sum()
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim());
        for i in 0..self.len() {
            let w = self.weight(i) * self.density(i);
            m += DVector::from_vec(self.coords(i)) * w;
        }
        m
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut c = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.len() {
            let w = self.weight(i) * self.density(i);
            let r = DVector::from_vec(self.coords(i)) - &mean;
            c += &r * r.transpose() * w;
        }
        c
    }

    fn neighbors(&self, idx: usize) -> Vec<usize> {
        let mi = self.multi_index(idx);
        let mut out = Vec::new();
        let offsets: Vec<Vec<i64>> = match self.dim() {
            1 => vec![vec![-1], vec![1]],
            _ => (-1..=1)
                .flat_map(|a| (-1..=1).map(move |b| vec![a, b]))
                .filter(|o| o.iter().any(|v| *v != 0))
                .collect(),
        };
        for off in offsets {
            let mut nb = Vec::with_capacity(mi.len());
            let mut inside = true;
            for ((i, o), a) in mi.iter().zip(&off).zip(&self.axes) {
                let j = *i as i64 + o;
                if j < 0 || j >= a.n as i64 {
                    inside = false;
                    break;
                }
                nb.push(j as usize);
            }
            if inside {
                out.push(self.flat_index(&nb));
            }
        }
        out
    }

    /// Strict discrete local maxima (2 neighbors in 1-D, 8 in 2-D) whose
    /// value exceeds `1e-6` times the global maximum.
    pub fn find_modes(&self) -> Vec<usize> {
        let max = self.log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let floor = max + 1e-6_f64.ln();
        (0..self.len())
            .filter(|&i| {
                let v = self.log_values[i];
                v > floor && self.neighbors(i).iter().all(|&j| v > self.log_values[j])
            })
            .collect()
    }

    /// Basin label for every node by discrete steepest ascent: the index into
    /// [`GridDensity::find_modes`] of the maximum the ascent ends at, or
    /// `None` when it ends at a sub-floor maximum or a plateau.
    pub fn basin_labels(&self) -> Vec<Option<usize>> {
        let modes = self.find_modes();
        let uphill: Vec<usize> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut best = i;
                for j in self.neighbors(i) {
                    if self.log_values[j] > self.log_values[best] {
                        best = j;
                    }
                }
                best
            })
            .collect();
        (0..self.len())
            .map(|mut i| {
                while uphill[i] != i {
                    i = uphill[i];
                }
                modes.iter().position(|&m| m == i)
            })
            .collect()
    }

    /// Probability mass of each basin of attraction, ordered as
    /// [`GridDensity::find_modes`].
    pub fn mode_masses(&self) -> Vec<f64> {
        let labels = self.basin_labels();
        let mut masses = vec![0.0; self.find_modes().len()];
        for (i, l) in labels.iter().enumerate() {
            if let Some(m) = l {
                masses[*m] += self.weight(i) * self.density(i);
            }
        }
        masses
    }

    /// Node closest to `point`, or `None` outside the grid.
    pub fn nearest_node(&self, point: &[f64]) -> Option<usize> {
        let mut mi = Vec::with_capacity(self.dim());
        for (x, a) in point.iter().zip(&self.axes) {
            if *x < a.lo - 0.5 * a.step() || *x > a.hi + 0.5 * a.step() {
                return None;
            }
            let i = ((x - a.lo) / a.step()).round().clamp(0.0, (a.n - 1) as f64) as usize;
            mi.push(i);
        }
        Some(self.flat_index(&mi))
    }

    /// Mass of each histogram bin when every axis is split into `bins`
    /// equal intervals; `(n − 1)` must be divisible by `bins`. Bin masses
    /// are exact sums of trapezoid cell masses, so they add up to the total.
    pub fn bin_masses(&self, bins: usize) -> Result<Vec<f64>> {
        for a in &self.axes {
            if bins == 0 || (a.n - 1) % bins != 0 {
                return Err(Error::InvalidParameter {
                    name: "bins",
                    reason: format!("{} grid intervals are not divisible into {bins} bins", a.n - 1),
                });
            }
        }
        let dens: Vec<f64> = (0..self.len()).map(|i| self.density(i)).collect();
        let mut out = vec![0.0; bins.pow(self.dim() as u32)];
        match self.dim() {
            1 => {
                let a = self.axes[0];
                let per = (a.n - 1) / bins;
                for c in 0..a.n - 1 {
                    out[c / per] += 0.5 * (dens[c] + dens[c + 1]) * a.step();
                }
            }
            _ => {
                let (a, b) = (self.axes[0], self.axes[1]);
                let (pa, pb) = ((a.n - 1) / bins, (b.n - 1) / bins);
                for i in 0..a.n - 1 {
                    for j in 0..b.n - 1 {
                        let corners = dens[i * b.n + j] + dens[i * b.n + j + 1] + dens[(i + 1) * b.n + j] + dens[(i + 1) * b.n + j + 1];
                        out[(i / pa) * bins + j / pb] += 0.25 * corners * a.step() * b.step();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Writes `coord_1[,coord_2],density` rows with the normalized density.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x_{i}")).collect();
        writeln!(w, "{},density", header.join(","))?;
        for i in 0..self.len() {
            let c: Vec<String> = self.coords(i).iter().map(|v| crate::output::fmt_real(*v)).collect();
            writeln!(w, "{},{}", c.join(","), crate::output::fmt_real(self.density(i)))?;
        }
        Ok(())
    }
}

fn multi_index_of(axes: &[GridAxis], mut idx: usize) -> Vec<usize> {
    let mut mi = vec![0; axes.len()];
    for (k, a) in axes.iter().enumerate().rev() {
        mi[k] = idx % a.n;
        idx /= a.n;
    }
    mi
}

fn coords_of(axes: &[GridAxis], idx: usize) -> Vec<f64> {
    multi_index_of(axes, idx)
        .iter()
        .zip(axes)
        .map(|(i, a)| a.coord(*i))
        .collect()
}

/// Prior mean ± 6 prior standard deviations on every axis.
pub fn default_axes(p: &ProblemSpec, n: usize) -> Result<Vec<GridAxis>> {
    (0..p.dim_x())
        .map(|i| {
            let sd = p.prior_cov.matrix()[(i, i)].sqrt();
            GridAxis::new(p.prior_mean[i] - 6.0 * sd, p.prior_mean[i] + 6.0 * sd, n)
        })
        .collect()
}

/// Normalized grid of the marginal target over model space (dim ≤ 2).
pub fn grid_marginal(p: &ProblemSpec, axes: &[GridAxis]) -> Result<GridDensity> {
    if p.dim_x() > 2 {
        return Err(Error::UnsupportedDimension(format!(
            "grid quadrature needs dim_x <= 2, got {}",
            p.dim_x()
        )));
    }
    if axes.len() != p.dim_x() {
        return Err(Error::DimensionMismatch {
            what: "grid axes",
            expected: p.dim_x(),
            actual: axes.len(),
        });
    }
    GridDensity::from_log_fn(axes.to_vec(), |c| log_target_marginal(p, &DVector::from_column_slice(c)))
}

fn check_joint_scalar(p: &ProblemSpec) -> Result<()> {
    if p.dim_x() != 1 || p.dim_d() != 1 {
        return Err(Error::UnsupportedDimension(format!(
            "joint (x, d) grids need dim_x = dim_d = 1, got {} and {}",
            p.dim_x(),
            p.dim_d()
        )));
    }
    Ok(())
}

/// Joint target over `(x, d)` for a scalar problem; axis 0 is `x`.
pub fn grid_joint_target(p: &ProblemSpec, h: &HyperParams, x_axis: GridAxis, d_axis: GridAxis) -> Result<GridDensity> {
    check_joint_scalar(p)?;
    GridDensity::from_log_fn(vec![x_axis, d_axis], |c| {
        log_target_joint(p, h, &DVector::from_element(1, c[0]), &DVector::from_element(1, c[1]))
    })
}

/// Proposal density formula over `(x*, d*)` for a scalar problem. The
/// formula is evaluated everywhere, including points no optimizer run
/// would return.
pub fn grid_joint_proposal(p: &ProblemSpec, h: &HyperParams, x_axis: GridAxis, d_axis: GridAxis) -> Result<GridDensity> {
    check_joint_scalar(p)?;
    GridDensity::from_log_fn(vec![x_axis, d_axis], |c| {
        match log_proposal_density(
            p,
            h,
            &DVector::from_element(1, c[0]),
            &DVector::from_element(1, c[1]),
            JacobianMode::Full,
        ) {
            Ok((lq, _)) => Ok(lq),
            Err(Error::SingularJacobian) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    })
}

/// Average over `x` nodes (weighted by the x-marginal) of the conditional
/// standard deviation of `d` given `x`, for a joint grid with axes `(x, d)`.
pub fn mean_conditional_sd(joint: &GridDensity) -> f64 {
    let (xa, da) = (joint.axes[0], joint.axes[1]);
    let mut acc = 0.0;
    let mut mass = 0.0;
    for i in 0..xa.n {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for j in 0..da.n {
            let idx = i * da.n + j;
            let w = da.trapezoid_weight(j) * joint.density(idx);
            let d = da.coord(j);
            m0 += w;
            m1 += w * d;
            m2 += w * d * d;
        }
        if m0 > 0.0 {
            let mean = m1 / m0;
            let var = (m2 / m0 - mean * mean).max(0.0);
            acc += xa.trapezoid_weight(i) * m0 * var.sqrt();
            mass += xa.trapezoid_weight(i) * m0;
        }
    }
    acc / mass
}

/// Exact Gaussian posterior of a linear-Gaussian problem:
/// `C' = (C_x⁻¹ + Gᵀ C_d⁻¹ G)⁻¹`, `m' = μ + C' Gᵀ C_d⁻¹ (d_obs − G μ)`.
pub fn conjugate_posterior(
    prior_mean: &DVector<f64>,
    prior_cov: &DMatrix<f64>,
    g: &DMatrix<f64>,
    d_obs: &DVector<f64>,
    obs_cov: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let cx_inv = prior_cov
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix("prior covariance"))?;
    let cd_inv = obs_cov
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix("observation covariance"))?;
    let precision = cx_inv + g.transpose() * &cd_inv * g;
    let cov = precision
        .try_inverse()
        .ok_or(Error::SingularMatrix("normal equations"))?;
    let mean = prior_mean + &cov * g.transpose() * &cd_inv * (d_obs - g * prior_mean);
    Ok((mean, cov))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub tv_distance: f64,
    /// Sample mean minus grid mean, per axis.
    pub mean_error: Vec<f64>,
    /// Sample variance minus grid variance, per axis.
    pub variance_error: Vec<f64>,
    /// Fraction of samples outside the grid extent.
    pub outside_fraction: f64,
    /// Empirical bin frequencies (row-major, `bins` per axis).
    pub histogram: Vec<f64>,
    pub bin_masses: Vec<f64>,
}

/// Histograms `samples` on `bins` equal bins per axis and compares with the
/// grid's bin masses. Samples outside the grid count fully toward the
/// total variation distance.
pub fn compare_samples_to_grid(samples: &[DVector<f64>], g: &GridDensity, bins: usize) -> Result<SampleReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples[0].len() != g.dim() {
        return Err(Error::DimensionMismatch {
            what: "sample dimension",
            expected: g.dim(),
            actual: samples[0].len(),
        });
    }
    let masses = g.bin_masses(bins)?;
    let mut counts = vec![0usize; masses.len()];
    let mut outside = 0usize;
    for s in samples {
        let mut flat = 0usize;
        let mut inside = true;
        for (x, a) in s.iter().zip(&g.axes) {
            if *x < a.lo || *x > a.hi {
                inside = false;
                break;
            }
            let b = (((x - a.lo) / (a.hi - a.lo)) * bins as f64).floor() as usize;
            flat = flat * bins + b.min(bins - 1);
        }
        if inside {
            counts[flat] += 1;
        } else {
            outside += 1;
        }
    }
    let n = samples.len() as f64;
    let histogram: Vec<f64> = counts.iter().map(|c| *c as f64 / n).collect();
    let outside_fraction = outside as f64 / n;
    let tv = 0.5
        * (histogram
            .iter()
            .zip(&masses)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            + outside_fraction
            + (1.0 - masses.iter().sum::<f64>()).abs());

    let dim = g.dim();
    let mut mean = DVector::zeros(dim);
    for s in samples {
        mean += s;
    }
    mean /= n;
    let mut var = DVector::zeros(dim);
    for s in samples {
        var += (s - &mean).map(|v| v * v);
    }
    var /= n;
    let grid_mean = g.mean();
    let grid_cov = g.covariance();
    Ok(SampleReport {
        tv_distance: tv,
        mean_error: (0..dim).map(|i| mean[i] - grid_mean[i]).collect(),
        variance_error: (0..dim).map(|i| var[i] - grid_cov[(i, i)]).collect(),
        outside_fraction,
        histogram,
        bin_masses: masses,
    })
}

/// Fraction of samples in each basin of [`GridDensity::mode_masses`].
/// Samples outside the grid or in unlabeled nodes are not assigned.
pub fn mode_occupation(samples: &[DVector<f64>], g: &GridDensity) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let labels = g.basin_labels();
    let mut counts = vec![0usize; g.find_modes().len()];
    for s in samples {
        if let Some(node) = g.nearest_node(s.as_slice()) {
            if let Some(m) = labels[node] {
                counts[m] += 1;
            }
        }
    }
    Ok(counts.iter().map(|c| *c as f64 / samples.len() as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::example1;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn std_normal_prior_only() -> GridDensity {
        let axis = GridAxis::new(-6.0, 6.0, 1201).unwrap();
        GridDensity::from_log_fn(vec![axis], |c| Ok(-0.5 * c[0] * c[0])).unwrap()
    }

    /// Inverse-CDF sampling from the piecewise-linear interpolant of a 1-D grid.
    fn sample_from_grid(g: &GridDensity, n: usize, seed: u64) -> Vec<DVector<f64>> {
        let a = g.axes[0];
        let dens: Vec<f64> = (0..a.n).map(|i| g.density(i)).collect();
        let mut cdf = vec![0.0];
        for c in 0..a.n - 1 {
            cdf.push(cdf[c] + 0.5 * (dens[c] + dens[c + 1]) * a.step());
        }
        let total = *cdf.last().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * total;
                let c = cdf.partition_point(|v| *v <= u).clamp(1, a.n - 1) - 1;
                // solve the quadratic inside the cell for the linear density
                let (f0, f1, h) = (dens[c], dens[c + 1], a.step());
                let target = u - cdf[c];
                let slope = (f1 - f0) / h;
                let t = if slope.abs() < 1e-14 {
                    target / f0.max(1e-300)
                } else {
                    (-f0 + (f0 * f0 + 2.0 * slope * target).max(0.0).sqrt()) / slope
                };
                DVector::from_element(1, a.coord(c) + t.clamp(0.0, h))
            })
            .collect()
    }

    #[test]
    fn grid_normalizes() {
        let g = std_normal_prior_only();
        assert_abs_diff_eq!(g.total_mass(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.mean()[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g.covariance()[(0, 0)], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn example1_grid_normalizer_and_modes() {
        let p = example1();
        let g = grid_marginal(&p, &[GridAxis::new(0.8, 3.0, 2048).unwrap()]).unwrap();
        // the mass outside [0.8, 3.0] is negligible; the integral is 1/a
        assert_abs_diff_eq!(g.normalizer.exp(), 1.0 / 4.567, epsilon = 1e-3);
        assert_eq!(g.find_modes().len(), 2);
    }

    #[test]
    fn conjugate_examples() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let (m, c) = conjugate_posterior(
            &DVector::from_element(1, 0.0),
            &one,
            &one,
            &DVector::from_element(1, 2.0),
            &one,
        )
        .unwrap();
        assert_abs_diff_eq!(m[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(0, 0)], 0.5, epsilon = 1e-15);

        let prior_mean = DVector::from_column_slice(&[0.3, -1.0]);
        let prior_cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let (m, c) = conjugate_posterior(
            &prior_mean,
            &prior_cov,
            &DMatrix::zeros(1, 2),
            &DVector::from_element(1, 5.0),
            &one,
        )
        .unwrap();
        assert_abs_diff_eq!(m, prior_mean, epsilon = 1e-14);
        assert_abs_diff_eq!(c, prior_cov, epsilon = 1e-14);

        let (_, c) = conjugate_posterior(
            &DVector::from_element(1, 0.0),
            &one,
            &one,
            &DVector::from_element(1, 0.0),
            &DMatrix::from_element(1, 1, 1e6),
        )
        .unwrap();
        assert!((c[(0, 0)] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn samples_from_the_grid_have_small_tv() {
        let g = std_normal_prior_only();
        let samples = sample_from_grid(&g, 1_000_000, 11);
        let r = compare_samples_to_grid(&samples, &g, 60).unwrap();
        assert!(r.tv_distance < 0.01, "tv = {}", r.tv_distance);
    }

    #[test]
    fn point_mass_has_tv_near_one() {
        let g = std_normal_prior_only();
        let samples = vec![DVector::from_element(1, 5.9); 1000];
        let r = compare_samples_to_grid(&samples, &g, 60).unwrap();
        assert!(r.tv_distance > 0.99);
    }

    #[test]
    fn empty_samples_rejected() {
        let g = std_normal_prior_only();
        assert_eq!(compare_samples_to_grid(&[], &g, 60), Err(Error::EmptySamples));
    }

    #[test]
    fn bin_masses_sum_to_one() {
        let axis = GridAxis::new(-3.0, 3.0, 121).unwrap();
        let g = GridDensity::from_log_fn(vec![axis, axis], |c| Ok(-0.5 * (c[0] * c[0] + c[1] * c[1]) - c[0] * c[1] * 0.3)).unwrap();
        let m = g.bin_masses(20).unwrap();
        assert_abs_diff_eq!(m.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(g.bin_masses(7).is_err());
        assert_eq!(g.find_modes().len(), 1);
    }

    #[test]
    fn unsupported_dimensions() {
        let p = crate::model::example2();
        assert!(grid_joint_target(&p, &HyperParams::new(0.1, 0.5).unwrap(), GridAxis::new(0.0, 1.0, 3).unwrap(), GridAxis::new(0.0, 1.0, 3).unwrap()).is_err());
        let three = vec![GridAxis::new(0.0, 1.0, 3).unwrap(); 3];
        assert!(GridDensity::from_log_fn(three, |_| Ok(0.0)).is_err());
    }
}
