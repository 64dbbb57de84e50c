//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// A symmetric positive-definite matrix together with its Cholesky factor.
///
/// All quadratic forms `vᵀ C⁻¹ v` go through triangular solves against the
/// cached factor; the inverse is never formed.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>, what: &'static str) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                what,
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::NotPositiveDefinite { what });
                }
            }
        }
        let chol = Cholesky::new(matrix.clone()).ok_or(Error::NotPositiveDefinite { what })?;
        Ok(Self { matrix, chol })
    }

    pub fn from_diagonal(diag: &[f64], what: &'static str) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)), what)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), "identity").expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular factor `L` with `C = L Lᵀ`.
    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `C⁻¹ v`.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    /// `C⁻¹ M`.
    pub fn solve_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(m)
    }

    /// `L⁻¹ v`, so that `|L⁻¹ v|² = vᵀ C⁻¹ v`.
    pub fn whiten(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(v)
            .expect("Cholesky factor has a nonzero diagonal")
    }

    /// `L⁻¹ M`, column by column.
    pub fn whiten_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(m)
            .expect("Cholesky factor has a nonzero diagonal")
    }

    /// `L z`; maps a standard-normal vector to one with covariance `C`.
    pub fn color(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol.l() * z
    }

    /// `vᵀ C⁻¹ v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        self.whiten(v).norm_squared()
    }
}

/// `log |det M|` from a partially pivoted LU factorization.
///
/// Returns `None` when a pivot is exactly zero.
pub fn log_abs_det(m: DMatrix<f64>) -> Option<f64> {
    let lu = m.lu();
    let u = lu.u();
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let p = u[(i, i)];
        if p == 0.0 || !p.is_finite() {
            return None;
        }
        acc += p.abs().ln();
    }
    Some(acc)
}

/// Sup-norm of a vector.
pub fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
