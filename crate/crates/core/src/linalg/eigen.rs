//! Cyclic Jacobi eigensolver for symmetric matrices.

use crate::error::{DcError, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::vector::{dot, Vector};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `S = V diag(values) Vᵀ` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Eigenvectors, one per entry of `values`.
    pub vectors: Vec<Vector>,
}

impl SymmetricEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Applies `V diag(w(λ)) Vᵀ` to `z`.
    pub fn apply_spectral(&self, z: &[f64], w: impl Fn(f64) -> f64) -> Vector {
        let mut out = Vector::zeros(z.len());
        for (lam, v) in self.values.iter().zip(&self.vectors) {
            let c = dot(v, z) * w(*lam);
            if c != 0.0 {
                out.axpy(c, v);
            }
        }
        out
    }
}

/// Eigen-decomposition of a symmetric matrix.
pub fn symmetric_eigen(s: &DenseMatrix) -> Result<SymmetricEigen> {
    if !s.is_square() {
        return Err(DcError::ShapeMismatch("eigen-decomposition needs a square matrix".into()));
    }
    let n = s.rows();
    let scale = s.frobenius().max(f64::MIN_POSITIVE);
    if s.asymmetry() > 1e-10 * scale {
        return Err(DcError::ShapeMismatch("matrix is not symmetric".into()));
    }
    let mut a: Vec<f64> = s.data().to_vec();
    let mut v: Vec<f64> = DenseMatrix::identity(n).into_data();
    let target = (1e-15 * scale).powi(2);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j] * a[i * n + j]).sum();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + theta.hypot(1.0)) };
                let c = 1.0 / t.hypot(1.0);
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(DcError::ConvergenceFailure { what: "jacobi eigensolver", iters: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| a[i * n + i]).collect(),
        vectors: order.iter().map(|&j| (0..n).map(|k| v[k * n + j]).collect()).collect(),
    })
}
