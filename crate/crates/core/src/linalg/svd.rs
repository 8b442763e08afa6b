//! One-sided Jacobi SVD and power-iteration operator norm.

use crate::error::{DcError, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::rng::SeededRng;
use crate::linalg::vector::{dot, Vector};

/// Default relative threshold separating positive from zero singular values.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-15;

/// Singular values and right singular subspaces of a matrix.
#[derive(Clone, Debug)]
pub struct SvdSummary {
    /// The `min(m, n)` largest singular values, non-increasing.
    pub singular_values: Vec<f64>,
    /// Orthonormal basis of `ker A`.
    pub right_null_basis: Vec<Vector>,
    /// Orthonormal basis of `Im Aᵀ`, ordered by decreasing singular value.
    pub right_row_basis: Vec<Vector>,
    /// Orthonormal basis of `Im A`, paired with `right_row_basis`.
    pub left_basis: Vec<Vector>,
    pub positive_rank: usize,
}

impl SvdSummary {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest positive singular value, if any.
    pub fn sigma_min_pos(&self) -> Option<f64> {
        if self.positive_rank == 0 {
            None
        } else {
            Some(self.singular_values[self.positive_rank - 1])
        }
    }

    /// Null basis as the columns of an `n × k` matrix; `None` when the kernel is trivial.
    pub fn null_basis_matrix(&self) -> Option<DenseMatrix> {
        let n = self.right_null_basis.first()?.dim();
        Some(DenseMatrix::from_columns(n, &self.right_null_basis))
    }

    /// Distance from `b` to `Im A`.
    pub fn range_residual(&self, b: &[f64]) -> f64 {
        let mut r = Vector::from_slice(b);
        for u in &self.left_basis {
            let c = dot(u, &r);
            r.axpy(-c, u);
        }
        r.norm()
    }
}

/// Computes the singular values and right singular subspaces of `a` by one-sided Jacobi.
pub fn svd_summary(a: &DenseMatrix, rank_tol: f64) -> Result<SvdSummary> {
    let (m, n) = (a.rows(), a.cols());
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).into_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| Vector::basis(n, j).into_vec()).collect();
    let floor = (f64::EPSILON * a.frobenius()).powi(2);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot(&u[p], &u[q]);
                if gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate_pair(&mut u, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(DcError::ConvergenceFailure { what: "jacobi svd", iters: MAX_SWEEPS });
    }

    let sigma: Vec<f64> = u.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let smax = sigma[order[0]];
    let cut = rank_tol * smax;

    let mut summary = SvdSummary {
        singular_values: order.iter().take(m.min(n)).map(|&j| sigma[j]).collect(),
        right_null_basis: Vec::new(),
        right_row_basis: Vec::new(),
        left_basis: Vec::new(),
        positive_rank: 0,
    };
    for &j in &order {
        let vj = Vector::from_vec(v[j].clone());
        if smax > 0.0 && sigma[j] > cut {
            summary.positive_rank += 1;
            summary.right_row_basis.push(vj);
            summary.left_basis.push(u[j].iter().map(|x| x / sigma[j]).collect());
        } else {
            summary.right_null_basis.push(vj);
        }
    }
    Ok(summary)
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*xp, *xq);
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

const POWER_MAX_ITER: usize = 200_000;
const POWER_REL_TOL: f64 = 1e-14;

/// Spectral norm `‖A‖` by power iteration on `AᵀA`.
pub fn operator_norm(a: &DenseMatrix) -> Result<f64> {
    if a.is_zero() {
        return Ok(0.0);
    }
    let mut rng = SeededRng::new(0x6f70_6e6f_726d);
    let mut x = rng.gaussian_vec(a.cols());
    let nx = x.norm();
    x.scale_mut(1.0 / nx);
    let mut prev = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let y = a.matvec(&x);
        let s2 = y.norm_sq();
        let mut w = a.matvec_t(&y);
        let nw = w.norm();
        if nw == 0.0 {
            return Ok(s2.sqrt());
        }
        w.scale_mut(1.0 / nw);
        x = w;
        if (s2 - prev).abs() <= POWER_REL_TOL * s2 {
            return Ok(s2.sqrt());
        }
        prev = s2;
    }
    Err(DcError::ConvergenceFailure { what: "power iteration", iters: POWER_MAX_ITER })
}
