use crate::error::{DcError, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::vector::Vector;

const SYMMETRY_TOL: f64 = 1e-10;

/// Lower-triangular factor `L` with `L Lᵀ = M`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    lower: DenseMatrix,
}

/// Factors a symmetric positive-definite matrix.
pub fn cholesky(m: &DenseMatrix) -> Result<CholeskyFactor> {
    if !m.is_square() {
        return Err(DcError::ShapeMismatch(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let scale = m.data().iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    if m.asymmetry() > SYMMETRY_TOL * scale {
        return Err(DcError::ShapeMismatch("matrix is not symmetric".into()));
    }
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    let diag_max = (0..n).fold(0.0_f64, |acc, i| acc.max(m.get(i, i).abs()));
    let pivot_floor = (n as f64) * f64::EPSILON * diag_max;
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if d <= pivot_floor || !d.is_finite() {
            return Err(DcError::NotPositiveDefinite { row: j, pivot: d });
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(CholeskyFactor { n, lower: l })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Solves `M x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vector {
        debug_assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let row = self.lower.row(i);
            let mut s = y[i];
            for k in 0..i {
                s -= row[k] * y[k];
            }
            y[i] = s / row[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.lower.get(k, i) * y[k];
            }
            y[i] = s / self.lower.get(i, i);
        }
        Vector::from_vec(y)
    }

    /// Reassembles `L Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.lower.matmul(&self.lower.transpose()).expect("square factor")
    }
}
