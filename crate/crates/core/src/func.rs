//! Problem model: `F = φ − g` with `φ = f + h`, optionally subject to `Ax = b`.

use std::sync::Arc;

use crate::error::{DcError, Result};
use crate::linalg::{
    cholesky, operator_norm, svd_summary, symmetric_eigen, CholeskyFactor, DenseMatrix, SvdSummary, SymmetricEigen,
    Vector, DEFAULT_RANK_TOL,
};
use crate::prox;

/// Relative slack used when testing membership in an indicator's domain.
pub const FEAS_TOL: f64 = 1e-9;

/// The smooth part `f`.
#[derive(Clone, Debug)]
pub enum SmoothKind {
    /// `½‖Cx − d‖²`.
    LeastSquares {
        c: DenseMatrix,
        d: Vector,
    },
    /// `½xᵀQx + qᵀx` with symmetric `Q`.
    Quadratic {
        q: DenseMatrix,
        lin: Vector,
    },
    Zero,
}

/// Smooth component with its gradient Lipschitz constant `L_f` and weak
/// convexity modulus `m_φ`.
#[derive(Clone, Debug)]
pub struct SmoothSpec {
    kind: SmoothKind,
    lipschitz: f64,
    weak_convexity: f64,
}

impl SmoothSpec {
    pub fn least_squares(c: DenseMatrix, d: Vector) -> Result<Self> {
        if d.dim() != c.rows() {
            return Err(DcError::DimensionMismatch { expected: c.rows(), got: d.dim() });
        }
        let norm = operator_norm(&c)?;
        Ok(Self { kind: SmoothKind::LeastSquares { c, d }, lipschitz: norm * norm, weak_convexity: 0.0 })
    }

    pub fn quadratic(q: DenseMatrix, lin: Vector) -> Result<Self> {
        if !q.is_square() || lin.dim() != q.rows() {
            return Err(DcError::ShapeMismatch("quadratic needs n×n Q and length-n q".into()));
        }
        let eig = symmetric_eigen(&q)?;
        let lipschitz = eig.spectral_radius();
        let weak_convexity = (-eig.min()).max(0.0);
        Ok(Self { kind: SmoothKind::Quadratic { q, lin }, lipschitz, weak_convexity })
    }

    /// Builds a quadratic whose spectral constants are already known.
    pub fn quadratic_with_constants(q: DenseMatrix, lin: Vector, lipschitz: f64, weak_convexity: f64) -> Result<Self> {
        if !q.is_square() || lin.dim() != q.rows() {
            return Err(DcError::ShapeMismatch("quadratic needs n×n Q and length-n q".into()));
        }
        Ok(Self { kind: SmoothKind::Quadratic { q, lin }, lipschitz, weak_convexity })
    }

    pub fn zero() -> Self {
        Self { kind: SmoothKind::Zero, lipschitz: 0.0, weak_convexity: 0.0 }
    }

    pub fn kind(&self) -> &SmoothKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn weak_convexity(&self) -> f64 {
        self.weak_convexity
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SmoothKind::Zero)
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            SmoothKind::LeastSquares { c, .. } => Some(c.cols()),
            SmoothKind::Quadratic { q, .. } => Some(q.cols()),
            SmoothKind::Zero => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SmoothKind::LeastSquares { c, d } => {
                let mut r = c.matvec(x);
                r.axpy(-1.0, d);
                0.5 * r.norm_sq()
            }
            SmoothKind::Quadratic { q, lin } => 0.5 * q.quad_form(x) + lin.dot(x),
            SmoothKind::Zero => 0.0,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        match &self.kind {
            SmoothKind::LeastSquares { c, d } => {
                let mut r = c.matvec(x);
                r.axpy(-1.0, d);
                c.matvec_t(&r)
            }
            SmoothKind::Quadratic { q, lin } => {
                let mut g = q.matvec(x);
                g.axpy(1.0, lin);
                g
            }
            SmoothKind::Zero => Vector::zeros(x.len()),
        }
    }

    /// Hessian and linear term `(H, c)` with `f(x) = ½xᵀHx + cᵀx + const`; `None` for `Zero`.
    pub fn quadratic_form(&self) -> Option<(DenseMatrix, Vector)> {
        match &self.kind {
            SmoothKind::LeastSquares { c, d } => Some((c.gram(), -&c.matvec_t(d))),
            SmoothKind::Quadratic { q, lin } => Some((q.clone(), lin.clone())),
            SmoothKind::Zero => None,
        }
    }
}

/// Affine set `{x : Ax = b}` with a cached factor of `AAᵀ`.
#[derive(Debug)]
pub struct AffineSet {
    a: DenseMatrix,
    b: Vector,
    aat: CholeskyFactor,
}

impl AffineSet {
    pub fn new(a: DenseMatrix, b: Vector) -> Result<Self> {
        if b.dim() != a.rows() {
            return Err(DcError::DimensionMismatch { expected: a.rows(), got: b.dim() });
        }
        let aat =
            cholesky(&a.outer_gram()).map_err(|e| DcError::SingularSystem(format!("AAᵀ factorization failed: {e}")))?;
        Ok(Self { a, b, aat })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn residual(&self, x: &[f64]) -> Vector {
        let mut r = self.a.matvec(x);
        r.axpy(-1.0, &self.b);
        r
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.residual(x).norm() <= 1e-8 * (1.0 + self.b.norm())
    }

    /// Euclidean projection `z − Aᵀ(AAᵀ)⁻¹(Az − b)`.
    pub fn project(&self, z: &[f64]) -> Vector {
        let w = self.aat.solve(&self.residual(z));
        let mut x = Vector::from_slice(z);
        x.axpy(-1.0, &self.a.matvec_t(&w));
        x
    }
}

/// Convex quadratic `½xᵀGx` with a cached eigen-decomposition.
#[derive(Debug)]
pub struct ConvexQuadratic {
    g: DenseMatrix,
    eig: SymmetricEigen,
}

impl ConvexQuadratic {
    pub fn new(g: DenseMatrix) -> Result<Self> {
        let eig = symmetric_eigen(&g)?;
        let scale = eig.spectral_radius().max(1.0);
        if eig.min() < -1e-10 * scale {
            return Err(DcError::InfeasibleParameters(format!("quadratic is not convex (λ_min = {})", eig.min())));
        }
        Ok(Self { g, eig })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig.max().max(0.0)
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eig
    }

    /// `(I + tG)⁻¹ z`.
    pub fn prox(&self, z: &[f64], t: f64) -> Vector {
        self.eig.apply_spectral(z, |l| 1.0 / (1.0 + t * l.max(0.0)))
    }
}

/// Catalog of convex functions with value, subgradient and prox.
#[derive(Clone, Debug)]
pub enum ConvexFunctionSpec {
    Zero,
    /// `ϱ‖x‖₁`.
    L1Norm {
        weight: f64,
    },
    /// `ϱ‖x‖`.
    EuclideanNorm {
        weight: f64,
    },
    /// Indicator of `[lo, hi]ⁿ`.
    IndicatorBox {
        lo: f64,
        hi: f64,
    },
    /// Indicator of `{‖x‖₁ ≤ radius}`.
    IndicatorL1Ball {
        radius: f64,
    },
    IndicatorAffine(Arc<AffineSet>),
    ConvexQuadratic(Arc<ConvexQuadratic>),
    Sum(Vec<ConvexFunctionSpec>),
}

impl ConvexFunctionSpec {
    pub fn affine(a: DenseMatrix, b: Vector) -> Result<Self> {
        Ok(Self::IndicatorAffine(Arc::new(AffineSet::new(a, b)?)))
    }

    pub fn convex_quadratic(g: DenseMatrix) -> Result<Self> {
        Ok(Self::ConvexQuadratic(Arc::new(ConvexQuadratic::new(g)?)))
    }

    /// Fixed dimension implied by the parameters, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::IndicatorAffine(s) => Some(s.a.cols()),
            Self::ConvexQuadratic(q) => Some(q.g.cols()),
            Self::Sum(terms) => terms.iter().find_map(Self::dim),
            _ => None,
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, Self::IndicatorBox { .. } | Self::IndicatorL1Ball { .. } | Self::IndicatorAffine(_))
    }

    /// True when the function never takes the value +∞.
    pub fn is_finite_valued(&self) -> bool {
        match self {
            Self::Sum(terms) => terms.iter().all(Self::is_finite_valued),
            other => !other.is_indicator(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Sum(terms) => terms.iter().all(Self::is_zero),
            _ => false,
        }
    }

    /// Membership in the effective domain, with relative slack [`FEAS_TOL`].
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::IndicatorBox { lo, hi } => {
                let slack = FEAS_TOL * (1.0 + lo.abs().max(hi.abs()));
                x.iter().all(|v| *v >= lo - slack && *v <= hi + slack)
            }
            Self::IndicatorL1Ball { radius } => x.iter().map(|v| v.abs()).sum::<f64>() <= radius * (1.0 + FEAS_TOL),
            Self::IndicatorAffine(s) => s.contains(x),
            Self::Sum(terms) => terms.iter().all(|t| t.contains(x)),
            _ => true,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::L1Norm { weight } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            Self::EuclideanNorm { weight } => weight * crate::linalg::norm(x),
            Self::IndicatorBox { .. } | Self::IndicatorL1Ball { .. } | Self::IndicatorAffine(_) => {
                if self.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::ConvexQuadratic(q) => 0.5 * q.g.quad_form(x),
            Self::Sum(terms) => terms.iter().map(|t| t.value(x)).sum(),
        }
    }

    /// Value with every indicator term read as 0, for points known to lie in the domain.
    pub fn finite_part(&self, x: &[f64]) -> f64 {
        match self {
            Self::Sum(terms) => terms.iter().map(|t| t.finite_part(x)).sum(),
            t if t.is_indicator() => 0.0,
            t => t.value(x),
        }
    }

    /// One element of `∂(·)(x)`; `None` outside the domain. At kinks the
    /// midpoint element is returned (zero coordinates, zero vector at the origin).
    pub fn subgradient(&self, x: &[f64]) -> Option<Vector> {
        match self {
            Self::Zero => Some(Vector::zeros(x.len())),
            Self::L1Norm { weight } => Some(x.iter().map(|v| weight * sign0(*v)).collect()),
            Self::EuclideanNorm { weight } => {
                let nx = crate::linalg::norm(x);
                if nx == 0.0 {
                    Some(Vector::zeros(x.len()))
                } else {
                    Some(x.iter().map(|v| weight * v / nx).collect())
                }
            }
            Self::IndicatorBox { .. } | Self::IndicatorL1Ball { .. } | Self::IndicatorAffine(_) => {
                self.contains(x).then(|| Vector::zeros(x.len()))
            }
            Self::ConvexQuadratic(q) => Some(q.g.matvec(x)),
            Self::Sum(terms) => {
                let mut acc = Vector::zeros(x.len());
                for t in terms {
                    acc.axpy(1.0, &t.subgradient(x)?);
                }
                Some(acc)
            }
        }
    }

    /// `prox_{t·self}(z)`.
    pub fn prox(&self, z: &[f64], t: f64) -> Result<Vector> {
        let zv = Vector::from_slice(z);
        Ok(match self {
            Self::Zero => zv,
            Self::L1Norm { weight } => prox::prox_l1(&zv, t, *weight),
            Self::EuclideanNorm { weight } => prox::prox_euclidean(&zv, t, *weight),
            Self::IndicatorBox { lo, hi } => prox::project_box(&zv, *lo, *hi),
            Self::IndicatorL1Ball { radius } => prox::project_l1_ball(&zv, *radius),
            Self::IndicatorAffine(s) => s.project(z),
            Self::ConvexQuadratic(q) => q.prox(z, t),
            Self::Sum(_) => prox::prox_composite_fallback(self, &zv, t, prox::FALLBACK_TOL)?,
        })
    }

    /// Lipschitz constant of the function over its effective domain.
    pub fn lipschitz_on_domain(&self, n: usize) -> Option<f64> {
        match self {
            Self::Zero | Self::IndicatorBox { .. } | Self::IndicatorL1Ball { .. } | Self::IndicatorAffine(_) => {
                Some(0.0)
            }
            Self::L1Norm { weight } => Some(weight * (n as f64).sqrt()),
            Self::EuclideanNorm { weight } => Some(*weight),
            Self::ConvexQuadratic(_) => None,
            Self::Sum(terms) => terms.iter().map(|t| t.lipschitz_on_domain(n)).sum(),
        }
    }
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Unconstrained DC program `min f(x) + h(x) − g(x)`.
#[derive(Clone, Debug)]
pub struct DCProblem {
    f: SmoothSpec,
    h: ConvexFunctionSpec,
    g: ConvexFunctionSpec,
    n: usize,
}

impl DCProblem {
    pub fn new(f: SmoothSpec, h: ConvexFunctionSpec, g: ConvexFunctionSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(DcError::BadDims("problem dimension must be positive".into()));
        }
        for d in [f.dim(), h.dim(), g.dim()].into_iter().flatten() {
            if d != n {
                return Err(DcError::DimensionMismatch { expected: n, got: d });
            }
        }
        if !g.is_finite_valued() {
            return Err(DcError::InfeasibleParameters("g must be finite-valued".into()));
        }
        Ok(Self { f, h, g, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> &SmoothSpec {
        &self.f
    }

    pub fn h(&self) -> &ConvexFunctionSpec {
        &self.h
    }

    pub fn g(&self) -> &ConvexFunctionSpec {
        &self.g
    }

    /// `φ(x) = f(x) + h(x)`.
    pub fn phi(&self, x: &[f64]) -> f64 {
        let hv = self.h.value(x);
        if hv.is_infinite() {
            return hv;
        }
        self.f.value(x) + hv
    }

    /// `F(x) = f(x) + h(x) − g(x)`; `+∞` outside the domain of `h`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(DcError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let p = self.phi(x);
        if p.is_infinite() {
            return Ok(p);
        }
        Ok(p - self.g.value(x))
    }

    pub fn subgradient_g(&self, x: &[f64]) -> Vector {
        self.g.subgradient(x).expect("g is finite-valued")
    }
}

/// Linearly constrained DC program `min F(x)` s.t. `Ax = b`.
#[derive(Clone, Debug)]
pub struct LCDCProblem {
    dc: DCProblem,
    a: DenseMatrix,
    b: Vector,
    svd: Arc<SvdSummary>,
}

impl LCDCProblem {
    pub fn new(dc: DCProblem, a: DenseMatrix, b: Vector) -> Result<Self> {
        if a.cols() != dc.n() {
            return Err(DcError::DimensionMismatch { expected: dc.n(), got: a.cols() });
        }
        if b.dim() != a.rows() {
            return Err(DcError::DimensionMismatch { expected: a.rows(), got: b.dim() });
        }
        if a.is_zero() {
            return Err(DcError::InfeasibleParameters("constraint matrix is zero".into()));
        }
        let svd = svd_summary(&a, DEFAULT_RANK_TOL)?;
        let gap = svd.range_residual(&b);
        if gap > 1e-8 * (1.0 + b.norm()) {
            return Err(DcError::InfeasibleParameters(format!("b is not in Im(A) (distance {gap:.3e})")));
        }
        Ok(Self { dc, a, b, svd: Arc::new(svd) })
    }

    pub fn dc(&self) -> &DCProblem {
        &self.dc
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.dc.n()
    }

    pub fn svd(&self) -> &SvdSummary {
        &self.svd
    }

    /// `σ⁺_min(A)`.
    pub fn sigma_min_pos(&self) -> f64 {
        self.svd.sigma_min_pos().expect("A is nonzero")
    }

    pub fn residual(&self, x: &[f64]) -> Vector {
        let mut r = self.a.matvec(x);
        r.axpy(-1.0, &self.b);
        r
    }

    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        self.residual(x).norm()
    }

    /// The same program with `Ax = b` moved into `h` as an indicator.
    pub fn to_penalized_dc(&self) -> Result<DCProblem> {
        let affine = ConvexFunctionSpec::affine(self.a.clone(), self.b.clone())?;
        let h = match self.dc.h() {
            ConvexFunctionSpec::Zero => affine,
            h => ConvexFunctionSpec::Sum(vec![h.clone(), affine]),
        };
        DCProblem::new(self.dc.f().clone(), h, self.dc.g().clone(), self.dc.n())
    }
}

/// Curvature comparison behind the boundedness condition for quadratic programs.
#[derive(Clone, Debug)]
pub struct QpRegularity {
    /// `min { vᵀQv : Av = 0, ‖v‖ = 1 }` (+∞ for a trivial kernel).
    pub min_nullspace_curvature: f64,
    pub lambda_max_g: f64,
    /// `max { vᵀGv : Av = 0, ‖v‖ = 1 }` (0 for a trivial kernel).
    pub lambda_max_g_nullspace: f64,
    /// Strict inequality against the full `λ_max(G)`.
    pub satisfied: bool,
    /// Strict inequality against `G` restricted to `ker A`.
    pub satisfied_on_nullspace: bool,
}

/// Compares nullspace curvature of `f` with the curvature of `g` for quadratic data.
pub fn validate_qp_regularity(p: &LCDCProblem) -> Result<QpRegularity> {
    let q = match p.dc().f().kind() {
        SmoothKind::Quadratic { q, .. } => q,
        _ => return Err(DcError::ShapeMismatch("f must be Quadratic".into())),
    };
    let g = match p.dc().g() {
        ConvexFunctionSpec::ConvexQuadratic(g) => g,
        _ => return Err(DcError::ShapeMismatch("g must be ConvexQuadratic".into())),
    };
    let lambda_max_g = g.lambda_max();
    let (curv, g_null) = match p.svd().null_basis_matrix() {
        None => (f64::INFINITY, 0.0),
        Some(v) => {
            let vt = v.transpose();
            let reduced_q = vt.matmul(&q.matmul(&v)?)?;
            let reduced_g = vt.matmul(&g.matrix().matmul(&v)?)?;
            (symmetric_eigen(&symmetrize(reduced_q))?.min(), symmetric_eigen(&symmetrize(reduced_g))?.max())
        }
    };
    Ok(QpRegularity {
        min_nullspace_curvature: curv,
        lambda_max_g,
        lambda_max_g_nullspace: g_null,
        satisfied: curv > lambda_max_g,
        satisfied_on_nullspace: curv > g_null,
    })
}

fn symmetrize(m: DenseMatrix) -> DenseMatrix {
    let t = m.transpose();
    m.add_scaled(1.0, &t).expect("same shape").scaled(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DCProblem {
        DCProblem::new(
            SmoothSpec::zero(),
            ConvexFunctionSpec::IndicatorBox { lo: -1.0, hi: 1.0 },
            ConvexFunctionSpec::convex_quadratic(DenseMatrix::identity(1)).unwrap(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn toy_objective() {
        let p = toy();
        assert_eq!(p.evaluate(&[1.0]).unwrap(), -0.5);
        assert_eq!(p.evaluate(&[2.0]).unwrap(), f64::INFINITY);
        assert!(p.evaluate(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn plain_quadratic_at_origin() {
        let f = SmoothSpec::quadratic(DenseMatrix::identity(3), Vector::zeros(3)).unwrap();
        let p = DCProblem::new(f, ConvexFunctionSpec::Zero, ConvexFunctionSpec::Zero, 3).unwrap();
        assert_eq!(p.evaluate(&[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn subgradient_tie_breaking() {
        let l1 = ConvexFunctionSpec::L1Norm { weight: 1.0 };
        assert_eq!(l1.subgradient(&[2.0, -3.0, 0.0]).unwrap().as_slice(), &[1.0, -1.0, 0.0]);
        let l2 = ConvexFunctionSpec::EuclideanNorm { weight: 1.0 };
        assert_eq!(l2.subgradient(&[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
        let g = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let q = ConvexFunctionSpec::convex_quadratic(g.clone()).unwrap();
        assert_eq!(q.subgradient(&[1.0, 2.0]).unwrap(), g.matvec(&[1.0, 2.0]));
    }

    #[test]
    fn indicator_g_rejected() {
        let r = DCProblem::new(
            SmoothSpec::zero(),
            ConvexFunctionSpec::Zero,
            ConvexFunctionSpec::IndicatorL1Ball { radius: 1.0 },
            2,
        );
        assert!(r.is_err());
    }

    #[test]
    fn b_outside_range_rejected() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        let dc = DCProblem::new(SmoothSpec::zero(), ConvexFunctionSpec::Zero, ConvexFunctionSpec::Zero, 2).unwrap();
        assert!(LCDCProblem::new(dc.clone(), a.clone(), Vector::from_vec(vec![1.0, 2.0])).is_err());
        assert!(LCDCProblem::new(dc, a, Vector::from_vec(vec![1.0, 1.0])).is_ok());
    }

    fn qp(q: DenseMatrix, g: DenseMatrix, a: DenseMatrix) -> LCDCProblem {
        let n = q.rows();
        let f = SmoothSpec::quadratic(q, Vector::zeros(n)).unwrap();
        let gs = ConvexFunctionSpec::convex_quadratic(g).unwrap();
        let dc = DCProblem::new(f, ConvexFunctionSpec::Zero, gs, n).unwrap();
        let m = a.rows();
        LCDCProblem::new(dc, a, Vector::zeros(m)).unwrap()
    }

    #[test]
    fn qp_regularity_examples() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0]]).unwrap();
        let r = validate_qp_regularity(&qp(DenseMatrix::identity(2), DenseMatrix::zeros(2, 2), a.clone())).unwrap();
        assert!(r.satisfied);

        let r = validate_qp_regularity(&qp(DenseMatrix::from_diag(&[1.0, -1.0]), DenseMatrix::zeros(2, 2), a.clone()))
            .unwrap();
        assert!((r.min_nullspace_curvature - 1.0).abs() < 1e-14);
        assert!(r.satisfied);

        let r = validate_qp_regularity(&qp(DenseMatrix::zeros(2, 2), DenseMatrix::identity(2), a)).unwrap();
        assert!(!r.satisfied);
    }
}
