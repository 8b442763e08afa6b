//! Moreau envelopes and the difference-of-envelopes smoothing
//! `F_μ = M_{μφ} − M_{μg}` with gradient `μ⁻¹(x_{μg}(z) − x_{μφ}(z))`.

use std::sync::Arc;

use crate::apg::{apg_minimize, ApgOptions};
use crate::error::{DcError, Result};
use crate::func::{AffineSet, ConvexFunctionSpec, DCProblem};
use crate::linalg::{cholesky, CholeskyFactor, DenseMatrix, Vector};

/// Prox-gradient residual target when `x_{μφ}` has no direct solve.
pub const PHI_PROX_TOL: f64 = 1e-10;
const PHI_PROX_MAX_ITER: usize = 200_000;

/// `(M_{μ·spec}(z), prox_{μ·spec}(z))` for a catalog function.
pub fn moreau_envelope(spec: &ConvexFunctionSpec, mu: f64, z: &[f64]) -> Result<(f64, Vector)> {
    let x = spec.prox(z, mu)?;
    let value = spec.finite_part(&x) + x.dist(z).powi(2) / (2.0 * mu);
    Ok((value, x))
}

/// How `argmin f(x) + h(x) − ⟨s, x⟩ + (w/2)‖x − z‖²` is computed.
#[derive(Debug)]
enum Strategy {
    /// `f = 0`: the prox of `h`.
    ProxOfH,
    /// `h = 0`: `(H + wI)x = wz − c + s`.
    Linear { factor: CholeskyFactor, lin: Vector },
    /// `h = δ_{Ax=b}`: KKT system solved through its Schur complement.
    LinearAffine { factor: CholeskyFactor, lin: Vector, affine: Arc<AffineSet>, schur: CholeskyFactor },
    /// APG on the (strongly) convex sum.
    Apg { lipschitz: f64, strong_convexity: f64 },
}

/// Solver for the convex subproblems `argmin φ(x) − ⟨s, x⟩ + (w/2)‖x − z‖²`
/// shared by the envelope of `φ` (`w = 1/μ`, `s = 0`) and DCA (`w = 0`).
#[derive(Debug)]
pub struct PhiSubproblem {
    weight: f64,
    tol: f64,
    strategy: Strategy,
}

impl PhiSubproblem {
    pub fn new(problem: &DCProblem, weight: f64, tol: f64) -> Result<Self> {
        let f = problem.f();
        let h = problem.h();
        let strategy = match f.quadratic_form() {
            None if weight > 0.0 => Strategy::ProxOfH,
            None => {
                return Err(DcError::Unsupported("subproblem without curvature (f = 0 and no proximal term)".into()))
            }
            Some((hess, lin)) => {
                let k = hess.add_diag(weight);
                if h.is_zero() {
                    Strategy::Linear { factor: cholesky(&k)?, lin }
                } else if let Some(affine) = lone_affine(h) {
                    let factor = cholesky(&k)?;
                    let a = affine.a();
                    let m = a.rows();
                    let kinv_at: Vec<Vector> = (0..m).map(|i| factor.solve(a.row(i))).collect();
                    let mut s = DenseMatrix::zeros(m, m);
                    for i in 0..m {
                        for j in 0..m {
                            s.set(i, j, crate::linalg::dot(a.row(i), &kinv_at[j]));
                        }
                    }
                    let st = s.transpose();
                    let s = s.add_scaled(1.0, &st)?.scaled(0.5);
                    let schur = cholesky(&s).map_err(|e| DcError::SingularSystem(e.to_string()))?;
                    Strategy::LinearAffine { factor, lin, affine, schur }
                } else {
                    let lipschitz = f.lipschitz() + weight;
                    if lipschitz <= 0.0 {
                        return Err(DcError::Unsupported("subproblem without curvature".into()));
                    }
                    Strategy::Apg { lipschitz, strong_convexity: (weight - f.weak_convexity()).max(0.0) }
                }
            }
        };
        Ok(Self { weight, tol, strategy })
    }

    /// Solves the subproblem for center `z`, shift `s` and APG warm start `warm`.
    pub fn solve(
        &self,
        problem: &DCProblem,
        z: &[f64],
        shift: Option<&[f64]>,
        warm: Option<&Vector>,
    ) -> Result<Vector> {
        let w = self.weight;
        let rhs = |lin: &Vector| {
            let mut r = Vector::from_slice(z).scaled(w);
            r.axpy(-1.0, lin);
            if let Some(s) = shift {
                r.axpy(1.0, s);
            }
            r
        };
        match &self.strategy {
            Strategy::ProxOfH => {
                let mut center = Vector::from_slice(z);
                if let Some(s) = shift {
                    center.axpy(1.0 / w, s);
                }
                problem.h().prox(&center, 1.0 / w)
            }
            Strategy::Linear { factor, lin } => Ok(factor.solve(&rhs(lin))),
            Strategy::LinearAffine { factor, lin, affine, schur } => {
                let r = rhs(lin);
                let x0 = factor.solve(&r);
                let nu = schur.solve(&affine.residual(&x0));
                let mut r2 = r;
                r2.axpy(-1.0, &affine.a().matvec_t(&nu));
                Ok(factor.solve(&r2))
            }
            Strategy::Apg { lipschitz, strong_convexity } => {
                let f = problem.f();
                let h = problem.h();
                let zv = Vector::from_slice(z);
                let x0 = match warm {
                    Some(x) => h.prox(x, 1.0 / lipschitz)?,
                    None => h.prox(z, 1.0 / lipschitz)?,
                };
                let out = apg_minimize(
                    &x0,
                    |x| {
                        let mut g = f.gradient(x);
                        if w > 0.0 {
                            g.axpy(w, &(x - &zv));
                        }
                        if let Some(s) = shift {
                            g.axpy(-1.0, s);
                        }
                        g
                    },
                    |v, step| h.prox(v, step),
                    ApgOptions {
                        lipschitz: *lipschitz,
                        strong_convexity: *strong_convexity,
                        tol: self.tol,
                        max_iter: PHI_PROX_MAX_ITER,
                    },
                )?;
                if !out.converged {
                    return Err(DcError::MaxIterExceeded { what: "φ subproblem", iters: out.iters });
                }
                Ok(out.x)
            }
        }
    }
}

fn lone_affine(h: &ConvexFunctionSpec) -> Option<Arc<AffineSet>> {
    match h {
        ConvexFunctionSpec::IndicatorAffine(s) => Some(s.clone()),
        ConvexFunctionSpec::Sum(terms) => {
            let live: Vec<_> = terms.iter().filter(|t| !t.is_zero()).collect();
            match live.as_slice() {
                [ConvexFunctionSpec::IndicatorAffine(s)] => Some(s.clone()),
                _ => None,
            }
        }
        _ => None,
    }
}

/// The smoothed objective of a DC program at a fixed `μ`.
#[derive(Debug)]
pub struct DmeSmoothing {
    problem: DCProblem,
    mu: f64,
    lipschitz: f64,
    phi: PhiSubproblem,
}

impl DmeSmoothing {
    pub fn new(problem: DCProblem, mu: f64) -> Result<Self> {
        let m_phi = problem.f().weak_convexity();
        if !(mu > 0.0) || (m_phi > 0.0 && mu * m_phi >= 1.0) {
            return Err(DcError::InfeasibleParameters(format!("μ = {mu} outside (0, 1/m_φ) with m_φ = {m_phi}")));
        }
        let lipschitz = if m_phi > 0.0 { (2.0 - mu * m_phi) / (mu - mu * mu * m_phi) } else { 2.0 / mu };
        let phi = PhiSubproblem::new(&problem, 1.0 / mu, PHI_PROX_TOL)?;
        Ok(Self { problem, mu, lipschitz, phi })
    }

    pub fn problem(&self) -> &DCProblem {
        &self.problem
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Gradient Lipschitz constant `L_{F_μ}`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `x_{μφ}(z)`.
    pub fn phi_prox(&self, z: &[f64]) -> Result<Vector> {
        self.phi.solve(&self.problem, z, None, None)
    }

    /// `x_{μg}(z)`.
    pub fn g_prox(&self, z: &[f64]) -> Result<Vector> {
        self.problem.g().prox(z, self.mu)
    }

    /// `(M_{μφ}(z), x_{μφ}(z))`.
    pub fn phi_envelope(&self, z: &[f64]) -> Result<(f64, Vector)> {
        let x = self.phi_prox(z)?;
        let value = self.problem.f().value(&x) + self.problem.h().finite_part(&x) + x.dist(z).powi(2) / (2.0 * self.mu);
        Ok((value, x))
    }

    /// `(M_{μg}(z), x_{μg}(z))`.
    pub fn g_envelope(&self, z: &[f64]) -> Result<(f64, Vector)> {
        moreau_envelope(self.problem.g(), self.mu, z)
    }

    /// `F_μ(z)`.
    pub fn value(&self, z: &[f64]) -> Result<f64> {
        Ok(self.phi_envelope(z)?.0 - self.g_envelope(z)?.0)
    }

    /// `∇F_μ(z)`.
    pub fn gradient(&self, z: &[f64]) -> Result<Vector> {
        let xp = self.phi_prox(z)?;
        let xg = self.g_prox(z)?;
        Ok((&xg - &xp).scaled(1.0 / self.mu))
    }

    /// Checks `F(x_{μφ}(z)) ≤ F_μ(z) ≤ F(x_{μg}(z))` with slack 1e-9.
    pub fn sandwich_check(&self, z: &[f64]) -> Result<Sandwich> {
        let (mp, xp) = self.phi_envelope(z)?;
        let (mg, xg) = self.g_envelope(z)?;
        let mid = mp - mg;
        let p = &self.problem;
        let lower = p.f().value(&xp) + p.h().finite_part(&xp) - p.g().value(&xp);
        let upper = p.evaluate(&xg)?;
        let slack = 1e-9;
        let ok = lower <= mid + slack && (upper.is_infinite() || mid <= upper + slack);
        Ok(Sandwich { lower, mid, upper, ok })
    }

    /// Returns `x_{μφ}(z)` as a candidate stationary point of `F` when `‖∇F_μ(z)‖ ≤ tol`.
    pub fn stationarity_of_smoothed(&self, z: &[f64], tol: f64) -> Result<Option<Vector>> {
        let xp = self.phi_prox(z)?;
        let xg = self.g_prox(z)?;
        Ok((xg.dist(&xp) / self.mu <= tol).then_some(xp))
    }
}

/// Output of [`DmeSmoothing::sandwich_check`].
#[derive(Clone, Copy, Debug)]
pub struct Sandwich {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    pub ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::SmoothSpec;

    fn toy() -> DmeSmoothing {
        let p = DCProblem::new(
            SmoothSpec::zero(),
            ConvexFunctionSpec::IndicatorBox { lo: -1.0, hi: 1.0 },
            ConvexFunctionSpec::convex_quadratic(DenseMatrix::identity(1)).unwrap(),
            1,
        )
        .unwrap();
        DmeSmoothing::new(p, 1.0).unwrap()
    }

    #[test]
    fn envelope_examples() {
        let (v, x) = moreau_envelope(&ConvexFunctionSpec::IndicatorBox { lo: -1.0, hi: 1.0 }, 1.0, &[2.0]).unwrap();
        assert_eq!((v, x[0]), (0.5, 1.0));
        let g = ConvexFunctionSpec::convex_quadratic(DenseMatrix::identity(1)).unwrap();
        let (v, x) = moreau_envelope(&g, 1.0, &[2.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15 && (x[0] - 1.0).abs() < 1e-15);
        let (v, x) = moreau_envelope(&ConvexFunctionSpec::Zero, 1.0, &[0.3]).unwrap();
        assert_eq!((v, x[0]), (0.0, 0.3));
    }

    #[test]
    fn toy_values_and_gradients() {
        let s = toy();
        assert_eq!(s.lipschitz(), 2.0);
        assert_eq!(s.value(&[0.0]).unwrap(), 0.0);
        assert!((s.value(&[2.0]).unwrap() + 0.5).abs() < 1e-15);
        assert!((s.value(&[0.5]).unwrap() + 0.0625).abs() < 1e-15);
        assert!((s.gradient(&[0.5]).unwrap()[0] + 0.25).abs() < 1e-15);
        assert!(s.gradient(&[2.0]).unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn toy_stationarity() {
        let s = toy();
        assert_eq!(s.stationarity_of_smoothed(&[2.0], 1e-12).unwrap().unwrap()[0], 1.0);
        assert!(s.stationarity_of_smoothed(&[0.5], 1e-3).unwrap().is_none());
    }

    #[test]
    fn weak_convexity_bound_enforced() {
        let f = SmoothSpec::quadratic(DenseMatrix::from_diag(&[-2.0]), Vector::zeros(1)).unwrap();
        let p = DCProblem::new(f, ConvexFunctionSpec::Zero, ConvexFunctionSpec::Zero, 1).unwrap();
        assert!(DmeSmoothing::new(p.clone(), 0.5).is_err());
        let s = DmeSmoothing::new(p, 0.25).unwrap();
        // (2 − μm)/(μ − μ²m) with μ = 1/4, m = 2
        assert!((s.lipschitz() - 1.5 / 0.125).abs() < 1e-12);
    }
}
