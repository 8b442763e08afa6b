//! Proximal mappings and projections for the function catalog.

use crate::apg::{apg_minimize, ApgOptions};
use crate::error::{DcError, Result};
use crate::func::{ConvexFunctionSpec, ConvexQuadratic};
use crate::linalg::{cholesky, CholeskyFactor, DenseMatrix, Vector};

/// Prox-gradient residual target of the iterative fallback.
pub const FALLBACK_TOL: f64 = 1e-10;
pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_ITER: usize = 100_000;
const FALLBACK_MAX_ITER: usize = 100_000;

/// Soft thresholding: `sign(zᵢ)·max(|zᵢ| − tϱ, 0)`.
pub fn prox_l1(z: &Vector, t: f64, weight: f64) -> Vector {
    let k = t * weight;
    z.map(|v| v.signum() * (v.abs() - k).max(0.0))
}

/// Block soft thresholding: `(1 − tϱ/‖z‖)₊ z`.
pub fn prox_euclidean(z: &Vector, t: f64, weight: f64) -> Vector {
    let nz = z.norm();
    let k = t * weight;
    if nz <= k {
        Vector::zeros(z.dim())
    } else {
        z.scaled(1.0 - k / nz)
    }
}

pub fn project_box(z: &Vector, lo: f64, hi: f64) -> Vector {
    z.map(|v| v.clamp(lo, hi))
}

/// Projection onto `{x : ‖x‖₁ ≤ radius}` via the sorted-magnitude pivot.
pub fn project_l1_ball(z: &Vector, radius: f64) -> Vector {
    if z.norm1() <= radius {
        return z.clone();
    }
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    z.map(|v| v.signum() * (v.abs() - theta).max(0.0))
}

/// Solver for `(ρAᵀA + I/μ) x = z/μ + ρAᵀb − Aᵀλ − ℓ` with a cached factor.
#[derive(Clone, Debug)]
pub struct QuadraticAffineSolver {
    a: DenseMatrix,
    b: Vector,
    mu: f64,
    rho: f64,
    factor: CholeskyFactor,
}

impl QuadraticAffineSolver {
    pub fn new(a: &DenseMatrix, b: &Vector, mu: f64, rho: f64) -> Result<Self> {
        if !(mu > 0.0 && rho >= 0.0) {
            return Err(DcError::InfeasibleParameters(format!("need μ > 0 and ρ ≥ 0, got μ={mu}, ρ={rho}")));
        }
        let system = a.gram().scaled(rho).add_diag(1.0 / mu);
        let factor = cholesky(&system).map_err(|e| DcError::SingularSystem(e.to_string()))?;
        Ok(Self { a: a.clone(), b: b.clone(), mu, rho, factor })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Minimizer of `⟨ℓ, x⟩ + ⟨λ, Ax − b⟩ + (ρ/2)‖Ax − b‖² + ‖x − z‖²/(2μ)`.
    pub fn solve(&self, z: &[f64], linear: &[f64], lambda: &[f64]) -> Vector {
        let mut rhs = Vector::from_slice(z).scaled(1.0 / self.mu);
        let mut w = self.b.scaled(self.rho);
        w.axpy(-1.0, lambda);
        rhs.axpy(1.0, &self.a.matvec_t(&w));
        rhs.axpy(-1.0, linear);
        self.factor.solve(&rhs)
    }
}

/// Convenience wrapper building a one-off [`QuadraticAffineSolver`].
pub fn prox_quadratic_affine(
    z: &Vector,
    mu: f64,
    linear: &Vector,
    a: &DenseMatrix,
    b: &Vector,
    lambda: &Vector,
    rho: f64,
) -> Result<Vector> {
    Ok(QuadraticAffineSolver::new(a, b, mu, rho)?.solve(z, linear, lambda))
}

/// Result of [`dykstra_intersection`].
#[derive(Clone, Debug)]
pub struct DykstraOutcome {
    pub x: Vector,
    pub iters: usize,
    pub converged: bool,
}

/// Dykstra's alternating projections onto `C₁ ∩ C₂`. The returned point lies in `C₂`.
pub fn dykstra_intersection<P1, P2>(z: &Vector, proj1: P1, proj2: P2, tol: f64, max_iter: usize) -> DykstraOutcome
where
    P1: Fn(&Vector) -> Vector,
    P2: Fn(&Vector) -> Vector,
{
    let n = z.dim();
    let mut x = z.clone();
    let mut p = Vector::zeros(n);
    let mut q = Vector::zeros(n);
    for it in 1..=max_iter {
        let xp = &x + &p;
        let y = proj1(&xp);
        p = &xp - &y;
        let yq = &y + &q;
        let x_new = proj2(&yq);
        q = &yq - &x_new;
        let gap = x_new.dist(&x).max(x_new.dist(&y));
        x = x_new;
        if gap <= tol {
            return DykstraOutcome { x, iters: it, converged: true };
        }
    }
    DykstraOutcome { x, iters: max_iter, converged: false }
}

fn flatten<'a>(spec: &'a ConvexFunctionSpec, out: &mut Vec<&'a ConvexFunctionSpec>) {
    match spec {
        ConvexFunctionSpec::Sum(terms) => terms.iter().for_each(|t| flatten(t, out)),
        ConvexFunctionSpec::Zero => {}
        other => out.push(other),
    }
}

/// A nonsmooth remainder whose prox is available directly or through Dykstra.
enum ProxPart<'a> {
    None,
    Single(&'a ConvexFunctionSpec),
    Intersection(&'a ConvexFunctionSpec, &'a ConvexFunctionSpec),
    /// Separable term followed by a box clip.
    Clipped(&'a ConvexFunctionSpec, f64, f64),
}

impl ProxPart<'_> {
    fn prox(&self, v: &Vector, step: f64, tol: f64) -> Result<Vector> {
        match self {
            Self::None => Ok(v.clone()),
            Self::Single(s) => s.prox(v, step),
            Self::Intersection(s1, s2) => {
                let proj1 = |w: &Vector| s1.prox(w, 1.0).expect("projection");
                let proj2 = |w: &Vector| s2.prox(w, 1.0).expect("projection");
                let out = dykstra_intersection(v, proj1, proj2, tol, DYKSTRA_MAX_ITER);
                if out.converged {
                    Ok(out.x)
                } else {
                    Err(DcError::MaxIterExceeded { what: "dykstra", iters: out.iters })
                }
            }
            Self::Clipped(s, lo, hi) => Ok(project_box(&s.prox(v, step)?, *lo, *hi)),
        }
    }
}

/// Splits a sum into a convex-quadratic part and a prox-friendly part.
fn split(spec: &ConvexFunctionSpec) -> Result<(Vec<&ConvexQuadratic>, ProxPart<'_>)> {
    let mut terms = Vec::new();
    flatten(spec, &mut terms);
    let mut quads = Vec::new();
    let mut rest = Vec::new();
    for t in terms {
        match t {
            ConvexFunctionSpec::ConvexQuadratic(q) => quads.push(q.as_ref()),
            other => rest.push(other),
        }
    }
    let part = match rest.as_slice() {
        [] => ProxPart::None,
        [one] => ProxPart::Single(one),
        [ConvexFunctionSpec::L1Norm { .. }, ConvexFunctionSpec::IndicatorBox { lo, hi }] => {
            ProxPart::Clipped(rest[0], *lo, *hi)
        }
        [ConvexFunctionSpec::IndicatorBox { lo, hi }, ConvexFunctionSpec::L1Norm { .. }] => {
            ProxPart::Clipped(rest[1], *lo, *hi)
        }
        [a, b] if a.is_indicator() && b.is_indicator() => {
            // Affine projections are exact, so keep them last.
            if matches!(a, ConvexFunctionSpec::IndicatorAffine(_)) {
                ProxPart::Intersection(b, a)
            } else {
                ProxPart::Intersection(a, b)
            }
        }
        _ => return Err(DcError::Unsupported("prox of a sum needs at most one non-indicator nonsmooth term".into())),
    };
    Ok((quads, part))
}

/// `prox_{t·spec}(z)` for sums without a closed form.
///
/// Quadratic terms are treated as the smooth part of an APG solve; the rest
/// must be a single prox-friendly term or an intersection of two sets.
pub fn prox_composite_fallback(spec: &ConvexFunctionSpec, z: &Vector, t: f64, tol: f64) -> Result<Vector> {
    let (quads, part) = split(spec)?;
    if quads.is_empty() {
        return part.prox(z, t, tol.min(DYKSTRA_TOL));
    }
    let lipschitz = quads.iter().map(|q| q.lambda_max()).sum::<f64>() + 1.0 / t;
    let grad = |x: &Vector| {
        let mut g = (x - z).scaled(1.0 / t);
        for q in &quads {
            g.axpy(1.0, &q.matrix().matvec(x));
        }
        g
    };
    let inner_tol = (tol * 1e-2).max(1e-14);
    let prox = |v: &Vector, step: f64| part.prox(v, step, inner_tol);
    let out = apg_minimize(
        z,
        grad,
        prox,
        ApgOptions { lipschitz, strong_convexity: 1.0 / t, tol, max_iter: FALLBACK_MAX_ITER },
    )?;
    if !out.converged {
        return Err(DcError::MaxIterExceeded { what: "composite prox", iters: out.iters });
    }
    Ok(out.x)
}
