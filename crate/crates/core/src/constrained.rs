//! Augmented Lagrangian solvers for `min f(x) + h(x) − g(x)` s.t. `Ax = b`.
//!
//! [`lcdc_alm`] handles smooth `φ = f` and takes its primal step on the
//! smoothed augmented Lagrangian; [`composite_lcdc_alm`] handles `h` with a
//! compact domain by linearizing `−g` and solving a strongly convex
//! subproblem with [`apg_inner`].

use crate::apg::{apg_minimize, ApgOptions, ApgOutcome};
use crate::error::{DcError, Result};
use crate::func::{ConvexFunctionSpec, LCDCProblem, SmoothKind};
use crate::linalg::{operator_norm, DenseMatrix, Vector};
use crate::moreau::moreau_envelope;
use crate::prox::QuadraticAffineSolver;
use crate::trace::{IterateTrace, Status, StepRecord, TraceTap};

/// Constants of the LCDC-ALM potential `Ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlmConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub nu: f64,
    pub rho: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
    /// `σ⁺_min(A)`.
    pub sigma_min_a: f64,
    /// `σ⁺_min(AAᵀ) = σ⁺_min(A)²`.
    pub sigma_min_aat: f64,
}

impl AlmConstants {
    /// Recomputes the κ's for a penalty other than the recipe's.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self.kappa1 = self.c1 - self.c3 / rho - self.nu / 2.0;
        self.kappa2 = self.c2 - self.nu / 2.0;
        self.kappa3 = self.nu / 2.0 - self.c4 / rho;
        self.kappa4 = self.nu / 2.0 - self.c3 / rho;
        self
    }

    pub fn kappas_positive(&self) -> bool {
        self.kappa1 > 0.0 && self.kappa2 > 0.0 && self.kappa3 > 0.0 && self.kappa4 > 0.0
    }
}

/// Fills the LCDC-ALM constants with `ν = min{c₁, c₂}` and
/// `ρ = 10·max{c₃/(c₁ − ν/2), 2c₃/ν, 2c₄/ν}`.
pub fn derive_alm_constants(p: &LCDCProblem, mu: f64, beta: f64) -> Result<AlmConstants> {
    alm_constants_from(p.dc().f().lipschitz(), p.sigma_min_pos(), mu, beta)
}

/// [`derive_alm_constants`] from raw `L_f` and `σ⁺_min(A)`.
pub fn alm_constants_from(lf: f64, sigma_min_a: f64, mu: f64, beta: f64) -> Result<AlmConstants> {
    if !(mu > 0.0 && mu * lf < 1.0) {
        return Err(DcError::InfeasibleParameters(format!("need 0 < μ < 1/L_f, got μ = {mu}, L_f = {lf}")));
    }
    if !(beta > 0.0 && beta < 2.0) {
        return Err(DcError::InfeasibleParameters(format!("need 0 < β < 2, got {beta}")));
    }
    let sigma_min_aat = sigma_min_a * sigma_min_a;
    let c1 = (1.0 / mu - lf) / 2.0;
    let c2 = (1.0 / beta - 0.5) / mu;
    let c3 = 3.0 / (mu * mu * sigma_min_aat);
    let c4 = 3.0 * lf * lf / sigma_min_aat;
    let nu = c1.min(c2);
    let rho = 10.0 * (c3 / (c1 - nu / 2.0)).max(2.0 * c3 / nu).max(2.0 * c4 / nu);
    let k = AlmConstants {
        c1,
        c2,
        c3,
        c4,
        nu,
        rho,
        kappa1: 0.0,
        kappa2: 0.0,
        kappa3: 0.0,
        kappa4: 0.0,
        sigma_min_a,
        sigma_min_aat,
    }
    .with_rho(rho);
    if !k.kappas_positive() {
        return Err(DcError::InfeasibleParameters(format!("non-positive κ: {k:?}")));
    }
    Ok(k)
}

/// Inner tolerance sequence `ε_k`, `k ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsSchedule {
    /// `ε/(2k)`.
    Harmonic {
        eps: f64,
    },
    Constant {
        eps: f64,
    },
    /// `ε₀ rᵏ⁻¹`.
    Geometric {
        eps0: f64,
        ratio: f64,
    },
}

impl EpsSchedule {
    pub fn at(&self, k: usize) -> f64 {
        let k = k.max(1) as f64;
        match *self {
            Self::Harmonic { eps } => eps / (2.0 * k),
            Self::Constant { eps } => eps,
            Self::Geometric { eps0, ratio } => eps0 * ratio.powf(k - 1.0),
        }
    }

    /// `Σ_{k≥1} ε_k²`.
    pub fn square_sum(&self) -> f64 {
        match *self {
            Self::Harmonic { eps } => eps * eps / 4.0 * std::f64::consts::PI.powi(2) / 6.0,
            Self::Constant { eps } => {
                if eps == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Geometric { eps0, ratio } => {
                if ratio.abs() < 1.0 {
                    eps0 * eps0 / (1.0 - ratio * ratio)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn max(&self) -> f64 {
        match *self {
            Self::Geometric { eps0, ratio } if ratio > 1.0 => f64::INFINITY * eps0,
            _ => self.at(1),
        }
    }
}

/// When a constrained solve stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstrainedStop {
    /// `max{‖ξ‖, ‖x − y‖, ‖Ax − b‖} ≤ tol`.
    Residual {
        tol: f64,
    },
    /// `‖Ax − b‖ ≤ infeas` and `max{‖ξ‖, ‖x − y‖} ≤ residual`.
    Split {
        infeas: f64,
        residual: f64,
    },
    /// `‖Ax^k − b‖ ≤ infeas` and `|F(x^k) − F(x^{k−1})| / |F(x^k)| ≤ rel_obj`.
    ObjectiveStall {
        infeas: f64,
        rel_obj: f64,
    },
    Never,
}

impl ConstrainedStop {
    fn hit(&self, xi: f64, gap: f64, infeas: f64, obj: f64, obj_prev: f64) -> bool {
        match *self {
            Self::Residual { tol } => xi.max(gap).max(infeas) <= tol,
            Self::Split { infeas: ti, residual } => infeas <= ti && xi.max(gap) <= residual,
            Self::ObjectiveStall { infeas: ti, rel_obj } => {
                infeas <= ti && (obj - obj_prev).abs() <= rel_obj * obj.abs()
            }
            Self::Never => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstrainedConfig {
    pub mu: f64,
    pub beta: f64,
    /// Penalty; LCDC-ALM defaults to the constants recipe.
    pub rho: Option<f64>,
    pub max_iter: usize,
    pub stop: ConstrainedStop,
    pub schedule: EpsSchedule,
    pub inner_max_iter: usize,
    /// Bound `Λ` asserted on every dual iterate.
    pub dual_bound: Option<f64>,
    /// Abort when the potential drops below this value.
    pub potential_floor: Option<f64>,
    pub tap: Option<TraceTap>,
}

impl ConstrainedConfig {
    pub fn new(mu: f64, beta: f64) -> Self {
        Self {
            mu,
            beta,
            rho: None,
            max_iter: 10_000,
            stop: ConstrainedStop::Residual { tol: 1e-6 },
            schedule: EpsSchedule::Harmonic { eps: 1e-3 },
            inner_max_iter: 100_000,
            dual_bound: None,
            potential_floor: None,
            tap: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstrainedResult {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub lambda: Vector,
    pub trace: IterateTrace,
    /// Row minimizing the max-residual.
    pub selected: usize,
    pub status: Status,
    pub rho: f64,
}

impl ConstrainedResult {
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.objective)
    }
}

/// `(‖ξ‖, ‖x − y‖, ‖Ax − b‖)`.
pub fn constrained_residual(p: &LCDCProblem, x: &[f64], y: &[f64], xi: &[f64]) -> (f64, f64, f64) {
    (crate::linalg::norm(xi), Vector::from_slice(x).dist(y), p.infeasibility(x))
}

fn check_dims(p: &LCDCProblem, x0: &Vector, z0: &Vector, lambda0: &Vector) -> Result<()> {
    x0.check_dim(p.n())?;
    z0.check_dim(p.n())?;
    lambda0.check_dim(p.a().rows())
}

/// LCDC-ALM for `h = 0`.
pub fn lcdc_alm(
    p: &LCDCProblem,
    cfg: &ConstrainedConfig,
    x0: &Vector,
    z0: &Vector,
    lambda0: &Vector,
) -> Result<ConstrainedResult> {
    check_dims(p, x0, z0, lambda0)?;
    let dc = p.dc();
    if !dc.h().is_zero() {
        return Err(DcError::Unsupported("LCDC-ALM needs h = 0; use the composite variant".into()));
    }
    let (mu, beta) = (cfg.mu, cfg.beta);
    let recipe = derive_alm_constants(p, mu, beta)?;
    let consts = match cfg.rho {
        Some(r) => recipe.with_rho(r),
        None => recipe,
    };
    let rho = consts.rho;
    let nu = consts.nu;
    let (a, b) = (p.a(), p.b());
    let f = dc.f();
    let g = dc.g();
    let solver = QuadraticAffineSolver::new(a, b, mu, rho)?;

    let psi = |x: &Vector, z: &Vector, lambda: &Vector, mg: f64| {
        let r = p.residual(x);
        f.value(x) + lambda.dot(&r) + 0.5 * rho * r.norm_sq() + x.dist(z).powi(2) / (2.0 * mu) - mg
    };

    let mut x = x0.clone();
    let mut z = z0.clone();
    let mut lambda = lambda0.clone();
    let mut grad_x = f.gradient(&x);
    // x^{-1} = x⁰ and z^{-1} = x⁰ + μ(∇f(x⁰) + Aᵀλ⁰).
    let mut z_prev = x.clone();
    z_prev.axpy(mu, &(&grad_x + &a.matvec_t(&lambda)));

    let (mg, mut y) = moreau_envelope(g, mu, &z)?;
    let mut trace = IterateTrace::tapped(cfg.tap.clone());
    {
        let mut xi = grad_x.clone();
        xi.axpy(-1.0 / mu, &(&z - &y));
        xi.axpy(1.0, &a.matvec_t(&lambda));
        let (xn, gap, infeas) = constrained_residual(p, &x, &y, &xi);
        let potential = psi(&x, &z, &lambda, mg) + 0.5 * nu * z.dist(&z_prev).powi(2);
        let step = StepRecord { potential, dz: z.dist(&z_prev), lambda_norm: lambda.norm(), ..Default::default() };
        trace.push(dc.evaluate(&x)?, infeas, xn, gap, 0, step);
    }
    let mut obj_prev = trace.rows[0].objective;
    let finish = |x, y, z, lambda, trace: IterateTrace, status| {
        let selected = trace.best_index().unwrap_or(0);
        Ok(ConstrainedResult { x, y, z, lambda, trace, selected, status, rho })
    };
    if cfg.max_iter == 0 {
        return finish(x, y, z, lambda, trace, Status::MaxIter);
    }
    loop {
        let x_new = solver.solve(&z, &grad_x, &lambda);
        let mut z_new = z.clone();
        z_new.axpy(beta, &(&x_new - &y));
        let r_new = p.residual(&x_new);
        let mut lambda_new = lambda.clone();
        lambda_new.axpy(rho, &r_new);
        let grad_new = f.gradient(&x_new);
        let mut xi = &grad_new - &grad_x;
        xi.axpy(1.0 / mu, &(&y - &x_new));

        let (mg_new, y_new) = moreau_envelope(g, mu, &z_new)?;
        let dx = x_new.dist(&x);
        let dz = z_new.dist(&z);
        let potential = psi(&x_new, &z_new, &lambda_new, mg_new) + 0.5 * nu * (dx * dx + dz * dz);
        let k = trace.len();
        if let Some(floor) = cfg.potential_floor {
            if potential < floor {
                return Err(DcError::PotentialBelowFloor { k, value: potential, floor });
            }
        }
        let (xn, gap, infeas) = constrained_residual(p, &x_new, &y, &xi);
        let obj = dc.evaluate(&x_new)?;
        let step = StepRecord {
            potential,
            dx,
            dz,
            dlambda: lambda_new.dist(&lambda),
            lambda_norm: lambda_new.norm(),
            ..Default::default()
        };
        trace.push(obj, infeas, xn, gap, 0, step);
        let done = cfg.stop.hit(xn, gap, infeas, obj, obj_prev);
        let y_used = std::mem::replace(&mut y, y_new);
        x = x_new;
        z = z_new;
        lambda = lambda_new;
        grad_x = grad_new;
        obj_prev = obj;
        if done || trace.len() > cfg.max_iter {
            let status = if done { Status::Converged } else { Status::MaxIter };
            return finish(x, y_used, z, lambda, trace, status);
        }
    }
}

/// Data of the composite primal subproblem
/// `min ⟨ℓ, x⟩ + h(x) + ⟨λ, Ax − b⟩ + (ρ/2)‖Ax − b‖² + ‖x − z‖²/(2μ)`.
#[derive(Clone, Copy, Debug)]
pub struct InnerProblem<'a> {
    /// `ℓ = ∇f(x^k) − ξ_g^k`.
    pub linear: &'a Vector,
    pub lambda: &'a Vector,
    pub rho: f64,
    pub a: &'a DenseMatrix,
    pub b: &'a Vector,
    pub mu: f64,
    pub center: &'a Vector,
    /// `‖A‖²`.
    pub a_norm_sq: f64,
}

/// Solves the composite primal subproblem by APG to `‖ζ‖ ≤ eps`, with
/// `m_ψ = 1/μ` and `L_ψ = ρ‖A‖² + 1/μ`.
pub fn apg_inner(
    ip: &InnerProblem<'_>,
    h: &ConvexFunctionSpec,
    x0: &Vector,
    eps: f64,
    max_iter: usize,
) -> Result<ApgOutcome> {
    let InnerProblem { linear, lambda, rho, a, b, mu, center, a_norm_sq } = *ip;
    // ∇ψ(x) = c + ρAᵀAx + x/μ with c = ℓ + Aᵀ(λ − ρb) − z/μ.
    let mut c = linear.clone();
    let mut w = lambda.clone();
    w.axpy(-rho, b);
    c.axpy(1.0, &a.matvec_t(&w));
    c.axpy(-1.0 / mu, center);
    let grad = |x: &Vector| {
        let mut g = c.clone();
        g.axpy(rho, &a.matvec_t(&a.matvec(x)));
        g.axpy(1.0 / mu, x);
        g
    };
    let opts = ApgOptions { lipschitz: rho * a_norm_sq + 1.0 / mu, strong_convexity: 1.0 / mu, tol: eps, max_iter };
    apg_minimize(x0, grad, |v, step| h.prox(v, step), opts)
}

/// Constants of the composite LCDC-ALM analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositeAlmConstants {
    /// Diameter of `dom h`.
    pub d_h: f64,
    /// Bound on `‖∇f‖` over `dom h`.
    pub m_grad_f: f64,
    /// Bound on `‖∂g‖` over `dom h`.
    pub m_sub_g: f64,
    /// Lipschitz constant of `h` on its domain.
    pub l_h: f64,
    /// Distance from the interior point `x̄` to the boundary of `dom h`.
    pub d_bar: f64,
    /// Uniform dual bound `Λ`.
    pub lambda_bound: f64,
    pub eta: f64,
    pub gamma: f64,
    /// `Σ ε_k²`.
    pub e_sum: f64,
    pub schedule: EpsSchedule,
}

/// Geometry of the compact domain of `h`: `(diameter, max ‖x‖, distance of x̄ to the boundary)`.
fn domain_geometry(h: &ConvexFunctionSpec, x_bar: &Vector) -> Result<(f64, f64, f64)> {
    let n = x_bar.dim() as f64;
    match h {
        ConvexFunctionSpec::IndicatorL1Ball { radius } => {
            Ok((2.0 * radius, *radius, (radius - x_bar.norm1()) / n.sqrt()))
        }
        ConvexFunctionSpec::IndicatorBox { lo, hi } => {
            let inner = x_bar.iter().map(|v| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min);
            Ok((n.sqrt() * (hi - lo), n.sqrt() * lo.abs().max(hi.abs()), inner))
        }
        _ => Err(DcError::Unsupported("composite LCDC-ALM needs h = indicator of an ℓ1-ball or a box".into())),
    }
}

fn subgradient_bound(g: &ConvexFunctionSpec, n: usize, radius: f64) -> Result<f64> {
    Ok(match g {
        ConvexFunctionSpec::Zero => 0.0,
        ConvexFunctionSpec::L1Norm { weight } => weight * (n as f64).sqrt(),
        ConvexFunctionSpec::EuclideanNorm { weight } => *weight,
        ConvexFunctionSpec::ConvexQuadratic(q) => q.lambda_max() * radius,
        ConvexFunctionSpec::Sum(terms) => terms.iter().map(|t| subgradient_bound(t, n, radius)).sum::<Result<f64>>()?,
        _ => return Err(DcError::Unsupported("g must be finite-valued".into())),
    })
}

/// Computes `Λ`, `η`, `γ` and `E` for composite LCDC-ALM.
pub fn derive_composite_constants(
    p: &LCDCProblem,
    mu: f64,
    beta: f64,
    x_bar: &Vector,
    lambda0: &Vector,
    schedule: EpsSchedule,
) -> Result<CompositeAlmConstants> {
    let dc = p.dc();
    let n = p.n();
    x_bar.check_dim(n)?;
    let lf = dc.f().lipschitz();
    let (d_h, radius, d_bar) = domain_geometry(dc.h(), x_bar)?;
    if !(d_bar > 0.0) || p.infeasibility(x_bar) > 1e-8 * (1.0 + p.b().norm()) {
        return Err(DcError::InfeasibleParameters("x̄ must be a feasible interior point of dom h".into()));
    }
    let m_grad_f = match dc.f().kind() {
        SmoothKind::LeastSquares { c, d } => {
            let cn = operator_norm(c)?;
            cn * (cn * radius + d.norm())
        }
        SmoothKind::Quadratic { lin, .. } => lf * radius + lin.norm(),
        SmoothKind::Zero => 0.0,
    };
    let m_sub_g = subgradient_bound(dc.g(), n, radius)?;
    let l_h = dc.h().lipschitz_on_domain(n).unwrap_or(0.0);
    let sigma = p.sigma_min_pos();
    let lambda_bound = lambda0.norm().max(2.0 * d_h / (d_bar * sigma) * (m_grad_f + m_sub_g + d_h / mu + l_h + 1.0));
    Ok(CompositeAlmConstants {
        d_h,
        m_grad_f,
        m_sub_g,
        l_h,
        d_bar,
        lambda_bound,
        eta: ((1.0 / mu - 2.0 * lf) / 4.0).min(1.0 / (2.0 * mu * beta)),
        gamma: lf + 1.0 / (mu * beta) + 1.0,
        e_sum: schedule.square_sum(),
        schedule,
    })
}

/// Composite LCDC-ALM for `h` with compact domain.
pub fn composite_lcdc_alm(
    p: &LCDCProblem,
    cfg: &ConstrainedConfig,
    x0: &Vector,
    z0: &Vector,
    lambda0: &Vector,
) -> Result<ConstrainedResult> {
    check_dims(p, x0, z0, lambda0)?;
    let dc = p.dc();
    let (f, h, g) = (dc.f(), dc.h(), dc.g());
    let (mu, beta) = (cfg.mu, cfg.beta);
    let lf = f.lipschitz();
    if !matches!(h, ConvexFunctionSpec::IndicatorL1Ball { .. } | ConvexFunctionSpec::IndicatorBox { .. }) {
        return Err(DcError::Unsupported("composite LCDC-ALM needs h = indicator of an ℓ1-ball or a box".into()));
    }
    if !(mu > 0.0 && 2.0 * mu * lf < 1.0) {
        return Err(DcError::InfeasibleParameters(format!("need 0 < μ < 1/(2L_f), got μ = {mu}, L_f = {lf}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(DcError::InfeasibleParameters(format!("need 0 < β ≤ 1, got {beta}")));
    }
    if !h.contains(x0) || !h.contains(z0) {
        return Err(DcError::InfeasibleParameters("x⁰ and z⁰ must lie in dom h".into()));
    }
    if p.svd().range_residual(lambda0) > 1e-8 * (1.0 + lambda0.norm()) {
        return Err(DcError::InfeasibleParameters("λ⁰ must lie in Im(A)".into()));
    }
    if !(cfg.schedule.max() <= 1.0 && cfg.schedule.at(1) > 0.0) {
        return Err(DcError::InfeasibleParameters("inner tolerances must lie in (0, 1]".into()));
    }
    let rho = cfg.rho.ok_or_else(|| DcError::InfeasibleParameters("composite LCDC-ALM needs an explicit ρ".into()))?;
    if !(rho > 0.0) {
        return Err(DcError::InfeasibleParameters(format!("ρ = {rho} must be positive")));
    }
    let (a, b) = (p.a(), p.b());
    let a_norm = p.svd().sigma_max();
    let a_norm_sq = a_norm * a_norm;

    let merit = |x: &Vector, z: &Vector, lambda: &Vector| {
        let r = p.residual(x);
        f.value(x) + h.finite_part(x) - g.value(x)
            + lambda.dot(&r)
            + 0.5 * rho * r.norm_sq()
            + x.dist(z).powi(2) / (2.0 * mu)
    };

    let mut x = x0.clone();
    let mut z = z0.clone();
    let mut lambda = lambda0.clone();
    let mut grad_x = f.gradient(&x);
    let mut trace = IterateTrace::tapped(cfg.tap.clone());
    {
        let mut xi = grad_x.clone();
        xi.axpy(-1.0, &dc.subgradient_g(&x));
        xi.axpy(1.0, &a.matvec_t(&lambda));
        let (xn, gap, infeas) = constrained_residual(p, &x, &x, &xi);
        let step = StepRecord { potential: merit(&x, &z, &lambda), lambda_norm: lambda.norm(), ..Default::default() };
        trace.push(dc.evaluate(&x)?, infeas, xn, gap, 0, step);
    }
    if let Some(bound) = cfg.dual_bound {
        if lambda.norm() > bound {
            return Err(DcError::DualBoundViolated { k: 0, norm: lambda.norm(), bound });
        }
    }
    let mut obj_prev = trace.rows[0].objective;
    let finish = |x, y, z, lambda, trace: IterateTrace, status| {
        let selected = trace.best_index().unwrap_or(0);
        Ok(ConstrainedResult { x, y, z, lambda, trace, selected, status, rho })
    };
    if cfg.max_iter == 0 {
        let y = x.clone();
        return finish(x, y, z, lambda, trace, Status::MaxIter);
    }
    loop {
        let k = trace.len() - 1;
        let eps = cfg.schedule.at(k + 1);
        let mut linear = grad_x.clone();
        linear.axpy(-1.0, &dc.subgradient_g(&x));
        let ip = InnerProblem { linear: &linear, lambda: &lambda, rho, a, b, mu, center: &z, a_norm_sq };
        let inner = apg_inner(&ip, h, &x, eps, cfg.inner_max_iter)?;
        if !inner.converged {
            return Err(DcError::MaxIterExceeded { what: "composite inner APG", iters: inner.iters });
        }
        let x_new = inner.x;
        let mut z_new = z.clone();
        z_new.axpy(beta, &(&x_new - &z));
        let mut lambda_new = lambda.clone();
        lambda_new.axpy(rho, &p.residual(&x_new));
        let grad_new = f.gradient(&x_new);
        let mut xi = inner.zeta.clone();
        xi.axpy(1.0, &grad_new);
        xi.axpy(-1.0, &grad_x);
        xi.axpy(1.0 / mu, &(&z - &x_new));

        let (xn, gap, infeas) = constrained_residual(p, &x_new, &x, &xi);
        let obj = dc.evaluate(&x_new)?;
        let lambda_norm = lambda_new.norm();
        let step = StepRecord {
            potential: merit(&x_new, &z_new, &lambda_new),
            dx: x_new.dist(&x),
            dz: z_new.dist(&z),
            dlambda: lambda_new.dist(&lambda),
            lambda_norm,
            inner_tol: eps,
            zeta_norm: inner.zeta_norm,
        };
        trace.push(obj, infeas, xn, gap, inner.iters, step);
        if let Some(bound) = cfg.dual_bound {
            if lambda_norm > bound {
                return Err(DcError::DualBoundViolated { k: k + 1, norm: lambda_norm, bound });
            }
        }
        let done = cfg.stop.hit(xn, gap, infeas, obj, obj_prev);
        let y = std::mem::replace(&mut x, x_new);
        z = z_new;
        lambda = lambda_new;
        grad_x = grad_new;
        obj_prev = obj;
        if done || trace.len() > cfg.max_iter {
            let status = if done { Status::Converged } else { Status::MaxIter };
            return finish(x, y, z, lambda, trace, status);
        }
    }
}

/// `‖Q − G‖` when `f` and `g` are both quadratic, else `L_f` plus the curvature of `g`.
pub fn smooth_part_norm(p: &LCDCProblem) -> Result<f64> {
    let dc = p.dc();
    match (dc.f().kind(), dc.g()) {
        (SmoothKind::Quadratic { q, .. }, ConvexFunctionSpec::ConvexQuadratic(g)) => {
            operator_norm(&q.add_scaled(-1.0, g.matrix())?)
        }
        (_, ConvexFunctionSpec::ConvexQuadratic(g)) => Ok(dc.f().lipschitz() + g.lambda_max()),
        _ => Ok(dc.f().lipschitz()),
    }
}

/// Proximal ALM baseline for `h = 0` with a full dual step:
/// `x^{k+1} = argmin ⟨∇f(x^k) − ξ_g^k, x⟩ + ⟨λ^k, Ax − b⟩ + (ρ/2)‖Ax − b‖²
/// + ‖x − x^k‖²/(2μ) + ‖x − z^k‖²/(2μ)`, `z^{k+1} = z^k + β(x^{k+1} − z^k)`,
/// `λ^{k+1} = λ^k + ρ(Ax^{k+1} − b)`. `ρ` defaults to [`smooth_part_norm`].
pub fn proximal_alm(
    p: &LCDCProblem,
    cfg: &ConstrainedConfig,
    x0: &Vector,
    z0: &Vector,
    lambda0: &Vector,
) -> Result<ConstrainedResult> {
    check_dims(p, x0, z0, lambda0)?;
    let dc = p.dc();
    if !dc.h().is_zero() {
        return Err(DcError::Unsupported("proximal ALM needs h = 0".into()));
    }
    let (mu, beta) = (cfg.mu, cfg.beta);
    if !(mu > 0.0 && beta > 0.0 && beta <= 1.0) {
        return Err(DcError::InfeasibleParameters(format!("need μ > 0 and 0 < β ≤ 1, got μ = {mu}, β = {beta}")));
    }
    let rho = match cfg.rho {
        Some(r) => r,
        None => smooth_part_norm(p)?,
    };
    let (a, f) = (p.a(), dc.f());
    // Two proximal terms of weight 1/μ merge into one of weight 2/μ at their midpoint.
    let solver = QuadraticAffineSolver::new(a, p.b(), mu / 2.0, rho)?;
    let linear_at = |x: &Vector| {
        let mut l = f.gradient(x);
        l.axpy(-1.0, &dc.subgradient_g(x));
        l
    };

    let mut x = x0.clone();
    let mut z = z0.clone();
    let mut lambda = lambda0.clone();
    let mut linear = linear_at(&x);
    let mut trace = IterateTrace::tapped(cfg.tap.clone());
    {
        let mut xi = linear.clone();
        xi.axpy(1.0, &a.matvec_t(&lambda));
        let (xn, gap, infeas) = constrained_residual(p, &x, &x, &xi);
        trace.push(
            dc.evaluate(&x)?,
            infeas,
            xn,
            gap,
            0,
            StepRecord { lambda_norm: lambda.norm(), ..Default::default() },
        );
    }
    let mut obj_prev = trace.rows[0].objective;
    let finish = |x, y, z, lambda, trace: IterateTrace, status| {
        let selected = trace.best_index().unwrap_or(0);
        Ok(ConstrainedResult { x, y, z, lambda, trace, selected, status, rho })
    };
    if cfg.max_iter == 0 {
        let y = x.clone();
        return finish(x, y, z, lambda, trace, Status::MaxIter);
    }
    loop {
        let center = (&x + &z).scaled(0.5);
        let x_new = solver.solve(&center, &linear, &lambda);
        let mut lambda_new = lambda.clone();
        lambda_new.axpy(rho, &p.residual(&x_new));
        let mut z_new = z.clone();
        z_new.axpy(beta, &(&x_new - &z));
        // Optimality of x_new: ℓ_k + Aᵀλ^{k+1} + (2/μ)(x_new − center) = 0.
        let mut xi = f.gradient(&x_new);
        xi.axpy(-1.0, &f.gradient(&x));
        xi.axpy(-2.0 / mu, &(&x_new - &center));
        let (xn, gap, infeas) = constrained_residual(p, &x_new, &x, &xi);
        let obj = dc.evaluate(&x_new)?;
        let step = StepRecord {
            dx: x_new.dist(&x),
            dz: z_new.dist(&z),
            dlambda: lambda_new.dist(&lambda),
            lambda_norm: lambda_new.norm(),
            ..Default::default()
        };
        trace.push(obj, infeas, xn, gap, 0, step);
        let done = cfg.stop.hit(xn, gap, infeas, obj, obj_prev);
        linear = linear_at(&x_new);
        let y = std::mem::replace(&mut x, x_new);
        z = z_new;
        lambda = lambda_new;
        obj_prev = obj;
        if done || trace.len() > cfg.max_iter {
            let status = if done { Status::Converged } else { Status::MaxIter };
            return finish(x, y, z, lambda, trace, status);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipe_arithmetic() {
        let k = alm_constants_from(1.0, 1.0, 0.1, 1.0).unwrap();
        assert!((k.c1 - 4.5).abs() < 1e-12);
        assert!((k.c2 - 5.0).abs() < 1e-12);
        assert!((k.c3 - 300.0).abs() < 1e-9);
        assert_eq!(k.nu, 4.5);
        assert!(k.kappas_positive());
    }

    #[test]
    fn recipe_rejects_bad_parameters() {
        assert!(alm_constants_from(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(alm_constants_from(1.0, 1.0, 0.1, 2.0).is_err());
    }

    #[test]
    fn harmonic_schedule() {
        let s = EpsSchedule::Harmonic { eps: 1.0 };
        assert_eq!(s.at(1), 0.5);
        assert_eq!(s.at(4), 0.125);
        let partial: f64 = (1..200_000).map(|k| s.at(k).powi(2)).sum();
        assert!((partial - s.square_sum()).abs() < 1e-5);
    }
}
