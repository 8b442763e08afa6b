//! Solvers for `min f(x) + h(x) − g(x)`: gradient descent on `F_μ`, inexact
//! gradient descent, and the DCA family (DCA, proximal DCA, proximal DCA with
//! extrapolation).

use crate::error::{DcError, Result};
use crate::func::DCProblem;
use crate::linalg::Vector;
use crate::moreau::{moreau_envelope, DmeSmoothing, PhiSubproblem};
use crate::trace::{IterateTrace, Status, StepRecord, TraceTap};

/// When to stop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule {
    /// `‖x^{k+1} − y^k‖ / max{1, ‖x^{k+1}‖} ≤ tol`.
    RelativeStep { tol: f64 },
    /// `max{‖ξ‖, ‖x − y‖} ≤ tol`.
    Residual { tol: f64 },
    /// Run to the iteration cap.
    Never,
}

impl StoppingRule {
    fn hit(&self, x_new: &Vector, y: &Vector, xi_norm: f64) -> bool {
        match *self {
            Self::RelativeStep { tol } => termination_check(x_new, y, tol),
            Self::Residual { tol } => xi_norm.max(x_new.dist(y)) <= tol,
            Self::Never => false,
        }
    }
}

/// `‖x_new − y‖ / max{1, ‖x_new‖} ≤ tol`.
pub fn termination_check(x_new: &Vector, y: &Vector, tol: f64) -> bool {
    x_new.dist(y) / x_new.norm().max(1.0) <= tol
}

#[derive(Clone, Debug)]
pub struct UnconstrainedConfig {
    pub mu: f64,
    /// Gradient step on `F_μ`; defaults to `1/L_{F_μ}`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub max_iter: usize,
    pub stop: StoppingRule,
    /// Extrapolation restart period for pDCAe.
    pub restart_every: usize,
    /// Disable to run pDCAe with `θ_k ≡ 0`.
    pub extrapolate: bool,
    /// Inner tolerance for DCA subproblems solved iteratively.
    pub subproblem_tol: f64,
    pub tap: Option<TraceTap>,
}

impl UnconstrainedConfig {
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            alpha: None,
            beta: 1.0,
            max_iter: 10_000,
            stop: StoppingRule::RelativeStep { tol: 1e-5 },
            restart_every: 200,
            extrapolate: true,
            subproblem_tol: 1e-9,
            tap: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct UnconstrainedResult {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub trace: IterateTrace,
    pub status: Status,
    pub xi_norm: f64,
    pub gap_norm: f64,
}

impl UnconstrainedResult {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.objective)
    }
}

fn check_start(p: &DCProblem, v: &Vector) -> Result<()> {
    v.check_dim(p.n())
}

/// Gradient descent `z^{k+1} = z^k − α∇F_μ(z^k)`; the reported point is `x_{μφ}(z^k)`.
pub fn gd_on_fmu(p: &DCProblem, cfg: &UnconstrainedConfig, z0: &Vector) -> Result<UnconstrainedResult> {
    check_start(p, z0)?;
    let s = DmeSmoothing::new(p.clone(), cfg.mu)?;
    let alpha = cfg.alpha.unwrap_or(1.0 / s.lipschitz());
    if !(alpha > 0.0 && alpha <= (1.0 + 1e-12) / s.lipschitz()) {
        return Err(DcError::InfeasibleParameters(format!("α = {alpha} must lie in (0, 1/L_Fμ]")));
    }
    let mu = cfg.mu;
    let mut trace = IterateTrace::tapped(cfg.tap.clone());
    let mut z = z0.clone();
    let mut dz = 0.0;
    loop {
        let (mp, xp) = s.phi_envelope(&z)?;
        let (mg, xg) = s.g_envelope(&z)?;
        let grad = (&xg - &xp).scaled(1.0 / mu);
        let xi_norm = grad.norm();
        let gap = xp.dist(&xg);
        let objective = p.evaluate(&xp)?;
        trace.push(objective, 0.0, xi_norm, gap, 0, StepRecord { potential: mp - mg, dz, ..Default::default() });
        let done = cfg.stop.hit(&xp, &xg, xi_norm);
        if done || trace.len() > cfg.max_iter {
            let status = if done { Status::Converged } else { Status::MaxIter };
            return Ok(UnconstrainedResult { x: xp, y: xg, z, trace, status, xi_norm, gap_norm: gap });
        }
        let z_new = {
            let mut v = z.clone();
            v.axpy(-alpha, &grad);
            v
        };
        dz = z_new.dist(&z);
        z = z_new;
    }
}

/// Merit `𝓕(x, z) = f(x) + h(x) + ‖x − z‖²/(2μ) − M_{μg}(z)` of inexact GD.
pub fn inexact_gd_potential(p: &DCProblem, mu: f64, x: &[f64], z: &[f64]) -> Result<f64> {
    let (mg, _) = moreau_envelope(p.g(), mu, z)?;
    let zx = crate::linalg::Vector::from_slice(x).dist(z);
    Ok(p.f().value(x) + p.h().finite_part(x) + zx * zx / (2.0 * mu) - mg)
}

/// Inexact gradient descent on `F_μ`: `x_{μφ}` is replaced by one prox-gradient
/// step on `f + h` centered at `z^k`.
pub fn inexact_gd(p: &DCProblem, cfg: &UnconstrainedConfig, x0: &Vector, z0: &Vector) -> Result<UnconstrainedResult> {
    check_start(p, x0)?;
    check_start(p, z0)?;
    let (mu, beta) = (cfg.mu, cfg.beta);
    let lf = p.f().lipschitz();
    if !(mu > 0.0 && mu * lf < 1.0) {
        return Err(DcError::InfeasibleParameters(format!("need 0 < μ < 1/L_f, got μ = {mu}, L_f = {lf}")));
    }
    if !(beta > 0.0 && beta < 2.0) {
        return Err(DcError::InfeasibleParameters(format!("need 0 < β < 2, got {beta}")));
    }
    let f = p.f();
    let h = p.h();
    let g = p.g();
    let mut trace = IterateTrace::tapped(cfg.tap.clone());
    let mut x = x0.clone();
    let mut z = z0.clone();
    let mut grad_x = f.gradient(&x);
    let (mg0, mut xg) = moreau_envelope(g, mu, &z)?;
    let potential =
        |x: &Vector, z: &Vector, mg: f64| f.value(x) + h.finite_part(x) + x.dist(z).powi(2) / (2.0 * mu) - mg;
    trace.push(
        p.evaluate(&x)?,
        0.0,
        f64::NAN,
        f64::NAN,
        0,
        StepRecord { potential: potential(&x, &z, mg0), ..Default::default() },
    );
    if cfg.max_iter == 0 {
        return Ok(UnconstrainedResult {
            x,
            y: xg,
            z,
            trace,
            status: Status::MaxIter,
            xi_norm: f64::NAN,
            gap_norm: f64::NAN,
        });
    }
    loop {
        let mut v = z.clone();
        v.axpy(-mu, &grad_x);
        let x_new = h.prox(&v, mu)?;
        let grad_new = f.gradient(&x_new);
        let mut xi = &grad_new - &grad_x;
        xi.axpy(-1.0 / mu, &(&x_new - &xg));
        let xi_norm = xi.norm();
        let gap = x_new.dist(&xg);
        let mut z_new = z.clone();
        z_new.axpy(beta, &(&x_new - &xg));
        let (mg_new, xg_new) = moreau_envelope(g, mu, &z_new)?;

        let step = StepRecord {
            potential: potential(&x_new, &z_new, mg_new),
            dx: x_new.dist(&x),
            dz: z_new.dist(&z),
            ..Default::default()
        };
        trace.push(p.evaluate(&x_new)?, 0.0, xi_norm, gap, 0, step);
        let done = cfg.stop.hit(&x_new, &xg, xi_norm);
        let y = xg;
        x = x_new;
        z = z_new;
        grad_x = grad_new;
        xg = xg_new;
        if done || trace.len() > cfg.max_iter {
            let status = if done { Status::Converged } else { Status::MaxIter };
            return Ok(UnconstrainedResult { x, y, z, trace, status, xi_norm, gap_norm: gap });
        }
    }
}

fn dca_like<S>(
    p: &DCProblem,
    cfg: &UnconstrainedConfig,
    x0: &Vector,
    exact_subproblem: bool,
    mut step: S,
) -> Result<UnconstrainedResult>
where
    S: FnMut(usize, &Vector, &Vector, &Vector) -> Result<(Vector, f64)>,
{
    check_start(p, x0)?;
    let mut trace = IterateTrace::tapped(cfg.tap.clone());
    let mut x = x0.clone();
    let mut x_prev = x0.clone();
    let obj0 = p.evaluate(&x)?;
    trace.push(obj0, 0.0, f64::NAN, f64::NAN, 0, StepRecord { potential: obj0, ..Default::default() });
    let mut xi_g = p.subgradient_g(&x);
    if cfg.max_iter == 0 {
        let y = x.clone();
        return Ok(UnconstrainedResult {
            z: x.clone(),
            x,
            y,
            trace,
            status: Status::MaxIter,
            xi_norm: f64::NAN,
            gap_norm: f64::NAN,
        });
    }
    loop {
        let k = trace.len() - 1;
        let (x_new, xi_norm) = step(k, &x, &x_prev, &xi_g)?;
        let xi_g_new = p.subgradient_g(&x_new);
        // For DCA an unchanged subgradient means ξ_g^k ∈ ∂φ(x^{k+1}) ∩ ∂g(x^{k+1}).
        let fixed_point = exact_subproblem && xi_g_new == xi_g;
        let (y, gap) = if fixed_point { (x_new.clone(), 0.0) } else { (x.clone(), x_new.dist(&x)) };
        let obj = p.evaluate(&x_new)?;
        trace.push(obj, 0.0, xi_norm, gap, 0, StepRecord { potential: obj, dx: x_new.dist(&x), ..Default::default() });
        let done = fixed_point || cfg.stop.hit(&x_new, &y, xi_norm);
        x_prev = std::mem::replace(&mut x, x_new);
        xi_g = xi_g_new;
        if done || trace.len() > cfg.max_iter {
            let status = if done { Status::Converged } else { Status::MaxIter };
            return Ok(UnconstrainedResult { z: x.clone(), x, y, trace, status, xi_norm, gap_norm: gap });
        }
    }
}

/// DCA: `x^{k+1} ∈ argmin φ(x) − ⟨ξ_g^k, x⟩`.
pub fn dca(p: &DCProblem, cfg: &UnconstrainedConfig, x0: &Vector) -> Result<UnconstrainedResult> {
    if p.f().weak_convexity() > 0.0 {
        return Err(DcError::InfeasibleParameters("DCA needs a convex f".into()));
    }
    let sub = PhiSubproblem::new(p, 0.0, cfg.subproblem_tol)?;
    dca_like(p, cfg, x0, true, |_, x, _, xi_g| Ok((sub.solve(p, x, Some(xi_g), Some(x))?, 0.0)))
}

/// Proximal DCA: `x^{k+1} = x_{μφ}(x^k + μξ_g^k)`.
pub fn pdca(p: &DCProblem, cfg: &UnconstrainedConfig, x0: &Vector) -> Result<UnconstrainedResult> {
    let s = DmeSmoothing::new(p.clone(), cfg.mu)?;
    let mu = cfg.mu;
    dca_like(p, cfg, x0, false, |_, x, _, xi_g| {
        let mut center = x.clone();
        center.axpy(mu, xi_g);
        let x_new = s.phi_prox(&center)?;
        let xi_norm = x.dist(&x_new) / mu;
        Ok((x_new, xi_norm))
    })
}

/// Proximal DCA with extrapolation: a prox-gradient step of step size `μ` at
/// `y^k = x^k + θ_k(x^k − x^{k−1})` with the FISTA sequence and periodic restart.
pub fn pdcae(p: &DCProblem, cfg: &UnconstrainedConfig, x0: &Vector) -> Result<UnconstrainedResult> {
    let c = cfg.mu;
    if !(c > 0.0) {
        return Err(DcError::InfeasibleParameters(format!("step {c} must be positive")));
    }
    let f = p.f();
    let h = p.h();
    let restart = cfg.restart_every.max(1);
    let mut t_prev = 1.0_f64;
    let mut t = 1.0_f64;
    dca_like(p, cfg, x0, false, |k, x, x_prev, xi_g| {
        if k % restart == 0 {
            t_prev = 1.0;
            t = 1.0;
        }
        let theta = if cfg.extrapolate { (t_prev - 1.0) / t } else { 0.0 };
        t_prev = t;
        t = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut y = x.clone();
        y.axpy(theta, &(x - x_prev));
        let grad_y = f.gradient(&y);
        let mut v = y.clone();
        v.axpy(-c, &(&grad_y - xi_g));
        let x_new = h.prox(&v, c)?;
        let mut xi = f.gradient(&x_new);
        xi.axpy(-1.0, &grad_y);
        xi.axpy(1.0 / c, &(&y - &x_new));
        Ok((x_new, xi.norm()))
    })
}
