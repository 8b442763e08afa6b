//! Solver dispatch for one (instance, options) pair.

use std::time::Instant;

use dme_dc::constrained::{
    composite_lcdc_alm, derive_composite_constants, lcdc_alm, proximal_alm, smooth_part_norm, ConstrainedConfig,
    ConstrainedResult, ConstrainedStop, EpsSchedule,
};
use dme_dc::func::{DCProblem, LCDCProblem};
use dme_dc::instance::{Instance, InstanceFile};
use dme_dc::linalg::SeededRng;
use dme_dc::trace::{Status, TraceRow, TraceTap};
use dme_dc::unconstrained::{
    dca, gd_on_fmu, inexact_gd, pdca, pdcae, StoppingRule, UnconstrainedConfig, UnconstrainedResult,
};
use dme_dc::{DcError, Vector};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::options::{SolveOptions, SolverKind};

pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Relative-step tolerance of the unconstrained solvers.
pub const DEFAULT_STEP_TOL: f64 = 1e-5;
pub const DEFAULT_GD_TOL: f64 = 1e-6;
/// Infeasibility target of the constrained solvers; the residual target is 100× this.
pub const DEFAULT_INFEAS_TOL: f64 = 1e-5;
pub const DEFAULT_EPS: f64 = 1e-3;
pub const COMPOSITE_BETA: f64 = 0.1;
pub const COMPOSITE_RHO: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct FinalResiduals {
    pub xi_norm: f64,
    pub gap_norm: f64,
    pub infeasibility: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub solver: &'static str,
    pub iters: usize,
    pub final_objective: f64,
    pub final_residuals: FinalResiduals,
    pub status: &'static str,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Rows and summary of one run; `error` is set when the solver failed part way.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<TraceRow>,
    pub summary: Summary,
    pub error: Option<CliError>,
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIter => "max_iter",
    }
}

fn summarize(
    solver: SolverKind,
    rows: &[TraceRow],
    status: &'static str,
    wall_ms: f64,
    selected: Option<usize>,
) -> Summary {
    let last = rows.last();
    Summary {
        solver: solver.name(),
        iters: rows.len().saturating_sub(1),
        final_objective: last.map_or(f64::NAN, |r| r.objective),
        final_residuals: FinalResiduals {
            xi_norm: last.map_or(f64::NAN, |r| r.xi_norm),
            gap_norm: last.map_or(f64::NAN, |r| r.gap_norm),
            infeasibility: last.map_or(f64::NAN, |r| r.infeasibility),
        },
        status,
        wall_ms,
        selected,
        error: None,
    }
}

fn start_point(n: usize, opts: &SolveOptions) -> Vector {
    match (opts.seed, opts.start) {
        (Some(seed), _) => SeededRng::new(seed).gaussian_vec(n).scaled(0.1),
        (None, Some(c)) => Vector::from_vec(vec![c; n]),
        (None, None) => Vector::zeros(n),
    }
}

fn scaled_mu(lipschitz: f64, factor: f64) -> f64 {
    if lipschitz > 0.0 {
        factor / lipschitz
    } else {
        1.0
    }
}

fn unconstrained_config(solver: SolverKind, p: &DCProblem, opts: &SolveOptions, tap: TraceTap) -> UnconstrainedConfig {
    let mut cfg = UnconstrainedConfig::new(opts.mu.unwrap_or_else(|| scaled_mu(p.f().lipschitz(), 0.99)));
    cfg.beta = opts.beta.unwrap_or(1.0);
    cfg.max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    cfg.stop = match solver {
        SolverKind::Gd => StoppingRule::Residual { tol: opts.tol.unwrap_or(DEFAULT_GD_TOL) },
        _ => StoppingRule::RelativeStep { tol: opts.tol.unwrap_or(DEFAULT_STEP_TOL) },
    };
    cfg.tap = Some(tap);
    cfg
}

fn constrained_config(
    solver: SolverKind,
    p: &LCDCProblem,
    opts: &SolveOptions,
    tap: TraceTap,
) -> CliResult<ConstrainedConfig> {
    let lf = p.dc().f().lipschitz();
    let (mu, beta) = match solver {
        SolverKind::CompositeAlm => (scaled_mu(lf, 0.4), COMPOSITE_BETA),
        SolverKind::ProximalAlm => (1.0 / smooth_part_norm(p)?.max(f64::MIN_POSITIVE), 0.5),
        _ => (scaled_mu(lf, 0.5), 1.0),
    };
    let mut cfg = ConstrainedConfig::new(opts.mu.unwrap_or(mu), opts.beta.unwrap_or(beta));
    cfg.rho = opts.rho_penalty;
    cfg.max_iter = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let infeas = opts.tol.unwrap_or(DEFAULT_INFEAS_TOL);
    cfg.stop = match solver {
        SolverKind::CompositeAlm => ConstrainedStop::ObjectiveStall { infeas, rel_obj: 1e-3 },
        _ => ConstrainedStop::Split { infeas, residual: 100.0 * infeas },
    };
    cfg.schedule = EpsSchedule::Harmonic { eps: opts.eps.unwrap_or(DEFAULT_EPS) };
    cfg.tap = Some(tap);
    Ok(cfg)
}

/// Checks the solver/instance pairing before any work is done.
fn require_constrained(solver: SolverKind, inst: &Instance) -> CliResult<&LCDCProblem> {
    match inst {
        Instance::Constrained(p) => Ok(p),
        Instance::Unconstrained(_) => {
            Err(CliError::Config(format!("solver `{}` needs an instance with linear constraints", solver.name())))
        }
    }
}

enum Finished {
    Unconstrained(UnconstrainedResult),
    Constrained(ConstrainedResult),
}

/// Runs `opts.solver` on `file`. Solver failures come back inside the outcome
/// together with the rows recorded before the failure.
pub fn run(file: &InstanceFile, opts: &SolveOptions) -> CliResult<RunOutcome> {
    opts.validate()?;
    let solver = opts.solver.ok_or_else(|| CliError::Config("no solver given (--solver or config `solver`)".into()))?;
    let inst = file.to_problem()?;
    let tap = TraceTap::default();
    let clock = Instant::now();
    let result: Result<Finished, DcError> = match solver {
        SolverKind::Gd | SolverKind::Igd | SolverKind::Dca | SolverKind::Pdca | SolverKind::Pdcae => {
            let p = inst.as_dc()?;
            let cfg = unconstrained_config(solver, &p, opts, tap.clone());
            let mut x0 = start_point(p.n(), opts);
            if solver != SolverKind::Gd {
                x0 = p.h().prox(&x0, 1.0)?;
            }
            match solver {
                SolverKind::Gd => gd_on_fmu(&p, &cfg, &x0),
                SolverKind::Igd => inexact_gd(&p, &cfg, &x0, &x0),
                SolverKind::Dca => dca(&p, &cfg, &x0),
                SolverKind::Pdca => pdca(&p, &cfg, &x0),
                _ => pdcae(&p, &cfg, &x0),
            }
            .map(Finished::Unconstrained)
        }
        SolverKind::LcdcAlm | SolverKind::ProximalAlm => {
            let p = require_constrained(solver, &inst)?;
            if !p.dc().h().is_zero() {
                return Err(CliError::Config(format!(
                    "solver `{}` needs h = 0 (nonconvex_qp instances)",
                    solver.name()
                )));
            }
            let cfg = constrained_config(solver, p, opts, tap.clone())?;
            let x0 = start_point(p.n(), opts);
            let lambda0 = Vector::zeros(p.a().rows());
            if solver == SolverKind::LcdcAlm {
                lcdc_alm(p, &cfg, &x0, &x0, &lambda0)
            } else {
                proximal_alm(p, &cfg, &x0, &x0, &lambda0)
            }
            .map(Finished::Constrained)
        }
        SolverKind::CompositeAlm => {
            let p = require_constrained(solver, &inst)?;
            let mut cfg = constrained_config(solver, p, opts, tap.clone())?;
            cfg.rho = Some(cfg.rho.unwrap_or(COMPOSITE_RHO));
            let lambda0 = Vector::zeros(p.a().rows());
            let x0 = match (opts.seed, opts.start, file.interior_point()) {
                (None, None, Some(x_bar)) => x_bar,
                _ => p.dc().h().prox(&start_point(p.n(), opts), 1.0)?,
            };
            if let Some(x_bar) = file.interior_point() {
                let consts = derive_composite_constants(p, cfg.mu, cfg.beta, &x_bar, &lambda0, cfg.schedule)?;
                cfg.dual_bound = Some(consts.lambda_bound);
            }
            composite_lcdc_alm(p, &cfg, &x0, &x0, &lambda0).map(Finished::Constrained)
        }
    };
    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
    Ok(match result {
        Ok(Finished::Unconstrained(r)) => {
            let summary = summarize(solver, &r.trace.rows, status_name(r.status), wall_ms, None);
            RunOutcome { rows: r.trace.rows, summary, error: None }
        }
        Ok(Finished::Constrained(r)) => {
            let summary = summarize(solver, &r.trace.rows, status_name(r.status), wall_ms, Some(r.selected));
            RunOutcome { rows: r.trace.rows, summary, error: None }
        }
        Err(e) => {
            let err = CliError::from(e);
            if let CliError::Config(_) = err {
                return Err(err);
            }
            let rows = std::mem::take(&mut *tap.lock().unwrap_or_else(|e| e.into_inner()));
            let mut summary = summarize(solver, &rows, "error", wall_ms, None);
            summary.error = Some(err.to_string());
            RunOutcome { rows, summary, error: Some(err) }
        }
    })
}
