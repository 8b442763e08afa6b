//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! The process exits 0 after reporting every criterion; set
//! `DME_DC_STRICT_ACCEPTANCE=1` to exit 1 when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use common::*;
use dme_dc::constrained::*;
use dme_dc::func::{ConvexFunctionSpec, DCProblem, LCDCProblem, SmoothSpec};
use dme_dc::instance::{gen_constrained_dcls, gen_l12_ls, gen_nonconvex_qp, toy_1d};
use dme_dc::linalg::SeededRng;
use dme_dc::moreau::DmeSmoothing;
use dme_dc::prox::{project_box, project_l1_ball, prox_euclidean, prox_l1};
use dme_dc::trace::Status;
use dme_dc::unconstrained::*;
use dme_dc::{DenseMatrix, Vector};

struct Outcome {
    pass: bool,
    detail: String,
}

type ProxFn = Box<dyn Fn(&Vector) -> Vector>;
type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn smoothing_mu(p: &DCProblem) -> f64 {
    let lf = p.f().lipschitz();
    if lf > 0.0 {
        0.5 / lf
    } else {
        1.0
    }
}

fn random_point(rng: &mut SeededRng, p: &DCProblem) -> Vector {
    if p.n() == 1 {
        rng.uniform_vec(-3.0, 3.0, 1)
    } else {
        rng.gaussian_vec(p.n()).scaled(0.5)
    }
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rng = SeededRng::new(11);
    for kind in 0..4 {
        for seed in 0..10 {
            let p = small_family(kind, seed);
            let s = DmeSmoothing::new(p.clone(), smoothing_mu(&p)).unwrap();
            for _ in 0..50 {
                let z = random_point(&mut rng, &p);
                let grad = s.gradient(&z).unwrap();
                let h = 1e-6 * (1.0 + z.norm());
                let fd = fd_gradient(|v| s.value(v).unwrap(), &z, h);
                worst = worst.max(grad.dist(&fd) / grad.norm().max(1.0));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-4 && secs < 60.0,
        format!("worst relative error {worst:.2e} over 4 families × 10 × 50, {secs:.1}s"),
    )
}

fn sandwich() -> Outcome {
    let mut rng = SeededRng::new(12);
    let mut failures = 0;
    let mut total = 0;
    for kind in 0..4 {
        let p = small_family(kind, 100);
        let s = DmeSmoothing::new(p.clone(), smoothing_mu(&p)).unwrap();
        for _ in 0..1000 {
            let z = random_point(&mut rng, &p);
            total += 1;
            if !s.sandwich_check(&z).unwrap().ok {
                failures += 1;
            }
        }
    }
    outcome(failures == 0, format!("{failures} violations in {total} points"))
}

fn descent_suites() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let iters = 500;
    let mut worst = [f64::NEG_INFINITY; 4];
    for seed in 0..3 {
        let (p, _) = gen_l12_ls(30, 80, 5, 0.5, seed).unwrap();
        let lf = p.f().lipschitz();
        let x0 = Vector::zeros(80);

        let mut cfg = UnconstrainedConfig::new(0.5 / lf);
        cfg.max_iter = iters;
        cfg.stop = StoppingRule::Never;
        let s = DmeSmoothing::new(p.clone(), cfg.mu).unwrap();
        let alpha = 1.0 / s.lipschitz();
        let r = gd_on_fmu(&p, &cfg, &x0).unwrap();
        for w in r.trace.steps.windows(2) {
            let excess = w[1].potential - (w[0].potential - w[1].dz * w[1].dz / (2.0 * alpha));
            worst[0] = worst[0].max(excess);
        }

        let mu = 0.99 / lf;
        let beta = 1.0;
        let mut cfg = UnconstrainedConfig::new(mu);
        cfg.max_iter = iters;
        cfg.stop = StoppingRule::Never;
        let (c1, c2) = ((1.0 / mu - lf) / 2.0, (1.0 / beta - 0.5) / mu);
        let r = inexact_gd(&p, &cfg, &x0, &x0).unwrap();
        for w in r.trace.steps.windows(2) {
            let excess = (c1 * w[1].dx * w[1].dx + c2 * w[1].dz * w[1].dz) - (w[0].potential - w[1].potential);
            worst[1] = worst[1].max(excess);
        }
    }
    for seed in 0..3 {
        let (p, _) = gen_nonconvex_qp(20, 50, seed).unwrap();
        let mu = 0.5 / p.dc().f().lipschitz();
        let k = derive_alm_constants(&p, mu, 1.0).unwrap();
        let mut cfg = ConstrainedConfig::new(mu, 1.0);
        cfg.max_iter = iters;
        cfg.stop = ConstrainedStop::Never;
        let x0 = Vector::zeros(50);
        let r = lcdc_alm(&p, &cfg, &x0, &x0, &Vector::zeros(20)).unwrap();
        for w in r.trace.steps.windows(2) {
            let need = k.kappa1 * w[1].dx.powi(2)
                + k.kappa2 * w[1].dz.powi(2)
                + k.kappa3 * w[0].dx.powi(2)
                + k.kappa4 * w[0].dz.powi(2);
            worst[2] = worst[2].max(need - (w[0].potential - w[1].potential));
        }
    }
    for seed in 0..3 {
        let (p, _, xt) = gen_constrained_dcls(20, 80, 5, 1.0, 2.0, seed).unwrap();
        let lf = p.dc().f().lipschitz();
        let (mu, beta, rho) = (0.4 / lf, 0.1, 10.0);
        let mut cfg = ConstrainedConfig::new(mu, beta);
        cfg.rho = Some(rho);
        cfg.max_iter = iters;
        cfg.stop = ConstrainedStop::Never;
        let r = composite_lcdc_alm(&p, &cfg, &xt, &xt, &Vector::zeros(20)).unwrap();
        for w in r.trace.steps.windows(2) {
            let need = (1.0 / mu - 2.0 * lf) / 4.0 * w[1].dx.powi(2) + w[1].dz.powi(2) / (2.0 * beta * mu)
                - w[1].dlambda.powi(2) / rho
                - mu * w[1].inner_tol.powi(2);
            worst[3] = worst[3].max(need - (w[0].potential - w[1].potential));
        }
    }
    for (name, (w, slack)) in
        ["gd", "inexact_gd", "lcdc_alm", "composite"].iter().zip(worst.iter().zip([1e-9, 1e-9, 1e-8, 1e-8]))
    {
        pass &= *w <= slack;
        notes.push(format!("{name} worst excess {w:.1e}"));
    }
    outcome(pass, format!("{} (3 instances × {iters} iterations each)", notes.join(", ")))
}

fn rate_scaling() -> Outcome {
    let fx = rate_fixture();
    let lf = fx.dc.f().lipschitz();
    let mut spreads = Vec::new();
    let mut cfg = UnconstrainedConfig::new(0.5);
    cfg.max_iter = 1600;
    cfg.stop = StoppingRule::Never;
    spreads.push(("gd", spread(&rate_products(&gd_on_fmu(&fx.dc, &cfg, &fx.x0).unwrap().trace))));
    cfg.mu = 0.99 / lf;
    spreads.push(("inexact_gd", spread(&rate_products(&inexact_gd(&fx.dc, &cfg, &fx.x0, &fx.x0).unwrap().trace))));
    let m = fx.lcdc.a().rows();
    let mut c = ConstrainedConfig::new(0.5 / lf, 1.0);
    c.max_iter = 1600;
    c.stop = ConstrainedStop::Never;
    let r = lcdc_alm(&fx.lcdc, &c, &fx.x0_feasible, &fx.x0_feasible, &Vector::zeros(m)).unwrap();
    spreads.push(("lcdc_alm", spread(&rate_products(&r.trace))));
    c.mu = 0.4 / lf;
    c.rho = Some(10.0);
    let r = composite_lcdc_alm(&fx.lcdc_box, &c, &fx.x0_feasible, &fx.x0_feasible, &Vector::zeros(m)).unwrap();
    spreads.push(("composite", spread(&rate_products(&r.trace))));
    let pass = spreads.iter().all(|(_, s)| *s < 10.0);
    let detail = spreads.iter().map(|(n, s)| format!("{n} ×{s:.2}")).collect::<Vec<_>>().join(", ");
    outcome(pass, format!("max/min of K·r² over K ∈ {{100, 400, 1600}}: {detail}"))
}

fn table2_analog() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for reg in [1.0, 0.1] {
        let mut wins = 0;
        let mut worst_rel: f64 = 0.0;
        let (mut it_igd, mut it_pdcae) = (0, 0);
        for seed in 0..5 {
            let (p, _) = gen_l12_ls(180, 640, 20, reg, seed).unwrap();
            let lf = p.f().lipschitz();
            let x0 = Vector::zeros(640);
            let mut cfg = UnconstrainedConfig::new(0.99 / lf);
            cfg.max_iter = 20_000;
            let a = inexact_gd(&p, &cfg, &x0, &x0).unwrap();
            cfg.mu = 1.0 / lf;
            let b = pdcae(&p, &cfg, &x0).unwrap();
            if a.iterations() < b.iterations() {
                wins += 1;
            }
            it_igd += a.iterations();
            it_pdcae += b.iterations();
            let (fa, fb) = (a.final_objective(), b.final_objective());
            worst_rel = worst_rel.max((fa - fb).abs() / fa.abs().max(fb.abs()));
        }
        pass &= wins >= 4 && worst_rel <= 1e-3;
        notes.push(format!(
            "ϱ={reg}: inexact GD fewer iterations in {wins}/5 (avg {:.0} vs {:.0}), objective gap {worst_rel:.1e}",
            it_igd as f64 / 5.0,
            it_pdcae as f64 / 5.0
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(pass && secs < 300.0, format!("{}; {secs:.1}s", notes.join("; ")))
}

struct CompositeRun {
    lambda_bound: f64,
    rho: f64,
    result: Result<ConstrainedResult, String>,
}

/// Five constrained ℓ1-ball least-squares runs at (50, 200, 10), `M = 2`, `ϱ = 1`.
fn composite_runs() -> &'static [CompositeRun] {
    static RUNS: OnceLock<Vec<CompositeRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        (0..5)
            .map(|seed| {
                let (p, _, xt) = gen_constrained_dcls(50, 200, 10, 1.0, 2.0, seed).unwrap();
                let lf = p.dc().f().lipschitz();
                let (mu, beta, rho) = (0.4 / lf, 0.1, 10.0);
                let schedule = EpsSchedule::Harmonic { eps: 1e-3 };
                let l0 = Vector::zeros(50);
                let k = derive_composite_constants(&p, mu, beta, &xt, &l0, schedule).unwrap();
                let mut cfg = ConstrainedConfig::new(mu, beta);
                cfg.rho = Some(rho);
                cfg.schedule = schedule;
                cfg.max_iter = 10_000;
                cfg.stop = ConstrainedStop::ObjectiveStall { infeas: 1e-5, rel_obj: 1e-3 };
                cfg.dual_bound = Some(k.lambda_bound);
                let result = composite_lcdc_alm(&p, &cfg, &xt, &xt, &l0).map_err(|e| e.to_string());
                CompositeRun { lambda_bound: k.lambda_bound, rho, result }
            })
            .collect()
    })
}

fn dual_bound() -> Outcome {
    let mut violations = 0;
    let mut ratio: f64 = 0.0;
    let mut errors = Vec::new();
    for run in composite_runs() {
        match &run.result {
            Ok(r) => {
                for s in &r.trace.steps {
                    ratio = ratio.max(s.lambda_norm / run.lambda_bound);
                    if s.lambda_norm > run.lambda_bound {
                        violations += 1;
                    }
                }
            }
            Err(e) => errors.push(e.clone()),
        }
    }
    let pass = violations == 0 && errors.is_empty();
    outcome(pass, format!("{violations} violations, max ‖λ‖/Λ = {ratio:.2e}, errors: {errors:?}"))
}

fn feasibility_bound() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for run in composite_runs() {
        match &run.result {
            Ok(r) => {
                let sel = &r.trace.rows[r.selected];
                let bound = 2.0 * run.lambda_bound / run.rho;
                let last = r.trace.last().unwrap();
                let ok = sel.infeasibility <= bound && r.status == Status::Converged && last.infeasibility <= 1e-5;
                pass &= ok;
                notes.push(format!("{} it, ‖Ax−b‖ {:.1e}", r.iterations(), last.infeasibility));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("error: {e}"));
            }
        }
    }
    outcome(pass, notes.join("; "))
}

fn random_convex_quadratic(rng: &mut SeededRng, n: usize) -> (DenseMatrix, Vector) {
    let m = DenseMatrix::new(n, n, rng.gaussian_vec(n * n).into_vec()).unwrap();
    (m.gram().add_diag(0.5), rng.gaussian_vec(n))
}

fn kkt_oracle() -> Outcome {
    let mut rng = SeededRng::new(13);
    let (n, m) = (6, 2);
    let mut worst_eq: f64 = 0.0;
    let mut worst_box: f64 = 0.0;
    for _ in 0..3 {
        let (q, c) = random_convex_quadratic(&mut rng, n);
        let a = DenseMatrix::new(m, n, rng.gaussian_vec(m * n).into_vec()).unwrap();
        let x_feas = rng.uniform_vec(-0.5, 0.5, n);
        let b = a.matvec(&x_feas);
        let (x_star, _) = eq_qp_kkt(&q, &c, &a, &b);
        let f = SmoothSpec::quadratic(q.clone(), c.clone()).unwrap();
        let lf = f.lipschitz();
        let dc = DCProblem::new(f.clone(), ConvexFunctionSpec::Zero, ConvexFunctionSpec::Zero, n).unwrap();
        let p = LCDCProblem::new(dc, a.clone(), b.clone()).unwrap();
        let mut cfg = ConstrainedConfig::new(0.5 / lf, 1.0);
        cfg.max_iter = 50_000;
        cfg.stop = ConstrainedStop::Residual { tol: 1e-10 };
        let r = lcdc_alm(&p, &cfg, &Vector::zeros(n), &Vector::zeros(n), &Vector::zeros(m)).unwrap();
        worst_eq = worst_eq.max(r.x.dist(&x_star));

        let x_box = box_qp_active_set(&q, &c, &a, &b, -1.0, 1.0);
        let dc = DCProblem::new(f, ConvexFunctionSpec::IndicatorBox { lo: -1.0, hi: 1.0 }, ConvexFunctionSpec::Zero, n)
            .unwrap();
        let p = LCDCProblem::new(dc, a, b).unwrap();
        let mut cfg = ConstrainedConfig::new(0.4 / lf, 1.0);
        cfg.rho = Some(10.0);
        cfg.max_iter = 50_000;
        cfg.schedule = EpsSchedule::Harmonic { eps: 1e-6 };
        cfg.stop = ConstrainedStop::Residual { tol: 1e-8 };
        let r = composite_lcdc_alm(&p, &cfg, &x_feas, &x_feas, &Vector::zeros(m)).unwrap();
        worst_box = worst_box.max(r.x.dist(&x_box));
    }
    outcome(
        worst_eq <= 1e-5 && worst_box <= 1e-5,
        format!("‖x − x*‖: equality QP {worst_eq:.1e}, box QP {worst_box:.1e}"),
    )
}

fn toy_global_minima() -> Outcome {
    let (p, _) = toy_1d();
    let s = DmeSmoothing::new(p.clone(), 1.0).unwrap();
    let (z_star, fmu_min) = grid_min_1d(|z| s.value(&[z]).unwrap(), -5.0, 5.0, 1e-4);
    let (_, f_min) = grid_min_1d(|x| p.evaluate(&[x]).unwrap(), -5.0, 5.0, 1e-4);
    let x = s.phi_prox(&[z_star]).unwrap()[0];
    let pass = (fmu_min + 0.5).abs() <= 1e-6 && (f_min + 0.5).abs() <= 1e-6 && (x.abs() - 1.0).abs() <= 1e-6;
    outcome(pass, format!("min F_μ = {fmu_min:.9} at z = {z_star:.4}, min F = {f_min:.9}, x_μφ = {x:.9}"))
}

fn prox_objective(spec: &ConvexFunctionSpec, z: &[f64], t: f64, x: &[f64]) -> f64 {
    let v = spec.value(x);
    v + x.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * t)
}

fn prox_oracle_suite() -> Outcome {
    let affine =
        ConvexFunctionSpec::affine(DenseMatrix::from_rows(&[&[1.0, 1.0]]).unwrap(), Vector::from_slice(&[1.0]))
            .unwrap();
    let quad =
        ConvexFunctionSpec::convex_quadratic(DenseMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap()).unwrap();
    let specs_2d: Vec<(&str, ConvexFunctionSpec)> = vec![
        ("l1", ConvexFunctionSpec::L1Norm { weight: 0.7 }),
        ("euclidean", ConvexFunctionSpec::EuclideanNorm { weight: 0.7 }),
        ("box", ConvexFunctionSpec::IndicatorBox { lo: -0.5, hi: 0.8 }),
        ("l1_ball", ConvexFunctionSpec::IndicatorL1Ball { radius: 1.0 }),
        ("affine", affine),
        ("quadratic", quad),
    ];
    let t = 0.8;
    let mut worst_gap: f64 = 0.0;
    let centers_2d = [[1.7, -0.4], [-0.3, 0.2], [0.9, 1.1]];
    for (_, spec) in &specs_2d {
        for z in &centers_2d {
            let x = spec.prox(z, t).unwrap();
            let val = prox_objective(spec, z, t, &x);
            let (_, grid) = grid_min_2d(|a, b| prox_objective(spec, z, t, &[a, b]), -2.0, 2.0, 1e-3);
            worst_gap = worst_gap.max((val - grid).abs());
        }
        for z in [-1.3, 0.1, 2.2] {
            if matches!(spec, ConvexFunctionSpec::IndicatorAffine(_) | ConvexFunctionSpec::ConvexQuadratic(_)) {
                continue;
            }
            let x = spec.prox(&[z], t).unwrap();
            let val = prox_objective(spec, &[z], t, &x);
            let (_, grid) = grid_min_1d(|a| prox_objective(spec, &[z], t, &[a]), -4.0, 4.0, 1e-3);
            worst_gap = worst_gap.max((val - grid).abs());
        }
    }

    let mut rng = SeededRng::new(14);
    let n = 5;
    let proxes: Vec<(&str, ProxFn)> = vec![
        ("l1", Box::new(|z| prox_l1(z, 0.6, 1.0))),
        ("euclidean", Box::new(|z| prox_euclidean(z, 0.6, 1.0))),
        ("box", Box::new(|z| project_box(z, -0.3, 0.4))),
        ("l1_ball", Box::new(|z| project_l1_ball(z, 1.5))),
    ];
    let mut expansive = 0;
    for (_, prox) in &proxes {
        for _ in 0..100 {
            let z1 = rng.gaussian_vec(n).scaled(2.0);
            let z2 = rng.gaussian_vec(n).scaled(2.0);
            if prox(&z1).dist(&prox(&z2)) > z1.dist(&z2) + 1e-12 {
                expansive += 1;
            }
        }
    }
    outcome(
        worst_gap <= 1e-5 && expansive == 0,
        format!(
            "worst grid value gap {worst_gap:.1e} over 6 proxes, {expansive} non-expansiveness violations in 400 pairs"
        ),
    )
}

fn qp_desk_run() -> Outcome {
    let (p, file) = gen_nonconvex_qp(20, 50, 0).unwrap();
    let (lo, hi) = (file.derived.spectrum_min.unwrap(), file.derived.spectrum_max.unwrap());
    let mu = 0.5 / p.dc().f().lipschitz();
    let mut pass = lo < 0.0 && 0.0 < hi;
    let mut notes = vec![format!("spectrum of Q − G in [{lo:.2}, {hi:.2}]")];
    for beta in [0.2, 1.0, 1.8] {
        let mut cfg = ConstrainedConfig::new(mu, beta);
        cfg.max_iter = 5000;
        cfg.stop = ConstrainedStop::Split { infeas: 1e-5, residual: 1e-3 };
        let x0 = Vector::zeros(50);
        match lcdc_alm(&p, &cfg, &x0, &x0, &Vector::zeros(20)) {
            Ok(r) => {
                pass &= r.status == Status::Converged;
                notes.push(format!("β={beta}: {} it", r.iterations()));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("β={beta}: {e}"));
            }
        }
    }
    outcome(pass, notes.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("gradient correctness", gradient_correctness),
        ("sandwich property", sandwich),
        ("descent suites", descent_suites),
        ("rate scaling", rate_scaling),
        ("inexact GD vs pDCAe iteration counts", table2_analog),
        ("dual bound", dual_bound),
        ("feasibility bound", feasibility_bound),
        ("KKT oracle equivalence", kkt_oracle),
        ("toy global-minimum correspondence", toy_global_minima),
        ("prox oracle suite", prox_oracle_suite),
        ("nonconvex QP desk run", qp_desk_run),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let tag = if out.pass { "PASS" } else { "FAIL" };
        passed += usize::from(out.pass);
        println!("[{tag}] {:>2} {name}: {} ({:.1}s)", i + 1, out.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() && std::env::var("DME_DC_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
