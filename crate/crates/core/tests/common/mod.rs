//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use dme_dc::func::{ConvexFunctionSpec, DCProblem, LCDCProblem, SmoothSpec};
use dme_dc::instance::{gen_constrained_dcls, gen_l12_ls, gen_nonconvex_qp, toy_1d};
use dme_dc::{DenseMatrix, Vector};

/// Grid minimizer of a 1-D function over `[lo, hi]`.
pub fn grid_min_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let x = lo + i as f64 * step;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Grid minimizer of a 2-D function over `[lo, hi]²`.
pub fn grid_min_2d(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64, step: f64) -> ([f64; 2], f64) {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = ([lo, lo], f64::INFINITY);
    for i in 0..=n {
        let x = lo + i as f64 * step;
        for j in 0..=n {
            let y = lo + j as f64 * step;
            let v = f(x, y);
            if v < best.1 {
                best = ([x, y], v);
            }
        }
    }
    best
}

/// Central finite-difference gradient with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, z: &[f64], h: f64) -> Vector {
    let mut out = Vector::zeros(z.len());
    let mut p = z.to_vec();
    for i in 0..z.len() {
        let zi = z[i];
        p[i] = zi + h;
        let fp = f(&p);
        p[i] = zi - h;
        let fm = f(&p);
        p[i] = zi;
        out[i] = (fp - fm) / (2.0 * h);
    }
    out
}

/// Dense `Mx = r` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(m: &DenseMatrix, r: &[f64]) -> Vector {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut b = r.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Vector::from_vec(x)
}

/// KKT point of `min ½xᵀHx + cᵀx` s.t. `Ax = b`: returns `(x, λ)`.
pub fn eq_qp_kkt(h: &DenseMatrix, c: &[f64], a: &DenseMatrix, b: &[f64]) -> (Vector, Vector) {
    let (n, m) = (h.rows(), a.rows());
    let mut k = DenseMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            k.set(i, j, h.get(i, j));
        }
        for j in 0..m {
            k.set(i, n + j, a.get(j, i));
            k.set(n + j, i, a.get(j, i));
        }
    }
    let mut rhs: Vec<f64> = c.iter().map(|v| -v).collect();
    rhs.extend_from_slice(b);
    let sol = gauss_solve(&k, &rhs);
    (Vector::from_slice(&sol[..n]), Vector::from_slice(&sol[n..]))
}

/// Minimizer of a convex `½xᵀHx + cᵀx` over `{Ax = b, lo ≤ x ≤ hi}` by enumerating
/// every free/lower/upper pattern (`n ≤ 6`).
pub fn box_qp_active_set(h: &DenseMatrix, c: &[f64], a: &DenseMatrix, b: &[f64], lo: f64, hi: f64) -> Vector {
    let n = h.rows();
    let m = a.rows();
    let mut best: Option<(f64, Vector)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut pattern = vec![0u8; n];
        let mut c3 = code;
        for p in pattern.iter_mut() {
            *p = (c3 % 3) as u8;
            c3 /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 0).collect();
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = match pattern[i] {
                1 => lo,
                2 => hi,
                _ => 0.0,
            };
        }
        // Reduced KKT on free coordinates: H_FF x_F + A_Fᵀλ = −c_F − H_{F,fixed} x_fixed.
        let nf = free.len();
        let size = nf + m;
        let mut k = DenseMatrix::zeros(size, size);
        let mut rhs = vec![0.0; size];
        for (ii, &i) in free.iter().enumerate() {
            for (jj, &j) in free.iter().enumerate() {
                k.set(ii, jj, h.get(i, j));
            }
            for r in 0..m {
                k.set(ii, nf + r, a.get(r, i));
                k.set(nf + r, ii, a.get(r, i));
            }
            rhs[ii] = -c[i] - (0..n).filter(|j| pattern[*j] != 0).map(|j| h.get(i, j) * x[j]).sum::<f64>();
        }
        for r in 0..m {
            rhs[nf + r] = b[r] - (0..n).filter(|j| pattern[*j] != 0).map(|j| a.get(r, j) * x[j]).sum::<f64>();
        }
        let sol = if size == 0 { Vector::zeros(0) } else { gauss_solve(&k, &rhs) };
        if !sol.is_finite() {
            continue;
        }
        for (ii, &i) in free.iter().enumerate() {
            x[i] = sol[ii];
        }
        let xv = Vector::from_vec(x);
        let feasible =
            xv.iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9) && a.matvec(&xv).dist(b) <= 1e-8 * (1.0 + norm(b));
        if !feasible {
            continue;
        }
        let val = 0.5 * h.quad_form(&xv) + xv.dot(c);
        if best.as_ref().map_or(true, |(bv, _)| val < *bv - 1e-12) {
            best = Some((val, xv));
        }
    }
    best.expect("feasible pattern").1
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The four unconstrained views used by the gradient and sandwich suites.
pub fn small_family(kind: usize, seed: u64) -> DCProblem {
    match kind {
        0 => gen_l12_ls(12, 30, 4, 0.5, seed).unwrap().0,
        1 => gen_constrained_dcls(4, 12, 3, 1.0, 2.0, seed).unwrap().0.to_penalized_dc().unwrap(),
        2 => gen_nonconvex_qp(4, 10, seed).unwrap().0.to_penalized_dc().unwrap(),
        _ => toy_1d().0,
    }
}

pub const FAMILY_NAMES: [&str; 4] = ["l12_ls", "constrained_dcls", "nonconvex_qp", "toy_1d"];

/// Spread-spectrum quadratic DC fixture: `F(x) = ½Σ λ_i x_i²` written as
/// `½xᵀ(Λ + γI)x − (γ/2)‖x‖²`, with `λ_i` log-spaced over `[1e-4, 1]` and the
/// start `x_i = λ_i^{−1/2}`, so first-order residuals decay like `K^{−1/2}` over
/// `K ∈ [10², 10⁴]`.
pub struct RateFixture {
    pub dc: DCProblem,
    pub x0: Vector,
    /// `A = [I_m 0]`, `b = 0` with the start restricted to the feasible set.
    pub lcdc: LCDCProblem,
    /// Same with `h` the indicator of a large box.
    pub lcdc_box: LCDCProblem,
    pub x0_feasible: Vector,
}

pub fn rate_fixture() -> RateFixture {
    let (n, m, gamma) = (60, 5, 1.0);
    let lam: Vec<f64> = (0..n).map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / (n - 1) as f64)).collect();
    let q = DenseMatrix::from_diag(&lam.iter().map(|l| l + gamma).collect::<Vec<_>>());
    let g = ConvexFunctionSpec::convex_quadratic(DenseMatrix::identity(n).scaled(gamma)).unwrap();
    let f = SmoothSpec::quadratic(q, Vector::zeros(n)).unwrap();
    let x0 = Vector::from_vec(lam.iter().map(|l| l.powf(-0.5)).collect());
    let dc = DCProblem::new(f.clone(), ConvexFunctionSpec::Zero, g.clone(), n).unwrap();
    let mut a = DenseMatrix::zeros(m, n);
    for i in 0..m {
        a.set(i, i, 1.0);
    }
    let mut x0_feasible = x0.clone();
    for i in 0..m {
        x0_feasible[i] = 0.0;
    }
    let lcdc = LCDCProblem::new(dc.clone(), a.clone(), Vector::zeros(m)).unwrap();
    let boxed = DCProblem::new(f, ConvexFunctionSpec::IndicatorBox { lo: -1e3, hi: 1e3 }, g, n).unwrap();
    let lcdc_box = LCDCProblem::new(boxed, a, Vector::zeros(m)).unwrap();
    RateFixture { dc, x0, lcdc, lcdc_box, x0_feasible }
}

/// `K·(min residual up to K)²` at `K = 100, 400, 1600`.
pub fn rate_products(trace: &dme_dc::trace::IterateTrace) -> [f64; 3] {
    [100usize, 400, 1600].map(|k| k as f64 * trace.min_residual_upto(k).powi(2))
}

pub fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}
