//! Seeded instance generators and their JSON files.
//!
//! Every array is drawn from its own child stream of one [`SeededRng`], so a
//! change in one dimension never reshuffles the draws of another array.
//! The file layout is documented in `docs/instance_schema.md`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};
use crate::func::{ConvexFunctionSpec, DCProblem, LCDCProblem, SmoothSpec};
use crate::linalg::{svd_summary, symmetric_eigen, DenseMatrix, SeededRng, Vector, DEFAULT_RANK_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// Floor on the nullspace curvature weights of the nonconvex QP.
pub const QP_WEIGHT_FLOOR: f64 = 1e-3;

const RANK_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// `½‖Cx − d‖² + ϱ‖x‖₁ − ϱ‖x‖`.
    L12Ls,
    /// `½‖Cx − d‖² + δ_{‖x‖₁ ≤ M} − ϱ‖x‖` s.t. `Ax = b`.
    ConstrainedDcls,
    /// `½xᵀQx + qᵀx − ½xᵀGx` s.t. `Ax = b`.
    NonconvexQp,
    /// `δ_{[−1,1]}(x) − x²/2` in one dimension.
    Toy1d,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub s: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Weight `ϱ` of the ℓ1 − ℓ2 terms.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reg_weight: Option<f64>,
    /// Radius `M` of the ℓ1-ball.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l1_radius: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Derived {
    pub lipschitz_f: f64,
    pub weak_convexity: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spectrum_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spectrum_max: Option<f64>,
}

/// A generated instance with everything needed to rebuild the problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub kind: InstanceKind,
    pub dims: Dims,
    pub params: Params,
    pub seed: u64,
    /// Row-major arrays by name.
    pub arrays: BTreeMap<String, Vec<f64>>,
    pub derived: Derived,
}

/// A problem rebuilt from an [`InstanceFile`].
#[derive(Clone, Debug)]
pub enum Instance {
    Unconstrained(DCProblem),
    Constrained(LCDCProblem),
}

impl Instance {
    /// The unconstrained view; constrained instances move `Ax = b` into `h`.
    pub fn as_dc(&self) -> Result<DCProblem> {
        match self {
            Self::Unconstrained(p) => Ok(p.clone()),
            Self::Constrained(p) => p.to_penalized_dc(),
        }
    }
}

impl InstanceFile {
    fn array(&self, name: &str) -> Result<&[f64]> {
        self.arrays
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| DcError::SchemaMismatch(format!("missing array `{name}`")))
    }

    fn matrix(&self, name: &str, rows: usize, cols: usize) -> Result<DenseMatrix> {
        DenseMatrix::new(rows, cols, self.array(name)?.to_vec())
            .map_err(|e| DcError::SchemaMismatch(format!("array `{name}`: {e}")))
    }

    fn vector(&self, name: &str, len: usize) -> Result<Vector> {
        let v = self.array(name)?;
        if v.len() != len {
            return Err(DcError::SchemaMismatch(format!("array `{name}` has length {}, expected {len}", v.len())));
        }
        Ok(Vector::from_slice(v))
    }

    fn param(value: Option<f64>, name: &str) -> Result<f64> {
        value.ok_or_else(|| DcError::SchemaMismatch(format!("missing parameter `{name}`")))
    }

    /// Rebuilds the problem and checks the stored constants against a fresh computation.
    pub fn to_problem(&self) -> Result<Instance> {
        let Dims { m, n, .. } = self.dims;
        let inst = match self.kind {
            InstanceKind::Toy1d => Instance::Unconstrained(toy_problem()),
            InstanceKind::L12Ls => {
                let reg = Self::param(self.params.reg_weight, "reg_weight")?;
                let f = SmoothSpec::least_squares(self.matrix("C", m, n)?, self.vector("d", m)?)?;
                Instance::Unconstrained(l12_problem(f, reg, n)?)
            }
            InstanceKind::ConstrainedDcls => {
                let reg = Self::param(self.params.reg_weight, "reg_weight")?;
                let radius = Self::param(self.params.l1_radius, "l1_radius")?;
                let f = SmoothSpec::least_squares(self.matrix("C", m, n)?, self.vector("d", m)?)?;
                Instance::Constrained(dcls_problem(f, reg, radius, self.matrix("A", m, n)?, self.vector("b", m)?)?)
            }
            InstanceKind::NonconvexQp => {
                let q = self.matrix("Q", n, n)?;
                let g = self.matrix("G", n, n)?;
                Instance::Constrained(qp_problem(
                    q,
                    self.vector("q", n)?,
                    g,
                    self.matrix("A", m, n)?,
                    self.vector("b", m)?,
                )?)
            }
        };
        let fresh = derive(&inst)?;
        check_close("lipschitz_f", self.derived.lipschitz_f, fresh.lipschitz_f)?;
        check_close("weak_convexity", self.derived.weak_convexity, fresh.weak_convexity)?;
        if let (Some(a), Some(b)) = (self.derived.spectrum_min, fresh.spectrum_min) {
            check_close("spectrum_min", a, b)?;
        }
        if let (Some(a), Some(b)) = (self.derived.spectrum_max, fresh.spectrum_max) {
            check_close("spectrum_max", a, b)?;
        }
        Ok(inst)
    }

    /// Runs the generator again from the stored kind, dims, params and seed.
    pub fn regenerate(&self) -> Result<InstanceFile> {
        let Dims { m, n, s } = self.dims;
        let reg = self.params.reg_weight;
        Ok(match self.kind {
            InstanceKind::Toy1d => toy_1d().1,
            InstanceKind::L12Ls => gen_l12_ls(m, n, s, Self::param(reg, "reg_weight")?, self.seed)?.1,
            InstanceKind::ConstrainedDcls => {
                let radius = Self::param(self.params.l1_radius, "l1_radius")?;
                gen_constrained_dcls(m, n, s, Self::param(reg, "reg_weight")?, radius, self.seed)?.1
            }
            InstanceKind::NonconvexQp => gen_nonconvex_qp(m, n, self.seed)?.1,
        })
    }

    /// The strictly feasible interior point stored with constrained ℓ1-ball instances.
    pub fn interior_point(&self) -> Option<Vector> {
        self.arrays.get("x_tilde").map(|v| Vector::from_slice(v))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| DcError::SchemaMismatch(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            if e.is_eof() {
                DcError::Io(std::io::Error::new(std::io::ErrorKind::UnexpectedEof, e))
            } else {
                DcError::SchemaMismatch(e.to_string())
            }
        })?;
        match value.get("schema_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(DcError::SchemaMismatch(format!("schema_version {v}, expected {SCHEMA_VERSION}"))),
            None => return Err(DcError::SchemaMismatch("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| DcError::SchemaMismatch(e.to_string()))
    }
}

fn check_close(name: &str, stored: f64, fresh: f64) -> Result<()> {
    if (stored - fresh).abs() <= 1e-8 * (1.0 + fresh.abs()) {
        Ok(())
    } else {
        Err(DcError::SchemaMismatch(format!("derived `{name}` is {stored}, recomputed {fresh}")))
    }
}

pub fn save_instance(path: impl AsRef<Path>, file: &InstanceFile) -> Result<()> {
    fs::write(path, file.to_json()?)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<InstanceFile> {
    InstanceFile::from_json(&fs::read_to_string(path)?)
}

fn derive(inst: &Instance) -> Result<Derived> {
    let (f, spectrum) = match inst {
        Instance::Unconstrained(p) => (p.f(), None),
        Instance::Constrained(p) => {
            let spectrum = match (p.dc().f().quadratic_form(), p.dc().g()) {
                (Some((q, _)), ConvexFunctionSpec::ConvexQuadratic(g)) => {
                    let e = symmetric_eigen(&q.add_scaled(-1.0, g.matrix())?)?;
                    Some((e.min(), e.max()))
                }
                _ => None,
            };
            (p.dc().f(), spectrum)
        }
    };
    Ok(Derived {
        lipschitz_f: f.lipschitz(),
        weak_convexity: f.weak_convexity(),
        spectrum_min: spectrum.map(|s| s.0),
        spectrum_max: spectrum.map(|s| s.1),
    })
}

fn toy_problem() -> DCProblem {
    DCProblem::new(
        SmoothSpec::zero(),
        ConvexFunctionSpec::IndicatorBox { lo: -1.0, hi: 1.0 },
        ConvexFunctionSpec::convex_quadratic(DenseMatrix::identity(1)).expect("identity is PSD"),
        1,
    )
    .expect("valid toy dimensions")
}

fn l12_problem(f: SmoothSpec, reg: f64, n: usize) -> Result<DCProblem> {
    DCProblem::new(f, ConvexFunctionSpec::L1Norm { weight: reg }, ConvexFunctionSpec::EuclideanNorm { weight: reg }, n)
}

fn dcls_problem(f: SmoothSpec, reg: f64, radius: f64, a: DenseMatrix, b: Vector) -> Result<LCDCProblem> {
    let n = a.cols();
    let dc = DCProblem::new(
        f,
        ConvexFunctionSpec::IndicatorL1Ball { radius },
        ConvexFunctionSpec::EuclideanNorm { weight: reg },
        n,
    )?;
    LCDCProblem::new(dc, a, b)
}

fn qp_problem(q: DenseMatrix, lin: Vector, g: DenseMatrix, a: DenseMatrix, b: Vector) -> Result<LCDCProblem> {
    let n = q.rows();
    let dc = DCProblem::new(
        SmoothSpec::quadratic(q, lin)?,
        ConvexFunctionSpec::Zero,
        ConvexFunctionSpec::convex_quadratic(g)?,
        n,
    )?;
    LCDCProblem::new(dc, a, b)
}

fn validate_reg(reg: f64) -> Result<()> {
    if reg.is_finite() && reg >= 0.0 {
        Ok(())
    } else {
        Err(DcError::BadDims(format!("regularization weight {reg} must be finite and non-negative")))
    }
}

/// Gaussian `m × n` matrix with unit-norm columns, the sparse signal `x̂` and
/// `d = Cx̂ + 0.01ξ`.
fn sparse_regression_data(rng: &SeededRng, m: usize, n: usize, s: usize) -> (DenseMatrix, Vector, Vector) {
    let mut c = DenseMatrix::new(m, n, rng.child(1).gaussian_vec(m * n).into_vec()).expect("sized buffer");
    for j in 0..n {
        let norm = c.column(j).norm();
        for i in 0..m {
            c.set(i, j, c.get(i, j) / norm);
        }
    }
    let support = rng.child(2).sample_indices(n, s);
    let values = rng.child(3).gaussian_vec(s);
    let mut x_hat = Vector::zeros(n);
    for (&i, &v) in support.iter().zip(values.iter()) {
        // a zero Gaussian draw would break ‖x̂‖₀ = s
        x_hat[i] = if v == 0.0 { f64::MIN_POSITIVE } else { v };
    }
    let mut d = c.matvec(&x_hat);
    d.axpy(0.01, &rng.child(4).gaussian_vec(m));
    (c, d, x_hat)
}

/// ℓ1 − ℓ2 regularized least squares.
pub fn gen_l12_ls(m: usize, n: usize, s: usize, reg: f64, seed: u64) -> Result<(DCProblem, InstanceFile)> {
    if m == 0 || n == 0 || s > n {
        return Err(DcError::BadDims(format!("need m, n ≥ 1 and s ≤ n, got (m, n, s) = ({m}, {n}, {s})")));
    }
    validate_reg(reg)?;
    let rng = SeededRng::new(seed);
    let (c, d, x_hat) = sparse_regression_data(&rng, m, n, s);
    let mut arrays = BTreeMap::new();
    arrays.insert("C".to_string(), c.data().to_vec());
    arrays.insert("d".to_string(), d.to_vec());
    arrays.insert("x_hat".to_string(), x_hat.into_vec());
    let p = l12_problem(SmoothSpec::least_squares(c, d)?, reg, n)?;
    let inst = Instance::Unconstrained(p);
    let file = InstanceFile {
        schema_version: SCHEMA_VERSION,
        kind: InstanceKind::L12Ls,
        dims: Dims { m, n, s },
        params: Params { reg_weight: Some(reg), l1_radius: None },
        seed,
        arrays,
        derived: derive(&inst)?,
    };
    match inst {
        Instance::Unconstrained(p) => Ok((p, file)),
        Instance::Constrained(_) => unreachable!(),
    }
}

/// ℓ1-ball constrained least squares with `−ϱ‖x‖` and `Ax = b`.
/// Also returns `x̃`, a strictly feasible interior point with `‖x̃‖₁ ≤ M/2`.
pub fn gen_constrained_dcls(
    m: usize,
    n: usize,
    s: usize,
    reg: f64,
    radius: f64,
    seed: u64,
) -> Result<(LCDCProblem, InstanceFile, Vector)> {
    if m == 0 || n == 0 || s > n {
        return Err(DcError::BadDims(format!("need m, n ≥ 1 and s ≤ n, got (m, n, s) = ({m}, {n}, {s})")));
    }
    validate_reg(reg)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DcError::BadDims(format!("ℓ1 radius {radius} must be positive")));
    }
    let rng = SeededRng::new(seed);
    let (c, d, x_hat) = sparse_regression_data(&rng, m, n, s);
    let a = DenseMatrix::new(m, n, rng.child(5).gaussian_vec(m * n).into_vec())?;
    let half_width = radius / (2.0 * n as f64);
    let x_tilde = rng.child(6).uniform_vec(-half_width, half_width, n);
    let b = a.matvec(&x_tilde);
    let mut arrays = BTreeMap::new();
    arrays.insert("C".to_string(), c.data().to_vec());
    arrays.insert("d".to_string(), d.to_vec());
    arrays.insert("A".to_string(), a.data().to_vec());
    arrays.insert("b".to_string(), b.to_vec());
    arrays.insert("x_hat".to_string(), x_hat.into_vec());
    arrays.insert("x_tilde".to_string(), x_tilde.to_vec());
    let p = dcls_problem(SmoothSpec::least_squares(c, d)?, reg, radius, a, b)?;
    let inst = Instance::Constrained(p);
    let file = InstanceFile {
        schema_version: SCHEMA_VERSION,
        kind: InstanceKind::ConstrainedDcls,
        dims: Dims { m, n, s },
        params: Params { reg_weight: Some(reg), l1_radius: Some(radius) },
        seed,
        arrays,
        derived: derive(&inst)?,
    };
    match inst {
        Instance::Constrained(p) => Ok((p, file, x_tilde)),
        Instance::Unconstrained(_) => unreachable!(),
    }
}

/// `Σ w_i v_i v_iᵀ`, filled symmetrically.
fn weighted_outer_sum(n: usize, weights: &[f64], vectors: &[Vector]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = weights.iter().zip(vectors).map(|(w, u)| w * u[i] * u[j]).sum();
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

/// Equality-constrained nonconvex QP with `f` curved on `ker A ⊕ span{u₁..u_{⌊m/2⌋}}`
/// and `g` supported on the remaining row-space directions.
pub fn gen_nonconvex_qp(m: usize, n: usize, seed: u64) -> Result<(LCDCProblem, InstanceFile)> {
    if m == 0 || m >= n {
        return Err(DcError::BadDims(format!("need 1 ≤ m < n, got (m, n) = ({m}, {n})")));
    }
    let rng = SeededRng::new(seed);
    let mut found = None;
    for attempt in 0..RANK_RETRIES {
        let a = DenseMatrix::new(m, n, rng.child(100 + attempt as u64).gaussian_vec(m * n).into_vec())?;
        let svd = svd_summary(&a, DEFAULT_RANK_TOL)?;
        if svd.positive_rank == m {
            found = Some((a, svd));
            break;
        }
    }
    let (a, svd) = found.ok_or(DcError::RankDeficient { retries: RANK_RETRIES })?;
    let lin = rng.child(1).gaussian_vec(n);
    let x_hat = rng.child(2).gaussian_vec(n);
    let b = a.matvec(&x_hat);

    let half = m / 2;
    let mut plus: Vec<Vector> = svd.right_null_basis.clone();
    plus.extend(svd.right_row_basis[..half].iter().cloned());
    let minus: Vec<Vector> = svd.right_row_basis[half..].to_vec();
    let a_weights: Vec<f64> =
        rng.child(3).uniform_vec(0.0, 10.0, plus.len()).iter().map(|w| w.max(QP_WEIGHT_FLOOR)).collect();
    let b_weights = rng.child(4).uniform_vec(0.0, 50.0, minus.len()).into_vec();
    let q = weighted_outer_sum(n, &a_weights, &plus);
    let g = weighted_outer_sum(n, &b_weights, &minus);

    let mut arrays = BTreeMap::new();
    arrays.insert("A".to_string(), a.data().to_vec());
    arrays.insert("b".to_string(), b.to_vec());
    arrays.insert("Q".to_string(), q.data().to_vec());
    arrays.insert("q".to_string(), lin.to_vec());
    arrays.insert("G".to_string(), g.data().to_vec());
    arrays.insert("x_hat".to_string(), x_hat.into_vec());
    arrays.insert("a_weights".to_string(), a_weights);
    arrays.insert("b_weights".to_string(), b_weights);
    let p = qp_problem(q, lin, g, a, b)?;
    let inst = Instance::Constrained(p);
    let file = InstanceFile {
        schema_version: SCHEMA_VERSION,
        kind: InstanceKind::NonconvexQp,
        dims: Dims { m, n, s: 0 },
        params: Params { reg_weight: None, l1_radius: None },
        seed,
        arrays,
        derived: derive(&inst)?,
    };
    match inst {
        Instance::Constrained(p) => Ok((p, file)),
        Instance::Unconstrained(_) => unreachable!(),
    }
}

/// `min δ_{[−1,1]}(x) − x²/2`, with global minimizers `±1`.
pub fn toy_1d() -> (DCProblem, InstanceFile) {
    let p = toy_problem();
    let file = InstanceFile {
        schema_version: SCHEMA_VERSION,
        kind: InstanceKind::Toy1d,
        dims: Dims { m: 0, n: 1, s: 0 },
        params: Params { reg_weight: None, l1_radius: None },
        seed: 0,
        arrays: BTreeMap::new(),
        derived: Derived { lipschitz_f: 0.0, weak_convexity: 0.0, spectrum_min: None, spectrum_max: None },
    };
    (p, file)
}
