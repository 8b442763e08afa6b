//! Instance generation requests shared by `gen` and bench suites.

use clap::{Args, ValueEnum};
use dme_dc::instance::{gen_constrained_dcls, gen_l12_ls, gen_nonconvex_qp, toy_1d, InstanceFile};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_REG: f64 = 1.0;
pub const DEFAULT_RADIUS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// ℓ1 − ℓ2 regularized least squares.
    L12ls,
    /// ℓ1-ball constrained least squares with linear equalities.
    Dcls,
    /// Equality-constrained nonconvex quadratic program.
    Qp,
    /// One-dimensional box-minus-square toy.
    Toy,
}

impl GenKind {
    fn name(self) -> &'static str {
        match self {
            Self::L12ls => "l12ls",
            Self::Dcls => "dcls",
            Self::Qp => "qp",
            Self::Toy => "toy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Number of rows of the data (or constraint) matrix.
    #[arg(long)]
    #[serde(default)]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub n: Option<usize>,
    /// Sparsity of the planted signal.
    #[arg(long)]
    #[serde(default)]
    pub s: Option<usize>,
    /// Weight of the ℓ1 − ℓ2 terms.
    #[arg(long)]
    #[serde(default)]
    pub rho: Option<f64>,
    /// Radius of the ℓ1-ball (dcls only).
    #[arg(long)]
    #[serde(default)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
}

impl GenSpec {
    fn need(&self, name: &str, v: Option<usize>) -> CliResult<usize> {
        v.ok_or_else(|| CliError::Config(format!("`{}` instances need --{name}", self.kind.name())))
    }

    pub fn build(&self) -> CliResult<InstanceFile> {
        let reg = self.rho.unwrap_or(DEFAULT_REG);
        Ok(match self.kind {
            GenKind::L12ls => {
                let (m, n, s) = (self.need("m", self.m)?, self.need("n", self.n)?, self.need("s", self.s)?);
                gen_l12_ls(m, n, s, reg, self.seed)?.1
            }
            GenKind::Dcls => {
                let (m, n, s) = (self.need("m", self.m)?, self.need("n", self.n)?, self.need("s", self.s)?);
                gen_constrained_dcls(m, n, s, reg, self.radius.unwrap_or(DEFAULT_RADIUS), self.seed)?.1
            }
            GenKind::Qp => gen_nonconvex_qp(self.need("m", self.m)?, self.need("n", self.n)?, self.seed)?.1,
            GenKind::Toy => toy_1d().1,
        })
    }

    /// Short label naming the generator and its sizes, without the seed.
    pub fn label(&self) -> String {
        let mut out = self.kind.name().to_owned();
        for (key, v) in [("m", self.m), ("n", self.n), ("s", self.s)] {
            if let Some(v) = v {
                out.push_str(&format!("_{key}{v}"));
            }
        }
        if let Some(r) = self.rho {
            out.push_str(&format!("_rho{r}"));
        }
        if let Some(r) = self.radius {
            out.push_str(&format!("_radius{r}"));
        }
        out
    }
}
