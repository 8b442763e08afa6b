//! Solver options gathered from a JSON config file and command-line flags.

use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Gradient descent on the smoothed objective.
    Gd,
    /// Inexact gradient descent.
    Igd,
    Dca,
    Pdca,
    Pdcae,
    #[value(name = "lcdc_alm")]
    LcdcAlm,
    #[value(name = "composite_alm")]
    CompositeAlm,
    #[value(name = "proximal_alm")]
    ProximalAlm,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gd => "gd",
            Self::Igd => "igd",
            Self::Dca => "dca",
            Self::Pdca => "pdca",
            Self::Pdcae => "pdcae",
            Self::LcdcAlm => "lcdc_alm",
            Self::CompositeAlm => "composite_alm",
            Self::ProximalAlm => "proximal_alm",
        }
    }
}

/// Solver settings. Every field is optional so that flags can be layered over a config file.
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    /// Smoothing / proximal parameter μ.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Augmented Lagrangian penalty ρ.
    #[arg(long = "rho-penalty")]
    #[serde(rename = "rho_penalty")]
    pub rho_penalty: Option<f64>,
    /// Base of the inner tolerance schedule ε/(2k).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Outer stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Draws a random start from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fills the start with this constant.
    #[arg(long, conflicts_with = "seed")]
    pub start: Option<f64>,
}

impl SolveOptions {
    /// `self` with every field that `flags` sets replaced by the flag value.
    pub fn overlay(&self, flags: &SolveOptions) -> SolveOptions {
        SolveOptions {
            solver: flags.solver.or(self.solver),
            mu: flags.mu.or(self.mu),
            beta: flags.beta.or(self.beta),
            rho_penalty: flags.rho_penalty.or(self.rho_penalty),
            eps: flags.eps.or(self.eps),
            tol: flags.tol.or(self.tol),
            max_iter: flags.max_iter.or(self.max_iter),
            seed: flags.seed.or(self.seed),
            start: flags.start.or(self.start),
        }
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Rejects values no solver accepts.
    pub fn validate(&self) -> CliResult<()> {
        let positive = [("mu", self.mu), ("rho-penalty", self.rho_penalty), ("eps", self.eps), ("tol", self.tol)];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!("--{name} must be positive and finite, got {v}")));
                }
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(CliError::Config(format!("--beta must be positive, got {b}")));
            }
        }
        if let Some(s) = self.start {
            if !s.is_finite() {
                return Err(CliError::Config("--start must be finite".into()));
            }
        }
        Ok(())
    }
}
