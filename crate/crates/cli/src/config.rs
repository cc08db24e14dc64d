//! Run configuration: one JSON document, optionally overridden by flags.

use std::path::{Path, PathBuf};

use adsdirac::boundary::BoundaryCondition;
use adsdirac::gamma_geometry::PhysicalParams;
use adsdirac::spectrum::{BoundaryDecay, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Every field of every command; unknown keys are rejected.
///
/// Omitted tolerances fall back to [`SolverConfig::default`]; physical
/// parameters and the boundary condition have no defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "Lambda")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "M")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc: Option<String>,
    /// Second boundary condition of a causal comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc_b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_l_max: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_eigs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accept_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heavy_decay: Option<String>,
    /// Initial data preset; only `gaussian` exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centre: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Complex weights `[[re, im], [re, im]]` of the two radial profiles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<[[f64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ls: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_basis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Where files go; not part of the run identity.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Reads a config document; an empty or malformed file is a config error.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those of `self`.
    pub fn overridden_by(mut self, flags: &RunConfig) -> Self {
        overlay!(self, flags; lambda, mass, bc, bc_b, two_l_max, n_nodes, n_eigs, accept_tol, gap_tol,
            rel_tol, heavy_decay, preset, centre, width, weights, rho0, times, horizons, alphas, ls,
            thetas, n_basis, seed, suite, output_dir);
        self
    }

    pub fn params(&self) -> Result<PhysicalParams, Failure> {
        let lambda = self.lambda.ok_or_else(|| Failure::config("missing Lambda"))?;
        let mass = self.mass.ok_or_else(|| Failure::config("missing M"))?;
        Ok(PhysicalParams::new(lambda, mass)?)
    }

    pub fn boundary(&self) -> Result<BoundaryCondition, Failure> {
        parse_bc(self.bc.as_deref().ok_or_else(|| Failure::config("missing bc"))?)
    }

    pub fn boundary_b(&self) -> Result<BoundaryCondition, Failure> {
        parse_bc(self.bc_b.as_deref().ok_or_else(|| Failure::config("missing bc_b"))?)
    }

    pub fn two_l_max(&self) -> i32 {
        self.two_l_max.unwrap_or(1)
    }

    pub fn solver(&self) -> Result<SolverConfig, Failure> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            n_nodes: self.n_nodes.unwrap_or(d.n_nodes),
            n_eigs: self.n_eigs.unwrap_or(d.n_eigs),
            accept_tol: self.accept_tol.unwrap_or(d.accept_tol),
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            heavy_decay: match &self.heavy_decay {
                Some(t) => BoundaryDecay::parse(t)?,
                None => d.heavy_decay,
            },
        };
        for (name, v) in [("accept_tol", cfg.accept_tol), ("gap_tol", cfg.gap_tol), ("rel_tol", cfg.rel_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::config(format!("{name} must be positive, got {v}")));
            }
        }
        if cfg.n_eigs == 0 {
            return Err(Failure::config("n_eigs must be positive"));
        }
        Ok(cfg)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Canonical JSON of the resolved configuration; input to the manifest hash.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn parse_bc(text: &str) -> Result<BoundaryCondition, Failure> {
    text.parse::<BoundaryCondition>().map_err(Failure::from)
}

/// Requires a finite, non-empty list.
pub fn finite_list(name: &str, v: Option<&Vec<f64>>) -> Result<Vec<f64>, Failure> {
    let v = v.ok_or_else(|| Failure::config(format!("missing {name}")))?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::config(format!("{name} must be a non-empty list of finite numbers")));
    }
    Ok(v.clone())
}
