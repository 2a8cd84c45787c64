//! Numerical tolerances for the Jordan reduction.
//!
//! Defaults can be overridden wholesale or per key through the
//! `TOL_OVERRIDE_JSON` environment variable, e.g.
//! `TOL_OVERRIDE_JSON='{"tau_block": 1e-5}'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OVERRIDE_ENV: &str = "TOL_OVERRIDE_JSON";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Eigenvalue clustering radius, relative to `||M||_F`.
    pub tau_cluster: f64,
    /// Singular values below `tau_rank * sigma_max` count as zero.
    pub tau_rank: f64,
    /// Bound on `||MP - PJ||_F / ||M||_F`.
    pub tau_jordan: f64,
    /// Bound on the block-Toeplitz structure residual after conjugation.
    pub tau_block: f64,
    /// Bound on `||P P^{-1} - I||_F`.
    pub tau_inv: f64,
    /// Bound on the nilpotency defect of a generalized eigenvector chain.
    pub tau_chain: f64,
    /// Commutation test: `||AB - BA||_F <= tau_commute ||A||_F ||B||_F`.
    pub tau_commute: f64,
    /// Pseudospectral level that links computed eigenvalues into one cluster.
    pub tau_pseudo: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_cluster: 1e-6,
            tau_rank: 1e-8,
            tau_jordan: 1e-7,
            tau_block: 1e-6,
            tau_inv: 1e-9,
            tau_chain: 1e-8,
            tau_commute: 1e-8,
            tau_pseudo: 1e-8,
        }
    }
}

impl Tolerances {
    /// Defaults with any keys from `TOL_OVERRIDE_JSON` applied.
    pub fn from_env() -> Result<Self> {
        match std::env::var(OVERRIDE_ENV) {
            Ok(json) => Self::default().with_json(&json),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Applies the keys present in a JSON object on top of `self`.
    pub fn with_json(self, json: &str) -> Result<Self> {
        let mut value = serde_json::to_value(self).expect("plain struct");
        let patch: serde_json::Value = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("tolerance override: {e}")))?;
        let patch = patch
            .as_object()
            .ok_or_else(|| Error::InvalidArgument("tolerance override must be a JSON object".into()))?;
        let target = value.as_object_mut().expect("struct serializes to object");
        for (k, v) in patch {
            target.insert(k.clone(), v.clone());
        }
        let out: Tolerances = serde_json::from_value(value)
            .map_err(|e| Error::InvalidArgument(format!("tolerance override: {e}")))?;
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.tau_cluster,
            self.tau_rank,
            self.tau_jordan,
            self.tau_block,
            self.tau_inv,
            self.tau_chain,
            self.tau_commute,
            self.tau_pseudo,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}
