use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use susyrg_core::Parameters;
use susyrg_covariance::{DecomposeOptions, Strategy};

use crate::CliError;

/// Flat run configuration. Every key is optional and unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub l: u32,
    pub eps: f64,
    pub strategy: Strategy,
    /// Deepest scale of the decomposition written by `decompose`.
    pub n_max: u32,
    /// Deepest scale with exactly computed flow coefficients.
    pub n_exact: u32,
    pub horizon: usize,
    /// Stored |x|∞ range of the decomposition tables.
    pub extent: u32,
    /// Reconstruction test window |x|∞ ≤ window.
    pub window: u32,
    pub tol_decompose: f64,
    pub tol_critical: f64,
    /// Largest accepted pairwise relative difference between critical-mass methods.
    pub tol_agreement: f64,
    pub n0: u32,
    /// g̃ at n0 in units of νḡ.
    pub g_tilde0: f64,
    /// μ at n0 in units of ḡ^{2−δ}, for `flow`.
    pub mu0: f64,
    /// Bisection bracket in units of ḡ^{2−δ}.
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// Drops the mass source b_n, for smoke runs.
    pub rho_off: bool,
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            l: 3,
            eps: 0.1,
            strategy: Strategy::SpectralWindow,
            n_max: 6,
            n_exact: 4,
            horizon: 40,
            extent: 41,
            window: 10,
            tol_decompose: 1e-6,
            tol_critical: 1e-12,
            tol_agreement: 1e-8,
            n0: 0,
            g_tilde0: 0.025,
            mu0: 0.0,
            bracket_lo: -1.0,
            bracket_hi: 1.0,
            rho_off: false,
            output_dir: PathBuf::from("out"),
            cache_dir: PathBuf::from("cache"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, t) in [
            ("tol_decompose", self.tol_decompose),
            ("tol_critical", self.tol_critical),
            ("tol_agreement", self.tol_agreement),
        ] {
            if !(t > 0.0) {
                return Err(CliError::Config(format!(
                    "{name} must be positive, got {t}"
                )));
            }
        }
        if self.n_exact > self.n_max {
            return Err(CliError::Config(format!(
                "n_exact = {} exceeds n_max = {}",
                self.n_exact, self.n_max
            )));
        }
        if self.window > self.extent {
            return Err(CliError::Config(format!(
                "window {} exceeds extent {}",
                self.window, self.extent
            )));
        }
        if self.horizon == 0 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        if !(self.bracket_lo < self.bracket_hi) {
            return Err(CliError::Config(
                "bracket_lo must be below bracket_hi".into(),
            ));
        }
        self.parameters().map(|_| ())
    }

    pub fn parameters(&self) -> Result<Parameters, CliError> {
        Parameters::new(self.l, self.eps).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn decompose_options(&self) -> DecomposeOptions {
        DecomposeOptions {
            extent: self.extent,
            window: self.window,
            ..Default::default()
        }
    }

    /// Hex SHA-256 of the configuration with the directory keys removed, so
    /// that moving outputs or caches does not change the hash.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output_dir");
            m.remove("cache_dir");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn typed_keys_are_read() {
        let c = RunConfig::from_toml(
            "l = 3\neps = 0.5\nstrategy = \"position-average\"\nhorizon = 12\n",
        )
        .unwrap();
        assert_eq!(
            (c.eps, c.strategy, c.horizon),
            (0.5, Strategy::PositionAverage, 12)
        );
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml("epsilon = 0.1"),
            Err(CliError::Config(_))
        ));
        assert!(RunConfig::from_toml("eps = \"small\"").is_err());
        assert!(RunConfig::from_toml("tol_critical = 0.0").is_err());
        assert!(RunConfig::from_toml("n_max = 3\nn_exact = 4").is_err());
        assert!(RunConfig::from_toml("l = 4").is_err());
    }

    #[test]
    fn hash_ignores_directories() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: "elsewhere".into(),
            cache_dir: "/tmp/x".into(),
            ..a.clone()
        };
        let c = RunConfig {
            eps: 0.2,
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
