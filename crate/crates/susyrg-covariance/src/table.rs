use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CovError;
use susyrg_core::{Parameters, ScaleIndex, Site};

/// Canonical octant key: |x| sorted so that k[0] ≥ k[1] ≥ k[2] ≥ 0.
pub fn canonical(x: Site) -> [u32; 3] {
    let mut k = x.map(|c| c.unsigned_abs() as u32);
    k.sort_unstable_by(|a, b| b.cmp(a));
    k
}

fn octant_index(k: [u32; 3]) -> usize {
    let [a, b, c] = k.map(|v| v as usize);
    a * (a + 1) * (a + 2) / 6 + b * (b + 1) / 2 + c
}

/// Number of canonical keys with k[0] ≤ extent.
pub fn octant_len(extent: u32) -> usize {
    octant_index([extent + 1, 0, 0])
}

/// All canonical keys up to `extent`, in lexicographic order.
pub fn octant_keys(extent: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(octant_len(extent));
    for a in 0..=extent {
        for b in 0..=a {
            for c in 0..=b {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Number of lattice points whose canonical key is `k`.
pub fn octant_multiplicity(k: [u32; 3]) -> u64 {
    let perms = if k[0] == k[1] && k[1] == k[2] {
        1
    } else if k[0] == k[1] || k[1] == k[2] {
        3
    } else {
        6
    };
    perms << k.iter().filter(|&&v| v != 0).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    SpectralWindow,
    PositionAverage,
}

impl Strategy {
    pub fn id(self) -> u32 {
        match self {
            Strategy::SpectralWindow => 0,
            Strategy::PositionAverage => 1,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        match id {
            0 => Some(Strategy::SpectralWindow),
            1 => Some(Strategy::PositionAverage),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SpectralWindow => "spectral-window",
            Strategy::PositionAverage => "position-average",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = CovError;
    fn from_str(s: &str) -> Result<Self, CovError> {
        match s {
            "spectral-window" => Ok(Strategy::SpectralWindow),
            "position-average" => Ok(Strategy::PositionAverage),
            _ => Err(CovError::InvalidParameter(format!("unknown strategy {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub params_hash: String,
    pub eps: f64,
    pub strategy: Strategy,
    /// Mass discarded by hard range truncation (finite-range tables only).
    pub tail_mass: f64,
}

impl TableMeta {
    pub fn new(params: &Parameters, strategy: Strategy) -> Self {
        TableMeta {
            params_hash: params_hash(params, strategy),
            eps: params.eps,
            strategy,
            tail_mass: 0.0,
        }
    }
}

/// Hex SHA-256 of the JSON form of the parameters and strategy.
pub fn params_hash(params: &Parameters, strategy: Strategy) -> String {
    let json = serde_json::to_string(&(params, strategy)).expect("parameters serialize");
    Sha256::digest(json.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Symmetric kernel on the scale-n lattice stored on the canonical octant.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub scale: ScaleIndex,
    /// Largest stored |x|∞ in integer units.
    pub extent: u32,
    /// Values vanish identically for |x|∞ beyond this radius.
    pub support: Option<u32>,
    values: Vec<f64>,
    pub meta: TableMeta,
}

impl KernelTable {
    pub fn from_values(
        scale: ScaleIndex,
        extent: u32,
        support: Option<u32>,
        values: Vec<f64>,
        meta: TableMeta,
    ) -> Result<Self, CovError> {
        if values.len() != octant_len(extent) {
            return Err(CovError::InvalidParameter(format!(
                "expected {} octant values for extent {extent}, got {}",
                octant_len(extent),
                values.len()
            )));
        }
        let mut t = KernelTable {
            scale,
            extent,
            support,
            values,
            meta,
        };
        t.enforce_support();
        Ok(t)
    }

    /// Fills the octant in parallel from a function of the canonical key.
    pub fn from_fn<F>(
        scale: ScaleIndex,
        extent: u32,
        support: Option<u32>,
        meta: TableMeta,
        f: F,
    ) -> Result<Self, CovError>
    where
        F: Fn([u32; 3]) -> Result<f64, CovError> + Sync,
    {
        let values = octant_keys(extent)
            .into_par_iter()
            .map(|k| match support {
                Some(r) if k[0] > r => Ok(0.0),
                _ => f(k),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_values(scale, extent, support, values, meta)
    }

    fn enforce_support(&mut self) {
        if let Some(r) = self.support {
            for (k, v) in octant_keys(self.extent)
                .into_iter()
                .zip(self.values.iter_mut())
            {
                if k[0] > r {
                    *v = 0.0;
                }
            }
        }
    }

    /// Value at an arbitrary offset, reconstructed by symmetry. `None` when the
    /// offset is neither stored nor known to vanish.
    pub fn get(&self, x: Site) -> Option<f64> {
        let k = canonical(x);
        if self.support.is_some_and(|r| k[0] > r) {
            return Some(0.0);
        }
        (k[0] <= self.extent).then(|| self.values[octant_index(k)])
    }

    pub fn at(&self, k: [u32; 3]) -> f64 {
        self.values[octant_index(k)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn keys(&self) -> Vec<[u32; 3]> {
        octant_keys(self.extent)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v *= factor);
        t
    }

    /// Pointwise combination on the common stored range.
    pub fn zip_with(
        &self,
        other: &KernelTable,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, CovError> {
        let extent = self.extent.min(other.extent);
        let support = match (self.support, other.support) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        let values = octant_keys(extent)
            .into_iter()
            .map(|k| f(self.at(k), other.at(k)))
            .collect();
        KernelTable::from_values(self.scale, extent, support, values, self.meta.clone())
    }

    /// Copy restricted to a smaller extent.
    pub fn truncated(&self, extent: u32) -> Self {
        let extent = extent.min(self.extent);
        let mut t = self.clone();
        t.values.truncate(octant_len(extent));
        t.extent = extent;
        t
    }
}
