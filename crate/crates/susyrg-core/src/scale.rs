use serde::{Deserialize, Serialize};

/// RG step n with lattice spacing δ_n = L^{-n}, kept as the integer pair (L, n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaleIndex {
    pub l: u32,
    pub n: u32,
}

impl ScaleIndex {
    pub fn new(l: u32, n: u32) -> Self {
        ScaleIndex { l, n }
    }

    /// Inverse spacing L^n, exact as an integer.
    pub fn inv_spacing(&self) -> u64 {
        (self.l as u64).pow(self.n)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.inv_spacing() as f64
    }

    /// δ³, the weight of one site in lattice integrals.
    pub fn volume_element(&self) -> f64 {
        1.0 / (self.inv_spacing() as f64).powi(3)
    }

    /// Lattice integral from a plain site sum: δ³ Σ, evaluated as Σ / L^{3n}.
    pub fn integrate(&self, site_sum: f64) -> f64 {
        site_sum / (self.inv_spacing() as f64).powi(3)
    }

    pub fn finer(&self) -> Self {
        ScaleIndex::new(self.l, self.n + 1)
    }

    /// Integer coordinates at scale n+1 of a scale-n site.
    pub fn embed_finer(&self, x: [i64; 3]) -> [i64; 3] {
        let l = self.l as i64;
        [x[0] * l, x[1] * l, x[2] * l]
    }

    /// Physical coordinates of an integer site.
    pub fn position(&self, x: [i64; 3]) -> [f64; 3] {
        let s = self.inv_spacing() as f64;
        [x[0] as f64 / s, x[1] as f64 / s, x[2] as f64 / s]
    }

    /// Integer coordinate range of the unit block with index `m` along one axis.
    pub fn block_range(&self, m: i64) -> std::ops::RangeInclusive<i64> {
        let s = self.inv_spacing() as i64;
        let half = (s - 1) / 2;
        (m * s - half)..=(m * s + half)
    }
}
