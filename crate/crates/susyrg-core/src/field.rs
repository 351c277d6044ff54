use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scale::ScaleIndex;
use crate::Site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    Torus,
    OpenBox,
}

/// Finite truncation of the scale-n lattice used by numerical routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_extent: usize,
    pub mode: GridMode,
    pub scale: ScaleIndex,
}

impl GridSpec {
    pub fn new(half_extent: usize, mode: GridMode, scale: ScaleIndex) -> Self {
        GridSpec {
            half_extent,
            mode,
            scale,
        }
    }

    /// Sites per axis: 2M for the torus (even FFT length), 2M+1 for the open box.
    pub fn sites_per_axis(&self) -> usize {
        match self.mode {
            GridMode::Torus => 2 * self.half_extent,
            GridMode::OpenBox => 2 * self.half_extent + 1,
        }
    }

    /// Empty field covering the grid, centered at the origin.
    pub fn field<T: Copy + Default>(&self) -> Field3<T> {
        let n = self.sites_per_axis();
        let m = self.half_extent as i64;
        let lo = match self.mode {
            GridMode::Torus => [-m; 3],
            GridMode::OpenBox => [-m; 3],
        };
        Field3::new(self.scale, lo, [n; 3], self.mode)
    }
}

/// Lattice function on a box of integer sites. Sites can be marked missing,
/// which is how collars of non-box polymers are represented.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3<T> {
    pub scale: ScaleIndex,
    pub lo: Site,
    pub dims: [usize; 3],
    pub mode: GridMode,
    data: Vec<T>,
    present: Vec<bool>,
}

impl<T: Copy + Default> Field3<T> {
    /// All sites present with the default value.
    pub fn new(scale: ScaleIndex, lo: Site, dims: [usize; 3], mode: GridMode) -> Self {
        let len = dims[0] * dims[1] * dims[2];
        Field3 {
            scale,
            lo,
            dims,
            mode,
            data: vec![T::default(); len],
            present: vec![true; len],
        }
    }

    pub fn from_fn(
        scale: ScaleIndex,
        lo: Site,
        dims: [usize; 3],
        mode: GridMode,
        f: impl Fn(Site) -> T,
    ) -> Self {
        let mut out = Self::new(scale, lo, dims, mode);
        for i in 0..out.data.len() {
            let x = out.site_of(i);
            out.data[i] = f(x);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn site_of(&self, i: usize) -> Site {
        let [n0, n1, _] = self.dims;
        let a = i % n0;
        let b = (i / n0) % n1;
        let c = i / (n0 * n1);
        [
            self.lo[0] + a as i64,
            self.lo[1] + b as i64,
            self.lo[2] + c as i64,
        ]
    }

    fn index(&self, x: Site) -> Option<usize> {
        let mut idx = [0usize; 3];
        for k in 0..3 {
            let mut r = x[k] - self.lo[k];
            let n = self.dims[k] as i64;
            if self.mode == GridMode::Torus {
                r = r.rem_euclid(n);
            } else if r < 0 || r >= n {
                return None;
            }
            idx[k] = r as usize;
        }
        Some(idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2]))
    }

    pub fn contains(&self, x: Site) -> bool {
        self.index(x).is_some_and(|i| self.present[i])
    }

    pub fn get(&self, x: Site) -> Result<T, CoreError> {
        match self.index(x) {
            None => Err(CoreError::Boundary(x)),
            Some(i) if !self.present[i] => Err(CoreError::MissingCollar(x)),
            Some(i) => Ok(self.data[i]),
        }
    }

    pub fn set(&mut self, x: Site, v: T) -> Result<(), CoreError> {
        let i = self.index(x).ok_or(CoreError::Boundary(x))?;
        self.data[i] = v;
        self.present[i] = true;
        Ok(())
    }

    /// Mark a site as carrying no data.
    pub fn remove(&mut self, x: Site) {
        if let Some(i) = self.index(x) {
            self.present[i] = false;
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.data.len())
            .filter(|&i| self.present[i])
            .map(|i| self.site_of(i))
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Field3<U> {
        Field3 {
            scale: self.scale,
            lo: self.lo,
            dims: self.dims,
            mode: self.mode,
            data: self.data.iter().map(|&v| f(v)).collect(),
            present: self.present.clone(),
        }
    }

    /// Same values reinterpreted at another scale (integer sites unchanged).
    pub fn with_scale(mut self, scale: ScaleIndex) -> Self {
        self.scale = scale;
        self
    }
}
