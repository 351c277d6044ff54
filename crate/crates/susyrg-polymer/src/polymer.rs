use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;
use susyrg_core::{sup_norm, ScaleIndex, Site};

use crate::PolymerError;

/// Number of unit blocks in a small set, 2^D.
pub const SMALL_SET_SIZE: usize = 8;

/// A finite union of unit blocks, block m being the cube of side 1 centered at m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Polymer {
    pub blocks: BTreeSet<Site>,
    pub scale: ScaleIndex,
}

/// Closures of the two cubes share at least a vertex.
pub fn touching(a: Site, b: Site) -> bool {
    sup_norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) <= 1
}

impl Polymer {
    pub fn new(blocks: impl IntoIterator<Item = Site>, scale: ScaleIndex) -> Self {
        Polymer {
            blocks: blocks.into_iter().collect(),
            scale,
        }
    }

    /// |X|, the number of unit blocks.
    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn translate(&self, t: Site) -> Self {
        Polymer::new(
            self.blocks
                .iter()
                .map(|b| [b[0] + t[0], b[1] + t[1], b[2] + t[2]]),
            self.scale,
        )
    }

    pub fn union(&self, other: &Polymer) -> Self {
        Polymer::new(self.blocks.union(&other.blocks).copied(), self.scale)
    }

    pub fn is_disjoint(&self, other: &Polymer) -> bool {
        self.blocks.is_disjoint(&other.blocks)
    }

    /// Maximal connected subpolymers.
    pub fn connected_components(&self) -> Vec<Polymer> {
        let mut left = self.blocks.clone();
        let mut out = Vec::new();
        while let Some(&start) = left.iter().next() {
            left.remove(&start);
            let mut comp = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(b) = queue.pop_front() {
                let next: Vec<Site> = left.iter().copied().filter(|&c| touching(b, c)).collect();
                for c in next {
                    left.remove(&c);
                    comp.insert(c);
                    queue.push_back(c);
                }
            }
            out.push(Polymer {
                blocks: comp,
                scale: self.scale,
            });
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Connected with at most 2^D blocks.
    pub fn is_small(&self) -> Result<bool, PolymerError> {
        if !self.is_connected() {
            return Err(PolymerError::Disconnected);
        }
        Ok(self.size() <= SMALL_SET_SIZE)
    }

    /// Lattice points of every block at the polymer's scale.
    pub fn sites(&self) -> Vec<Site> {
        let mut out = Vec::new();
        for m in &self.blocks {
            for x in self.scale.block_range(m[0]) {
                for y in self.scale.block_range(m[1]) {
                    for z in self.scale.block_range(m[2]) {
                        out.push([x, y, z]);
                    }
                }
            }
        }
        out
    }

    /// L⁻¹ of the L-closure: the indices of the L-blocks meeting X, as a polymer one
    /// scale up. Block m lies in the L-block M with |m − LM|∞ ≤ (L−1)/2.
    pub fn l_closure(&self, l: u32) -> Result<Polymer, PolymerError> {
        check_triadic(l)?;
        let (l, h) = (l as i64, (l as i64 - 1) / 2);
        let blocks = self.blocks.iter().map(|m| m.map(|c| (c + h).div_euclid(l)));
        Ok(Polymer::new(
            blocks,
            ScaleIndex::new(self.scale.l, self.scale.n + 1),
        ))
    }

    /// The unit blocks making up the L-blocks of an L-polymer given by its indices.
    pub fn expand(&self, l: u32) -> Result<Polymer, PolymerError> {
        check_triadic(l)?;
        let (l, h) = (l as i64, (l as i64 - 1) / 2);
        let mut out = BTreeSet::new();
        for big in &self.blocks {
            for x in -h..=h {
                for y in -h..=h {
                    for z in -h..=h {
                        out.insert([big[0] * l + x, big[1] * l + y, big[2] * l + z]);
                    }
                }
            }
        }
        Ok(Polymer {
            blocks: out,
            scale: ScaleIndex::new(self.scale.l, self.scale.n.saturating_sub(1)),
        })
    }
}

pub(crate) fn check_triadic(l: u32) -> Result<(), PolymerError> {
    let mut k = l;
    while k > 1 && k.is_multiple_of(3) {
        k /= 3;
    }
    if k != 1 || l < 3 {
        return Err(PolymerError::NotTriadic(l));
    }
    Ok(())
}

/// ln A_p(X) = |X|(p ln 2 + (D + 2) ln L).
pub fn log_regulator_a(size: usize, p: i32, l: u32) -> f64 {
    size as f64 * (p as f64 * std::f64::consts::LN_2 + 5.0 * (l as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(b: &[Site]) -> Polymer {
        Polymer::new(b.iter().copied(), ScaleIndex::new(9, 0))
    }

    #[test]
    fn components() {
        assert_eq!(
            poly(&[[0, 0, 0], [1, 1, 1]]).connected_components().len(),
            1
        );
        assert_eq!(
            poly(&[[0, 0, 0], [2, 0, 0]]).connected_components().len(),
            2
        );
        let one = poly(&[[3, -1, 2]]);
        assert_eq!(one.connected_components(), vec![one.clone()]);
        assert!(poly(&[]).connected_components().is_empty());
    }

    #[test]
    fn small_sets() {
        let cube: Vec<Site> = (0..8)
            .map(|i| [i & 1, (i >> 1) & 1, (i >> 2) & 1])
            .collect();
        assert!(poly(&cube).is_small().unwrap());
        let mut nine = cube.clone();
        nine.push([2, 0, 0]);
        assert!(!poly(&nine).is_small().unwrap());
        assert!(poly(&[[0, 0, 0]]).is_small().unwrap());
        assert_eq!(
            poly(&[[0, 0, 0], [5, 0, 0]]).is_small(),
            Err(PolymerError::Disconnected)
        );
    }

    #[test]
    fn closures() {
        assert_eq!(
            poly(&[[4, 0, 0]]).l_closure(9).unwrap().blocks,
            BTreeSet::from([[0, 0, 0]])
        );
        assert_eq!(
            poly(&[[5, 0, 0]]).l_closure(9).unwrap().blocks,
            BTreeSet::from([[1, 0, 0]])
        );
        assert_eq!(
            poly(&[[-5, 0, 0]]).l_closure(9).unwrap().blocks,
            BTreeSet::from([[-1, 0, 0]])
        );
        let big = Polymer::new([[0, 0, 0], [1, -1, 0]], ScaleIndex::new(9, 1));
        let units = big.expand(9).unwrap();
        assert_eq!(units.size(), 2 * 729);
        assert_eq!(units.l_closure(9).unwrap(), big);
        assert_eq!(
            poly(&[[0, 0, 0]]).l_closure(6),
            Err(PolymerError::NotTriadic(6))
        );
    }

    #[test]
    fn regulator_a() {
        let l = 9u32;
        assert!((log_regulator_a(1, 0, l) - 5.0 * 9f64.ln()).abs() < 1e-14);
        let gap = log_regulator_a(4, 3, l) - log_regulator_a(4, 2, l);
        assert!((gap - 4.0 * std::f64::consts::LN_2).abs() < 1e-13);
    }
}
