//! Extraction of the relevant local part of an activity.
//!
//! Given a supersymmetric activity R and the potential V on a small patch,
//! the local polynomial
//! F = ∫_X α_{2,0} ΦΦ̄ + α_4 (ΦΦ̄)² + Σ_μ α_{2,1̄}(μ) Φ∂_μΦ̄ + α_{2,1}(μ) ∂_μΦΦ̄
//! is fixed so that J = R − F e^{−V} has vanishing low-order derivatives at
//! zero field.

use susyrg_core::Site;

use crate::element::{super_pair, Element};
use crate::functional::fermionic_derivative_functional;
use crate::scalar::Scalar;
use crate::AlgebraError;

/// A polymer X together with the collar sites its lattice derivatives need.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch<C> {
    pub sites: Vec<Site>,
    /// Indices into `sites` of the points of X; the first one is the origin.
    pub x: Vec<usize>,
    /// Lattice spacing.
    pub delta: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevantCoefficients<C> {
    pub a20: C,
    pub a4: C,
    pub a21: [C; 3],
    pub a21bar: [C; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition<C> {
    pub name: String,
    pub value: C,
}

impl<C: Scalar> Patch<C> {
    pub fn new(sites: Vec<Site>, x: Vec<usize>, delta: C) -> Result<Self, AlgebraError> {
        if let Some(&i) = x.iter().find(|&&i| i >= sites.len()) {
            return Err(AlgebraError::SiteOutOfRange {
                site: i,
                len: sites.len(),
            });
        }
        if x.is_empty() {
            return Err(AlgebraError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Patch { sites, x, delta })
    }

    fn cell(&self) -> C {
        self.delta.clone() * self.delta.clone() * self.delta.clone()
    }

    /// |X| = (number of points) δ³.
    pub fn volume(&self) -> C {
        C::from_i64(self.x.len() as i64) * self.cell()
    }

    /// x_μ relative to the origin of X.
    pub fn coordinate(&self, i: usize, mu: usize) -> C {
        C::from_i64(self.sites[i][mu] - self.sites[self.x[0]][mu]) * self.delta.clone()
    }

    pub fn coordinates(&self, mu: usize) -> Vec<C> {
        (0..self.sites.len())
            .map(|i| self.coordinate(i, mu))
            .collect()
    }

    /// Directions along which some site has a nonzero coordinate.
    pub fn active_directions(&self) -> Vec<usize> {
        (0..3)
            .filter(|&mu| {
                self.sites
                    .iter()
                    .any(|s| s[mu] != self.sites[self.x[0]][mu])
            })
            .collect()
    }

    fn neighbor(&self, i: usize, mu: usize) -> Result<usize, AlgebraError> {
        let mut t = self.sites[i];
        t[mu] += 1;
        self.sites
            .iter()
            .position(|s| *s == t)
            .ok_or(AlgebraError::MissingNeighbor {
                site: i,
                direction: mu,
            })
    }

    /// δ³ Σ_{x∈X} f(x).
    pub fn integral(
        &self,
        f: impl Fn(usize) -> Result<Element<C>, AlgebraError>,
    ) -> Result<Element<C>, AlgebraError> {
        let mut e = Element::zero();
        for &i in &self.x {
            e = e.add(&f(i)?);
        }
        Ok(e.scale(&self.cell()))
    }

    /// Φ(x)∂_μΦ̄(x), with the forward lattice derivative.
    pub fn phi_dphibar(&self, i: usize, mu: usize) -> Result<Element<C>, AlgebraError> {
        let j = self.neighbor(i, mu)?;
        Ok(super_pair(0, i, j)
            .sub(&super_pair(0, i, i))
            .scale(&(C::one() / self.delta.clone())))
    }

    /// ∂_μΦ(x)Φ̄(x).
    pub fn dphi_phibar(&self, i: usize, mu: usize) -> Result<Element<C>, AlgebraError> {
        let j = self.neighbor(i, mu)?;
        Ok(super_pair(0, j, i)
            .sub(&super_pair(0, i, i))
            .scale(&(C::one() / self.delta.clone())))
    }

    /// The local polynomial with the given coefficients.
    pub fn relevant(&self, a: &RelevantCoefficients<C>) -> Result<Element<C>, AlgebraError> {
        let mut f = self.integral(|i| {
            let p = super_pair(0, i, i);
            Ok(p.scale(&a.a20).add(&p.mul(&p).scale(&a.a4)))
        })?;
        for mu in self.active_directions() {
            f = f.add(&self.integral(|i| {
                Ok(self
                    .phi_dphibar(i, mu)?
                    .scale(&a.a21bar[mu])
                    .add(&self.dphi_phibar(i, mu)?.scale(&a.a21[mu])))
            })?);
        }
        Ok(f)
    }

    fn d02(&self, e: &Element<C>, f1: &[C], f2: &[C]) -> Result<C, AlgebraError> {
        fermionic_derivative_functional(
            e,
            self.sites.len(),
            0,
            &[f1.to_vec(), f2.to_vec()],
            |_, _| C::one(),
        )
    }

    fn ones(&self) -> Vec<C> {
        vec![C::one(); self.sites.len()]
    }

    /// Coefficients making the bosonic conditions vanish for J = R − F e^{−V}.
    pub fn normalize(
        &self,
        r: &Element<C>,
        v: &Element<C>,
    ) -> Result<RelevantCoefficients<C>, AlgebraError> {
        let one = self.ones();
        let vol = self.volume();
        let d02r = self.d02(r, &one, &one)?;
        let a20 = d02r.clone() / vol.clone();
        let d04r = fermionic_derivative_functional(
            r,
            self.sites.len(),
            0,
            &vec![one.clone(); 4],
            |_, _| C::one(),
        )?;
        let d02v = self.d02(v, &one, &one)?;
        let a4 = (d04r + C::from_i64(4) * d02v * d02r) / (C::from_i64(4) * vol.clone());
        let mut a21: [C; 3] = [C::zero(), C::zero(), C::zero()];
        let mut a21bar = a21.clone();
        for mu in self.active_directions() {
            let xs = self.coordinates(mu);
            let ix = self.x.iter().fold(C::zero(), |acc, &i| acc + xs[i].clone()) * self.cell();
            a21bar[mu] = (self.d02(r, &one, &xs)? - a20.clone() * ix.clone()) / vol.clone();
            a21[mu] = (self.d02(r, &xs, &one)? - a20.clone() * ix) / vol.clone();
        }
        Ok(RelevantCoefficients {
            a20,
            a4,
            a21,
            a21bar,
        })
    }

    /// J = R − F e^{−V}, truncated at field degree `cap`.
    pub fn normalized_remainder(
        &self,
        r: &Element<C>,
        v: &Element<C>,
        cap: u32,
    ) -> Result<(RelevantCoefficients<C>, Element<C>), AlgebraError> {
        let a = self.normalize(r, v)?;
        let f = self.relevant(&a)?;
        let j = r
            .truncate(cap)
            .sub(&f.mul(&v.neg().exp_series(cap)?).truncate(cap));
        Ok((a, j))
    }

    /// The low-order derivative conditions on J, each of which should vanish.
    pub fn conditions(&self, j: &Element<C>) -> Result<Vec<Condition<C>>, AlgebraError> {
        let n = self.sites.len();
        let one = self.ones();
        let unit = |_: &[usize], _: &[usize]| C::one();
        let mut out = vec![
            Condition {
                name: "D20(1)".into(),
                value: fermionic_derivative_functional(j, n, 1, &[], unit)?,
            },
            Condition {
                name: "D02(1,1)".into(),
                value: self.d02(j, &one, &one)?,
            },
        ];
        for mu in 0..3 {
            let xs = self.coordinates(mu);
            let first = fermionic_derivative_functional(j, n, 1, &[], |x, _| xs[x[0]].clone())?;
            let second = fermionic_derivative_functional(j, n, 1, &[], |_, y| xs[y[0]].clone())?;
            out.push(Condition {
                name: format!("D20(x1_{mu})"),
                value: first,
            });
            out.push(Condition {
                name: format!("D20(x2_{mu})"),
                value: second,
            });
            out.push(Condition {
                name: format!("D02(1,x_{mu})"),
                value: self.d02(j, &one, &xs)?,
            });
            out.push(Condition {
                name: format!("D02(x_{mu},1)"),
                value: self.d02(j, &xs, &one)?,
            });
        }
        let d04 = fermionic_derivative_functional(j, n, 0, &vec![one.clone(); 4], unit)?;
        out.push(Condition {
            name: "2 D04(1,1,1,1)".into(),
            value: C::from_i64(2) * d04,
        });
        let d22 = fermionic_derivative_functional(j, n, 1, &[one.clone(), one], unit)?;
        out.push(Condition {
            name: "D22(1,1;1)".into(),
            value: d22,
        });
        Ok(out)
    }
}
