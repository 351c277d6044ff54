use susyrg_core::Site;
use susyrg_covariance::KernelTable;

use crate::element::{Element, Kind, Monomial, MAX_SITES};
use crate::scalar::{determinant, permanent, Scalar};
use crate::AlgebraError;

/// Points of a finite lattice set with the restricted covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet<C> {
    sites: Vec<Site>,
    cov: Vec<Vec<C>>,
}

impl<C: Scalar> SiteSet<C> {
    pub fn new(sites: Vec<Site>, cov: Vec<Vec<C>>) -> Result<Self, AlgebraError> {
        let n = sites.len();
        if n > MAX_SITES {
            return Err(AlgebraError::TooManySites(n));
        }
        if cov.len() != n || cov.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::DimensionMismatch {
                expected: n,
                got: cov.len(),
            });
        }
        let scale = cov
            .iter()
            .flatten()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..i {
                if !(cov[i][j].clone() - cov[j][i].clone()).negligible(scale) {
                    return Err(AlgebraError::NotSymmetric { i, j });
                }
            }
        }
        // Sylvester: every leading principal minor positive.
        for k in 1..=n {
            let minor: Vec<Vec<C>> = cov[..k].iter().map(|r| r[..k].to_vec()).collect();
            let d = determinant(&minor).to_f64();
            if !(d > 0.0) {
                return Err(AlgebraError::NotPositiveDefinite { order: k, minor: d });
            }
        }
        Ok(SiteSet { sites, cov })
    }

    /// C(x_i − x_j) read from a kernel table.
    pub fn from_kernel(sites: Vec<Site>, table: &KernelTable) -> Result<Self, AlgebraError> {
        let mut cov = Vec::with_capacity(sites.len());
        for a in &sites {
            let mut row = Vec::with_capacity(sites.len());
            for b in &sites {
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                row.push(C::from_f64(
                    table.get(d).ok_or(AlgebraError::OutsideTable(d))?,
                ));
            }
            cov.push(row);
        }
        SiteSet::new(sites, cov)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn covariance(&self) -> &[Vec<C>] {
        &self.cov
    }

    pub fn check(&self, e: &Element<C>) -> Result<(), AlgebraError> {
        match e.max_site() {
            Some(s) if s >= self.len() => Err(AlgebraError::SiteOutOfRange {
                site: s,
                len: self.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Gaussian superexpectation over one species: Wick permanents for the
    /// bosons, determinants for the fermions, other species untouched.
    pub fn expectation_species(
        &self,
        e: &Element<C>,
        species: usize,
    ) -> Result<Element<C>, AlgebraError> {
        self.check(e)?;
        let mut out = Element::zero();
        for (m, c) in e.terms() {
            let (own, rest) = m.split_species(species);
            let v = self.monomial_expectation(&own, species);
            if !v.is_zero() {
                out = out.add(&Element::from_terms([(rest, c.clone() * v)]));
            }
        }
        Ok(out)
    }

    /// E(e) for an element of species 0 alone.
    pub fn expectation(&self, e: &Element<C>) -> Result<C, AlgebraError> {
        let r = self.expectation_species(e, 0)?;
        if r.terms().any(|(m, _)| *m != Monomial::ONE) {
            return Err(AlgebraError::SpeciesRemain);
        }
        Ok(r.constant_term())
    }

    fn monomial_expectation(&self, m: &Monomial, species: usize) -> C {
        let mut phi = Vec::new();
        let mut phibar = Vec::new();
        let mut psi = Vec::new();
        let mut psibar = Vec::new();
        for v in m.vars() {
            if v.species as usize != species {
                continue;
            }
            let s = v.site as usize;
            match v.kind {
                Kind::Phi => phi.push(s),
                Kind::PhiBar => phibar.push(s),
                Kind::Psi => psi.push(s),
                Kind::PsiBar => psibar.push(s),
            }
        }
        if phi.len() != phibar.len() || psi.len() != psibar.len() {
            return C::zero();
        }
        let bos: Vec<Vec<C>> = phi
            .iter()
            .map(|&a| phibar.iter().map(|&b| self.cov[a][b].clone()).collect())
            .collect();
        let fer: Vec<Vec<C>> = psibar
            .iter()
            .map(|&x| psi.iter().map(|&y| self.cov[x][y].clone()).collect())
            .collect();
        // The stored product is ψ/ψ̄ in site order; reorder to ψ̄(x1)ψ(y1)ψ̄(x2)ψ(y2)…
        let target: Vec<usize> = psibar
            .iter()
            .zip(&psi)
            .flat_map(|(&x, &y)| [2 * x + 1, 2 * y])
            .collect();
        let inversions = (0..target.len())
            .map(|i| {
                (i + 1..target.len())
                    .filter(|&j| target[j] < target[i])
                    .count()
            })
            .sum::<usize>();
        let v = permanent(&bos) * determinant(&fer);
        if inversions % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Both sides of ∫dμ_C F = F(0) for a supersymmetric F.
#[derive(Debug, Clone, PartialEq)]
pub struct SusyCheck<C> {
    pub lhs: C,
    pub rhs: C,
    pub equal: bool,
}

pub fn susy_integral_check<C: Scalar>(
    e: &Element<C>,
    s: &SiteSet<C>,
) -> Result<SusyCheck<C>, AlgebraError> {
    let scale = e.max_abs();
    if !e.susy_q().terms().all(|(_, c)| c.negligible(scale)) {
        return Err(AlgebraError::NotSupersymmetric);
    }
    let lhs = s.expectation(e)?;
    let rhs = e.at_zero(0).constant_term();
    let equal = (lhs.clone() - rhs.clone()).negligible(scale);
    Ok(SusyCheck { lhs, rhs, equal })
}
