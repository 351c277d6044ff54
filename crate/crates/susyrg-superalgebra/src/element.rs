use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;
use crate::AlgebraError;

/// Sites per species.
pub const MAX_SITES: usize = 6;
/// Independent superfields: Φ (species 0) and a fluctuation field ξ (species 1).
pub const SPECIES: usize = 2;
const SLOTS: usize = MAX_SITES * SPECIES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Phi,
    PhiBar,
    Psi,
    PsiBar,
}

impl Kind {
    pub fn is_odd(self) -> bool {
        matches!(self, Kind::Psi | Kind::PsiBar)
    }

    fn is_bar(self) -> bool {
        matches!(self, Kind::PhiBar | Kind::PsiBar)
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Phi => "phi",
            Kind::PhiBar => "phibar",
            Kind::Psi => "psi",
            Kind::PsiBar => "psibar",
        }
    }
}

/// A generator φ, φ̄, ψ or ψ̄ of one species at one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub kind: Kind,
    pub species: u8,
    pub site: u8,
}

impl Var {
    pub fn new(kind: Kind, species: usize, site: usize) -> Self {
        assert!(
            species < SPECIES && site < MAX_SITES,
            "generator out of range"
        );
        Var {
            kind,
            species: species as u8,
            site: site as u8,
        }
    }
    pub fn phi(site: usize) -> Self {
        Var::new(Kind::Phi, 0, site)
    }
    pub fn phibar(site: usize) -> Self {
        Var::new(Kind::PhiBar, 0, site)
    }
    pub fn psi(site: usize) -> Self {
        Var::new(Kind::Psi, 0, site)
    }
    pub fn psibar(site: usize) -> Self {
        Var::new(Kind::PsiBar, 0, site)
    }

    pub fn with_kind(self, kind: Kind) -> Self {
        Var { kind, ..self }
    }

    fn slot(self) -> usize {
        self.species as usize * MAX_SITES + self.site as usize
    }

    fn boson_index(self) -> usize {
        2 * self.slot() + self.kind.is_bar() as usize
    }

    fn fermion_bit(self) -> u32 {
        (2 * self.slot() + self.kind.is_bar() as usize) as u32
    }

    fn from_boson_index(i: usize) -> Self {
        let kind = if i.is_multiple_of(2) {
            Kind::Phi
        } else {
            Kind::PhiBar
        };
        Var::new(kind, i / 2 / MAX_SITES, i / 2 % MAX_SITES)
    }

    fn from_fermion_bit(b: u32) -> Self {
        let b = b as usize;
        let kind = if b.is_multiple_of(2) {
            Kind::Psi
        } else {
            Kind::PsiBar
        };
        Var::new(kind, b / 2 / MAX_SITES, b / 2 % MAX_SITES)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}.{}", self.kind.name(), self.species, self.site)
    }
}

/// Product of bosonic powers times an ordered fermion product; the fermions
/// are always stored in increasing generator order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    bos: [u8; 2 * SLOTS],
    ferm: u32,
}

fn parity_below(mask: u32, bit: u32) -> bool {
    (mask & ((1u32 << bit) - 1)).count_ones() % 2 == 1
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        bos: [0; 2 * SLOTS],
        ferm: 0,
    };

    pub fn fermion_mask(&self) -> u32 {
        self.ferm
    }

    /// Exponent of a bosonic generator, or 0/1 for a fermionic one.
    pub fn power(&self, v: Var) -> u32 {
        if v.kind.is_odd() {
            (self.ferm >> v.fermion_bit()) & 1
        } else {
            self.bos[v.boson_index()] as u32
        }
    }

    /// Generators with multiplicity: bosons first, then fermions in product order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for (i, &e) in self.bos.iter().enumerate() {
            for _ in 0..e {
                out.push(Var::from_boson_index(i));
            }
        }
        out.extend(self.fermions());
        out
    }

    pub fn fermions(&self) -> impl Iterator<Item = Var> + '_ {
        (0..32)
            .filter(move |b| self.ferm & (1 << b) != 0)
            .map(Var::from_fermion_bit)
    }

    pub fn total_degree(&self) -> u32 {
        self.bos.iter().map(|&e| e as u32).sum::<u32>() + self.ferm.count_ones()
    }

    /// ψ count minus ψ̄ count.
    pub fn fermion_degree(&self) -> i32 {
        let even = self.ferm & 0x5555_5555;
        even.count_ones() as i32 - (self.ferm & !0x5555_5555).count_ones() as i32
    }

    /// (φ, ψ) count minus (φ̄, ψ̄) count.
    pub fn charge(&self) -> i32 {
        let bos: i32 = self
            .bos
            .iter()
            .enumerate()
            .map(|(i, &e)| if i % 2 == 0 { e as i32 } else { -(e as i32) })
            .sum();
        bos + self.fermion_degree()
    }

    pub fn involves_species(&self, species: usize) -> bool {
        self.vars().iter().any(|v| v.species as usize == species)
    }

    pub fn max_site(&self) -> Option<usize> {
        self.vars().iter().map(|v| v.site as usize).max()
    }

    /// (generators of the species, everything else); their product in this
    /// order reproduces the monomial without a sign.
    pub(crate) fn split_species(&self, species: usize) -> (Monomial, Monomial) {
        let lo = 2 * species * MAX_SITES;
        let hi = lo + 2 * MAX_SITES;
        let mut own = Monomial::ONE;
        let mut rest = *self;
        own.bos[lo..hi].copy_from_slice(&self.bos[lo..hi]);
        rest.bos[lo..hi].fill(0);
        let mask = ((1u32 << (2 * MAX_SITES)) - 1) << lo;
        own.ferm = self.ferm & mask;
        rest.ferm = self.ferm & !mask;
        (own, rest)
    }

    /// Product with its sign, or None when a fermion repeats.
    pub fn times(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        if self.ferm & other.ferm != 0 {
            return None;
        }
        let mut swaps = 0u32;
        let mut rest = other.ferm;
        while rest != 0 {
            let j = rest.trailing_zeros();
            swaps += (self.ferm >> j >> 1).count_ones();
            rest &= rest - 1;
        }
        let mut bos = self.bos;
        for (b, o) in bos.iter_mut().zip(other.bos.iter()) {
            *b += o;
        }
        Some((
            Monomial {
                bos,
                ferm: self.ferm | other.ferm,
            },
            swaps % 2 == 1,
        ))
    }

    /// Left derivative: (multiplicity, sign, result), or None if absent.
    fn derive(&self, v: Var) -> Option<(u32, bool, Monomial)> {
        let mut m = *self;
        if v.kind.is_odd() {
            let b = v.fermion_bit();
            if self.ferm & (1 << b) == 0 {
                return None;
            }
            m.ferm &= !(1 << b);
            Some((1, parity_below(self.ferm, b), m))
        } else {
            let i = v.boson_index();
            let e = self.bos[i];
            if e == 0 {
                return None;
            }
            m.bos[i] -= 1;
            Some((e as u32, false, m))
        }
    }

    /// v·m with its sign, or None when v is a repeated fermion.
    fn left_times(&self, v: Var) -> Option<(bool, Monomial)> {
        let mut m = *self;
        if v.kind.is_odd() {
            let b = v.fermion_bit();
            if self.ferm & (1 << b) != 0 {
                return None;
            }
            m.ferm |= 1 << b;
            Some((parity_below(self.ferm, b), m))
        } else {
            m.bos[v.boson_index()] += 1;
            Some((false, m))
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.bos.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "{}", Var::from_boson_index(i))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        for v in self.fermions() {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Element of the Grassmann algebra with polynomial bosonic coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Scalar> Default for Element<C> {
    fn default() -> Self {
        Element::zero()
    }
}

impl<C: Scalar> Element<C> {
    pub fn zero() -> Self {
        Element {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        let mut e = Element::zero();
        e.add_term(Monomial::ONE, c);
        e
    }

    pub fn one() -> Self {
        Element::constant(C::one())
    }

    pub fn var(v: Var) -> Self {
        Element::one().left_mul_var(v)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut e = Element::zero();
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coefficient(&Monomial::ONE)
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Monomial, &C) -> Option<C>) -> Self {
        Element::from_terms(
            self.terms
                .iter()
                .filter_map(|(m, c)| f(m, c).map(|v| (*m, v))),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut e = self.clone();
        for (m, c) in &other.terms {
            e.add_term(*m, c.clone());
        }
        e
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|_, c| Some(-c.clone()))
    }

    pub fn scale(&self, s: &C) -> Self {
        self.map_terms(|_, c| Some(c.clone() * s.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut e = Element::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((m, neg)) = a.times(b) {
                    let c = ca.clone() * cb.clone();
                    e.add_term(m, if neg { -c } else { c });
                }
            }
        }
        e
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Element::one(), |acc, _| acc.mul(self))
    }

    /// v·self.
    pub fn left_mul_var(&self, v: Var) -> Self {
        let mut e = Element::zero();
        for (m, c) in &self.terms {
            if let Some((neg, r)) = m.left_times(v) {
                e.add_term(r, if neg { -c.clone() } else { c.clone() });
            }
        }
        e
    }

    /// ∂/∂v, acting from the left on fermions.
    pub fn derivative(&self, v: Var) -> Self {
        let mut e = Element::zero();
        for (m, c) in &self.terms {
            if let Some((k, neg, r)) = m.derive(v) {
                let c = c.clone() * C::from_i64(k as i64);
                e.add_term(r, if neg { -c } else { c });
            }
        }
        e
    }

    /// Σ sign · w·∂_v over the map v ↦ (sign, w) applied to every generator present.
    pub fn vector_field(&self, field: impl Fn(Var) -> Option<(i64, Var)>) -> Self {
        let mut e = Element::zero();
        for (m, c) in &self.terms {
            let mut seen: Vec<Var> = m.vars();
            seen.dedup();
            for v in seen {
                let Some((sign, w)) = field(v) else { continue };
                let Some((k, neg1, r)) = m.derive(v) else {
                    continue;
                };
                let Some((neg2, out)) = r.left_times(w) else {
                    continue;
                };
                let coef = c.clone() * C::from_i64(sign * k as i64);
                e.add_term(out, if neg1 ^ neg2 { -coef } else { coef });
            }
        }
        e
    }

    /// Terms containing no generator of the species.
    pub fn at_zero(&self, species: usize) -> Self {
        self.map_terms(|m, c| (!m.involves_species(species)).then(|| c.clone()))
    }

    /// Terms of total field degree at most `cap`.
    pub fn truncate(&self, cap: u32) -> Self {
        self.map_terms(|m, c| (m.total_degree() <= cap).then(|| c.clone()))
    }

    /// Fermion-degree-zero projection.
    pub fn degree_zero_part(&self) -> Self {
        self.map_terms(|m, c| (m.fermion_degree() == 0).then(|| c.clone()))
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.terms.keys().all(|m| m.charge() == 0)
    }

    /// Largest site index used by any generator.
    pub fn max_site(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.max_site()).max()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Every coefficient of self − other negligible relative to `scale`.
    pub fn approx_eq(&self, other: &Self, scale: f64) -> bool {
        self.sub(other).terms.values().all(|c| c.negligible(scale))
    }

    /// Replaces each generator by an element; odd generators must map to odd elements.
    pub fn substitute(&self, image: impl Fn(Var) -> Element<C>) -> Self {
        let mut e = Element::zero();
        for (m, c) in &self.terms {
            let mut prod = Element::constant(c.clone());
            for v in m.vars() {
                prod = prod.mul(&image(v));
            }
            e = e.add(&prod);
        }
        e
    }

    /// Σ_{k ≤ cap} x^k / k! with terms above degree `cap` dropped.
    pub fn exp_series(&self, cap: u32) -> Result<Self, AlgebraError> {
        if !self.constant_term().is_zero() {
            return Err(AlgebraError::ConstantInExponent);
        }
        let mut total = Element::one();
        let mut power = Element::one();
        for k in 1..=cap as i64 {
            power = power
                .mul(self)
                .truncate(cap)
                .scale(&(C::one() / C::from_i64(k)));
            if power.is_empty() {
                break;
            }
            total = total.add(&power);
        }
        Ok(total)
    }

    pub fn to_f64(&self) -> Element<f64> {
        Element::from_terms(self.terms.iter().map(|(m, c)| (*m, c.to_f64())))
    }

    /// One term per line in canonical order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            s.push_str(&format!("{c} {m}\n"));
        }
        s
    }
}

impl<C: Scalar> fmt::Display for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*{m}")?;
        }
        Ok(())
    }
}

/// Φ(a)Φ̄(b) = φ(a)φ̄(b) + ψ(a)ψ̄(b) for one species.
pub fn super_pair<C: Scalar>(species: usize, a: usize, b: usize) -> Element<C> {
    let phi = Element::var(Var::new(Kind::Phi, species, a)).mul(&Element::var(Var::new(
        Kind::PhiBar,
        species,
        b,
    )));
    let psi = Element::var(Var::new(Kind::Psi, species, a)).mul(&Element::var(Var::new(
        Kind::PsiBar,
        species,
        b,
    )));
    phi.add(&psi)
}

/// (ΦΦ̄)(x) of species 0.
pub fn phi_phibar<C: Scalar>(x: usize) -> Element<C> {
    super_pair(0, x, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type E = Element<Rational>;

    #[test]
    fn fermions_anticommute() {
        let a = E::var(Var::psi(0));
        let b = E::var(Var::psibar(1));
        assert!(a.mul(&a).is_empty());
        assert_eq!(a.mul(&b), b.mul(&a).neg());
    }

    #[test]
    fn left_derivative_sign() {
        // ∂_{ψ̄1}(ψ0 ψ̄1) = −ψ0
        let e = E::var(Var::psi(0)).mul(&E::var(Var::psibar(1)));
        assert_eq!(e.derivative(Var::psibar(1)), E::var(Var::psi(0)).neg());
        assert_eq!(e.derivative(Var::psi(0)), E::var(Var::psibar(1)));
    }

    #[test]
    fn boson_derivative_multiplicity() {
        let x = E::var(Var::phi(2)).pow(3);
        assert_eq!(
            x.derivative(Var::phi(2)),
            E::var(Var::phi(2)).pow(2).scale(&Rational::from_i64(3))
        );
    }

    #[test]
    fn degrees_and_charge() {
        let e: E = phi_phibar(0);
        assert!(e.is_gauge_invariant());
        let m = *E::var(Var::psi(1)).terms().next().unwrap().0;
        assert_eq!(m.fermion_degree(), 1);
        assert_eq!(m.charge(), 1);
    }

    #[test]
    fn substitution_shift() {
        // ψ0 ψ̄0 under ψ ↦ ψ + ζ keeps the sign structure.
        let e: E = super_pair(0, 0, 0);
        let shifted = e.substitute(|v| E::var(v).add(&E::var(Var { species: 1, ..v })));
        let expect = super_pair(0, 0, 0)
            .add(&super_pair(0, 0, 0).substitute(|v| E::var(Var { species: 1, ..v })))
            .add(&E::var(Var::phi(0)).mul(&E::var(Var::new(Kind::PhiBar, 1, 0))))
            .add(&E::var(Var::new(Kind::Phi, 1, 0)).mul(&E::var(Var::phibar(0))))
            .add(&E::var(Var::psi(0)).mul(&E::var(Var::new(Kind::PsiBar, 1, 0))))
            .add(&E::var(Var::new(Kind::Psi, 1, 0)).mul(&E::var(Var::psibar(0))));
        assert_eq!(shifted, expect);
    }

    #[test]
    fn exp_series_rejects_constants() {
        assert!(E::one().exp_series(4).is_err());
        let x = E::var(Var::phi(0));
        let e = x.exp_series(2).unwrap();
        assert_eq!(e.len(), 3);
    }

    #[test]
    fn dump_is_canonical() {
        let e: E = phi_phibar(0);
        assert_eq!(e.dump(), "1 psi0.0*psibar0.0\n1 phi0.0*phibar0.0\n");
    }
}
