//! Superderivations and Gaussian heat operators.

use crate::element::{Element, Kind, Var};
use crate::scalar::Scalar;

impl<C: Scalar> Element<C> {
    /// Supersymmetry Q: φ→ψ, φ̄→−ψ̄, ψ→φ, ψ̄→φ̄, on every species.
    pub fn susy_q(&self) -> Self {
        self.vector_field(|v| {
            Some(match v.kind {
                Kind::Phi => (1, v.with_kind(Kind::Psi)),
                Kind::PhiBar => (-1, v.with_kind(Kind::PsiBar)),
                Kind::Psi => (1, v.with_kind(Kind::Phi)),
                Kind::PsiBar => (1, v.with_kind(Kind::PhiBar)),
            })
        })
    }

    /// L = ψ∂_φ + ψ̄∂_φ̄ + φ∂_ψ − φ̄∂_ψ̄.
    pub fn susy_l(&self) -> Self {
        self.vector_field(|v| {
            Some(match v.kind {
                Kind::Phi => (1, v.with_kind(Kind::Psi)),
                Kind::PhiBar => (1, v.with_kind(Kind::PsiBar)),
                Kind::Psi => (1, v.with_kind(Kind::Phi)),
                Kind::PsiBar => (-1, v.with_kind(Kind::PhiBar)),
            })
        })
    }

    /// Dilation: each term times its total field degree.
    pub fn dilation(&self) -> Self {
        self.map_terms(|m, c| Some(c.clone() * C::from_i64(m.total_degree() as i64)))
    }

    /// ½(QL + LQ).
    pub fn dilation_from_q(&self) -> Self {
        let half = C::one() / C::from_i64(2);
        self.susy_l()
            .susy_q()
            .add(&self.susy_q().susy_l())
            .scale(&half)
    }

    /// Generator of the phase rotation divided by i: each term times its charge.
    pub fn gauge(&self) -> Self {
        self.map_terms(|m, c| Some(c.clone() * C::from_i64(m.charge() as i64)))
    }

    /// Σ_{x,y} C(x,y)[∂_φ(x)∂_φ̄(y) + ∂_ψ(x)∂_ψ̄(y)] on one species.
    pub fn laplacian(&self, species: usize, cov: &[Vec<C>]) -> Self {
        let mut out = Element::zero();
        for (x, row) in cov.iter().enumerate() {
            let dphi = self.derivative(Var::new(Kind::Phi, species, x));
            for (y, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let b = dphi.derivative(Var::new(Kind::PhiBar, species, y));
                let f = self
                    .derivative(Var::new(Kind::PsiBar, species, y))
                    .derivative(Var::new(Kind::Psi, species, x));
                out = out.add(&b.add(&f).scale(c));
            }
        }
        out
    }

    /// e^{tΔ_C}; the series stops once Δ^k vanishes.
    pub fn heat(&self, species: usize, cov: &[Vec<C>], t: &C) -> Self {
        let mut total = self.clone();
        let mut term = self.clone();
        let mut k = 0i64;
        loop {
            k += 1;
            term = term
                .laplacian(species, cov)
                .scale(&(t.clone() / C::from_i64(k)));
            if term.is_empty() {
                return total;
            }
            total = total.add(&term);
        }
    }

    /// :e:_C = e^{−Δ_C} e.
    pub fn wick_order(&self, species: usize, cov: &[Vec<C>]) -> Self {
        self.heat(species, cov, &-C::one())
    }

    /// ∫dμ_C(ξ) e(…, ξ) over one species: e^{Δ_C} then ξ = 0.
    pub fn integrate_species(&self, species: usize, cov: &[Vec<C>]) -> Self {
        self.heat(species, cov, &C::one()).at_zero(species)
    }
}
