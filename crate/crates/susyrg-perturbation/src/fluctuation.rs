//! The fluctuation polynomials p_g, p_μ and the second-order matching on small toys.

use susyrg_superalgebra::{ratio, Element, Kind, Scalar, Var, MAX_SITES};

use crate::kernels::{hat_x, q_tilde_total, v_matrices, Matrix};
use crate::PerturbError;

const FIELD: usize = 0;
const FLUCT: usize = 1;

/// Φ^{(s)}(a)Φ̄^{(t)}(b) = φ^{(s)}(a)φ̄^{(t)}(b) + ψ^{(s)}(a)ψ̄^{(t)}(b).
pub fn mixed_pair<C: Scalar>(s: usize, a: usize, t: usize, b: usize) -> Element<C> {
    let v = |k, sp, x| Element::var(Var::new(k, sp, x));
    v(Kind::Phi, s, a)
        .mul(&v(Kind::PhiBar, t, b))
        .add(&v(Kind::Psi, s, a).mul(&v(Kind::PsiBar, t, b)))
}

/// Points grouped into blocks, with the covariances Γ (fluctuation) and C' (next scale)
/// restricted to them and the per-point measure weight δ³.
#[derive(Debug, Clone)]
pub struct Toy<C> {
    pub blocks: Vec<Vec<usize>>,
    pub weight: C,
    pub gamma: Matrix<C>,
    pub c_next: Matrix<C>,
}

impl<C: Scalar> Toy<C> {
    pub fn new(
        blocks: Vec<Vec<usize>>,
        weight: C,
        gamma: Matrix<C>,
        c_next: Matrix<C>,
    ) -> Result<Self, PerturbError> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        if n > MAX_SITES {
            return Err(PerturbError::TooManyPoints(n));
        }
        let mut seen: Vec<usize> = blocks.iter().flatten().copied().collect();
        seen.sort_unstable();
        if seen != (0..n).collect::<Vec<_>>() {
            return Err(PerturbError::BadBlocks);
        }
        for m in [&gamma, &c_next] {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(PerturbError::BadBlocks);
            }
        }
        Ok(Toy {
            blocks,
            weight,
            gamma,
            c_next,
        })
    }

    pub fn points(&self) -> usize {
        self.gamma.len()
    }

    fn over_block(&self, block: usize, f: impl Fn(usize) -> Element<C>) -> Element<C> {
        let mut out = Element::zero();
        for &x in &self.blocks[block] {
            out = out.add(&f(x));
        }
        out.scale(&self.weight)
    }

    fn order_both(&self, e: &Element<C>) -> Element<C> {
        e.wick_order(FLUCT, &self.gamma)
            .wick_order(FIELD, &self.c_next)
    }

    /// e^{−Δ_Γ(ξ) − Δ_{C'}(Φ)} g∫((Φ+ξ)(Φ̄+ξ̄))² − e^{−Δ_{C'}} g∫(ΦΦ̄)² over one block.
    pub fn p_g(&self, block: usize, g: &C) -> Element<C> {
        let full = self.over_block(block, |x| {
            let mut s = Element::zero();
            for a in [FIELD, FLUCT] {
                for b in [FIELD, FLUCT] {
                    s = s.add(&mixed_pair(a, x, b, x));
                }
            }
            s.mul(&s)
        });
        let bare = self.over_block(block, |x| {
            let p = mixed_pair::<C>(FIELD, x, FIELD, x);
            p.mul(&p)
        });
        self.order_both(&full)
            .sub(&bare.wick_order(FIELD, &self.c_next))
            .scale(g)
    }

    /// The same polynomial assembled term by term from its expansion in components.
    /// `printed_mixed` selects the component form 2Σ_{αβ}:ξ_αξ̄_β::Φ̄_αΦ_β: of the
    /// (Φξ̄)(ξΦ̄) term; otherwise 2Σ_{αβ}:Φ_αξ̄_αξ_βΦ̄_β: is used.
    pub fn p_g_components(&self, block: usize, g: &C, printed_mixed: bool) -> Element<C> {
        let two = C::from_i64(2);
        let comp = |k: Kind, sp: usize, x: usize| Element::<C>::var(Var::new(k, sp, x));
        let body = self.over_block(block, |x| {
            let field = [comp(Kind::Phi, FIELD, x), comp(Kind::Psi, FIELD, x)];
            let field_bar = [comp(Kind::PhiBar, FIELD, x), comp(Kind::PsiBar, FIELD, x)];
            let xi = [comp(Kind::Phi, FLUCT, x), comp(Kind::Psi, FLUCT, x)];
            let xi_bar = [comp(Kind::PhiBar, FLUCT, x), comp(Kind::PsiBar, FLUCT, x)];
            let xx = mixed_pair::<C>(FLUCT, x, FLUCT, x);
            let ff = mixed_pair::<C>(FIELD, x, FIELD, x);
            let fx = mixed_pair::<C>(FIELD, x, FLUCT, x);
            let xf = mixed_pair::<C>(FLUCT, x, FIELD, x);

            let mut t = xx.mul(&xx).wick_order(FLUCT, &self.gamma);
            for a in 0..2 {
                let left = field[a].mul(&xi_bar[a].mul(&xx).wick_order(FLUCT, &self.gamma));
                let right = xx
                    .mul(&xi[a])
                    .wick_order(FLUCT, &self.gamma)
                    .mul(&field_bar[a]);
                t = t.add(&left.add(&right).scale(&two));
            }
            let quad = ff.mul(&xx).scale(&two).add(&fx.mul(&fx)).add(&xf.mul(&xf));
            t = t.add(&self.order_both(&quad));
            let mixed = if printed_mixed {
                let mut m = Element::zero();
                for a in 0..2 {
                    for b in 0..2 {
                        let l = xi[a].mul(&xi_bar[b]).wick_order(FLUCT, &self.gamma);
                        let r = field_bar[a].mul(&field[b]).wick_order(FIELD, &self.c_next);
                        m = m.add(&l.mul(&r));
                    }
                }
                m
            } else {
                self.order_both(&fx.mul(&xf))
            };
            t = t.add(&mixed.scale(&two));
            for a in 0..2 {
                let l = xi[a].mul(&field_bar[a].mul(&ff).wick_order(FIELD, &self.c_next));
                let r = ff
                    .mul(&field[a])
                    .wick_order(FIELD, &self.c_next)
                    .mul(&xi_bar[a]);
                t = t.add(&l.add(&r).scale(&two));
            }
            t
        });
        body.scale(g)
    }

    /// μ∫[(ξΦ̄) + (Φξ̄) + (ξξ̄)] over one block.
    pub fn p_mu(&self, block: usize, mu: &C) -> Element<C> {
        self.over_block(block, |x| {
            mixed_pair::<C>(FLUCT, x, FIELD, x)
                .add(&mixed_pair(FIELD, x, FLUCT, x))
                .add(&mixed_pair(FLUCT, x, FLUCT, x))
        })
        .scale(mu)
    }

    /// ½p_g(Δ)² for one block, p_g(Δ1)p_g(Δ2) for two.
    pub fn q_hat(&self, g: &C) -> Result<Element<C>, PerturbError> {
        match self.blocks.len() {
            1 => {
                let p = self.p_g(0, g);
                Ok(p.mul(&p).scale(&ratio(1, 2)))
            }
            2 => Ok(self.p_g(0, g).mul(&self.p_g(1, g))),
            k => Err(PerturbError::TooManyBlocks(k)),
        }
    }

    /// Compares ∫dμ_Γ(ξ) Q̂ with g²[Q̃^{(1,1)}(v^{(3)}) + Q̃^{(2,2)}(v^{(2)}) + Q̃^{(3,3)}(v^{(1)})].
    pub fn second_order_matching(&self, g: &C) -> Result<Matching<C>, PerturbError> {
        let lhs = self.q_hat(g)?.integrate_species(FLUCT, &self.gamma);
        let v = v_matrices(&self.gamma, &self.c_next);
        let rhs = q_tilde_total(&hat_x(&self.blocks), &self.weight, &v, &self.c_next, g);
        let residual = lhs.sub(&rhs).max_abs();
        Ok(Matching { lhs, rhs, residual })
    }
}

#[derive(Debug, Clone)]
pub struct Matching<C> {
    pub lhs: Element<C>,
    pub rhs: Element<C>,
    /// Largest coefficient of lhs − rhs.
    pub residual: f64,
}
