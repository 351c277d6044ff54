use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scale::ScaleIndex;

/// Global scalars of the model. `alpha` and `d_s` are derived from `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Triadic scale factor, an exact power of 3.
    pub l: u32,
    pub eps: f64,
    pub q: f64,
    pub nu: f64,
    pub delta_exp: f64,
    pub eta_exp: f64,
    pub kappa: f64,
    pub rho: f64,
    pub h_b: f64,
    pub h_f: f64,
    pub h_bstar: f64,
    pub m0: u32,
}

impl Parameters {
    pub const DIM: usize = 3;

    /// Parameters with the default constants, validated.
    pub fn new(l: u32, eps: f64) -> Result<Self, CoreError> {
        let kappa = 0.05;
        let rho = 0.05;
        let p = Parameters {
            l,
            eps,
            q: 0.5,
            nu: 0.25,
            delta_exp: 1.0 / 64.0,
            eta_exp: 1.0 / 64.0,
            kappa,
            rho,
            h_b: 1.0,
            h_f: 1.0,
            h_bstar: rho.powf(-0.5) + kappa.powf(-0.5),
            m0: 9,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |m: &str| Err(CoreError::InvalidParameter(m.to_string()));
        if self.triadic_power().is_none() {
            return bad("L must be a power of 3 with exponent >= 1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return bad("nu must lie in (0, 1/2)");
        }
        if !(self.q > 0.0) {
            return bad("q must be positive");
        }
        if !(self.delta_exp > 0.0 && self.eta_exp > 0.0) {
            return bad("delta and eta exponents must be positive");
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("rho", self.rho),
            ("h_b", self.h_b),
            ("h_f", self.h_f),
            ("h_bstar", self.h_bstar),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "{name} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// α = (3+ε)/2.
    pub fn alpha(&self) -> f64 {
        (3.0 + self.eps) / 2.0
    }

    /// Field dimension d_s = (3−ε)/4.
    pub fn d_s(&self) -> f64 {
        (3.0 - self.eps) / 4.0
    }

    pub fn lf(&self) -> f64 {
        self.l as f64
    }

    /// p with L = 3^p, if L is a triadic integer.
    pub fn triadic_power(&self) -> Option<u32> {
        let mut v = self.l;
        let mut p = 0;
        if v < 3 {
            return None;
        }
        while v.is_multiple_of(3) {
            v /= 3;
            p += 1;
        }
        (v == 1).then_some(p)
    }

    /// L ≥ 9 is the regime the large-L estimates are phrased for.
    pub fn is_paper_regime(&self) -> bool {
        self.triadic_power().is_some_and(|p| p >= 2)
    }

    pub fn scale(&self, n: u32) -> ScaleIndex {
        ScaleIndex::new(self.l, n)
    }

    /// Contracting multiplier 2 − L^ε of the coupling flow at its fixed point.
    pub fn alpha_eps(&self) -> f64 {
        2.0 - self.lf().powf(self.eps)
    }

    /// Expanding multiplier L^{(3+ε)/2} of the mass direction.
    pub fn mass_multiplier(&self) -> f64 {
        self.lf().powf(self.alpha())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_exponents_consistent() {
        for eps in [0.05, 0.1, 0.5, 0.9] {
            let p = Parameters::new(3, eps).unwrap();
            assert_eq!(p.alpha(), (3.0 + eps) / 2.0);
            assert!((2.0 * p.d_s() - (3.0 - p.alpha())).abs() < 1e-15);
            assert!(p.alpha() > 0.0 && p.alpha() < 2.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Parameters::new(4, 0.1).is_err());
        assert!(Parameters::new(1, 0.1).is_err());
        assert!(Parameters::new(3, 1.0).is_err());
        assert!(Parameters::new(3, 0.0).is_err());
        let mut p = Parameters::new(9, 0.1).unwrap();
        p.nu = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn triadic_detection() {
        assert_eq!(Parameters::new(27, 0.1).unwrap().triadic_power(), Some(3));
        assert!(!Parameters::new(3, 0.1).unwrap().is_paper_regime());
        assert!(Parameters::new(9, 0.1).unwrap().is_paper_regime());
    }
}
