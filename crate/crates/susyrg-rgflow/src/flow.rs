use std::io::Write;

use serde::Serialize;
use susyrg_core::Parameters;
use susyrg_flowcoeffs::FlowCoefficients;

use crate::reference::g_bar;
use crate::RgError;

/// ψ_n = (g̃_n, μ_n, ‖R_n‖, ‖w̃_n‖).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowState {
    pub n: u32,
    pub g_tilde: f64,
    pub mu: f64,
    pub w_norm: f64,
    pub r_norm: f64,
}

impl FlowState {
    pub fn new(n: u32, g_tilde: f64, mu: f64) -> Self {
        FlowState {
            n,
            g_tilde,
            mu,
            w_norm: 0.0,
            r_norm: 0.0,
        }
    }
}

/// Slack in each domain inequality; positive means satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margins {
    pub g: f64,
    pub mu: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainReport {
    pub in_domain: bool,
    pub margins: Margins,
}

/// Supplies the nonperturbative (ξ_n, ρ_n) for a state.
pub type RemainderHook = Box<dyn Fn(&FlowState) -> (f64, f64) + Send + Sync>;

/// The flow map ψ_n ↦ ψ_{n+1} at second order, with an optional remainder.
pub struct Flow {
    pub params: Parameters,
    pub coeffs: FlowCoefficients,
    pub g_bar: f64,
    /// ‖w̃_n‖ by scale, copied into the states as the flow advances.
    pub w_norms: Vec<f64>,
    /// Normalization of the w̃ entry of the box norm; infinite drops it.
    pub w_scale: f64,
    hook: Option<RemainderHook>,
}

impl std::fmt::Debug for Flow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Flow")
            .field("params", &self.params)
            .field("coeffs", &self.coeffs)
            .field("g_bar", &self.g_bar)
            .field("hook", &self.hook.is_some())
            .finish()
    }
}

impl Flow {
    pub fn new(params: Parameters, coeffs: FlowCoefficients) -> Result<Self, RgError> {
        let g_bar = g_bar(&params, coeffs.a_star)?;
        Ok(Flow {
            params,
            coeffs,
            g_bar,
            w_norms: Vec::new(),
            w_scale: f64::INFINITY,
            hook: None,
        })
    }

    /// A flow around a prescribed ḡ, for coefficient sets without a usable a_star.
    pub fn with_fixed_point(params: Parameters, coeffs: FlowCoefficients, g_bar: f64) -> Self {
        Flow {
            params,
            coeffs,
            g_bar,
            w_norms: Vec::new(),
            w_scale: f64::INFINITY,
            hook: None,
        }
    }

    pub fn with_hook(mut self, hook: RemainderHook) -> Self {
        self.hook = Some(hook);
        self
    }

    pub fn with_w_norms(mut self, norms: Vec<f64>, scale: f64) -> Self {
        self.w_norms = norms;
        self.w_scale = scale;
        self
    }

    pub fn has_hook(&self) -> bool {
        self.hook.is_some()
    }

    fn l2e(&self) -> f64 {
        self.params.lf().powf(2.0 * self.params.eps)
    }

    /// −L^{2ε} a* g̃² − L^{2ε}(a_n − a*)(g̃ + ḡ)², without the remainder.
    pub fn xi_tilde(&self, n: u32, g_tilde: f64) -> f64 {
        let a = self.coeffs.a_star;
        let g = g_tilde + self.g_bar;
        -self.l2e() * (a * g_tilde * g_tilde + (self.coeffs.a_at(n) - a) * g * g)
    }

    /// −L^{2ε} b_n (ḡ + g̃)², without the remainder.
    pub fn rho_tilde(&self, n: u32, g_tilde: f64) -> f64 {
        let g = g_tilde + self.g_bar;
        -self.l2e() * self.coeffs.b_at(n) * g * g
    }

    pub fn remainder(&self, state: &FlowState) -> (f64, f64) {
        self.hook.as_ref().map_or((0.0, 0.0), |h| h(state))
    }

    pub fn step(&self, s: &FlowState) -> FlowState {
        let (xi, rho) = self.remainder(s);
        FlowState {
            n: s.n + 1,
            g_tilde: self.params.alpha_eps() * s.g_tilde + self.xi_tilde(s.n, s.g_tilde) + xi,
            mu: self.params.mass_multiplier() * s.mu + self.rho_tilde(s.n, s.g_tilde) + rho,
            w_norm: self
                .w_norms
                .get(s.n as usize + 1)
                .copied()
                .unwrap_or(s.w_norm),
            r_norm: s.r_norm,
        }
    }

    /// The start followed by `steps` images.
    pub fn trajectory(&self, start: FlowState, steps: usize) -> Vec<FlowState> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(start);
        for _ in 0..steps {
            let next = self.step(out.last().expect("nonempty"));
            out.push(next);
        }
        out
    }

    /// |g̃| < νḡ, |μ| < ḡ^{2−δ}, remainder < ḡ^{11/4−η}, all strict.
    pub fn check_domain(&self, s: &FlowState) -> DomainReport {
        let gb = self.g_bar;
        let p = &self.params;
        let margins = Margins {
            g: p.nu * gb - s.g_tilde.abs(),
            mu: gb.powf(2.0 - p.delta_exp) - s.mu.abs(),
            r: gb.powf(2.75 - p.eta_exp) - s.r_norm,
        };
        let finite = s.g_tilde.is_finite() && s.mu.is_finite();
        DomainReport {
            in_domain: finite && margins.g > 0.0 && margins.mu > 0.0 && margins.r > 0.0,
            margins,
        }
    }

    /// max((νḡ)^{-1}|g̃|, ḡ^{−(2−δ)}|μ|, ḡ^{−(11/4−η)}‖R‖, w_scale^{-1}‖w̃‖).
    pub fn norm(&self, s: &FlowState) -> f64 {
        let gb = self.g_bar;
        let p = &self.params;
        let w = if self.w_scale.is_finite() {
            s.w_norm / self.w_scale
        } else {
            0.0
        };
        (s.g_tilde.abs() / (p.nu * gb))
            .max(s.mu.abs() / gb.powf(2.0 - p.delta_exp))
            .max(s.r_norm / gb.powf(2.75 - p.eta_exp))
            .max(w)
    }

    /// First index whose state leaves the domain.
    pub fn first_exit(&self, states: &[FlowState]) -> Option<usize> {
        states.iter().position(|s| !self.check_domain(s).in_domain)
    }
}

/// CSV with columns n, g_n, mu_n, in_domain, margin_g, margin_mu, margin_r.
pub fn write_trajectory_csv<W: Write>(
    flow: &Flow,
    states: &[FlowState],
    out: W,
) -> Result<(), RgError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record([
        "n",
        "g_n",
        "mu_n",
        "in_domain",
        "margin_g",
        "margin_mu",
        "margin_r",
    ])?;
    for s in states {
        let d = flow.check_domain(s);
        wr.write_record([
            s.n.to_string(),
            format!("{:.17e}", s.g_tilde + flow.g_bar),
            format!("{:.17e}", s.mu),
            d.in_domain.to_string(),
            format!("{:.17e}", d.margins.g),
            format!("{:.17e}", d.margins.mu),
            format!("{:.17e}", d.margins.r),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_step;

    fn coeffs() -> FlowCoefficients {
        FlowCoefficients {
            a: vec![0.05, 0.058],
            b: vec![0.1, 0.09],
            first: 0,
            a_star: 0.06,
            b_star: 0.095,
            decay_fit: 1.0,
        }
    }

    fn flow(eps: f64) -> Flow {
        Flow::new(Parameters::new(3, eps).unwrap(), coeffs()).unwrap()
    }

    #[test]
    fn fixed_point_is_stationary_at_the_limit() {
        let f = flow(0.1);
        let s = f.step(&FlowState::new(5, 0.0, 0.0));
        assert_eq!(s.g_tilde, 0.0);
        assert_eq!(s.n, 6);
    }

    #[test]
    fn mass_step_from_zero() {
        let f = flow(0.1);
        for n in [0, 1, 7] {
            let s = FlowState::new(n, 0.01 * f.g_bar, 0.0);
            let g = s.g_tilde + f.g_bar;
            let want = -3f64.powf(0.2) * f.coeffs.b_at(n) * g * g;
            assert!((f.step(&s).mu - want).abs() <= 1e-15 * want.abs());
        }
    }

    #[test]
    fn matches_reference_map_at_the_limit() {
        let f = flow(0.1);
        for x in [-0.2, -0.05, 0.0, 0.1, 0.3] {
            let s = FlowState::new(4, x * f.g_bar, 0.0);
            let g_next = f.step(&s).g_tilde + f.g_bar;
            let r = reference_step(s.g_tilde + f.g_bar, &f.params, f.coeffs.a_star);
            assert!((g_next - r).abs() <= 1e-14 * r.abs());
        }
    }

    #[test]
    fn linear_multipliers() {
        let f = flow(0.1);
        let h = 1e-6 * f.g_bar;
        let g = |x: f64| f.step(&FlowState::new(3, x, 0.0)).g_tilde;
        let dg = (g(h) - g(-h)) / (2.0 * h);
        assert!((dg - f.params.alpha_eps()).abs() < 1e-8);
        let m = |x: f64| f.step(&FlowState::new(3, 0.0, x)).mu;
        let dm = (m(h) - m(-h)) / (2.0 * h);
        assert!((dm / f.params.mass_multiplier() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn domain_is_strict() {
        let f = flow(0.1);
        let origin = f.check_domain(&FlowState::new(0, 0.0, 0.0));
        assert!(origin.in_domain);
        assert_eq!(origin.margins.g, f.params.nu * f.g_bar);
        let edge = FlowState::new(0, f.params.nu * f.g_bar, 0.0);
        assert!(!f.check_domain(&edge).in_domain);
        let mu_edge = FlowState::new(0, 0.0, -f.g_bar.powf(2.0 - f.params.delta_exp));
        assert!(!f.check_domain(&mu_edge).in_domain);
        assert!(!f.check_domain(&FlowState::new(0, f64::NAN, 0.0)).in_domain);
    }

    #[test]
    fn box_norm_components() {
        let f = flow(0.1);
        let s = FlowState::new(
            0,
            0.5 * f.params.nu * f.g_bar,
            0.25 * f.g_bar.powf(2.0 - f.params.delta_exp),
        );
        assert!((f.norm(&s) - 0.5).abs() < 1e-15);
        let f = f.with_w_norms(vec![0.0, 3.0], 2.0);
        let t = f.step(&s);
        assert_eq!(t.w_norm, 3.0);
        assert!(f.norm(&t) >= 1.5);
    }

    #[test]
    fn hook_is_added() {
        let f = flow(0.1).with_hook(Box::new(|_| (1e-9, -2e-9)));
        let base = flow(0.1);
        let s = FlowState::new(2, 0.01, 0.001);
        let (a, b) = (f.step(&s), base.step(&s));
        assert!((a.g_tilde - b.g_tilde - 1e-9).abs() < 1e-22 + 1e-15 * b.g_tilde.abs());
        assert!((a.mu - b.mu + 2e-9).abs() < 1e-15 * b.mu.abs());
    }

    #[test]
    fn csv_export() {
        let f = flow(0.1);
        let states = f.trajectory(FlowState::new(0, 0.0, 0.0), 3);
        let mut buf = Vec::new();
        write_trajectory_csv(&f, &states, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("n,g_n,mu_n,in_domain,margin_g,margin_mu,margin_r"));
    }
}
