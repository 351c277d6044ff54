use susyrg_core::Parameters;

use crate::RgError;

/// ḡ = (L^ε − 1)/(L^{2ε} a_star).
pub fn g_bar(params: &Parameters, a_star: f64) -> Result<f64, RgError> {
    if !(a_star > 0.0) {
        return Err(RgError::NonPositiveAStar(a_star));
    }
    if !(params.eps > 0.0) {
        return Err(RgError::NonPositiveEps(params.eps));
    }
    let le = params.lf().powf(params.eps);
    Ok((le - 1.0) / (le * le * a_star))
}

/// g ↦ L^ε g (1 − L^ε a_star g).
pub fn reference_step(g: f64, params: &Parameters, a_star: f64) -> f64 {
    let le = params.lf().powf(params.eps);
    le * g * (1.0 - le * a_star * g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    pub values: Vec<f64>,
    /// Steps taken until |g − ḡ| ≤ tol·ḡ, if reached.
    pub converged_at: Option<usize>,
}

/// Iterates the reference map from g0 for at most `max_steps` steps, stopping
/// once the relative distance to ḡ drops below `tol`.
pub fn iterate_reference(
    g0: f64,
    params: &Parameters,
    a_star: f64,
    tol: f64,
    max_steps: usize,
) -> Result<ReferenceRun, RgError> {
    let gb = g_bar(params, a_star)?;
    let mut values = vec![g0];
    let mut g = g0;
    for k in 0..=max_steps {
        if (g - gb).abs() <= tol * gb {
            return Ok(ReferenceRun {
                values,
                converged_at: Some(k),
            });
        }
        if k == max_steps {
            break;
        }
        g = reference_step(g, params, a_star);
        values.push(g);
    }
    Ok(ReferenceRun {
        values,
        converged_at: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.06;

    #[test]
    fn fixed_point_and_origin() {
        for eps in [0.05, 0.1, 0.5] {
            let p = Parameters::new(3, eps).unwrap();
            let gb = g_bar(&p, A).unwrap();
            assert!(gb > 0.0);
            assert!((reference_step(gb, &p, A) - gb).abs() <= 4.0 * f64::EPSILON * gb);
            assert_eq!(reference_step(0.0, &p, A), 0.0);
        }
    }

    #[test]
    fn small_eps_is_linear() {
        let p = Parameters::new(3, 1e-5).unwrap();
        let gb = g_bar(&p, A).unwrap();
        let first = 1e-5 * 3f64.ln() / A;
        assert!((gb / first - 1.0).abs() < 2e-5);
    }

    #[test]
    fn smallness_bound() {
        for eps in [0.05, 0.1, 0.25] {
            let p = Parameters::new(3, eps).unwrap();
            assert!(g_bar(&p, A).unwrap() < 2.0 * 3f64.ln() / A * eps);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Parameters::new(3, 0.1).unwrap();
        assert!(matches!(g_bar(&p, 0.0), Err(RgError::NonPositiveAStar(_))));
        assert!(matches!(g_bar(&p, -1.0), Err(RgError::NonPositiveAStar(_))));
    }

    #[test]
    fn monotone_convergence_from_below() {
        let p = Parameters::new(3, 0.1).unwrap();
        let gb = g_bar(&p, A).unwrap();
        let run = iterate_reference(gb / 2.0, &p, A, 1e-12, 10_000).unwrap();
        let steps = run.converged_at.unwrap();
        assert!(run
            .values
            .windows(2)
            .all(|w| w[1] > w[0] && w[1] <= gb * (1.0 + 1e-15)));
        // Linear convergence at rate 2 − L^ε bounds the count from both sides.
        let rate = -p.alpha_eps().ln();
        let predicted = (0.5f64 / 1e-12).ln() / rate;
        assert!(
            (steps as f64) < predicted + 20.0 && (steps as f64) > 0.5 * predicted,
            "{steps} vs {predicted}"
        );
    }

    #[test]
    fn multiplier_at_fixed_point() {
        for eps in [0.05, 0.1, 0.5] {
            let p = Parameters::new(3, eps).unwrap();
            let gb = g_bar(&p, A).unwrap();
            let h = 1e-4 * gb;
            let fd = (reference_step(gb + h, &p, A) - reference_step(gb - h, &p, A)) / (2.0 * h);
            assert!((fd - p.alpha_eps()).abs() < 1e-8);
        }
    }
}
