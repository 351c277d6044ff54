use std::time::Instant;

use susyrg_core::{GridMode, GridSpec, Parameters, ScaleIndex};
use susyrg_covariance::*;

#[test]
fn full_contract_for_both_eps() {
    for eps in [0.1, 0.5] {
        let p = Parameters::new(3, eps).unwrap();
        let start = Instant::now();
        let d = decompose(&p, 6, Strategy::SpectralWindow, 1e-6).unwrap();
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 120.0);
        assert!(d.reconstruction_residual < 1e-6);
        for (n, g) in d.gammas.iter().enumerate() {
            let r = support_radius(3, n as u32) as i64;
            assert_eq!(g.get([r + 1, 0, 0]), Some(0.0));
            assert_eq!(g.get([0, -(r + 5), 2]), Some(0.0));
        }
        for e in &d.residual_report {
            assert!(e.recursion_residual < 1e-8);
            if let (Some(lo), Some(hi)) = (e.symbol_min, e.symbol_max) {
                assert!(lo >= -1e-6 * hi);
            }
        }
        // The unresolved scales account for the bare residual.
        assert!(d.bare_residual <= d.tail_bound);
        assert!(d.bare_residual > 1e-6);
        println!(
            "eps={eps}: {secs:.2}s residual {:.2e} bare {:.2e} bound {:.2e}",
            d.reconstruction_residual, d.bare_residual, d.tail_bound
        );
    }
}

#[test]
fn assembled_c_n_satisfies_recursion() {
    let p = Parameters::new(3, 0.5).unwrap();
    let opts = DecomposeOptions {
        extent: 20,
        ..Default::default()
    };
    let d = decompose_with(&p, 5, Strategy::SpectralWindow, 1e-6, &opts).unwrap();
    for n in 0..5 {
        let cn = c_n_table(&d, n, 20).unwrap();
        let next = rescale_covariance(&c_n_table(&d, n + 1, 20).unwrap(), &p).unwrap();
        assert_eq!(next.scale, cn.scale);
        for k in cn.keys() {
            let r = cn.at(k) - d.gammas[n as usize].at(k) - next.at(k);
            assert!(r.abs() < 1e-12);
            assert!((cn.at(k) - d.direct[n as usize].at(k)).abs() < 1e-12);
        }
    }
    assert!(c_n_table(&d, 7, 10).is_err());
    let sups: Vec<[f64; 3]> = (0..=5)
        .map(|n| derivative_sups(&c_n_table(&d, n, 20).unwrap()))
        .collect();
    // Derivative sups settle to an n-independent constant.
    for m in 0..3 {
        let hi = sups.iter().map(|s| s[m]).fold(0.0, f64::max);
        let last = sups[5][m];
        assert!(
            hi < 2.0 * last && (sups[4][m] - last).abs() < 0.05 * last,
            "m={m}: {sups:?}"
        );
    }
}

#[test]
fn greens_function_decays_and_cross_checks_spectral() {
    let p = Parameters::new(3, 0.5).unwrap();
    let grid = GridSpec::new(48, GridMode::Torus, ScaleIndex::new(3, 0));
    let c = greens_function(&p, &grid, GreensMethod::Subordination).unwrap();
    let (c0, c1, c2) = (
        c.get([0, 0, 0]).unwrap(),
        c.get([1, 0, 0]).unwrap(),
        c.get([2, 0, 0]).unwrap(),
    );
    assert!(c0 > c1 && c1 > c2 && c2 > 0.0);
    assert_eq!(c.get([1, 2, 3]), c.get([-3, 1, -2]));
    let s = greens_function(&p, &grid, GreensMethod::Spectral).unwrap();
    // The zero-cell rule leaves an offset-independent error of order M^{α−3}.
    for k in c.keys() {
        assert!(
            (s.at(k) - c.at(k)).abs() < 2.0 * aliasing_estimate(p.alpha(), 48),
            "{k:?}"
        );
    }
    let fine = GridSpec::new(96, GridMode::Torus, ScaleIndex::new(3, 0));
    let s2 = greens_function(&p, &fine, GreensMethod::Spectral).unwrap();
    let err = |t: &KernelTable| (t.at([0, 0, 0]) - c0).abs();
    assert!(err(&s2) < err(&s));
}

#[test]
fn subordination_resolution_self_consistency() {
    let p = Parameters::new(3, 0.5).unwrap();
    let coarse = Subordination::new(p.alpha(), 8, &[], QuadratureSpec::default()).unwrap();
    let fine = Subordination::new(
        p.alpha(),
        8,
        &[],
        QuadratureSpec {
            panel_width: 0.25,
            ..Default::default()
        },
    )
    .unwrap();
    for k in octant_keys(8) {
        let x = k.map(|v| v as i64);
        let (a, b) = (coarse.greens(x).unwrap(), fine.greens(x).unwrap());
        assert!((a - b).abs() < 1e-6 * b);
    }
}

#[test]
fn continuum_limit_rate() {
    for strategy in [Strategy::SpectralWindow, Strategy::PositionAverage] {
        let p = Parameters::new(3, 0.5).unwrap();
        let opts = DecomposeOptions {
            extent: 12,
            pd_max_scale: 1,
            ..Default::default()
        };
        let d = decompose_with(&p, 6, strategy, 1e-6, &opts).unwrap();
        let est = continuum_limit_estimate(&d, 0).unwrap();
        println!(
            "{strategy:?}: rate {:.3} distances {:?} successive {:?}",
            est.rate_fit, est.distances, est.successive
        );
        assert!(est.rate_fit > 0.5 * 3f64.ln());
        // The first scales are pre-asymptotic.
        let tail = &est.successive[est.successive.len() - 3..];
        assert!(tail.windows(2).all(|w| w[1] < 0.5 * w[0]));
        assert_eq!(est.gamma_star.get([2, 0, 0]), Some(0.0));
    }
}
