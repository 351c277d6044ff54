use susyrg_core::Parameters;
use susyrg_covariance::Strategy;
use susyrg_critical::*;
use susyrg_flowcoeffs::{coefficient_decomposition, flow_coefficients};
use susyrg_rgflow::Flow;

fn flow(eps: f64) -> Flow {
    let p = Parameters::new(3, eps).unwrap();
    let dec = coefficient_decomposition(&p, Strategy::SpectralWindow, 4).unwrap();
    Flow::new(p, flow_coefficients(&dec, 0..=4).unwrap()).unwrap()
}

#[test]
fn three_methods_agree_and_stay_bounded() {
    let f = flow(0.1);
    let g0 = f.params.nu * f.g_bar / 40.0;
    let w = f.g_bar.powf(2.0 - f.params.delta_exp);
    let bs = solve_backward_sum(&f, g0, 0, 40, 1e-12).unwrap();
    let co = solve_contraction(&f, g0, 0, 40, 1e-15).unwrap();
    let bi = shoot_bisection(&f, g0, 0, 40, (-w, w)).unwrap();
    println!(
        "g_bar {} mu: {} {} {}",
        f.g_bar, bs.mu_critical, co.mu_critical, bi.mu_critical
    );
    for m in [co.mu_critical, bi.mu_critical] {
        assert!((m - bs.mu_critical).abs() < 1e-8 * bs.mu_critical.abs());
    }
    assert!((co.mu_critical - bs.mu_critical).abs() < 1e-10 * bs.mu_critical.abs());
    assert_eq!(co.trajectory.first_exit(&f), None);
    assert_eq!(co.trajectory.states.len(), 41);
    assert!(co.trajectory.step_residual(&f) < 1e-12);
    let n1 = co.trajectory.band_entry(&f, f.params.nu / 4.0);
    println!("band entry {n1:?}, contraction ratio {:?}", co.lipschitz);
    assert!(n1.is_some());
    let exit = exit_after_perturbation(&f, &co, 1e-6 * w);
    println!(
        "exit after {:?} steps, growth {}",
        exit.exit_steps, exit.growth
    );
    assert!(exit.exit_steps.unwrap() <= 15);
    assert!((exit.growth / f.params.mass_multiplier() - 1.0).abs() < 0.05);
}

#[test]
fn fixed_point_map_contracts_at_small_eps() {
    let f = flow(0.05);
    let r = lipschitz_samples(&f, f.params.nu * f.g_bar / 40.0, 0, 40, 20, 0.25, 2024);
    println!("max ratio {}", r.max);
    assert!(r.max <= 0.5);
}

#[test]
fn unit_lattice_mass_is_smooth_in_the_coupling() {
    let f = flow(0.1);
    let n0 = 3;
    let grid: Vec<f64> = (0..6)
        .map(|k| f.params.nu * f.g_bar * (0.002 + 0.002 * k as f64))
        .collect();
    let mus: Vec<f64> = grid
        .iter()
        .map(|&g| {
            let (shot, sol) = unit_lattice_critical(&f, g, n0, 40, 1e-15).unwrap();
            assert!((shot.derivative / shot.linear_derivative - 1.0).abs() < 1e-6);
            let end = f
                .trajectory(susyrg_rgflow::FlowState::new(0, g, shot.mu0), n0 as usize)
                .last()
                .unwrap()
                .mu;
            assert!((end - sol.mu_critical).abs() < 1e-10 * sol.mu_critical.abs());
            shot.mu0
        })
        .collect();
    let d: Vec<f64> = mus.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(d.iter().all(|x| x.signum() == d[0].signum()), "{mus:?}");
    let mu_at = |g: f64| unit_lattice_critical(&f, g, n0, 40, 1e-15).unwrap().0.mu0;
    let g = grid[2];
    let slope = |h: f64| (mu_at(g + h) - mu_at(g - h)) / (2.0 * h);
    let (s1, s2) = (slope(1e-4 * f.g_bar), slope(0.5e-4 * f.g_bar));
    assert!((s1 - s2).abs() < 1e-5 * s1.abs(), "{s1} {s2}");
}
