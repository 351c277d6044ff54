use std::collections::{BTreeSet, HashSet};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use susyrg_core::{sobolev_norm_sq, Field3, GridMode, Parameters, ScaleIndex, Site};
use susyrg_covariance::{decompose, Strategy as Split};
use susyrg_polymer::*;

/// Connected k-subsets of a box containing the origin as their smallest block,
/// counted by choosing blocks directly and checking connectivity by flood fill.
fn flood_fill_count(k: usize) -> u64 {
    let r = k as i64 - 1;
    let mut cells = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                if [x, y, z] > [0, 0, 0] {
                    cells.push([x, y, z]);
                }
            }
        }
    }
    let connected = |set: &[Site]| {
        let mut reached = HashSet::from([set[0]]);
        let mut stack = vec![set[0]];
        while let Some(c) = stack.pop() {
            for &d in set {
                if !reached.contains(&d) && (0..3).all(|a| (c[a] - d[a]).abs() <= 1) {
                    reached.insert(d);
                    stack.push(d);
                }
            }
        }
        reached.len() == set.len()
    };
    let mut count = 0;
    let mut chosen = vec![[0, 0, 0]];
    fn choose(
        cells: &[Site],
        start: usize,
        left: usize,
        chosen: &mut Vec<Site>,
        f: &mut dyn FnMut(&[Site]),
    ) {
        if left == 0 {
            f(chosen);
            return;
        }
        for i in start..cells.len() {
            chosen.push(cells[i]);
            choose(cells, i + 1, left - 1, chosen, f);
            chosen.pop();
        }
    }
    choose(&cells, 0, k - 1, &mut chosen, &mut |s| {
        if connected(s) {
            count += 1;
        }
    });
    count
}

#[test]
fn enumeration_matches_flood_fill() {
    let counts = polymer_counts(4);
    for k in 1..=4 {
        assert_eq!(counts[k], flood_fill_count(k), "size {k}");
    }
    assert_eq!(&counts[1..], &[1, 13, 237, 4995]);
}

#[test]
fn enumeration_is_translation_canonical() {
    let mut seen = HashSet::new();
    for_each_polymer(4, |c| {
        let min = c.iter().fold([i64::MAX; 3], |m, b| {
            [m[0].min(b[0]), m[1].min(b[1]), m[2].min(b[2])]
        });
        let mut key: Vec<Site> = c
            .iter()
            .map(|b| [b[0] - min[0], b[1] - min[1], b[2] - min[2]])
            .collect();
        key.sort();
        assert!(seen.insert(key));
        assert!(Polymer::new(c.iter().copied(), ScaleIndex::new(9, 0)).is_connected());
    });
}

#[test]
fn scan_small_family() {
    let r = closure_scan(6, 9, 1, (9, 16), 20, 3).unwrap();
    assert_eq!(r.rows.len(), 6);
    assert_eq!(r.rows[0].max_ratio, 2.0);
    for row in &r.rows {
        assert_eq!(row.max_closure, row.size);
    }
    assert!(r.max_ratio_small_family.is_finite());
    assert_eq!(r.max_ratio_small_family, 64.0);
    assert!(r.large_gain_holds, "{:?}", r.large);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("size,count,max_closure,max_ratio\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn closure_ratios_are_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for blocks in large_family((9, 12), 5, 8) {
        let t = [
            rng.gen_range(-20..20),
            rng.gen_range(-20..20),
            rng.gen_range(-20..20),
        ];
        let moved: Vec<Site> = blocks
            .iter()
            .map(|b| [b[0] + t[0], b[1] + t[1], b[2] + t[2]])
            .collect();
        assert_eq!(max_closure_size(&blocks, 9), max_closure_size(&moved, 9));
    }
}

fn arb_polymer() -> impl Strategy<Value = Polymer> {
    prop::collection::vec((-4i64..4, -4i64..4, -4i64..4), 1..8).prop_map(|v| {
        Polymer::new(
            v.into_iter().map(|(a, b, c)| [a, b, c]),
            ScaleIndex::new(9, 0),
        )
    })
}

proptest! {
    #[test]
    fn components_partition(x in arb_polymer(), t in (-30i64..30, -30i64..30, -30i64..30)) {
        let comps = x.connected_components();
        let mut all = BTreeSet::new();
        for c in &comps {
            prop_assert!(c.is_connected());
            for b in &c.blocks {
                prop_assert!(all.insert(*b));
            }
        }
        prop_assert_eq!(&all, &x.blocks);
        for (i, a) in comps.iter().enumerate() {
            for b in &comps[i + 1..] {
                prop_assert!(a.blocks.iter().all(|p| b.blocks.iter().all(|q| !touching(*p, *q))));
            }
        }
        let moved = x.translate([t.0, t.1, t.2]);
        prop_assert_eq!(moved.connected_components().len(), comps.len());
    }

    #[test]
    fn touching_is_symmetric(a in (-3i64..3, -3i64..3, -3i64..3), b in (-3i64..3, -3i64..3, -3i64..3)) {
        let (a, b) = ([a.0, a.1, a.2], [b.0, b.1, b.2]);
        prop_assert_eq!(touching(a, b), touching(b, a));
    }

    #[test]
    fn closure_is_idempotent(x in arb_polymer()) {
        let c = x.l_closure(9).unwrap();
        prop_assert!(x.blocks.is_subset(&c.expand(9).unwrap().blocks));
        prop_assert_eq!(c.expand(9).unwrap().l_closure(9).unwrap(), c);
    }
}

fn random_field(scale: ScaleIndex, half: i64, seed: u64) -> Field3<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (2 * half + 1) as usize;
    let values: Vec<Complex64> = (0..n * n * n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let lo = [-half; 3];
    Field3::from_fn(scale, lo, [n; 3], GridMode::OpenBox, |x| {
        let i = (((x[0] + half) * n as i64 + x[1] + half) * n as i64 + x[2] + half) as usize;
        values[i]
    })
}

#[test]
fn large_field_regulator() {
    let unit = ScaleIndex::new(3, 0);
    let zero: Field3<Complex64> = Field3::new(unit, [-7; 3], [15; 3], GridMode::OpenBox);
    let x = Polymer::new([[0, 0, 0], [1, 0, 0]], unit);
    assert_eq!(regulator_g(&zero, &x, 0.3).unwrap(), 1.0);

    let phi = random_field(unit, 8, 1).map(|v| v * 0.01);
    let y = Polymer::new([[-2, 1, 0]], unit);
    let n = regulator_norm_sq(&phi, &x).unwrap();
    assert!(n > 0.0 && n < 100.0, "{n}");
    let joint = regulator_g(&phi, &x.union(&y), 0.05).unwrap();
    let split = regulator_g(&phi, &x, 0.05).unwrap() * regulator_g(&phi, &y, 0.05).unwrap();
    assert!((joint / split - 1.0).abs() < 1e-12);

    let far = Polymer::new([[6, 0, 0]], unit);
    assert!(matches!(
        regulator_g(&phi, &far, 0.1),
        Err(PolymerError::Core(_))
    ));
}

#[test]
fn rescaled_field_is_regulated_by_the_coarse_norm() {
    let p = Parameters::new(3, 0.5).unwrap();
    let (unit, fine) = (p.scale(0), p.scale(1));
    let x = Polymer::new([[0, 0, 0], [1, 1, 0], [-1, 0, 0]], unit);
    let kappa = 0.2;
    for seed in 0..10 {
        let phi = random_field(fine, 8, seed);
        let scaled = phi.map(|v| v * p.lf().powf(-p.d_s())).with_scale(unit);
        let lhs = regulator_g(&scaled, &x, kappa).unwrap();
        let sites: Vec<Site> = x.blocks.iter().copied().collect();
        let rhs = (kappa * sobolev_norm_sq(&phi, &sites).unwrap()).exp();
        assert!(lhs <= rhs, "{lhs} > {rhs}");
    }
}

#[test]
fn stability_spot_check_runs() {
    let p = Parameters::new(3, 0.5).unwrap();
    let dec = decompose(&p, 0, Split::SpectralWindow, 1e-6).unwrap();
    let unit = p.scale(0);
    let x = Polymer::new([[0, 0, 0]], unit);
    let phi = random_field(unit, 5, 4).map(|v| v * 0.1);
    let r = stability_spot_check(&dec.gammas[0], &x, &phi, 0.01, 200, 9).unwrap();
    let again = stability_spot_check(&dec.gammas[0], &x, &phi, 0.01, 200, 9).unwrap();
    assert_eq!(r, again);
    assert!(r.mean.is_finite() && r.mean >= 1.0 && r.bound >= 1.0);
    eprintln!(
        "stability: mean {} ± {} vs bound {}",
        r.mean, r.std_error, r.bound
    );
}
