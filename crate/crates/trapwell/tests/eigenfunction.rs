mod common;

use proptest::prelude::*;
use trapwell::eigenfunction::{inner_product, solve_all, EigenSolution};
use trapwell::well::potential_value;
use trapwell::WellSpec;

fn states(v1: f64, v2: f64, l: f64) -> Vec<EigenSolution> {
    solve_all(&WellSpec::new(v1, v2, l).unwrap()).unwrap()
}

fn tested_wells() -> Vec<(f64, f64, f64)> {
    vec![
        (10.0, 10.0, 0.5),
        (1.0, 0.5, 1.0),
        (50.0, 20.0, 0.3),
        (26.2468, 26.2468, 1e-3),
        (100.0, 30.0, 2.0),
        (225.0, 225.0, 0.05),
    ]
}

#[test]
fn junctions_are_smooth() {
    for (v1, v2, l) in tested_wells() {
        for s in states(v1, v2, l) {
            let m = s.junction_mismatch();
            assert!(m.iter().all(|&x| x <= 1e-9), "({v1},{v2},{l}) n={}: {m:?}", s.record.index_n);
        }
    }
}

#[test]
fn normalized_and_orthogonal() {
    for (v1, v2, l) in tested_wells() {
        let st = states(v1, v2, l);
        for (i, a) in st.iter().enumerate() {
            assert!((a.normalization_sum() - 2.0).abs() <= 1e-10, "sum {}", a.normalization_sum());
            for (j, b) in st.iter().enumerate() {
                let g = inner_product(a, b).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() <= 1e-8, "({v1},{v2},{l}) <{i}|{j}> = {g}");
            }
        }
    }
}

#[test]
fn solves_the_differential_equation() {
    for (v1, v2, l) in tested_wells() {
        let w = WellSpec::new(v1, v2, l).unwrap();
        for s in states(v1, v2, l) {
            let (a, b) = s.extent(8.0);
            for i in 0..=400 {
                let x = a + (b - a) * (i as f64 + 0.37) / 401.0;
                let [p, _, d2] = s.eval_all(x);
                let r = d2 - (potential_value(&w, x) - s.beta()) * p;
                assert!(r.abs() <= 1e-8 * (1.0 + v1), "({v1},{v2},{l}) n={} at {x}: {r:e}", s.record.index_n);
            }
        }
    }
}

#[test]
fn matches_shooting_profile() {
    for (v1, v2, l) in [(10.0, 10.0, 0.5), (1.0, 0.5, 1.0), (50.0, 20.0, 0.3)] {
        let w = WellSpec::new(v1, v2, l).unwrap();
        for s in states(v1, v2, l) {
            let path = common::shoot(&w, s.beta(), 2e-4);
            // Anchor the shot at the centre of the well and compare the shape there.
            let (xs, ys): (Vec<f64>, Vec<f64>) = path.iter().map(|&(x, y, _)| (x, y)).unzip();
            let peak = ys.iter().cloned().fold(0.0f64, |m, y| if y.abs() > m.abs() { y } else { m });
            let k = xs.iter().zip(&ys).position(|(_, y)| *y == peak).unwrap();
            let scale = s.eval_phi(xs[k]) / peak;
            // Only the inner part: the shot drifts onto the growing solution near the right shoulder.
            for (x, y) in xs.iter().zip(&ys).filter(|(x, _)| x.abs() <= 1.0) {
                let d = (s.eval_phi(*x) - scale * y).abs();
                assert!(d <= 1e-6, "({v1},{v2},{l}) n={} at {x}: {d:e}", s.record.index_n);
            }
        }
    }
}

#[test]
fn parity_of_symmetric_states() {
    for (v, l) in [(10.0, 0.5), (26.2468, 1e-3), (225.0, 0.05)] {
        for s in states(v, v, l) {
            let p = if s.record.index_n % 2 == 1 { 1.0 } else { -1.0 };
            for i in 0..200 {
                let x = 4.0 * (i as f64 + 0.5) / 200.0;
                assert!((s.eval_phi(-x) - p * s.eval_phi(x)).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn sturm_node_count() {
    for (v1, v2, l) in tested_wells() {
        for s in states(v1, v2, l) {
            assert_eq!(s.node_count(2000), s.record.index_n - 1, "({v1},{v2},{l})");
        }
    }
}

#[test]
fn coefficients_are_real_and_finite() {
    for (v1, v2, l) in tested_wells() {
        for s in states(v1, v2, l) {
            let c = s.coeffs;
            for v in [c.c0, c.d0, c.a0, c.b0, c.b1p, c.b2p, c.a1p, c.a2p, c.bt1, c.bt2, c.j1p, c.j2p] {
                assert!(v.is_finite());
            }
            assert!(c.c0 >= 0.0);
        }
    }
}

#[test]
fn wells_are_not_mixed() {
    let a = &states(10.0, 10.0, 0.5)[0];
    let b = &states(10.0, 9.0, 0.5)[0];
    assert!(inner_product(a, b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_wells_are_orthonormal_and_smooth(v2 in 0.5f64..60.0, extra in 0.0f64..60.0, lambda in 1e-3f64..2.5) {
        let st = states(v2 + extra, v2, lambda);
        for (i, a) in st.iter().enumerate() {
            prop_assert!((a.normalization_sum() - 2.0).abs() <= 1e-10);
            prop_assert!(a.junction_mismatch().iter().all(|&m| m <= 1e-9));
            prop_assert_eq!(a.node_count(2000), i);
            for b in &st[..i] {
                prop_assert!(inner_product(a, b).unwrap().abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn derivative_consistency(v2 in 0.5f64..60.0, extra in 0.0f64..60.0, lambda in 1e-2f64..2.5, t in -1.0f64..1.0) {
        let st = states(v2 + extra, v2, lambda);
        if let Some(s) = st.first() {
            let (a, b) = s.extent(6.0);
            let x = 0.5 * (a + b) + 0.5 * (b - a) * t;
            let h = 1e-5;
            let fd = (s.eval_phi(x + h) - s.eval_phi(x - h)) / (2.0 * h);
            prop_assert!((fd - s.eval_dphi(x)).abs() <= 1e-6 * (1.0 + s.sup_norms()[1]));
        }
    }
}
