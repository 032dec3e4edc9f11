mod common;

use proptest::prelude::*;
use trapwell::discontinuity::{
    boundary_terms, build_discontinuous, hermiticity_defect, jump_system, norm_series, overlap, piecewise_wronskian,
    uniqueness_obstruction, DiscontinuousEigenfunction,
};
use trapwell::swlimit::{swp_eigenvalues, swp_solution};
use trapwell::wavepacket::state_overlap;
use trapwell::Error;

const REED: f64 = 26.2468;

fn state(v1: f64, v2: f64, n: usize, dl: f64, dr: f64) -> DiscontinuousEigenfunction {
    let recs = swp_eigenvalues(v1, v2).unwrap();
    build_discontinuous(v1, v2, &recs[n - 1], dl, dr).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

// integral of a(x) b(x) over the line, one zone at a time so the jumps never sit inside a panel.
fn product_integral(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction) -> f64 {
    use trapwell::Zone;
    let far_l = -1.0 - 40.0 / a.k1.sqrt().min(b.k1.sqrt());
    let far_r = 1.0 + 40.0 / a.k2.sqrt().min(b.k2.sqrt());
    let z =
        |zone: Zone, lo: f64, hi: f64| simpson(|x| a.eval_zone(zone, x)[0] * b.eval_zone(zone, x)[0], lo, hi, 20_000);
    z(Zone::Left, far_l, -1.0) + z(Zone::Center, -1.0, 1.0) + z(Zone::Right, 1.0, far_r)
}

#[test]
fn reed_ground_state_with_jumps() {
    let d = state(REED, REED, 1, -0.5, 0.5);
    assert!((d.normalization_sum() - 2.0).abs() <= 1e-12);
    let o = overlap(&d, &d).unwrap();
    assert!((o.integral - 1.0).abs() <= 1e-8);
    assert!((0.5 * product_integral(&d, &d) - 1.0).abs() <= 1e-8);
    let (l, r) = d.measured_jumps();
    assert!((l[0] + 0.5).abs() <= 1e-12 && (r[0] - 0.5).abs() <= 1e-12);
    assert!((l[1] - d.k1.sqrt() * -0.5).abs() <= 1e-10);
    assert!((r[1] + d.k2.sqrt() * 0.5).abs() <= 1e-10);
    // Second-derivative jumps from the one-sided equations phi'' = (v - beta) phi.
    let beta = d.beta();
    let (outer_l, inner_l) = (d.eval_zone(trapwell::Zone::Left, -1.0)[0], d.eval_zone(trapwell::Zone::Center, -1.0)[0]);
    let want_l = -beta * inner_l - (REED - beta) * outer_l;
    assert!((l[2] - want_l).abs() <= 1e-10 * (1.0 + want_l.abs()));
    assert!((l[2] - d.d2phi_jump_left).abs() <= 1e-10 * (1.0 + l[2].abs()));
    assert!((r[2] - d.d2phi_jump_right).abs() <= 1e-10 * (1.0 + r[2].abs()));
    assert!(d.system_residual() <= 1e-12);
}

#[test]
fn spectrum_is_unchanged_by_jumps() {
    for (v1, v2) in [(REED, REED), (100.0, 30.0)] {
        let det = |b: f64| {
            let m = jump_system(v1, v2, b);
            m[0][0] * m[1][1] - m[0][1] * m[1][0]
        };
        let roots: Vec<f64> =
            common::roots(det, 0.0, v2, 20_000).into_iter().filter(|&b| det(b).abs() < 1e-8).collect();
        let recs = swp_eigenvalues(v1, v2).unwrap();
        assert_eq!(roots.len(), recs.len());
        for (x, r) in roots.iter().zip(&recs) {
            assert!((x - r.beta).abs() <= 1e-9 * r.beta.max(1.0));
            // The system stays satisfied with jumps switched on.
            let d = build_discontinuous(v1, v2, r, 0.3, -0.2).unwrap();
            assert!(d.system_residual() <= 1e-12);
        }
    }
}

#[test]
fn mixed_overlap_is_the_boundary_sum() {
    let c1 = state(REED, REED, 1, 0.0, 0.0);
    let d2 = state(REED, REED, 2, -0.5, 0.5);
    let o = overlap(&c1, &d2).unwrap();
    assert!((o.full() - (o.t1 + o.t2)).abs() <= 1e-8);
    assert!((product_integral(&c1, &d2) - (o.t1 + o.t2)).abs() <= 1e-8);
    assert!(o.full().abs() > 1e-3);
}

#[test]
fn superposition_norm_drifts_only_with_a_jump() {
    let taus: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
    let c = [0.5f64.sqrt(), 0.5f64.sqrt()];
    let drift = |s: &[f64]| s.iter().map(|x| (x - s[0]).abs()).fold(0.0, f64::max);
    let c1 = state(REED, REED, 1, 0.0, 0.0);
    let d2 = state(REED, REED, 2, -0.5, 0.5);
    let mixed = norm_series(&[c1.clone(), d2], &c, &taus).unwrap();
    assert!(drift(&mixed) > 1e-3);
    let c2 = state(REED, REED, 2, 0.0, 0.0);
    let control = norm_series(&[c1, c2], &c, &taus).unwrap();
    assert!(drift(&control) <= 1e-8);
}

#[test]
fn boundary_matrix_matches_eigenvalue_gap() {
    let states = [state(REED, REED, 1, 0.0, 0.0), state(REED, REED, 2, -0.5, 0.5), state(REED, REED, 3, 0.2, 0.1)];
    let rep = hermiticity_defect(&states, &[0.6, 0.6, 0.52915], 1.3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let (t1, t2) = boundary_terms(&states[i], &states[j]);
            let gap = states[i].beta() - states[j].beta();
            assert!((rep.boundary[i][j] - gap * (t1 + t2)).abs() <= 1e-8 * (1.0 + rep.boundary[i][j].abs()), "{i}{j}");
            assert!((rep.boundary[i][j] + rep.boundary[j][i]).abs() <= 1e-12);
        }
    }
    assert!(rep.defect > 1e-3);
    assert!(rep.norm_imag.abs() <= 1e-12);
}

#[test]
fn generalized_orthogonality_all_pairs() {
    let jumps = [(0.0, 0.0), (-0.5, 0.5), (0.3, 0.0), (0.0, -0.25)];
    for (v1, v2) in [(REED, REED), (100.0, 30.0)] {
        let n = swp_eigenvalues(v1, v2).unwrap().len();
        for i in 1..=n {
            for j in (i + 1)..=n {
                let a = state(v1, v2, i, jumps[i % 4].0, jumps[i % 4].1);
                let b = state(v1, v2, j, jumps[j % 4].0, jumps[j % 4].1);
                let o = overlap(&a, &b).unwrap();
                assert!((o.full() - o.t1 - o.t2).abs() <= 1e-8, "({v1},{v2}) {i},{j}");
            }
        }
    }
}

#[test]
fn zero_jumps_collapse_to_square_well() {
    for (v1, v2) in [(REED, REED), (100.0, 30.0)] {
        let recs = swp_eigenvalues(v1, v2).unwrap();
        let sw: Vec<_> = recs.iter().map(|r| swp_solution(v1, v2, r).unwrap()).collect();
        let d: Vec<_> = recs.iter().map(|r| build_discontinuous(v1, v2, r, 0.0, 0.0).unwrap()).collect();
        for (s, x) in sw.iter().zip(&d) {
            assert!(x.is_continuous());
            for t in [-3.0, -1.0, -0.4, 0.0, 0.7, 1.0, 2.5] {
                assert!((s.eval_phi(t) - x.eval_phi(t)).abs() <= 1e-12);
            }
            assert!((x.d2phi_jump_left - s.d2_jump_left).abs() <= 1e-12 * (1.0 + s.d2_jump_left.abs()));
            assert!((x.d2phi_jump_right - s.d2_jump_right).abs() <= 1e-12 * (1.0 + s.d2_jump_right.abs()));
        }
        for i in 0..d.len() {
            for j in 0..d.len() {
                let o = overlap(&d[i], &d[j]).unwrap();
                assert!((o.integral - state_overlap(&sw[i], &sw[j]).unwrap()).abs() <= 1e-12);
            }
        }
        let c = vec![1.0 / (d.len() as f64).sqrt(); d.len()];
        let rep = hermiticity_defect(&d, &c, 2.0).unwrap();
        assert!(rep.defect <= 1e-12);
        assert!((rep.norm - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn wronskian_with_continuous_partner_vanishes() {
    let cont = state(REED, REED, 1, 0.0, 0.0);
    let disc = state(REED, REED, 1, -0.5, 0.5);
    for x in [-3.0, -1.5, 0.0, 0.5, 3.0] {
        assert!(piecewise_wronskian(&cont, &disc, x).unwrap().abs() <= 1e-12);
    }
    let other = state(REED, REED, 2, 0.0, 0.0);
    assert!(matches!(piecewise_wronskian(&cont, &other, 0.0), Err(Error::Domain(_))));
}

#[test]
fn uniqueness_obstruction_cases() {
    let cont = state(REED, REED, 1, 0.0, 0.0);
    let disc = state(REED, REED, 1, -0.5, 0.5);
    let o = uniqueness_obstruction(&cont, &disc).unwrap();
    assert!(o.non_unique);
    assert_eq!(o.a0_left, 0.0);
    assert_eq!(o.a0_right, 0.0);
    // Argument order does not matter.
    assert_eq!(uniqueness_obstruction(&disc, &cont).unwrap(), o);
    // Two discontinuous members with unequal jump ratios.
    let other = state(REED, REED, 1, -0.2, 0.6);
    let o = uniqueness_obstruction(&disc, &other).unwrap();
    assert!(o.non_unique);
    assert!((o.a0_left - 0.4).abs() <= 1e-12 && (o.a0_right - 1.2).abs() <= 1e-12);
    // A state compared with itself is related by 1 everywhere.
    let o = uniqueness_obstruction(&disc, &disc).unwrap();
    assert!(!o.non_unique && o.a0_left == 1.0);
    assert!(matches!(uniqueness_obstruction(&cont, &cont), Err(Error::UndefinedRatio(_))));
    let half = state(REED, REED, 1, 0.0, 0.5);
    assert!(matches!(uniqueness_obstruction(&cont, &half), Err(Error::UndefinedRatio(_))));
}

#[test]
fn infeasible_and_invalid_jumps() {
    let recs = swp_eigenvalues(REED, REED).unwrap();
    assert!(matches!(build_discontinuous(REED, REED, &recs[0], 10.0, 10.0), Err(Error::InfeasibleJump(_))));
    assert!(matches!(build_discontinuous(REED, REED, &recs[0], f64::NAN, 0.0), Err(Error::Validation { .. })));
    let a = state(REED, REED, 1, 0.0, 0.0);
    let b = state(50.0, 50.0, 1, 0.0, 0.0);
    assert!(matches!(overlap(&a, &b), Err(Error::Domain(_))));
    assert!(matches!(hermiticity_defect(&[a], &[1.0, 0.0], 0.0), Err(Error::Validation { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalized_for_any_feasible_jump(n in 1usize..=4, dl in -0.6f64..0.6, dr in -0.6f64..0.6) {
        let recs = swp_eigenvalues(REED, REED).unwrap();
        match build_discontinuous(REED, REED, &recs[n - 1], dl, dr) {
            Ok(d) => {
                prop_assert!((d.normalization_sum() - 2.0).abs() <= 1e-10);
                prop_assert!((overlap(&d, &d).unwrap().integral - 1.0).abs() <= 1e-10);
                let (l, r) = d.measured_jumps();
                prop_assert!((l[0] - dl).abs() <= 1e-12 && (r[0] - dr).abs() <= 1e-12);
                prop_assert!(d.system_residual() <= 1e-12);
            }
            Err(e) => prop_assert!(matches!(e, Error::InfeasibleJump(_))),
        }
    }

    #[test]
    fn generalized_orthogonality_random(i in 1usize..=4, j in 1usize..=4, a in -0.4f64..0.4, b in -0.4f64..0.4,
                                        c in -0.4f64..0.4, d in -0.4f64..0.4) {
        prop_assume!(i != j);
        let x = state(REED, REED, i, a, b);
        let y = state(REED, REED, j, c, d);
        let o = overlap(&x, &y).unwrap();
        prop_assert!((o.full() - o.t1 - o.t2).abs() <= 1e-8);
        let h = hermiticity_defect(&[x, y], &[0.8, 0.6], 0.7).unwrap();
        prop_assert!(h.norm_imag.abs() <= 1e-12);
    }
}
