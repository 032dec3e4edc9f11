mod common;

use proptest::prelude::*;
use trapwell::spectrum::{
    absence_condition, d_circ, d_raw, d_star, find_eigenvalues, find_eigenvalues_report, h_universal,
    negative_beta_diagnostic, scan, spectral_factors, theta, Parity,
};
use trapwell::{Error, WellSpec};

fn wells() -> Vec<WellSpec> {
    [
        (10.0, 10.0, 0.5),
        (1.0, 0.5, 1.0),
        (50.0, 20.0, 0.3),
        (26.2468, 26.2468, 0.1),
        (100.0, 30.0, 2.0),
        (4.0, 3.0, 0.05),
    ]
    .iter()
    .map(|&(a, b, c)| WellSpec::new(a, b, c).unwrap())
    .collect()
}

#[test]
fn agrees_with_shooting() {
    for w in wells() {
        let a: Vec<f64> = find_eigenvalues(&w).unwrap().iter().map(|r| r.beta).collect();
        let s = common::shooting_eigenvalues(&w);
        assert_eq!(a.len(), s.len(), "{w}: {a:?} vs {s:?}");
        for (x, y) in a.iter().zip(&s) {
            assert!((x - y).abs() <= 1e-8 * y.max(1.0), "{w}: {x} vs {y}");
        }
    }
}

#[test]
fn records_are_ordered_and_converged() {
    for w in wells() {
        let recs = find_eigenvalues(&w).unwrap();
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.index_n, i + 1);
            assert!(r.beta > 0.0 && r.beta <= w.v2);
            assert!(r.residual <= 1e-10, "{w} n={} residual {:e}", r.index_n, r.residual);
        }
        assert!(recs.windows(2).all(|p| p[1].beta > p[0].beta));
        if w.is_symmetric() {
            for r in &recs {
                let want = if r.index_n % 2 == 1 { Parity::Even } else { Parity::Odd };
                assert_eq!(r.parity, want);
            }
        } else {
            assert!(recs.iter().all(|r| r.parity == Parity::None));
        }
    }
}

#[test]
fn single_state_well() {
    let w = WellSpec::new(1.0, 0.5, 1.0).unwrap();
    let recs = find_eigenvalues(&w).unwrap();
    assert_eq!(recs.len(), 1);
    assert!((recs[0].beta - 0.31447).abs() <= 1e-5);
}

#[test]
fn golden_counts() {
    for ((v1, v2, l), n) in
        [((26.2468, 26.2468, 1e-9), 4), ((225.0, 225.0, 1e-9), 10), ((10.0, 10.0, 0.5), 3), ((1.0, 0.15, 1.0), 0)]
    {
        let w = WellSpec::new(v1, v2, l).unwrap();
        assert_eq!(find_eigenvalues(&w).unwrap().len(), n, "{w}");
        assert_eq!(absence_condition(&w).unwrap(), n == 0);
    }
    let w = WellSpec::new(1.0, 0.15, 1.5).unwrap();
    assert!(!find_eigenvalues(&w).unwrap().is_empty());
    assert!(!absence_condition(&w).unwrap());
}

#[test]
fn square_well_input_is_redirected() {
    let w = WellSpec::new(10.0, 10.0, 0.0).unwrap();
    assert!(matches!(find_eigenvalues(&w), Err(Error::SquareWellLimit)));
    let w = WellSpec::new(10.0, 10.0, 0.5).unwrap();
    assert!(matches!(d_star(&w, 11.0), Err(Error::Domain(_))));
}

#[test]
fn root_sets_coincide() {
    for w in wells() {
        let eig: Vec<f64> = find_eigenvalues(&w).unwrap().iter().map(|r| r.beta).collect();
        let circ = common::roots(|b| d_circ(&w, b).unwrap(), 0.0, w.v2, 3000);
        let star = common::roots(|b| d_star(&w, b).unwrap(), 0.0, w.v2, 3000);
        // D° changes sign through its poles, and D* flips there too; keep the genuine zeros.
        let circ: Vec<f64> = circ.into_iter().filter(|&b| d_circ(&w, b).unwrap().abs() < 1e-6).collect();
        let star: Vec<f64> = star.into_iter().filter(|&b| d_star(&w, b).unwrap().abs() < 1e-6).collect();
        assert_eq!(star.len(), eig.len(), "{w}");
        assert_eq!(circ.len(), eig.len(), "{w}");
        for ((e, s), c) in eig.iter().zip(&star).zip(&circ) {
            assert!((e - s).abs() <= 1e-9 * w.v2 && (e - c).abs() <= 1e-9 * w.v2);
        }
        // D shares the roots wherever it is finite.
        for e in &eig {
            if let Some(d) = d_raw(&w, *e).unwrap() {
                let scale = d_raw(&w, e * (1.0 - 1e-3)).unwrap().map_or(1.0, f64::abs).max(1.0);
                assert!(d.abs() <= 1e-7 * scale, "{w}: D({e}) = {d}");
            }
        }
    }
}

#[test]
fn theta_is_monotone_and_counts() {
    for w in wells() {
        let rows = scan(&w, 1500).unwrap();
        assert!(rows.windows(2).all(|p| p[1].theta > p[0].theta), "{w}");
        let rep = find_eigenvalues_report(&w).unwrap();
        assert_eq!(rep.monotonicity_violations, 0);
        assert_eq!(rep.theta_end.floor() as usize, rep.records.len());
        for r in &rep.records {
            let t = theta(&w, r.beta).unwrap();
            assert!((t - r.index_n as f64).abs() < 1e-9, "{w}: theta = {t}");
        }
    }
}

#[test]
fn symmetric_factorization() {
    for v in [3.0, 10.0, 26.2468, 80.0] {
        let w = WellSpec::new(v, v, 0.4).unwrap();
        for i in 1..50 {
            let b = v * i as f64 / 50.0;
            let f = spectral_factors(&w, b);
            let Ok(f) = f else { continue };
            let g = f.g_left;
            let (s, c) = b.sqrt().sin_cos();
            let want = -2.0 * (s + g * c) * (g * s - c);
            let got = d_raw(&w, b).unwrap().unwrap();
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "v={v} b={b}: {got} vs {want}");
            // The right factor carries the opposite orientation of the outward normal.
            assert!((f.g_left + f.g_right).abs() <= 1e-12 * f.g_left.abs().max(1.0));
        }
    }
}

#[test]
fn negative_beta_has_no_roots() {
    for l in [1.0, 1e-9] {
        let w = WellSpec::new(1.0, 0.5, l).unwrap();
        let grid: Vec<f64> = (0..2000).map(|i| -5.0 * w.v2 * (1.0 - i as f64 / 2000.0)).collect();
        let rep = negative_beta_diagnostic(&w, &grid).unwrap();
        assert!(rep.min_abs > 0.0);
        // The value keeps one sign, so no root hides between grid points either.
        let s0 = rep.points[0].value.signum();
        assert!(rep.points.iter().all(|p| p.value.signum() == s0));
    }
}

#[test]
fn universal_function_positive_increasing() {
    let hs: Vec<f64> = (0..=99).map(|i| h_universal(0.1 + 9.9 * i as f64 / 99.0).unwrap()).collect();
    assert!(hs.iter().all(|&h| h > 0.0));
    assert!(hs.windows(2).all(|p| p[1] > p[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_star_is_bounded(v2 in 0.2f64..60.0, extra in 0.0f64..60.0, lambda in 1e-4f64..3.0, x in 0.001f64..0.999) {
        let w = WellSpec::new(v2 + extra, v2, lambda).unwrap();
        prop_assert!(d_star(&w, x * v2).unwrap().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn reciprocal_factors(v2 in 0.2f64..60.0, extra in 0.0f64..60.0, lambda in 1e-4f64..3.0, x in 0.001f64..0.999) {
        let w = WellSpec::new(v2 + extra, v2, lambda).unwrap();
        if let Ok(f) = spectral_factors(&w, x * v2) {
            if f.g_left.is_finite() && f.gamma_left.is_finite() {
                prop_assert!((f.g_left * f.gamma_left - 1.0).abs() <= 1e-12);
            }
            if f.g_right.is_finite() && f.gamma_right.is_finite() {
                prop_assert!((f.g_right * f.gamma_right - 1.0).abs() <= 1e-12);
            }
            prop_assert!((f.r_norm - f.c_coef.hypot(f.s_coef)).abs() <= 1e-12 * f.r_norm);
        }
    }

    #[test]
    fn count_matches_theta(v2 in 0.2f64..40.0, extra in 0.0f64..40.0, lambda in 1e-3f64..2.0) {
        let w = WellSpec::new(v2 + extra, v2, lambda).unwrap();
        let rep = find_eigenvalues_report(&w).unwrap();
        prop_assert_eq!(rep.theta_end.floor() as usize, rep.records.len());
        prop_assert!(rep.records.iter().all(|r| r.residual <= 1e-10));
    }

    #[test]
    fn higher_shoulders_never_add_states(v2 in 0.2f64..30.0, extra in 0.0f64..30.0, more in 0.0f64..30.0, lambda in 1e-3f64..2.0) {
        let low = WellSpec::new(v2 + extra, v2, lambda).unwrap();
        let high = WellSpec::new(v2 + extra + more, v2, lambda).unwrap();
        let a = find_eigenvalues(&low).unwrap();
        let b = find_eigenvalues(&high).unwrap();
        prop_assert!(b.len() <= a.len());
        // Raising v1 raises every level (comparison theorem).
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(y.beta >= x.beta - 1e-10 * x.beta);
        }
    }
}
