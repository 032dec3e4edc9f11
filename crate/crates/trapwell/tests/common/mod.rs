//! Oracles shared by the integration tests. None of them call into the solver.
#![allow(dead_code)]

use trapwell::well::potential_value;
use trapwell::WellSpec;

pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Roots of `f` on (a, b) from sign changes on an n-point grid.
pub fn roots(f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    roots_on(f, (1..n).map(|i| a + (b - a) * i as f64 / n as f64).collect())
}

/// As [`roots`], with the right endpoint included in the grid.
pub fn roots_to_end(f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    roots_on(f, (1..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect())
}

fn roots_on(mut f: impl FnMut(f64) -> f64, xs: Vec<f64>) -> Vec<f64> {
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 1..xs.len() {
        if vals[i - 1] == 0.0 {
            out.push(xs[i - 1]);
        } else if (vals[i - 1] < 0.0) != (vals[i] < 0.0) {
            out.push(bisect(&mut f, xs[i - 1], xs[i]));
        }
    }
    out
}

/// Even and odd square-well roots of a symmetric well of depth v, from the
/// pole-free parity equations sqrt(b) sin sqrt(b) = sqrt(v-b) cos sqrt(b) and
/// sqrt(b) cos sqrt(b) = -sqrt(v-b) sin sqrt(b).
pub fn parity_roots(v: f64) -> Vec<f64> {
    // The last grid point can round just past v; clamp so the square root stays real.
    let even = |b: f64| b.sqrt() * b.sqrt().sin() - (v - b).max(0.0).sqrt() * b.sqrt().cos();
    let odd = |b: f64| b.sqrt() * b.sqrt().cos() + (v - b).max(0.0).sqrt() * b.sqrt().sin();
    // A level may sit just below the threshold, so the grid runs up to v itself.
    let mut r = roots_to_end(even, 0.0, v, 4000);
    r.extend(roots_to_end(odd, 0.0, v, 4000));
    r.sort_by(f64::total_cmp);
    r
}

/// RK4 solution of phi'' = (v(xi) - beta) phi started with the decaying
/// exponential at the left shoulder. Returns (xi, phi, phi') samples, with
/// steps aligned to the junctions.
pub fn shoot(w: &WellSpec, beta: f64, h: f64) -> Vec<(f64, f64, f64)> {
    let e = 1.0 + w.lambda;
    let knots = if w.lambda > 0.0 { vec![-e, -1.0, 1.0, e] } else { vec![-1.0, 1.0] };
    let (mut y, mut p) = (1.0, (w.v1 - beta).sqrt());
    let mut out = vec![(knots[0], y, p)];
    for seg in knots.windows(2) {
        let n = ((seg[1] - seg[0]) / h).ceil().max(1.0) as usize;
        let hs = (seg[1] - seg[0]) / n as f64;
        // The potential is linear on each segment; sampling strictly inside keeps a square well's jump outside.
        let t = 1e-13 * (seg[1] - seg[0]);
        let f = |x: f64, y: f64| (potential_value(w, x.clamp(seg[0] + t, seg[1] - t)) - beta) * y;
        for i in 0..n {
            let x = seg[0] + i as f64 * hs;
            let k1 = (p, f(x, y));
            let k2 = (p + 0.5 * hs * k1.1, f(x + 0.5 * hs, y + 0.5 * hs * k1.0));
            let k3 = (p + 0.5 * hs * k2.1, f(x + 0.5 * hs, y + 0.5 * hs * k2.0));
            let k4 = (p + hs * k3.1, f(x + hs, y + hs * k3.0));
            y += hs / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            p += hs / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            out.push((x + hs, y, p));
        }
    }
    out
}

/// Matching defect at the right shoulder, scaled to stay bounded.
pub fn shoot_mismatch(w: &WellSpec, beta: f64, h: f64) -> f64 {
    let &(_, y, p) = shoot(w, beta, h).last().unwrap();
    (p + (w.v2 - beta).sqrt() * y) / y.hypot(p)
}

pub fn step_for(w: &WellSpec) -> f64 {
    (0.01 / w.v1.max(1.0).sqrt()).min(2e-3)
}

/// Bound-state eigenvalues by shooting.
pub fn shooting_eigenvalues(w: &WellSpec) -> Vec<f64> {
    let h = step_for(w);
    roots(|b| shoot_mismatch(w, b, h), 0.0, w.v2, 600)
}

/// Trapezoid-rule integral of sampled values on a nonuniform grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
