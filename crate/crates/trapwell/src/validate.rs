//! Fixture checks behind the `validate` command.

use serde::Serialize;

use crate::airy::constants;
use crate::fdsolver::{build_grid, fd_eigenvalues};
use crate::spectrum::find_eigenvalues;
use crate::swlimit::swp_eigenvalues;
use crate::well::{nondimensionalize, DimensionalWell, WellSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> crate::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn count(v1: f64, v2: f64, lambda: f64) -> crate::Result<usize> {
    Ok(find_eigenvalues(&WellSpec::new(v1, v2, lambda)?)?.len())
}

/// Runs the reference wells: the single-state well, the Reed conversion,
/// the sqrt(v) = 15 square well and a few state counts.
pub fn fixture_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(check("airy constants", || {
        let c = constants();
        let ok = (c.f0 + 1.73205).abs() <= 1e-5 && (c.lambda_const - 1.22985).abs() <= 1e-5;
        Ok((ok, format!("f(0) = {}, Lambda = {}", c.f0, c.lambda_const)))
    }));
    out.push(check("single-state well (1, 0.5, 1)", || {
        let w = WellSpec::new(1.0, 0.5, 1.0)?;
        let a = find_eigenvalues(&w)?;
        let f = fd_eigenvalues(&w, &build_grid(&w, 501, 40.0)?, 6)?;
        let ok = a.len() == 1
            && f.pairs.len() == 1
            && (a[0].beta - 0.31447).abs() <= 1e-5
            && (f.pairs[0].beta - 0.31447).abs() <= 1e-5;
        let fb: Vec<f64> = f.pairs.iter().map(|p| p.beta).collect();
        Ok((ok, format!("analytic {:?}, grid {:?}", a.iter().map(|r| r.beta).collect::<Vec<_>>(), fb)))
    }));
    out.push(check("Reed well, 100 eV over 1 angstrom", || {
        let w = nondimensionalize(&DimensionalWell::electron_ev_angstrom(100.0, 100.0, 1.0, 1e-9))?;
        let a = find_eigenvalues(&w)?;
        let s = swp_eigenvalues(w.v1, w.v2)?;
        let worst = a.iter().zip(&s).map(|(x, y)| ((x.beta - y.beta) / y.beta).abs()).fold(0.0, f64::max);
        let ok = (w.v1 - 26.2468).abs() < 1e-4 && a.len() == 4 && s.len() == 4 && worst <= 1e-6;
        Ok((ok, format!("v = {}, {} states, worst relative gap to square well {worst:e}", w.v1, a.len())))
    }));
    out.push(check("square well sqrt(v) = 15", || {
        let a = count(225.0, 225.0, 1e-9)?;
        let s = swp_eigenvalues(225.0, 225.0)?.len();
        Ok((a == 10 && s == 10, format!("trapezoid {a}, square {s}")))
    }));
    out.push(check("state counts", || {
        let c = [count(10.0, 10.0, 0.5)?, count(1.0, 0.15, 1.0)?, count(1.0, 0.15, 1.5)?];
        Ok((
            c[0] == 3 && c[1] == 0 && c[2] >= 1,
            format!("(10,10,0.5): {}, (1,0.15,1): {}, (1,0.15,1.5): {}", c[0], c[1], c[2]),
        ))
    }));
    out.push(check("grid solver agreement on (10, 10, 0.5)", || {
        let w = WellSpec::new(10.0, 10.0, 0.5)?;
        let a = find_eigenvalues(&w)?;
        let f = fd_eigenvalues(&w, &build_grid(&w, 501, 40.0)?, 6)?;
        let worst = a.iter().zip(&f.pairs).map(|(x, y)| ((x.beta - y.beta) / x.beta).abs()).fold(0.0, f64::max);
        Ok((a.len() == f.pairs.len() && worst <= 1e-6, format!("worst relative difference {worst:e}")))
    }));
    out
}
