//! The square-well limit lambda -> 0 and the sweep connecting it to the trapezoid.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::airy::constants;
use crate::eigenfunction::{center_norm, central_direction, merged_amplitude, solve};
use crate::error::{Error, Result};
use crate::spectrum::{find_eigenvalues, EigenvalueRecord, Parity};
use crate::well::{WellSpec, Zone};

fn check(v1: f64, v2: f64) -> Result<()> {
    WellSpec::new(v1, v2, 0.0).map(|_| ())
}

fn asin_sqrt(x: f64) -> f64 {
    let x = if x > 1.0 && x <= 1.0 + 1e-14 { 1.0 } else { x.max(0.0) };
    x.sqrt().asin()
}

/// Left side of the angle equation, 2 sqrt(beta) + asin sqrt(beta/v1) + asin sqrt(beta/v2).
pub fn swp_angle(v1: f64, v2: f64, beta: f64) -> f64 {
    2.0 * beta.sqrt() + asin_sqrt(beta / v1) + asin_sqrt(beta / v2)
}

fn swp_angle_deriv(v1: f64, v2: f64, beta: f64) -> f64 {
    let term = |v: f64| {
        let d = (beta * (v - beta)).max(0.0);
        if d > 0.0 {
            0.5 / d.sqrt()
        } else {
            f64::INFINITY
        }
    };
    1.0 / beta.sqrt() + term(v1) + term(v2)
}

/// The general square-well determinant
/// (1 - beta/sqrt(k1 k2)) sin 2sqrt(beta) + (sqrt(beta/k1) + sqrt(beta/k2)) cos 2sqrt(beta).
pub fn swp_determinant(v1: f64, v2: f64, beta: f64) -> f64 {
    let (k1, k2) = (v1 - beta, v2 - beta);
    let x = 2.0 * beta.sqrt();
    (1.0 - beta / (k1 * k2).sqrt()) * x.sin() + ((beta / k1).sqrt() + (beta / k2).sqrt()) * x.cos()
}

/// The symmetric-well determinant in the (1 - beta/k, 2 sqrt(beta/k)) form.
pub fn reed_residual(v: f64, beta: f64) -> f64 {
    let k = v - beta;
    let x = 2.0 * beta.sqrt();
    (1.0 - beta / k) * x.sin() + 2.0 * (beta / k).sqrt() * x.cos()
}

fn swp_parity(v1: f64, v2: f64, beta: f64) -> Parity {
    if (v1 - v2).abs() > 1e-12 * v1 {
        return Parity::None;
    }
    let (s, c) = beta.sqrt().sin_cos();
    let (p, q) = ((v1 - beta).sqrt(), beta.sqrt());
    if (q * s - p * c).abs() <= (p * s + q * c).abs() {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// All square-well eigenvalues in (0, v2].
pub fn swp_eigenvalues(v1: f64, v2: f64) -> Result<Vec<EigenvalueRecord>> {
    check(v1, v2)?;
    let top = swp_angle(v1, v2, v2);
    let count = (top / PI).floor() as usize;
    let mut out = Vec::with_capacity(count);
    for n in 1..=count {
        let target = n as f64 * PI;
        let (mut lo, mut hi) = (0.0, v2);
        let mut beta = v2 * (target / top).powi(2);
        let mut iters = 0;
        while iters < 200 {
            iters += 1;
            let g = swp_angle(v1, v2, beta) - target;
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                lo = beta;
            } else {
                hi = beta;
            }
            let mut next = beta - g / swp_angle_deriv(v1, v2, beta);
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - beta).abs();
            beta = next;
            if step <= 1e-15 * v2 || hi - lo <= 1e-15 * v2 {
                break;
            }
        }
        let residual = (swp_angle(v1, v2, beta) - target).abs();
        out.push(EigenvalueRecord {
            index_n: n,
            beta,
            residual,
            parity: swp_parity(v1, v2, beta),
            newton_iterations: iters,
            threshold: (v2 - beta).abs() <= 1e-10 * v2,
        });
    }
    Ok(out)
}

/// Existence of at least one bound state (false when 2 sqrt(v2) < arccos sqrt(v2/v1)).
pub fn swp_exists(v1: f64, v2: f64) -> Result<bool> {
    check(v1, v2)?;
    Ok(!(2.0 * v2.sqrt() < (v2 / v1).sqrt().acos()))
}

/// Absence in the form 2 sqrt(v2) < pi/2 - arcsin sqrt(v2/v1).
pub fn swp_absent_arcsin_form(v1: f64, v2: f64) -> Result<bool> {
    check(v1, v2)?;
    Ok(2.0 * v2.sqrt() < PI / 2.0 - asin_sqrt(v2 / v1))
}

/// One square-well eigenstate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareWellSolution {
    pub v1: f64,
    pub v2: f64,
    pub record: EigenvalueRecord,
    pub k1: f64,
    pub k2: f64,
    pub c0: f64,
    pub d0: f64,
    pub a0: f64,
    pub b0: f64,
    pub b1p: f64,
    pub b2p: f64,
    pub bt1: f64,
    pub bt2: f64,
    /// Values at the collapsed ramps, B1' Lambda and B2' Lambda.
    pub plateau_left: f64,
    pub plateau_right: f64,
    pub d2_jump_left: f64,
    pub d2_jump_right: f64,
}

/// Unnormalized central amplitudes and outer amplitudes for a square-well eigenvalue.
pub(crate) fn swp_unit_coefficients(v1: f64, v2: f64, beta: f64) -> Result<(f64, f64, f64, f64)> {
    let (k1, k2) = (v1 - beta, v2 - beta);
    let r = beta.sqrt();
    let (c0, d0) = central_direction(beta, k1.sqrt(), r, -k2.sqrt(), r)?;
    let (a0, b0) = (c0 + d0, c0 - d0);
    let (s, c) = r.sin_cos();
    let bt1 = merged_amplitude(r, k1.sqrt(), r, -a0 * s + b0 * c, a0 * c + b0 * s)?;
    let bt2 = merged_amplitude(r, -k2.sqrt(), r, a0 * s + b0 * c, a0 * c - b0 * s)?;
    Ok((a0, b0, bt1, bt2))
}

pub fn swp_solution(v1: f64, v2: f64, record: &EigenvalueRecord) -> Result<SquareWellSolution> {
    check(v1, v2)?;
    let beta = record.beta;
    let (k1, k2) = (v1 - beta, v2 - beta);
    if !(beta > 0.0 && k2 > 0.0) {
        return Err(Error::Normalization(format!("beta = {beta} is not a normalizable square-well state")));
    }
    let (a0, b0, bt1, bt2) = swp_unit_coefficients(v1, v2, beta)?;
    let total = bt1 * bt1 / (2.0 * k1.sqrt()) + center_norm(a0, b0, beta) + bt2 * bt2 / (2.0 * k2.sqrt());
    let k = (2.0 / total).sqrt();
    let lam = constants().lambda_const;
    let (a0, b0, bt1, bt2) = (a0 * k, b0 * k, bt1 * k, bt2 * k);
    Ok(SquareWellSolution {
        v1,
        v2,
        record: *record,
        k1,
        k2,
        c0: 0.5 * (a0 + b0),
        d0: 0.5 * (a0 - b0),
        a0,
        b0,
        b1p: bt1 / lam,
        b2p: bt2 / lam,
        bt1,
        bt2,
        plateau_left: bt1 / lam * lam,
        plateau_right: bt2 / lam * lam,
        d2_jump_left: -v1 * bt1,
        d2_jump_right: v2 * bt2,
    })
}

pub fn swp_solve_all(v1: f64, v2: f64) -> Result<Vec<SquareWellSolution>> {
    swp_eigenvalues(v1, v2)?.iter().map(|r| swp_solution(v1, v2, r)).collect()
}

fn exp_or_zero(x: f64) -> f64 {
    if x < -700.0 {
        0.0
    } else {
        x.exp()
    }
}

impl SquareWellSolution {
    pub fn beta(&self) -> f64 {
        self.record.beta
    }

    pub fn zone_of(xi: f64) -> Zone {
        if xi <= -1.0 {
            Zone::Left
        } else if xi <= 1.0 {
            Zone::Center
        } else {
            Zone::Right
        }
    }

    /// phi, phi', phi'' from the formula of `zone` (ramps are collapsed and map to the center).
    pub fn eval_zone(&self, zone: Zone, xi: f64) -> [f64; 3] {
        match zone {
            Zone::Left => {
                let r = self.k1.sqrt();
                let v = self.bt1 * exp_or_zero((xi + 1.0) * r);
                [v, r * v, self.k1 * v]
            }
            Zone::Right => {
                let r = self.k2.sqrt();
                let v = self.bt2 * exp_or_zero((1.0 - xi) * r);
                [v, -r * v, self.k2 * v]
            }
            _ => {
                let beta = self.record.beta;
                let r = beta.sqrt();
                let (s, c) = (xi * r).sin_cos();
                let v = self.a0 * s + self.b0 * c;
                [v, r * (self.a0 * c - self.b0 * s), -beta * v]
            }
        }
    }

    pub fn eval_all(&self, xi: f64) -> [f64; 3] {
        self.eval_zone(Self::zone_of(xi), xi)
    }

    pub fn eval_phi(&self, xi: f64) -> f64 {
        self.eval_all(xi)[0]
    }

    pub fn eval_dphi(&self, xi: f64) -> f64 {
        self.eval_all(xi)[1]
    }

    /// One-sided second derivatives (left, right) at `xi` and their jump right - left.
    pub fn eval_d2phi(&self, xi: f64) -> (f64, f64, f64) {
        let (l, r) = if xi == -1.0 {
            (self.eval_zone(Zone::Left, xi)[2], self.eval_zone(Zone::Center, xi)[2])
        } else if xi == 1.0 {
            (self.eval_zone(Zone::Center, xi)[2], self.eval_zone(Zone::Right, xi)[2])
        } else {
            let v = self.eval_all(xi)[2];
            (v, v)
        };
        (l, r, r - l)
    }

    pub fn normalization_sum(&self) -> f64 {
        self.bt1 * self.bt1 / (2.0 * self.k1.sqrt())
            + center_norm(self.a0, self.b0, self.record.beta)
            + self.bt2 * self.bt2 / (2.0 * self.k2.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub n: usize,
    pub beta_twp: f64,
    pub beta_swp: Option<f64>,
    pub abs_dev: Option<f64>,
    /// phi''(-1) - phi''(-(1+lambda)) across the left ramp.
    pub d2jump_left: f64,
    /// phi''(1+lambda) - phi''(1) across the right ramp.
    pub d2jump_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSweep {
    pub swp: Vec<EigenvalueRecord>,
    pub rows: Vec<SweepRow>,
    pub errors: Vec<(f64, String)>,
    /// Set when the trapezoid state count differs between sweep entries.
    pub count_changed: bool,
}

impl LambdaSweep {
    /// Deviations of state `n` in sweep order.
    pub fn deviations(&self, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n).filter_map(|r| r.abs_dev).collect()
    }
}

fn sweep_entry(v1: f64, v2: f64, lambda: f64, swp: &[EigenvalueRecord]) -> Result<Vec<SweepRow>> {
    let w = WellSpec::new(v1, v2, lambda)?;
    let recs = find_eigenvalues(&w)?;
    let mut rows = Vec::with_capacity(recs.len());
    for rec in &recs {
        let sol = solve(&w, rec)?;
        let e = 1.0 + lambda;
        let beta_swp = swp.get(rec.index_n - 1).map(|r| r.beta);
        rows.push(SweepRow {
            lambda,
            n: rec.index_n,
            beta_twp: rec.beta,
            beta_swp,
            abs_dev: beta_swp.map(|b| (rec.beta - b).abs()),
            d2jump_left: sol.eval_zone(Zone::Center, -1.0)[2] - sol.eval_zone(Zone::Left, -e)[2],
            d2jump_right: sol.eval_zone(Zone::Right, e)[2] - sol.eval_zone(Zone::Center, 1.0)[2],
        });
    }
    Ok(rows)
}

/// Trapezoid spectra along a list of decreasing lambdas compared with the square well.
pub fn lambda_sweep(v1: f64, v2: f64, lambdas: &[f64]) -> Result<LambdaSweep> {
    check(v1, v2)?;
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Validation { field: "lambdas", reason: "all entries must be positive".into() });
    }
    if lambdas.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::Validation { field: "lambdas", reason: "must be strictly descending".into() });
    }
    let swp = swp_eigenvalues(v1, v2)?;
    let results: Vec<(f64, Result<Vec<SweepRow>>)> =
        lambdas.par_iter().map(|&l| (l, sweep_entry(v1, v2, l, &swp))).collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut counts = Vec::new();
    for (l, r) in results {
        match r {
            Ok(mut rs) => {
                counts.push(rs.len());
                rows.append(&mut rs);
            }
            Err(e) => errors.push((l, e.to_string())),
        }
    }
    let count_changed = counts.windows(2).any(|p| p[0] != p[1]);
    Ok(LambdaSweep { swp, rows, errors, count_changed })
}
