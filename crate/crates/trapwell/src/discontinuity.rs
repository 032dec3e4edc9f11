//! Square-well eigenfunctions with prescribed jumps at xi = -1 and xi = +1.
//!
//! Derivative jumps are tied to the value jumps by dphi'(-1) = +sqrt(k1) dphi(-1)
//! and dphi'(+1) = -sqrt(k2) dphi(+1), which keeps the coefficient system
//! homogeneous and the spectrum unchanged. Jumps are absolute values of the final,
//! normalized function.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::spectrum::EigenvalueRecord;
use crate::swlimit::swp_unit_coefficients;
use crate::wavepacket::Eigenstate;
use crate::well::{WellSpec, Zone};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscontinuousEigenfunction {
    pub v1: f64,
    pub v2: f64,
    pub record: EigenvalueRecord,
    pub k1: f64,
    pub k2: f64,
    /// phi_0(-1) - phi_1(-1).
    pub dphi_left: f64,
    /// phi_2(+1) - phi_0(+1).
    pub dphi_right: f64,
    pub ddphi_left: f64,
    pub ddphi_right: f64,
    pub c0: f64,
    pub d0: f64,
    pub a0: f64,
    pub b0: f64,
    pub bt1: f64,
    pub bt2: f64,
    pub bt1e: f64,
    pub bt1d: f64,
    pub bt2e: f64,
    pub bt2d: f64,
    pub bt1a: f64,
    pub bt2a: f64,
    /// Second-derivative jumps, -v1 B1 - beta dphi(-1) and v2 B2 - beta dphi(+1).
    pub d2phi_jump_left: f64,
    pub d2phi_jump_right: f64,
}

fn check_well(v1: f64, v2: f64) -> Result<()> {
    WellSpec::new(v1, v2, 0.0).map(|_| ())
}

/// Builds the normalized state with value jumps `dphi_left` at -1 and `dphi_right` at +1.
pub fn build_discontinuous(
    v1: f64,
    v2: f64,
    record: &EigenvalueRecord,
    dphi_left: f64,
    dphi_right: f64,
) -> Result<DiscontinuousEigenfunction> {
    check_well(v1, v2)?;
    if !dphi_left.is_finite() || !dphi_right.is_finite() {
        return Err(Error::Validation { field: "jumps", reason: "must be finite".into() });
    }
    let beta = record.beta;
    let (k1, k2) = (v1 - beta, v2 - beta);
    if !(beta > 0.0 && k2 > 0.0) {
        return Err(Error::Normalization(format!("beta = {beta} is not a normalizable square-well state")));
    }
    let (r1, r2) = (k1.sqrt(), k2.sqrt());
    let (a, b, b1a, b2a) = swp_unit_coefficients(v1, v2, beta)?;
    // Normalization is quadratic in the overall scale t: q2 t^2 - q1 t + q0 = 2.
    let q2 = b1a * b1a / (2.0 * r1) + crate::eigenfunction::center_norm(a, b, beta) + b2a * b2a / (2.0 * r2);
    let q1 = b1a / r1 * dphi_left - b2a / r2 * dphi_right;
    let q0 = dphi_left * dphi_left / (2.0 * r1) + dphi_right * dphi_right / (2.0 * r2);
    let disc = q1 * q1 - 4.0 * q2 * (q0 - 2.0);
    if !(disc >= 0.0) {
        return Err(Error::InfeasibleJump(format!("normalization has no real scale (discriminant {disc:e})")));
    }
    let t = (q1 + disc.sqrt()) / (2.0 * q2);
    if !(t > 0.0) {
        return Err(Error::InfeasibleJump(format!("normalization scale {t:e} is not positive")));
    }
    let (a0, b0) = (a * t, b * t);
    let (s, c) = beta.sqrt().sin_cos();
    let bt1e = -a0 * s + b0 * c;
    let bt1d = (beta / k1).sqrt() * (a0 * c + b0 * s);
    let bt2e = a0 * s + b0 * c;
    let bt2d = -(beta / k2).sqrt() * (a0 * c - b0 * s);
    let (bt1a, bt2a) = (b1a * t, b2a * t);
    let bt1 = bt1a - dphi_left;
    let bt2 = bt2a + dphi_right;
    Ok(DiscontinuousEigenfunction {
        v1,
        v2,
        record: *record,
        k1,
        k2,
        dphi_left,
        dphi_right,
        ddphi_left: r1 * dphi_left,
        ddphi_right: -r2 * dphi_right,
        c0: 0.5 * (a0 + b0),
        d0: 0.5 * (a0 - b0),
        a0,
        b0,
        bt1,
        bt2,
        bt1e,
        bt1d,
        bt2e,
        bt2d,
        bt1a,
        bt2a,
        d2phi_jump_left: -v1 * bt1 - beta * dphi_left,
        d2phi_jump_right: v2 * bt2 - beta * dphi_right,
    })
}

fn exp_or_zero(x: f64) -> f64 {
    if x < -700.0 {
        0.0
    } else {
        x.exp()
    }
}

impl DiscontinuousEigenfunction {
    pub fn beta(&self) -> f64 {
        self.record.beta
    }

    pub fn is_continuous(&self) -> bool {
        self.dphi_left == 0.0 && self.dphi_right == 0.0
    }

    /// phi, phi', phi'' from the formula of `zone`; ramps map to the center.
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
        self.eval_zone(crate::swlimit::SquareWellSolution::zone_of(xi), xi)
    }

    pub fn eval_phi(&self, xi: f64) -> f64 {
        self.eval_all(xi)[0]
    }

    /// Left side of the normalization quadratic; 2 for a normalized state.
    pub fn normalization_sum(&self) -> f64 {
        let (r1, r2) = (self.k1.sqrt(), self.k2.sqrt());
        self.bt1a * self.bt1a / (2.0 * r1)
            + crate::eigenfunction::center_norm(self.a0, self.b0, self.record.beta)
            + self.bt2a * self.bt2a / (2.0 * r2)
            - (self.bt1a / r1 * self.dphi_left - self.bt2a / r2 * self.dphi_right)
            + self.dphi_left * self.dphi_left / (2.0 * r1)
            + self.dphi_right * self.dphi_right / (2.0 * r2)
    }

    /// Measured (value, derivative, second derivative) jumps at -1 and +1 from one-sided limits.
    pub fn measured_jumps(&self) -> ([f64; 3], [f64; 3]) {
        let (l1, l0) = (self.eval_zone(Zone::Left, -1.0), self.eval_zone(Zone::Center, -1.0));
        let (r0, r2) = (self.eval_zone(Zone::Center, 1.0), self.eval_zone(Zone::Right, 1.0));
        ([l0[0] - l1[0], l0[1] - l1[1], l0[2] - l1[2]], [r2[0] - r0[0], r2[1] - r0[1], r2[2] - r0[2]])
    }

    /// Residual of the 2x2 coefficient system including the jump right-hand side.
    pub fn system_residual(&self) -> f64 {
        let m = jump_system(self.v1, self.v2, self.record.beta);
        let rhs1 = -self.dphi_left + self.ddphi_left / self.k1.sqrt();
        let rhs2 = -self.dphi_right - self.ddphi_right / self.k2.sqrt();
        let e1 = m[0][0] * self.a0 + m[0][1] * self.b0 - rhs1;
        let e2 = m[1][0] * self.a0 + m[1][1] * self.b0 - rhs2;
        e1.abs().max(e2.abs())
    }
}

/// Matrix of the (A0, B0) system for a square well at beta.
pub fn jump_system(v1: f64, v2: f64, beta: f64) -> [[f64; 2]; 2] {
    let (s, c) = beta.sqrt().sin_cos();
    let (g1, g2) = ((beta / (v1 - beta)).sqrt(), (beta / (v2 - beta)).sqrt());
    [[s + g1 * c, g1 * s - c], [s + g2 * c, -g2 * s + c]]
}

impl Eigenstate for DiscontinuousEigenfunction {
    fn beta(&self) -> f64 {
        self.record.beta
    }

    fn phi(&self, xi: f64) -> f64 {
        self.eval_phi(xi)
    }

    fn b0(&self) -> f64 {
        self.b0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-1.0, 0.0, 1.0]
    }

    fn support(&self, decades: f64) -> (f64, f64) {
        (-1.0 - decades / self.k1.sqrt(), 1.0 + decades / self.k2.sqrt())
    }
}

fn same_well(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction) -> Result<()> {
    if a.v1 != b.v1 || a.v2 != b.v2 {
        return Err(Error::Domain("states belong to different wells".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    /// (1/2) integral of phi_a phi_b.
    pub integral: f64,
    /// Boundary term at -1.
    pub t1: f64,
    /// Boundary term at +1.
    pub t2: f64,
}

impl Overlap {
    /// integral phi_a phi_b over the line, without the factor 1/2.
    pub fn full(&self) -> f64 {
        2.0 * self.integral
    }
}

/// The boundary terms T1, T2 from one-sided values at the jump points.
pub fn boundary_terms(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction) -> (f64, f64) {
    let (a1, a0l) = (a.eval_zone(Zone::Left, -1.0)[0], a.eval_zone(Zone::Center, -1.0)[0]);
    let (b1, b0l) = (b.eval_zone(Zone::Left, -1.0)[0], b.eval_zone(Zone::Center, -1.0)[0]);
    let (a2, a0r) = (a.eval_zone(Zone::Right, 1.0)[0], a.eval_zone(Zone::Center, 1.0)[0]);
    let (b2, b0r) = (b.eval_zone(Zone::Right, 1.0)[0], b.eval_zone(Zone::Center, 1.0)[0]);
    let t1 = (a1 * b1 - a0l * b0l) / (a.k1.sqrt() + b.k1.sqrt());
    let t2 = (a2 * b2 - a0r * b0r) / (a.k2.sqrt() + b.k2.sqrt());
    (t1, t2)
}

fn zone_integral(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, ..QuadOptions::default() };
    // Outer zones: products of decaying exponentials integrate in closed form.
    let left = a.bt1 * b.bt1 / (a.k1.sqrt() + b.k1.sqrt());
    let right = a.bt2 * b.bt2 / (a.k2.sqrt() + b.k2.sqrt());
    let center = integrate_pieces(
        |x| a.eval_zone(Zone::Center, x)[0] * b.eval_zone(Zone::Center, x)[0],
        &[-1.0, 0.0, 1.0],
        opts,
    )?;
    Ok(left + center + right)
}

pub fn overlap(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction) -> Result<Overlap> {
    same_well(a, b)?;
    let (t1, t2) = boundary_terms(a, b);
    Ok(Overlap { integral: 0.5 * zone_integral(a, b)?, t1, t2 })
}

/// W = phi_a phi_b' - phi_a' phi_b at `xi`, with the zone taken from `xi`.
pub fn piecewise_wronskian(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction, xi: f64) -> Result<f64> {
    same_well(a, b)?;
    if a.record.beta != b.record.beta {
        return Err(Error::Domain("the Wronskian argument needs a common eigenvalue".into()));
    }
    let (u, v) = (a.eval_all(xi), b.eval_all(xi));
    Ok(u[0] * v[1] - u[1] * v[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Obstruction {
    /// Ratio of jumps at -1.
    pub a0_left: f64,
    /// Ratio of jumps at +1.
    pub a0_right: f64,
    /// True when no single constant relates the two states in every zone.
    pub non_unique: bool,
}

/// Candidate proportionality constants from the two jump points.
///
/// The ratios are jumps of `b` over jumps of `a`; when `a` is continuous the roles swap,
/// so the denominator always comes from a discontinuous member.
pub fn uniqueness_obstruction(a: &DiscontinuousEigenfunction, b: &DiscontinuousEigenfunction) -> Result<Obstruction> {
    same_well(a, b)?;
    let (num, den) = if a.is_continuous() { (a, b) } else { (b, a) };
    if den.dphi_left == 0.0 || den.dphi_right == 0.0 {
        return Err(Error::UndefinedRatio("a jump in the denominator is zero".into()));
    }
    let l = num.dphi_left / den.dphi_left;
    let r = num.dphi_right / den.dphi_right;
    // A single constant must also relate the coefficients of every zone.
    let ca = [den.a0, den.b0, den.bt1, den.bt2];
    let cb = [num.a0, num.b0, num.bt1, num.bt2];
    let scale = ca.iter().chain(&cb).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let proportional = ca.iter().zip(&cb).all(|(x, y)| (y - l * x).abs() <= 1e-10 * scale);
    Ok(Obstruction { a0_left: l, a0_right: r, non_unique: (l - r).abs() > 1e-12 * (1.0 + l.abs()) || !proportional })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiticityReport {
    pub tau: f64,
    /// I[n][m] = integral d/dxi (phi_n phi_m' - phi_m phi_n'), summed from one-sided boundary values.
    pub boundary: Vec<Vec<f64>>,
    /// Largest |I[n][m]|.
    pub defect: f64,
    /// Sum of c_n c_m exp(i (beta_m - beta_n) tau) I[n][m].
    pub defect_at_tau: (f64, f64),
    /// (1/2) integral |Psi|^2 at tau.
    pub norm: f64,
    /// Imaginary part of the norm double sum; zero up to rounding.
    pub norm_imag: f64,
    /// Overlap matrix (1/2) integral phi_n phi_m.
    pub overlaps: Vec<Vec<f64>>,
}

/// Boundary sum of the Wronskian derivative over the three zones.
fn wronskian_boundary(n: &DiscontinuousEigenfunction, m: &DiscontinuousEigenfunction) -> f64 {
    let w = |z: Zone, x: f64| {
        let (u, v) = (n.eval_zone(z, x), m.eval_zone(z, x));
        u[0] * v[1] - v[0] * u[1]
    };
    // Zone 1 from -inf to -1, zone 0 from -1 to 1, zone 2 from 1 to inf; the tails vanish.
    w(Zone::Left, -1.0) + (w(Zone::Center, 1.0) - w(Zone::Center, -1.0)) - w(Zone::Right, 1.0)
}

pub fn hermiticity_defect(
    states: &[DiscontinuousEigenfunction],
    coefficients: &[f64],
    tau: f64,
) -> Result<HermiticityReport> {
    if states.len() != coefficients.len() {
        return Err(Error::Validation { field: "coefficients", reason: "one coefficient per state".into() });
    }
    for s in states.iter().skip(1) {
        same_well(&states[0], s)?;
    }
    let n = states.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Vec<Result<(usize, usize, f64, f64)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let o = overlap(&states[i], &states[j])?;
            Ok((i, j, o.integral, wronskian_boundary(&states[i], &states[j])))
        })
        .collect();
    let mut overlaps = vec![vec![0.0; n]; n];
    let mut boundary = vec![vec![0.0; n]; n];
    for v in vals {
        let (i, j, o, w) = v?;
        overlaps[i][j] = o;
        overlaps[j][i] = o;
        boundary[i][j] = w;
        boundary[j][i] = -w;
    }
    let mut defect = 0.0f64;
    let mut d = Complex64::new(0.0, 0.0);
    let mut norm = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let phase = Complex64::from_polar(1.0, (states[j].beta() - states[i].beta()) * tau);
            let cc = coefficients[i] * coefficients[j];
            d += cc * phase * boundary[i][j];
            norm += cc * phase * overlaps[i][j];
            defect = defect.max(boundary[i][j].abs());
        }
    }
    Ok(HermiticityReport {
        tau,
        boundary,
        defect,
        defect_at_tau: (d.re, d.im),
        norm: norm.re,
        norm_imag: norm.im,
        overlaps,
    })
}

/// Norm of the superposition at each tau.
pub fn norm_series(states: &[DiscontinuousEigenfunction], coefficients: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    let base = hermiticity_defect(states, coefficients, 0.0)?;
    let n = states.len();
    Ok(taus
        .iter()
        .map(|&t| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let dp = (states[j].beta() - states[i].beta()) * t;
                    s += coefficients[i] * coefficients[j] * dp.cos() * base.overlaps[i][j];
                }
            }
            s
        })
        .collect())
}
