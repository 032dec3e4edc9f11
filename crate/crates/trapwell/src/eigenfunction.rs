//! Coefficients, normalization and piecewise evaluation of trapezoid eigenfunctions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_pieces, QuadOptions};
use crate::spectrum::{find_eigenvalues, ramp_combo, EigenvalueRecord, Junction, ZoneGeometry};
use crate::well::{zone_of, WellSpec, Zone};

/// Coefficients of one eigenfunction. `bt1`, `bt2` already absorb the exponential
/// factors of the outer zones, so the raw outer amplitudes are never formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub c0: f64,
    pub d0: f64,
    pub a0: f64,
    pub b0: f64,
    pub b1p: f64,
    pub b2p: f64,
    pub a1p: f64,
    pub a2p: f64,
    pub bt1: f64,
    pub bt2: f64,
    pub j1p: f64,
    pub j2p: f64,
}

/// Both fractional forms of D0/C0 from the left and right junction rows.
pub fn d00_fractions(beta: f64, pl: f64, ql: f64, pr: f64, qr: f64) -> (f64, f64) {
    let (s, c) = beta.sqrt().sin_cos();
    let n1 = (pl + ql) * s - (pl - ql) * c;
    let m1 = (pl - ql) * s + (pl + ql) * c;
    let n2 = (pr + qr) * s + (pr - qr) * c;
    let m2 = (pr - qr) * s - (pr + qr) * c;
    (-n1 / m1, -n2 / m2)
}

/// Unit (C0, D0) direction with C0 > 0, averaging the null directions of both rows.
pub(crate) fn central_direction(beta: f64, pl: f64, ql: f64, pr: f64, qr: f64) -> Result<(f64, f64)> {
    let (s, c) = beta.sqrt().sin_cos();
    let n1 = (pl + ql) * s - (pl - ql) * c;
    let m1 = (pl - ql) * s + (pl + ql) * c;
    let n2 = (pr + qr) * s + (pr - qr) * c;
    let m2 = (pr - qr) * s - (pr + qr) * c;
    let r1 = m1.hypot(n1);
    let r2 = m2.hypot(n2);
    if r1 < 1e-250 || r2 < 1e-250 {
        return Err(Error::DegenerateCoefficient(format!("vanishing junction row at beta = {beta}")));
    }
    let u1 = (m1 / r1, -n1 / r1);
    let mut u2 = (m2 / r2, -n2 / r2);
    if u1.0 * u2.0 + u1.1 * u2.1 < 0.0 {
        u2 = (-u2.0, -u2.1);
    }
    let (mut c0, mut d0) = (u1.0 + u2.0, u1.1 + u2.1);
    let r = c0.hypot(d0);
    c0 /= r;
    d0 /= r;
    if c0 < 0.0 || (c0.abs() < 1e-14 && d0 < 0.0) {
        c0 = -c0;
        d0 = -d0;
    }
    Ok((c0, d0))
}

/// Least-squares merge of the two junction forms `amp q = scale ya`, `amp p = scale yb`.
pub(crate) fn merged_amplitude(scale: f64, p: f64, q: f64, ya: f64, yb: f64) -> Result<f64> {
    let den = p * p + q * q;
    if den < 1e-250 {
        return Err(Error::DegenerateCoefficient("both junction denominators vanish".into()));
    }
    Ok(scale * (q * ya + p * yb) / den)
}

/// Integral of (A sin(x sqrt b) + B cos(x sqrt b))^2 over [-1, 1].
pub(crate) fn center_norm(a: f64, b: f64, beta: f64) -> f64 {
    let r = beta.sqrt();
    let x = 2.0 * r;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    a * a * (1.0 - sinc) + b * b * (1.0 + sinc)
}

fn outer_factor(f: f64, z: f64) -> Result<f64> {
    let (v, d) = ramp_combo(f, z)?;
    if z > 1e-300 {
        Ok(0.5 * (v - d / z.sqrt()))
    } else {
        Ok(v)
    }
}

/// An eigenvalue with its coefficients; evaluable on the whole line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSolution {
    pub well: WellSpec,
    pub record: EigenvalueRecord,
    pub geometry: ZoneGeometry,
    pub coeffs: CoefficientSet,
    pub f1p: f64,
    pub f2p: f64,
}

pub fn solve_coefficients(w: &WellSpec, rec: &EigenvalueRecord) -> Result<CoefficientSet> {
    Ok(solve(w, rec)?.coeffs)
}

pub fn solve(w: &WellSpec, rec: &EigenvalueRecord) -> Result<EigenSolution> {
    let beta = rec.beta;
    let j = Junction::new(w, beta)?;
    let g = j.geom;
    if !(g.k1 > 0.0 && g.k2 > 0.0) {
        return Err(Error::Normalization(format!("beta = {beta} is at the threshold; state not normalizable")));
    }
    let (c0, d0) = central_direction(beta, j.pl, j.ql, j.pr, j.qr)?;
    let (a0, b0) = (c0 + d0, c0 - d0);
    let (s, c) = beta.sqrt().sin_cos();
    let b1p = merged_amplitude((-g.eta_hat).sqrt(), j.pl, j.ql, -a0 * s + b0 * c, a0 * c + b0 * s)?;
    let b2p = merged_amplitude((-g.zeta_hat).sqrt(), j.pr, j.qr, a0 * s + b0 * c, a0 * c - b0 * s)?;
    let bt1 = b1p * outer_factor(j.f1, g.eta_bar)?;
    let bt2 = b2p * outer_factor(j.f2, g.zeta_bar)?;
    let opts = QuadOptions::default();
    let j1p = integrate(|e| ramp_combo(j.f1, e).map(|v| v.0 * v.0).unwrap_or(f64::NAN), g.eta_hat, g.eta_bar, opts)
        .map_err(|e| Error::Normalization(e.to_string()))?;
    let j2p = integrate(|z| ramp_combo(j.f2, z).map(|v| v.0 * v.0).unwrap_or(f64::NAN), g.zeta_hat, g.zeta_bar, opts)
        .map_err(|e| Error::Normalization(e.to_string()))?;
    let s1 = (w.lambda / w.v1).cbrt();
    let s2 = (w.lambda / w.v2).cbrt();
    let total = bt1 * bt1 / (2.0 * g.k1.sqrt())
        + b1p * b1p * s1 * j1p
        + center_norm(a0, b0, beta)
        + b2p * b2p * s2 * j2p
        + bt2 * bt2 / (2.0 * g.k2.sqrt());
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Normalization(format!("normalization sum {total} at beta = {beta}")));
    }
    let k = (2.0 / total).sqrt();
    let coeffs = CoefficientSet {
        c0: c0 * k,
        d0: d0 * k,
        a0: a0 * k,
        b0: b0 * k,
        b1p: b1p * k,
        b2p: b2p * k,
        a1p: -b1p * k * j.f1,
        a2p: -b2p * k * j.f2,
        bt1: bt1 * k,
        bt2: bt2 * k,
        j1p,
        j2p,
    };
    Ok(EigenSolution { well: *w, record: *rec, geometry: g, coeffs, f1p: j.f1, f2p: j.f2 })
}

/// Every bound state of a trapezoid well with its coefficients.
pub fn solve_all(w: &WellSpec) -> Result<Vec<EigenSolution>> {
    find_eigenvalues(w)?.iter().map(|r| solve(w, r)).collect()
}

fn exp_or_zero(x: f64) -> f64 {
    if x < -700.0 {
        0.0
    } else {
        x.exp()
    }
}

impl EigenSolution {
    pub fn beta(&self) -> f64 {
        self.record.beta
    }

    /// phi, phi', phi'' using the formula of `zone`, whether or not `xi` lies in it.
    pub fn eval_zone(&self, zone: Zone, xi: f64) -> [f64; 3] {
        let w = &self.well;
        let g = &self.geometry;
        let c = &self.coeffs;
        let beta = self.record.beta;
        match zone {
            Zone::Left => {
                let r = g.k1.sqrt();
                let v = c.bt1 * exp_or_zero((xi + 1.0 + w.lambda) * r);
                [v, r * v, g.k1 * v]
            }
            Zone::LeftRamp => {
                let m = (w.v1 / w.lambda).cbrt();
                let eta = g.eta(w, beta, xi);
                let (f, fp) = ramp_combo(self.f1p, eta).unwrap_or((f64::NAN, f64::NAN));
                let v = c.b1p * f;
                [v, -m * c.b1p * fp, m * m * eta * v]
            }
            Zone::Center => {
                let r = beta.sqrt();
                let (s, cs) = (xi * r).sin_cos();
                let v = c.a0 * s + c.b0 * cs;
                [v, r * (c.a0 * cs - c.b0 * s), -beta * v]
            }
            Zone::RightRamp => {
                let m = (w.v2 / w.lambda).cbrt();
                let zeta = g.zeta(w, beta, xi);
                let (f, fp) = ramp_combo(self.f2p, zeta).unwrap_or((f64::NAN, f64::NAN));
                let v = c.b2p * f;
                [v, m * c.b2p * fp, m * m * zeta * v]
            }
            Zone::Right => {
                let r = g.k2.sqrt();
                let v = c.bt2 * exp_or_zero((-xi + 1.0 + w.lambda) * r);
                [v, -r * v, g.k2 * v]
            }
        }
    }

    pub fn eval_all(&self, xi: f64) -> [f64; 3] {
        self.eval_zone(zone_of(&self.well, xi), xi)
    }

    pub fn eval_phi(&self, xi: f64) -> f64 {
        self.eval_all(xi)[0]
    }

    pub fn eval_dphi(&self, xi: f64) -> f64 {
        self.eval_all(xi)[1]
    }

    pub fn eval_d2phi(&self, xi: f64) -> f64 {
        self.eval_all(xi)[2]
    }

    /// Left side of the normalization equation; 2 for a normalized state.
    pub fn normalization_sum(&self) -> f64 {
        let (g, c, w) = (&self.geometry, &self.coeffs, &self.well);
        c.bt1 * c.bt1 / (2.0 * g.k1.sqrt())
            + c.b1p * c.b1p * (w.lambda / w.v1).cbrt() * c.j1p
            + center_norm(c.a0, c.b0, self.record.beta)
            + c.b2p * c.b2p * (w.lambda / w.v2).cbrt() * c.j2p
            + c.bt2 * c.bt2 / (2.0 * g.k2.sqrt())
    }

    /// Largest junction mismatch of (phi, phi', phi'') relative to 1 + sup-norm.
    pub fn junction_mismatch(&self) -> [f64; 3] {
        let l = self.well.lambda;
        let pairs = [
            (-(1.0 + l), Zone::Left, Zone::LeftRamp),
            (-1.0, Zone::LeftRamp, Zone::Center),
            (1.0, Zone::Center, Zone::RightRamp),
            (1.0 + l, Zone::RightRamp, Zone::Right),
        ];
        let sup = self.sup_norms();
        let mut out = [0.0f64; 3];
        for (x, a, b) in pairs {
            let (u, v) = (self.eval_zone(a, x), self.eval_zone(b, x));
            for k in 0..3 {
                out[k] = out[k].max((u[k] - v[k]).abs() / (1.0 + sup[k]));
            }
        }
        out
    }

    /// Approximate sup-norms of phi, phi', phi'' from dense sampling.
    pub fn sup_norms(&self) -> [f64; 3] {
        let (a, b) = self.extent(20.0);
        let mut s = [0.0f64; 3];
        let n = 4000;
        for i in 0..=n {
            let v = self.eval_all(a + (b - a) * i as f64 / n as f64);
            for k in 0..3 {
                s[k] = s[k].max(v[k].abs());
            }
        }
        s
    }

    /// Interval outside which |phi| has decayed by at least exp(-decades).
    pub fn extent(&self, decades: f64) -> (f64, f64) {
        let e = 1.0 + self.well.lambda;
        (-e - decades / self.geometry.k1.sqrt(), e + decades / self.geometry.k2.sqrt())
    }

    /// Sign changes of phi on a uniform grid of `n` points across the state's extent.
    pub fn node_count(&self, n: usize) -> usize {
        let (a, b) = self.extent(12.0);
        let vals: Vec<f64> = (0..n).map(|i| self.eval_phi(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
        let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sig: Vec<f64> = vals.into_iter().filter(|v| v.abs() > 1e-9 * peak).collect();
        sig.windows(2).filter(|p| p[0] * p[1] < 0.0).count()
    }
}

/// (1/2) * integral of phi_f phi_g over the real line.
pub fn inner_product(f: &EigenSolution, g: &EigenSolution) -> Result<f64> {
    if f.well != g.well {
        return Err(Error::Domain("inner product of states from different wells".into()));
    }
    let (cf, cg) = (&f.coeffs, &g.coeffs);
    let outer = cf.bt1 * cg.bt1 / (f.geometry.k1.sqrt() + g.geometry.k1.sqrt())
        + cf.bt2 * cg.bt2 / (f.geometry.k2.sqrt() + g.geometry.k2.sqrt());
    let l = f.well.lambda;
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, ..QuadOptions::default() };
    let mut inner = 0.0;
    for (zone, a, b) in [(Zone::LeftRamp, -(1.0 + l), -1.0), (Zone::Center, -1.0, 1.0), (Zone::RightRamp, 1.0, 1.0 + l)]
    {
        let breaks = if zone == Zone::Center { vec![a, 0.0, b] } else { vec![a, b] };
        inner += integrate_pieces(|x| f.eval_zone(zone, x)[0] * g.eval_zone(zone, x)[0], &breaks, opts)?;
    }
    Ok(0.5 * (outer + inner))
}
