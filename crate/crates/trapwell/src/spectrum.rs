//! Factor pipeline and eigenvalue equations of the trapezoidal well.
//!
//! The ramp solutions enter the eigenvalue equation through the junction ratios
//! g = q/p (left) and g = q/p (right). Working with the pairs (p, q) rather than
//! with g or its reciprocal keeps every expression finite; the phase angle is the
//! argument of a vector built from them and is unwrapped along an ascending
//! beta grid starting next to beta = 0.

use std::f64::consts::PI;

use serde::Serialize;

use crate::airy::{airy_eval, f_factor};
use crate::error::{Error, Result};
use crate::well::WellSpec;

/// Offset from v2 used whenever the threshold itself is needed.
pub const THRESHOLD_OFFSET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZoneGeometry {
    pub k1: f64,
    pub k2: f64,
    pub eta_bar: f64,
    pub eta_hat: f64,
    pub zeta_hat: f64,
    pub zeta_bar: f64,
}

impl ZoneGeometry {
    /// Ramp variable eta at a point of the left ramp.
    pub fn eta(&self, w: &WellSpec, beta: f64, xi: f64) -> f64 {
        -(w.v1 / w.lambda).cbrt() * (xi + 1.0 + w.lambda * beta / w.v1)
    }

    /// Ramp variable zeta at a point of the right ramp.
    pub fn zeta(&self, w: &WellSpec, beta: f64, xi: f64) -> f64 {
        (w.v2 / w.lambda).cbrt() * (xi - 1.0 - w.lambda * beta / w.v2)
    }
}

pub(crate) fn geometry_any(w: &WellSpec, beta: f64) -> ZoneGeometry {
    let a1 = (w.lambda / w.v1).powf(2.0 / 3.0);
    let a2 = (w.lambda / w.v2).powf(2.0 / 3.0);
    let k1 = w.v1 - beta;
    let k2 = w.v2 - beta;
    ZoneGeometry { k1, k2, eta_bar: a1 * k1, eta_hat: -a1 * beta, zeta_hat: -a2 * beta, zeta_bar: a2 * k2 }
}

fn require_trapezoid(w: &WellSpec) -> Result<()> {
    w.validate()?;
    if w.lambda == 0.0 {
        return Err(Error::SquareWellLimit);
    }
    Ok(())
}

pub fn zone_geometry(w: &WellSpec, beta: f64) -> Result<ZoneGeometry> {
    require_trapezoid(w)?;
    if !(beta > 0.0 && beta <= w.v2) {
        return Err(Error::Domain(format!("beta = {beta} outside (0, v2 = {}]", w.v2)));
    }
    Ok(geometry_any(w, beta))
}

/// F(x) = Bi(x) - f Ai(x) and its derivative.
pub(crate) fn ramp_combo(f: f64, x: f64) -> Result<(f64, f64)> {
    let q = airy_eval(x)?;
    Ok((q.bi - f * q.ai, q.bip - f * q.aip))
}

/// Junction data at one beta >= 0: the f factors, the ramp combinations at the
/// inner ends, and the homogeneous pairs with g_left = ql/pl, g_right = qr/pr.
#[derive(Debug, Clone, Copy)]
pub struct Junction {
    pub beta: f64,
    pub geom: ZoneGeometry,
    pub f1: f64,
    pub f2: f64,
    pub left: (f64, f64),
    pub right: (f64, f64),
    pub pl: f64,
    pub ql: f64,
    pub pr: f64,
    pub qr: f64,
}

impl Junction {
    pub fn new(w: &WellSpec, beta: f64) -> Result<Junction> {
        let geom = geometry_any(w, beta);
        let f1 = f_factor(geom.eta_bar)?;
        let f2 = f_factor(geom.zeta_bar)?;
        let left = ramp_combo(f1, geom.eta_hat)?;
        let right = ramp_combo(f2, geom.zeta_hat)?;
        let pl = -left.1;
        let ql = (-geom.eta_hat).sqrt() * left.0;
        let pr = right.1;
        let qr = (-geom.zeta_hat).sqrt() * right.0;
        Ok(Junction { beta, geom, f1, f2, left, right, pl, ql, pr, qr })
    }

    /// (pl pr + ql qr, pr ql - pl qr): C and S multiplied by ql qr.
    pub fn c_s_hom(&self) -> (f64, f64) {
        (self.pl * self.pr + self.ql * self.qr, self.pr * self.ql - self.pl * self.qr)
    }

    /// Common numerator of D, D° and D*.
    pub fn numerator(&self) -> f64 {
        let (c, s) = self.c_s_hom();
        let (sn, cs) = (2.0 * self.beta.sqrt()).sin_cos();
        c * sn + s * cs
    }

    pub fn principal_phase(&self) -> f64 {
        let (c, s) = self.c_s_hom();
        (-s).atan2(-c)
    }

    pub fn d_raw(&self) -> Option<f64> {
        let den = self.pl * self.pr;
        if self.pl.abs() < 1e-250 || self.pr.abs() < 1e-250 {
            return None;
        }
        Some(self.numerator() / den)
    }

    pub fn d_circ(&self) -> f64 {
        self.numerator() / (self.ql * self.qr)
    }

    pub fn d_star(&self) -> f64 {
        let rho = ((self.pl * self.pl + self.ql * self.ql) * (self.pr * self.pr + self.qr * self.qr)).sqrt();
        let sign = if self.ql * self.qr < 0.0 { -1.0 } else { 1.0 };
        sign * self.numerator() / rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFactors {
    pub f1p: f64,
    pub f2p: f64,
    pub g_left: f64,
    pub g_right: f64,
    pub gamma_left: f64,
    pub gamma_right: f64,
    pub c_coef: f64,
    pub s_coef: f64,
    pub r_norm: f64,
    pub phi: f64,
    pub theta: f64,
}

fn check_open_range(w: &WellSpec, beta: f64) -> Result<()> {
    require_trapezoid(w)?;
    if !(beta > 0.0 && beta < w.v2) {
        return Err(Error::Domain(format!("beta = {beta} outside (0, v2 = {})", w.v2)));
    }
    Ok(())
}

pub fn spectral_factors(w: &WellSpec, beta: f64) -> Result<SpectralFactors> {
    check_open_range(w, beta)?;
    let j = Junction::new(w, beta)?;
    if j.pl.abs() < 1e-250 || j.pr.abs() < 1e-250 {
        return Err(Error::Asymptote(beta));
    }
    let phi = phase_at(w, beta)?;
    let gamma_left = j.pl / j.ql;
    let gamma_right = j.pr / j.qr;
    let c = gamma_left * gamma_right + 1.0;
    let s = gamma_right - gamma_left;
    Ok(SpectralFactors {
        f1p: j.f1,
        f2p: j.f2,
        g_left: j.ql / j.pl,
        g_right: j.qr / j.pr,
        gamma_left,
        gamma_right,
        c_coef: c,
        s_coef: s,
        r_norm: c.hypot(s),
        phi,
        theta: (2.0 * beta.sqrt() + phi) / PI,
    })
}

/// D(beta); `None` where a g factor sits on a pole.
pub fn d_raw(w: &WellSpec, beta: f64) -> Result<Option<f64>> {
    check_open_range(w, beta)?;
    Ok(Junction::new(w, beta)?.d_raw())
}

pub fn d_circ(w: &WellSpec, beta: f64) -> Result<f64> {
    check_open_range(w, beta)?;
    Ok(Junction::new(w, beta)?.d_circ())
}

pub fn d_star(w: &WellSpec, beta: f64) -> Result<f64> {
    check_open_range(w, beta)?;
    Ok(Junction::new(w, beta)?.d_star())
}

pub fn theta(w: &WellSpec, beta: f64) -> Result<f64> {
    check_open_range(w, beta)?;
    Ok((2.0 * beta.sqrt() + phase_at(w, beta)?) / PI)
}

pub(crate) fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

/// Continuous unwrapping of an angle-valued function along ascending abscissae.
/// Intervals where the angle moves by more than pi/4 are bisected.
pub(crate) struct Unwrapper<F: FnMut(f64) -> Result<f64>> {
    eval: F,
    pub trace: Vec<(f64, f64)>,
}

impl<F: FnMut(f64) -> Result<f64>> Unwrapper<F> {
    pub fn start(mut eval: F, x0: f64) -> Result<Self> {
        let phi0 = eval(x0)?;
        Ok(Unwrapper { eval, trace: vec![(x0, phi0)] })
    }

    pub fn last(&self) -> (f64, f64) {
        *self.trace.last().expect("trace starts non-empty")
    }

    pub fn advance_to(&mut self, x: f64) -> Result<f64> {
        let (a, pa) = self.last();
        let pb = self.step(a, pa, x, 0)?;
        Ok(pb)
    }

    fn step(&mut self, a: f64, pa: f64, b: f64, depth: u32) -> Result<f64> {
        let d = wrap((self.eval)(b)? - pa);
        if d.abs() > PI / 4.0 && depth < 48 && b - a > 1e-15 * b.abs() {
            let m = 0.5 * (a + b);
            let pm = self.step(a, pa, m, depth + 1)?;
            return self.step(m, pm, b, depth + 1);
        }
        let pb = pa + d;
        self.trace.push((b, pb));
        Ok(pb)
    }
}

const BASE_POINTS: usize = 512;

fn scan_start(w: &WellSpec) -> f64 {
    w.v2 * 1e-14
}

fn phase_unwrapper(w: &WellSpec) -> Result<Unwrapper<impl FnMut(f64) -> Result<f64> + '_>> {
    Unwrapper::start(move |b| Ok(Junction::new(w, b)?.principal_phase()), scan_start(w))
}

/// Continuous phase angle at `beta`, unwrapped from beta -> 0+.
pub fn phase_at(w: &WellSpec, beta: f64) -> Result<f64> {
    let mut u = phase_unwrapper(w)?;
    let step = w.v2 / BASE_POINTS as f64;
    let mut i = 1;
    while (i as f64) * step < beta {
        u.advance_to(i as f64 * step)?;
        i += 1;
    }
    if beta <= u.last().0 {
        return Ok(u.last().1);
    }
    u.advance_to(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvalueRecord {
    #[serde(rename = "n")]
    pub index_n: usize,
    pub beta: f64,
    pub residual: f64,
    pub parity: Parity,
    pub newton_iterations: usize,
    pub threshold: bool,
}

/// One row of a scan over (0, v2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub beta_over_v2: f64,
    pub d_raw: Option<f64>,
    pub d_circ: f64,
    pub d_star: f64,
    pub theta: f64,
}

/// D, D°, D* and theta on `points` interior points of (0, v2).
pub fn scan(w: &WellSpec, points: usize) -> Result<Vec<ScanRow>> {
    require_trapezoid(w)?;
    let mut u = phase_unwrapper(w)?;
    let mut rows = Vec::with_capacity(points);
    for i in 1..=points {
        let x = i as f64 / (points + 1) as f64;
        let beta = x * w.v2;
        let phi = u.advance_to(beta)?;
        let j = Junction::new(w, beta)?;
        rows.push(ScanRow {
            beta_over_v2: x,
            d_raw: j.d_raw(),
            d_circ: j.d_circ(),
            d_star: j.d_star(),
            theta: (2.0 * beta.sqrt() + phi) / PI,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub records: Vec<EigenvalueRecord>,
    /// theta just below the threshold v2.
    pub theta_end: f64,
    /// Number of descending steps of theta along the refined scan.
    pub monotonicity_violations: usize,
}

fn parity_of(w: &WellSpec, j: &Junction) -> Parity {
    if !w.is_symmetric() {
        return Parity::None;
    }
    let (s, c) = j.beta.sqrt().sin_cos();
    let norm = j.pl.hypot(j.ql);
    let odd_factor = (j.pl * s + j.ql * c) / norm;
    let even_factor = (j.ql * s - j.pl * c) / norm;
    if even_factor.abs() <= odd_factor.abs() {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Solve theta(beta) = n inside a scan interval whose phase change is below pi/4.
fn refine_root(w: &WellSpec, n: f64, lo0: (f64, f64), hi0: (f64, f64)) -> Result<(f64, usize)> {
    let phi_ref = lo0.1;
    let th = |b: f64| -> Result<f64> {
        let p = Junction::new(w, b)?.principal_phase();
        Ok((2.0 * b.sqrt() + phi_ref + wrap(p - phi_ref)) / PI - n)
    };
    let (mut lo, mut hi) = (lo0.0, hi0.0);
    let mut glo = (2.0 * lo.sqrt() + lo0.1) / PI - n;
    let ghi = (2.0 * hi.sqrt() + hi0.1) / PI - n;
    let mut beta = if ghi != glo { lo - glo * (hi - lo) / (ghi - glo) } else { 0.5 * (lo + hi) };
    beta = beta.clamp(lo, hi);
    let h0 = (1e-7 * w.v2).max(1e-9);
    let tol = 1e-14 * w.v2;
    let mut iters = 0;
    while iters < 200 {
        iters += 1;
        let g = th(beta)?;
        if g == 0.0 {
            break;
        }
        if (g < 0.0) == (glo < 0.0) {
            lo = beta;
            glo = g;
        } else {
            hi = beta;
        }
        let h = h0.min(0.5 * (hi0.0 - lo0.0));
        let (a, b) = ((beta - h).max(lo0.0), (beta + h).min(hi0.0));
        let deriv = (th(b)? - th(a)?) / (b - a);
        let mut next = beta - g / deriv;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - beta).abs();
        beta = next;
        if step <= tol || hi - lo <= tol {
            break;
        }
    }
    Ok((beta, iters))
}

/// All bound states 0 < beta <= v2, ascending.
pub fn find_eigenvalues_report(w: &WellSpec) -> Result<SpectrumReport> {
    require_trapezoid(w)?;
    let end = w.v2 * (1.0 - THRESHOLD_OFFSET);
    let mut u = phase_unwrapper(w)?;
    for i in 1..BASE_POINTS {
        u.advance_to(end * i as f64 / BASE_POINTS as f64)?;
    }
    u.advance_to(end)?;
    let trace: Vec<(f64, f64, f64)> = u.trace.iter().map(|&(b, p)| (b, p, (2.0 * b.sqrt() + p) / PI)).collect();
    let violations = trace.windows(2).filter(|t| t[1].2 <= t[0].2).count();
    let theta_end = trace.last().expect("non-empty").2;
    let count = if theta_end >= 1.0 { theta_end.floor() as usize } else { 0 };
    let mut records = Vec::with_capacity(count);
    for n in 1..=count {
        let nf = n as f64;
        let Some(k) = trace.windows(2).position(|t| t[0].2 < nf && t[1].2 >= nf) else {
            return Err(Error::RootFinding(format!("no bracket for theta = {n} in {w}")));
        };
        let (lo, hi) = (trace[k], trace[k + 1]);
        let (beta, iters) = refine_root(w, nf, (lo.0, lo.1), (hi.0, hi.1))?;
        let j = Junction::new(w, beta)?;
        records.push(EigenvalueRecord {
            index_n: n,
            beta,
            residual: j.d_star().abs(),
            parity: parity_of(w, &j),
            newton_iterations: iters,
            threshold: (w.v2 - beta).abs() <= 1e-10 * w.v2,
        });
    }
    Ok(SpectrumReport { records, theta_end, monotonicity_violations: violations })
}

pub fn find_eigenvalues(w: &WellSpec) -> Result<Vec<EigenvalueRecord>> {
    Ok(find_eigenvalues_report(w)?.records)
}

/// True when the well has no bound state.
pub fn absence_condition(w: &WellSpec) -> Result<bool> {
    require_trapezoid(w)?;
    let end = w.v2 * (1.0 - THRESHOLD_OFFSET);
    Ok((2.0 * end.sqrt() + phase_at(w, end)?) / PI < 1.0)
}

/// Real bracket of Im D at one negative beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativeBetaPoint {
    pub beta: f64,
    /// 1 + g_l g_r (real on this branch).
    pub sinh_coef: f64,
    /// -i (g_l - g_r) (real on this branch).
    pub cosh_coef: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeBetaReport {
    pub min_abs: f64,
    pub at_beta: f64,
    pub points: Vec<NegativeBetaPoint>,
}

pub fn negative_beta_point(w: &WellSpec, beta: f64) -> Result<NegativeBetaPoint> {
    require_trapezoid(w)?;
    if !(beta < 0.0) {
        return Err(Error::Domain(format!("negative-beta diagnostic needs beta < 0, got {beta}")));
    }
    let g = geometry_any(w, beta);
    let f1 = f_factor(g.eta_bar)?;
    let f2 = f_factor(g.zeta_bar)?;
    let (l, lp) = ramp_combo(f1, g.eta_hat)?;
    let (r, rp) = ramp_combo(f2, g.zeta_hat)?;
    // g_l = i al, g_r = i ar.
    let al = -g.eta_hat.sqrt() * l / lp;
    let ar = g.zeta_hat.sqrt() * r / rp;
    let sinh_coef = 1.0 - al * ar;
    let cosh_coef = al - ar;
    let s = 2.0 * (-beta).sqrt();
    Ok(NegativeBetaPoint { beta, sinh_coef, cosh_coef, value: sinh_coef * s.sinh() + cosh_coef * s.cosh() })
}

pub fn negative_beta_diagnostic(w: &WellSpec, grid: &[f64]) -> Result<NegativeBetaReport> {
    let points = grid.iter().map(|&b| negative_beta_point(w, b)).collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .min_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
        .ok_or_else(|| Error::Domain("empty negative-beta grid".into()))?;
    Ok(NegativeBetaReport { min_abs: best.value.abs(), at_beta: best.beta, points: points.clone() })
}

/// The universal function H(u) = (phi(beta = v) - pi) / u^{3/2} of symmetric wells.
pub fn h_universal(u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("H(u) needs u > 0, got {u}")));
    }
    let f0 = crate::airy::constants().f0;
    let alpha = |x: f64| -> Result<f64> {
        let (fv, fp) = ramp_combo(f0, -x)?;
        Ok((x.sqrt() * fv).atan2(-fp))
    };
    let u0 = (1e-3 * u).min(1e-6);
    let mut un = Unwrapper::start(alpha, u0)?;
    let steps = (u / 0.02).ceil() as usize;
    for i in 1..=steps {
        un.advance_to(u0 + (u - u0) * i as f64 / steps as f64)?;
    }
    let a = un.last().1;
    Ok((2.0 * a - PI) / u.powf(1.5))
}
