//! Real-argument Airy functions.
//!
//! For |x| < 10 the values come from Taylor continuation of the Airy equation
//! `y'' = x y` starting at a table of anchor points spaced 0.25 apart. The table
//! itself is built once by stepping away from the origin (Bi, and Ai for x < 0)
//! or down from x = 10 (Ai for x > 0, where forward stepping would be unstable).
//! For |x| >= 10 the classical asymptotic expansions are used.

use std::f64::consts::{FRAC_1_PI, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

const AI0: f64 = 0.355_028_053_887_817_239_26;
const AIP0: f64 = -0.258_819_403_792_806_798_40;
const BI0: f64 = 0.614_926_627_446_000_735_15;
const BIP0: f64 = 0.448_288_357_353_826_357_91;

const SWITCH: f64 = 10.0;
const ANCHOR_STEP: f64 = 0.25;
const N_ANCHORS: usize = 81;
const MAX_UNSCALED: f64 = 100.0;

/// Ai, Bi and their first derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryQuad {
    pub ai: f64,
    pub bi: f64,
    pub aip: f64,
    pub bip: f64,
}

impl AiryQuad {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bip - self.aip * self.bi
    }
}

/// Scaled values: `ai`, `aip` carry a factor `exp(+exponent)`, `bi`, `bip` carry `exp(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiry {
    pub quad: AiryQuad,
    pub exponent: f64,
}

impl ScaledAiry {
    pub fn unscaled(&self) -> AiryQuad {
        let up = (-self.exponent).exp();
        let down = self.exponent.exp();
        AiryQuad { ai: self.quad.ai * up, aip: self.quad.aip * up, bi: self.quad.bi * down, bip: self.quad.bip * down }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryConstants {
    /// f(0) = Bi'(0)/Ai'(0).
    pub f0: f64,
    /// Bi(0) - f(0) Ai(0), the plateau factor of a collapsed ramp.
    pub lambda_const: f64,
}

pub fn constants() -> AiryConstants {
    let f0 = BIP0 / AIP0;
    AiryConstants { f0, lambda_const: BI0 - f0 * AI0 }
}

struct Anchors {
    ai: [f64; N_ANCHORS],
    aip: [f64; N_ANCHORS],
    bi: [f64; N_ANCHORS],
    bip: [f64; N_ANCHORS],
}

fn anchor_x(j: usize) -> f64 {
    -SWITCH + ANCHOR_STEP * j as f64
}

fn anchors() -> &'static Anchors {
    static TABLE: OnceLock<Anchors> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t =
            Anchors { ai: [0.0; N_ANCHORS], aip: [0.0; N_ANCHORS], bi: [0.0; N_ANCHORS], bip: [0.0; N_ANCHORS] };
        let mid = N_ANCHORS / 2;
        t.ai[mid] = AI0;
        t.aip[mid] = AIP0;
        t.bi[mid] = BI0;
        t.bip[mid] = BIP0;
        for j in mid + 1..N_ANCHORS {
            let (b, bp) = taylor_step(anchor_x(j - 1), t.bi[j - 1], t.bip[j - 1], ANCHOR_STEP);
            t.bi[j] = b;
            t.bip[j] = bp;
        }
        for j in (0..mid).rev() {
            let x0 = anchor_x(j + 1);
            let (b, bp) = taylor_step(x0, t.bi[j + 1], t.bip[j + 1], -ANCHOR_STEP);
            t.bi[j] = b;
            t.bip[j] = bp;
            let (a, ap) = taylor_step(x0, t.ai[j + 1], t.aip[j + 1], -ANCHOR_STEP);
            t.ai[j] = a;
            t.aip[j] = ap;
        }
        // Ai is recessive for x > 0: integrate downwards from the asymptotic value at x = 10.
        let top = asymptotic_positive(SWITCH);
        let s = two_thirds_pow(SWITCH);
        t.ai[N_ANCHORS - 1] = top.ai * (-s).exp();
        t.aip[N_ANCHORS - 1] = top.aip * (-s).exp();
        for j in (mid + 1..N_ANCHORS - 1).rev() {
            let (a, ap) = taylor_step(anchor_x(j + 1), t.ai[j + 1], t.aip[j + 1], -ANCHOR_STEP);
            t.ai[j] = a;
            t.aip[j] = ap;
        }
        t
    })
}

/// Advance a solution of y'' = x y from x0 by h using its Taylor series.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    let scale = y.abs() + yp.abs();
    let mut prev2 = 0.0; // a_{n-1}
    let mut prev = y; // a_n
    let mut cur = yp; // a_{n+1}
    let mut sum = y + yp * h;
    let mut dsum = yp;
    let mut hpow = h; // h^{n+1}
    let mut quiet = 0;
    for n in 0..400 {
        let nf = n as f64;
        let next = (x0 * prev + prev2) / ((nf + 2.0) * (nf + 1.0));
        let term_d = (nf + 2.0) * next * hpow;
        hpow *= h;
        let term = next * hpow;
        sum += term;
        dsum += term_d;
        prev2 = prev;
        prev = cur;
        cur = next;
        if term.abs() <= 1e-18 * scale.max(sum.abs()) && term_d.abs() <= 1e-18 * scale.max(dsum.abs()) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    (sum, dsum)
}

fn two_thirds_pow(x: f64) -> f64 {
    2.0 / 3.0 * x * x.sqrt()
}

fn u_coeffs(n: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(n);
    u.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let r = (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(u[k - 1] * r);
    }
    u
}

fn uv_tables() -> &'static (Vec<f64>, Vec<f64>) {
    static T: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    T.get_or_init(|| {
        let u = u_coeffs(80);
        let v = u
            .iter()
            .enumerate()
            .map(|(k, &uk)| {
                let kf = k as f64;
                -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk
            })
            .collect();
        (u, v)
    })
}

/// Sum of c_k * sign^k / zeta^k, truncated at the smallest term.
fn asym_sum(c: impl Fn(usize) -> f64, zeta: f64, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut zpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..80 {
        let mut term = c(k) / zpow;
        if alternate && k % 2 == 1 {
            term = -term;
        }
        if term.abs() > last && k > 2 {
            break;
        }
        sum += term;
        last = term.abs();
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        zpow *= zeta;
    }
    sum
}

/// Scaled asymptotic values for large positive x.
fn asymptotic_positive(x: f64) -> AiryQuad {
    let (u, v) = uv_tables();
    let zeta = two_thirds_pow(x);
    let t = x.sqrt().sqrt();
    let sp = PI.sqrt();
    AiryQuad {
        ai: asym_sum(|k| u[k], zeta, true) / (2.0 * sp * t),
        aip: -t * asym_sum(|k| v[k], zeta, true) / (2.0 * sp),
        bi: asym_sum(|k| u[k], zeta, false) / (sp * t),
        bip: t * asym_sum(|k| v[k], zeta, false) / sp,
    }
}

/// Asymptotic values for large negative x (oscillatory regime).
fn asymptotic_negative(x: f64) -> AiryQuad {
    let (u, v) = uv_tables();
    let z = -x;
    let zeta = two_thirds_pow(z);
    let t = z.sqrt().sqrt();
    let sp = PI.sqrt();
    let z2 = zeta * zeta;
    let even = |c: &Vec<f64>| asym_sum(|k| c[2 * k], z2, true);
    let odd = |c: &Vec<f64>| asym_sum(|k| c[2 * k + 1], z2, true) / zeta;
    let (pu, qu, pv, qv) = (even(u), odd(u), even(v), odd(v));
    let (s, c) = zeta.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let cm = (c + s) * r; // cos(zeta - pi/4)
    let sm = (s - c) * r; // sin(zeta - pi/4)
    AiryQuad {
        ai: (cm * pu + sm * qu) / (sp * t),
        aip: t * (sm * pv - cm * qv) / sp,
        bi: (-sm * pu + cm * qu) / (sp * t),
        bip: t * (cm * pv + sm * qv) / sp,
    }
}

fn from_anchors(x: f64) -> AiryQuad {
    let t = anchors();
    let j = (((x + SWITCH) / ANCHOR_STEP).round() as usize).min(N_ANCHORS - 1);
    let x0 = anchor_x(j);
    let h = x - x0;
    if h == 0.0 {
        return AiryQuad { ai: t.ai[j], aip: t.aip[j], bi: t.bi[j], bip: t.bip[j] };
    }
    let (ai, aip) = taylor_step(x0, t.ai[j], t.aip[j], h);
    let (bi, bip) = taylor_step(x0, t.bi[j], t.bip[j], h);
    AiryQuad { ai, aip, bi, bip }
}

/// Ai, Bi, Ai', Bi' at `x`.
pub fn airy_eval(x: f64) -> Result<AiryQuad> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Airy argument must be finite, got {x}")));
    }
    if x > MAX_UNSCALED {
        return Err(Error::Overflow(x));
    }
    Ok(if x <= -SWITCH {
        asymptotic_negative(x)
    } else if x < SWITCH {
        from_anchors(x)
    } else {
        ScaledAiry { quad: asymptotic_positive(x), exponent: two_thirds_pow(x) }.unscaled()
    })
}

/// Overflow-free Airy values; see [`ScaledAiry`] for the scaling convention.
pub fn airy_eval_scaled(x: f64) -> Result<ScaledAiry> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Airy argument must be finite, got {x}")));
    }
    if x <= 0.0 {
        return airy_eval(x).map(|quad| ScaledAiry { quad, exponent: 0.0 });
    }
    let s = two_thirds_pow(x);
    if x >= SWITCH {
        return Ok(ScaledAiry { quad: asymptotic_positive(x), exponent: s });
    }
    let q = from_anchors(x);
    let (up, down) = (s.exp(), (-s).exp());
    Ok(ScaledAiry {
        quad: AiryQuad { ai: q.ai * up, aip: q.aip * up, bi: q.bi * down, bip: q.bip * down },
        exponent: s,
    })
}

/// Scaled numerator and denominator of f(z):
/// (sqrt(z) Bi + Bi') e^{-s} and (sqrt(z) Ai + Ai') e^{+s}.
fn f_parts_scaled(z: f64) -> Result<(f64, f64, f64)> {
    let s = if z > 0.0 { two_thirds_pow(z) } else { 0.0 };
    if z >= SWITCH {
        // The denominator cancels to leading order; sum the difference series directly.
        let (u, v) = uv_tables();
        let t = z.sqrt().sqrt();
        let sp = PI.sqrt();
        let num = t / sp * asym_sum(|k| u[k] + v[k], s, false);
        let den = t / (2.0 * sp) * asym_sum(|k| u[k] - v[k], s, true);
        return Ok((num, den, s));
    }
    let q = airy_eval_scaled(z)?.quad;
    let r = z.sqrt();
    Ok((r * q.bi + q.bip, r * q.ai + q.aip, s))
}

/// The soldering factor f(z) = (sqrt(z) Bi(z) + Bi'(z)) / (sqrt(z) Ai(z) + Ai'(z)) for z >= 0.
pub fn f_factor(z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("f_factor needs a finite z >= 0, got {z}")));
    }
    let (num, den, s) = f_parts_scaled(z)?;
    if (den.abs().ln() - s) < (1e-300f64).ln() || den == 0.0 {
        return Err(Error::DegenerateFactor(format!("denominator of f underflows at z = {z}")));
    }
    let f = num / den * (2.0 * s).exp();
    if !f.is_finite() {
        return Err(Error::DegenerateFactor(format!("f overflows at z = {z}")));
    }
    Ok(f)
}

/// The value of the Wronskian Ai Bi' - Ai' Bi.
pub const WRONSKIAN: f64 = FRAC_1_PI;
