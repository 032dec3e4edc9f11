//! Expansion of an initial wavefunction on a finite eigenbasis and its time evolution.
//!
//! Time is nondimensional, tau = hbar t / (2 m L^2), so mode n picks up the phase
//! exp(-i beta_n tau). Inner products carry the factor 1/2 of the xi scaling, so a
//! normalized F has (1/2) integral F^2 = 1.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigenfunction::EigenSolution;
use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::swlimit::SquareWellSolution;

/// Anything that can serve as a real basis function.
pub trait Eigenstate: Sync {
    fn beta(&self) -> f64;
    fn phi(&self, xi: f64) -> f64;
    /// Cosine amplitude of the central zone.
    fn b0(&self) -> f64;
    /// Points where the piecewise formula changes.
    fn breakpoints(&self) -> Vec<f64>;
    /// Interval outside which |phi| has decayed by exp(-decades).
    fn support(&self, decades: f64) -> (f64, f64);
}

impl Eigenstate for EigenSolution {
    fn beta(&self) -> f64 {
        self.record.beta
    }

    fn phi(&self, xi: f64) -> f64 {
        self.eval_phi(xi)
    }

    fn b0(&self) -> f64 {
        self.coeffs.b0
    }

    fn breakpoints(&self) -> Vec<f64> {
        let e = 1.0 + self.well.lambda;
        vec![-e, -1.0, 0.0, 1.0, e]
    }

    fn support(&self, decades: f64) -> (f64, f64) {
        self.extent(decades)
    }
}

impl Eigenstate for SquareWellSolution {
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

/// Decades of decay kept when truncating the line for quadrature.
const DECADES: f64 = 40.0;

fn opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, ..QuadOptions::default() }
}

/// Truncated integration domain and breakpoints covering every basis state.
fn domain<S: Eigenstate>(basis: &[S], extra: &[f64]) -> Vec<f64> {
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    let mut pts: Vec<f64> = extra.to_vec();
    for s in basis {
        let (l, r) = s.support(DECADES);
        a = a.min(l);
        b = b.max(r);
        pts.extend(s.breakpoints());
    }
    pts.push(a);
    pts.push(b);
    pts.retain(|x| x.is_finite() && *x >= a && *x <= b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// (1/2) integral of phi_a phi_b over the truncated line.
pub fn state_overlap<S: Eigenstate>(a: &S, b: &S) -> Result<f64> {
    let (la, ra) = a.support(DECADES);
    let (lb, rb) = b.support(DECADES);
    let (l, r) = (la.min(lb), ra.max(rb));
    let mut breaks: Vec<f64> =
        a.breakpoints().into_iter().chain(b.breakpoints()).filter(|x| *x > l && *x < r).collect();
    breaks.push(l);
    breaks.push(r);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(0.5 * integrate_pieces(|x| a.phi(x) * b.phi(x), &breaks, opts())?)
}

/// Gram matrix of the basis.
pub fn gram<S: Eigenstate>(basis: &[S]) -> Result<Vec<Vec<f64>>> {
    let n = basis.len();
    let entries: Vec<Result<f64>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if j < i {
                Ok(0.0)
            } else {
                state_overlap(&basis[i], &basis[j])
            }
        })
        .collect();
    let mut g = vec![vec![0.0; n]; n];
    for (k, e) in entries.into_iter().enumerate() {
        let (i, j) = (k / n, k % n);
        if j >= i {
            let v = e?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// Identifies the initial function in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialFunction {
    Triangular,
    Eigenstate(usize),
    Custom(String),
}

/// sqrt(3) (1 - |xi|) on [-1, 1]; normalized.
pub fn triangular(xi: f64) -> f64 {
    if xi.abs() < 1.0 {
        3f64.sqrt() * (1.0 - xi.abs())
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub initial_function: InitialFunction,
    pub coefficients: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub probability_sum: f64,
    /// sqrt((1/2) integral (F - sum c_n phi_n)^2).
    pub reconstruction_error: f64,
    /// (1/2) integral F^2.
    pub f_norm: f64,
    /// Set when `f_norm` deviates from 1 by more than 1e-6.
    pub normalization_warning: bool,
    pub gram_deviation: f64,
}

/// Largest deviation of the Gram matrix from the identity.
pub fn gram_deviation(g: &[Vec<f64>]) -> f64 {
    let mut d = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            d = d.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    d
}

/// Projects `f` on the basis. `f_breaks` lists points where `f` is not smooth.
pub fn project<S: Eigenstate>(
    f: &(dyn Fn(f64) -> f64 + Sync),
    f_breaks: &[f64],
    tag: InitialFunction,
    basis: &[S],
) -> Result<ProjectionResult> {
    let gdev = gram_deviation(&gram(basis)?);
    if gdev > 1e-6 {
        return Err(Error::Basis(format!("basis is not orthonormal: Gram deviation {gdev:e}")));
    }
    let breaks = domain(basis, f_breaks);
    let coefficients: Vec<f64> = basis
        .par_iter()
        .map(|s| integrate_pieces(|x| f(x) * s.phi(x), &breaks, opts()).map(|v| 0.5 * v))
        .collect::<Result<_>>()?;
    let f_norm = 0.5 * integrate_pieces(|x| f(x) * f(x), &breaks, opts())?;
    let resid = 0.5
        * integrate_pieces(
            |x| {
                let r = f(x) - basis.iter().zip(&coefficients).map(|(s, c)| c * s.phi(x)).sum::<f64>();
                r * r
            },
            &breaks,
            opts(),
        )?;
    let probabilities: Vec<f64> = coefficients.iter().map(|c| c * c).collect();
    Ok(ProjectionResult {
        initial_function: tag,
        probability_sum: probabilities.iter().sum(),
        coefficients,
        probabilities,
        reconstruction_error: resid.max(0.0).sqrt(),
        f_norm,
        normalization_warning: (f_norm - 1.0).abs() > 1e-6,
        gram_deviation: gdev,
    })
}

/// Closed-form coefficients of the triangular function, sqrt(3) B0 (1 - cos sqrt(beta)) / beta.
pub fn triangular_coefficients<S: Eigenstate>(basis: &[S]) -> Vec<f64> {
    basis
        .iter()
        .map(|s| {
            let beta = s.beta();
            let r = beta.sqrt();
            // (1 - cos r) / r^2 without cancellation.
            let h = (0.5 * r).sin();
            let ratio = if r > 0.0 { 2.0 * h * h / beta } else { 0.5 };
            3f64.sqrt() * s.b0() * ratio
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeState {
    pub tau: f64,
    pub xi: Vec<f64>,
    #[serde(skip)]
    pub psi: Vec<Complex64>,
    /// (1/2) integral |Psi|^2.
    pub norm: f64,
}

fn psi_at<S: Eigenstate>(phases: &[Complex64], basis: &[S], x: f64) -> Complex64 {
    basis.iter().zip(phases).map(|(s, p)| p * s.phi(x)).sum()
}

/// Psi(xi, tau) = sum c_n exp(-i beta_n tau) phi_n(xi) at the requested samples.
pub fn evolve<S: Eigenstate>(proj: &ProjectionResult, basis: &[S], tau: f64, xis: &[f64]) -> Result<TimeState> {
    if proj.coefficients.len() != basis.len() {
        return Err(Error::Basis(format!("{} coefficients for {} basis states", proj.coefficients.len(), basis.len())));
    }
    let phases: Vec<Complex64> =
        basis.iter().zip(&proj.coefficients).map(|(s, c)| Complex64::from_polar(*c, -s.beta() * tau)).collect();
    let psi = xis.iter().map(|&x| psi_at(&phases, basis, x)).collect();
    let breaks = domain(basis, &[]);
    let norm = 0.5 * integrate_pieces(|x| psi_at(&phases, basis, x).norm_sqr(), &breaks, opts())?;
    Ok(TimeState { tau, xi: xis.to_vec(), psi, norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_normalized() {
        let v = crate::quad::integrate_pieces(|x| triangular(x).powi(2), &[-1.0, 0.0, 1.0], opts()).unwrap();
        assert!((0.5 * v - 1.0).abs() < 1e-13);
    }
}
