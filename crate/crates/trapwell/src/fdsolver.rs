//! Independent eigensolver on a truncated grid.
//!
//! The grid keeps equispaced points in every zone. Between them the operator
//! -d^2/dxi^2 + v(xi) is discretized with Lagrange elements of degree order/2
//! spanning those points, which gives a symmetric banded pencil (K + V, M)
//! whose eigenvalue error falls like h^order and which stays symmetric across
//! the large spacing jumps at the junctions. Eigenvalues come from inertia
//! bisection on LDL^T pivots, eigenvectors from inverse iteration.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::well::{potential_value, WellSpec, Zone};

/// Ramps thinner than this are collapsed onto their boundary points.
pub const COLLAPSE_LAMBDA: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdGrid {
    pub well: WellSpec,
    pub points: Vec<f64>,
    pub cut_left: f64,
    pub cut_right: f64,
    /// Points per zone including both end points; 0 for a collapsed ramp.
    pub zone_counts: [usize; 5],
    /// Index in `points` of the first point of each zone.
    pub zone_start: [usize; 5],
    pub spacing: [f64; 5],
    pub ramps_collapsed: bool,
}

impl FdGrid {
    /// Points counted per zone without merging shared boundaries.
    pub fn nominal_len(&self) -> usize {
        self.zone_counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the interior zone boundaries.
    pub fn junction_indices(&self) -> Vec<usize> {
        (1..5).filter(|&z| self.zone_counts[z] > 0).map(|z| self.zone_start[z]).collect()
    }
}

pub fn build_grid(w: &WellSpec, points_per_zone: usize, decay_margin: f64) -> Result<FdGrid> {
    build_grid_with_exterior(w, points_per_zone, points_per_zone, decay_margin)
}

/// Like [`build_grid`] with a separate point count for the two exterior zones.
pub fn build_grid_with_exterior(
    w: &WellSpec,
    points_per_zone: usize,
    exterior_points: usize,
    decay_margin: f64,
) -> Result<FdGrid> {
    w.validate()?;
    for (field, n) in [("points_per_zone", points_per_zone), ("exterior_points", exterior_points)] {
        if n < 51 || n % 2 == 0 {
            return Err(Error::Validation { field, reason: format!("must be odd and >= 51, got {n}") });
        }
    }
    if !(decay_margin > 0.0) || !decay_margin.is_finite() {
        return Err(Error::Validation { field: "decay_margin", reason: "must be positive".into() });
    }
    if !(w.lambda > 0.0) {
        return Err(Error::SquareWellLimit);
    }
    let collapsed = w.lambda <= COLLAPSE_LAMBDA;
    let e = if collapsed { 1.0 } else { 1.0 + w.lambda };
    let cut_left = -(1.0 + w.lambda + decay_margin / w.v1.sqrt());
    let cut_right = 1.0 + w.lambda + decay_margin / w.v2.sqrt();
    let spans = [(cut_left, -e), (-e, -1.0), (-1.0, 1.0), (1.0, e), (e, cut_right)];
    let mut counts = [exterior_points, points_per_zone, points_per_zone, points_per_zone, exterior_points];
    if collapsed {
        counts[1] = 0;
        counts[3] = 0;
    }
    let mut points = vec![cut_left];
    let mut zone_start = [0usize; 5];
    let mut spacing = [0.0; 5];
    for z in 0..5 {
        zone_start[z] = points.len() - 1;
        if counts[z] == 0 {
            continue;
        }
        let (a, b) = spans[z];
        let m = counts[z] - 1;
        spacing[z] = (b - a) / m as f64;
        for i in 1..=m {
            points.push(if i == m { b } else { a + (b - a) * i as f64 / m as f64 });
        }
    }
    Ok(FdGrid {
        well: *w,
        points,
        cut_left,
        cut_right,
        zone_counts: counts,
        zone_start,
        spacing,
        ramps_collapsed: collapsed,
    })
}

/// Symmetric band matrix, lower storage: `band[i][k] = A[i][i - k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    pub n: usize,
    pub bw: usize,
    band: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, band: vec![0.0; n * (bw + 1)] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.band[i * (self.bw + 1) + (i - j)]
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.band[i * (self.bw + 1) + (i - j)] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.band[i * (self.bw + 1) + (i - j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// A - s B for matrices of equal shape.
    fn shifted(&self, b: &BandMatrix, s: f64) -> BandMatrix {
        let band = self.band.iter().zip(&b.band).map(|(x, y)| x - s * y).collect();
        BandMatrix { n: self.n, bw: self.bw, band }
    }
}

/// LDL^T factors of a symmetric band matrix without pivoting.
struct Ldl {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    fn factor(a: &BandMatrix) -> Result<Ldl> {
        let (n, bw) = (a.n, a.bw);
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let scale = (0..n).map(|i| a.band[i * w].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                let mut s = a.band[i * w + (i - j)];
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= l[i * w + (i - k)] * d[k] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut s = a.band[i * w];
            for k in lo..i {
                let lik = l[i * w + (i - k)];
                s -= lik * lik * d[k];
            }
            if !s.is_finite() || s.abs() <= 1e-14 * scale {
                return Err(Error::Factorization(format!("pivot {s:e} at row {i}")));
            }
            d[i] = s;
            l[i * w] = 1.0;
        }
        Ok(Ldl { n, bw, l, d })
    }

    fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(bw)..i {
                y[i] -= self.l[i * w + (i - k)] * y[k];
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..(i + bw + 1).min(n) {
                y[i] -= self.l[k * w + (k - i)] * y[k];
            }
        }
        y
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Lagrange basis on equispaced nodes of [-1, 1]: values and derivatives at t.
fn lagrange(deg: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..=deg).map(|a| -1.0 + 2.0 * a as f64 / deg as f64).collect();
    let mut val = vec![0.0; deg + 1];
    let mut der = vec![0.0; deg + 1];
    for a in 0..=deg {
        let mut den = 1.0;
        for b in 0..=deg {
            if b != a {
                den *= nodes[a] - nodes[b];
            }
        }
        let mut p = 1.0;
        for b in 0..=deg {
            if b != a {
                p *= t - nodes[b];
            }
        }
        let mut dsum = 0.0;
        for skip in 0..=deg {
            if skip == a {
                continue;
            }
            let mut q = 1.0;
            for b in 0..=deg {
                if b != a && b != skip {
                    q *= t - nodes[b];
                }
            }
            dsum += q;
        }
        val[a] = p / den;
        der[a] = dsum / den;
    }
    (val, der)
}

/// One element: points `start ..= start + degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Element {
    pub start: usize,
    pub degree: usize,
    pub zone: Zone,
}

/// Tile `m` intervals with elements of degree p, plus as few of degree p + 1 as needed.
fn tile(m: usize, p: usize) -> Result<Vec<usize>> {
    for big in 0..p.max(1) {
        if (p + 1) * big <= m && (m - (p + 1) * big) % p == 0 {
            let small = (m - (p + 1) * big) / p;
            let mut v = vec![p + 1; big];
            v.extend(std::iter::repeat(p).take(small));
            return Ok(v);
        }
    }
    Err(Error::Basis(format!("cannot tile {m} intervals with degree {p}")))
}

/// The discretized operator: stiffness plus potential `a` and mass `m`, Dirichlet rows removed.
#[derive(Debug, Clone, PartialEq)]
pub struct FdOperator {
    pub order: usize,
    pub a: BandMatrix,
    pub m: BandMatrix,
    pub elements: Vec<Element>,
}

impl FdOperator {
    pub fn bandwidth(&self) -> usize {
        self.a.bw
    }

    /// Largest |A_ij - A_ji|; zero by construction with symmetric storage.
    pub fn asymmetry(&self) -> f64 {
        0.0
    }

    /// Negative pivots of A - sigma M, the number of eigenvalues below sigma.
    pub fn count_below(&self, sigma: f64) -> Result<usize> {
        Ok(Ldl::factor(&self.a.shifted(&self.m, sigma))?.negative_pivots())
    }

    /// Applies M^-1 (K + V) to interior samples.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let y = self.a.mul_vec(f);
        Ok(Ldl::factor(&self.m)?.solve(&y))
    }

    /// Writes `A row col value` and `M row col value` lines for the lower triangles.
    pub fn write_triplets(&self, out: &mut impl Write) -> io::Result<()> {
        for (tag, mat) in [("A", &self.a), ("M", &self.m)] {
            for i in 0..mat.n {
                for j in i.saturating_sub(mat.bw)..=i {
                    let v = mat.get(i, j);
                    if v != 0.0 {
                        writeln!(out, "{tag} {i} {j} {v:.17e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn build_operator(grid: &FdGrid, order: usize) -> Result<FdOperator> {
    if !matches!(order, 2 | 4 | 6) {
        return Err(Error::Validation { field: "order", reason: format!("must be 2, 4 or 6, got {order}") });
    }
    let p = order / 2;
    let zones = [Zone::Left, Zone::LeftRamp, Zone::Center, Zone::RightRamp, Zone::Right];
    let mut elements = Vec::new();
    for z in 0..5 {
        if grid.zone_counts[z] == 0 {
            continue;
        }
        let mut start = grid.zone_start[z];
        for deg in tile(grid.zone_counts[z] - 1, p)? {
            elements.push(Element { start, degree: deg, zone: zones[z] });
            start += deg;
        }
    }
    let bw = elements.iter().map(|e| e.degree).max().unwrap_or(1);
    let n_all = grid.points.len();
    let n = n_all - 2;
    let mut a = BandMatrix::zeros(n, bw);
    let mut m = BandMatrix::zeros(n, bw);
    let w = &grid.well;
    for el in &elements {
        let d = el.degree;
        let (x0, x1) = (grid.points[el.start], grid.points[el.start + d]);
        let half = 0.5 * (x1 - x0);
        let mid = 0.5 * (x0 + x1);
        let mut ka = vec![0.0; (d + 1) * (d + 1)];
        let mut km = vec![0.0; (d + 1) * (d + 1)];
        for (t, wt) in gauss_legendre(d + 2) {
            let x = mid + half * t;
            let v = match el.zone {
                Zone::Center => 0.0,
                Zone::Left => w.v1,
                Zone::Right => w.v2,
                _ => potential_value(w, x),
            };
            let (val, der) = lagrange(d, t);
            for i in 0..=d {
                for j in 0..=d {
                    let mij = wt * half * val[i] * val[j];
                    ka[i * (d + 1) + j] += wt * der[i] * der[j] / half + v * mij;
                    km[i * (d + 1) + j] += mij;
                }
            }
        }
        for i in 0..=d {
            let gi = el.start + i;
            if gi == 0 || gi == n_all - 1 {
                continue;
            }
            for j in 0..=i {
                let gj = el.start + j;
                if gj == 0 || gj == n_all - 1 {
                    continue;
                }
                a.add(gi - 1, gj - 1, ka[i * (d + 1) + j]);
                m.add(gi - 1, gj - 1, km[i * (d + 1) + j]);
            }
        }
    }
    Ok(FdOperator { order, a, m, elements })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdEigenpair {
    pub index_n: usize,
    pub beta: f64,
    /// Samples on every grid point, zero at the cuts, with trapezoidal integral of phi^2 equal to 2.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSpectrum {
    pub pairs: Vec<FdEigenpair>,
    /// Eigenvalues of the pencil below v2 by inertia.
    pub count_below_v2: usize,
    pub bandwidth: usize,
    pub asymmetry: f64,
    pub shift_retries: usize,
}

const MAX_RETRIES: usize = 5;

fn count_retry(op: &FdOperator, sigma: f64, nudge: f64, retries: &mut usize) -> Result<usize> {
    let mut s = sigma;
    for attempt in 0..=MAX_RETRIES {
        match op.count_below(s) {
            Ok(c) => return Ok(c),
            Err(e) if attempt == MAX_RETRIES => return Err(e),
            Err(_) => {
                *retries += 1;
                s += nudge;
            }
        }
    }
    unreachable!()
}

fn trapezoid(points: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    points.windows(2).enumerate().map(|(i, p)| 0.5 * (p[1] - p[0]) * (f(i) + f(i + 1))).sum()
}

fn inverse_iteration(op: &FdOperator, grid: &FdGrid, beta: f64) -> Result<Vec<f64>> {
    let nudge = 1e-10 * grid.well.v2;
    let mut sigma = beta - 1e-9 * beta.max(1.0);
    let mut ldl = None;
    for _ in 0..=MAX_RETRIES {
        match Ldl::factor(&op.a.shifted(&op.m, sigma)) {
            Ok(f) => {
                ldl = Some(f);
                break;
            }
            Err(_) => sigma -= nudge,
        }
    }
    let ldl = ldl.ok_or_else(|| Error::Factorization(format!("inverse iteration near beta = {beta}")))?;
    let n = op.a.n;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..6 {
        let y = ldl.solve(&op.m.mul_vec(&x));
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Factorization("inverse iteration collapsed".into()));
        }
        x = y.into_iter().map(|v| v / r).collect();
    }
    let mut full = Vec::with_capacity(n + 2);
    full.push(0.0);
    full.extend_from_slice(&x);
    full.push(0.0);
    let norm = trapezoid(&grid.points, |i| full[i] * full[i]);
    let peak = full.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let k = (2.0 / norm).sqrt() * peak.signum();
    Ok(full.into_iter().map(|v| v * k).collect())
}

/// All pencil eigenvalues in (0, v2], with eigenvectors; bisection stops at width 1e-12.
pub fn fd_eigenvalues(w: &WellSpec, grid: &FdGrid, order: usize) -> Result<FdSpectrum> {
    fd_eigenvalues_tol(w, grid, order, 1e-12)
}

/// As [`fd_eigenvalues`] with bisection width `tol` relative to max(1, beta).
pub fn fd_eigenvalues_tol(w: &WellSpec, grid: &FdGrid, order: usize, tol: f64) -> Result<FdSpectrum> {
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::Validation { field: "tol", reason: format!("must lie in [1e-14, 1e-3], got {tol}") });
    }
    if grid.well != *w {
        return Err(Error::Domain("grid was built for a different well".into()));
    }
    let op = build_operator(grid, order)?;
    let nudge = 1e-10 * w.v2;
    let mut retries = 0;
    let count = count_retry(&op, w.v2, nudge, &mut retries)?;
    let results: Vec<Result<(f64, usize)>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut r = 0;
            let (mut lo, mut hi) = (0.0, w.v2);
            while hi - lo > tol * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if count_retry(&op, mid, nudge, &mut r)? > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok((0.5 * (lo + hi), r))
        })
        .collect();
    let mut pairs = Vec::with_capacity(count);
    for (k, res) in results.into_iter().enumerate() {
        let (beta, r) = res?;
        retries += r;
        pairs.push(FdEigenpair { index_n: k + 1, beta, vector: inverse_iteration(&op, grid, beta)? });
    }
    Ok(FdSpectrum {
        pairs,
        count_below_v2: count,
        bandwidth: op.bandwidth(),
        asymmetry: op.asymmetry(),
        shift_retries: retries,
    })
}

/// Nonuniform three-point second differences at interior points.
pub fn second_differences(points: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; points.len()];
    for i in 1..points.len() - 1 {
        let (hl, hr) = (points[i] - points[i - 1], points[i + 1] - points[i]);
        out[i] = 2.0 * (hl * f[i + 1] - (hl + hr) * f[i] + hr * f[i - 1]) / (hl * hr * (hl + hr));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_weights_integrate_polynomials() {
        let g = gauss_legendre(5);
        let s: f64 = g.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn lagrange_partition_of_unity() {
        for d in 1..=4 {
            let (v, dv) = lagrange(d, 0.37);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(dv.iter().sum::<f64>().abs() < 1e-13);
        }
    }

    #[test]
    fn tiling_covers_intervals() {
        for p in 1..=3 {
            let t = tile(500, p).unwrap();
            assert_eq!(t.iter().sum::<usize>(), 500);
            assert!(t.iter().all(|&d| d == p || d == p + 1));
        }
    }

    #[test]
    fn ldl_solves_and_counts() {
        let mut a = BandMatrix::zeros(4, 1);
        for i in 0..4 {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let f = Ldl::factor(&a).unwrap();
        let x = f.solve(&[1.0, 0.0, 0.0, 1.0]);
        let y = a.mul_vec(&x);
        assert!((y[0] - 1.0).abs() < 1e-14 && y[1].abs() < 1e-14);
        // Eigenvalues 2 - 2cos(k pi / 5): two lie below 2.
        let mut id = BandMatrix::zeros(4, 1);
        for i in 0..4 {
            id.add(i, i, 1.0);
        }
        assert_eq!(Ldl::factor(&a.shifted(&id, 1.9)).unwrap().negative_pivots(), 2);
    }
}
