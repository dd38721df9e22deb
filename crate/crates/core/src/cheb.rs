//! Chebyshev grids, tensor-product coefficient computation by
//! Gauss–Chebyshev quadrature, stable partial-sum evaluation, and L1 error
//! measurement.
//!
//! Coefficients are stored *raw*: entry (i, j) holds
//!
//! ```text
//! c~_{i,j} = (4 / (n_x n_y)) sum_{l_x} sum_{l_y} f(x_{l_x}, y_{l_y}) T_i(x_{l_x}) T_j(y_{l_y})
//! ```
//!
//! with no primed-sum weights baked in. The weights (1/4 on the (0,0) entry,
//! 1/2 on the remaining first row and column) are applied only when a partial
//! sum is evaluated, so the stored entries stay index-aligned with the
//! quadrature rule, the decay bounds, and the aliasing identity.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Axis, Error, Result};
use crate::quad::gauss_legendre;

/// A scalar field on the closed unit square, callable from any thread.
///
/// Wraps the function in an `Arc` so grids of samples can be filled in
/// parallel and so corpus entries stay cheap to clone.
#[derive(Clone)]
pub struct TargetFunction(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl TargetFunction {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        TargetFunction(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.0)(x, y)
    }
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TargetFunction(..)")
    }
}

/// Tensor grid of Chebyshev roots, kept together with the underlying theta
/// angles so quadrature loops can form cos(i * theta) directly instead of
/// re-deriving angles from the nodes.
#[derive(Debug, Clone)]
pub struct ChebGrid {
    thetas_x: Vec<f64>,
    thetas_y: Vec<f64>,
    nodes_x: Vec<f64>,
    nodes_y: Vec<f64>,
}

impl ChebGrid {
    pub fn new(n_x: usize, n_y: usize) -> Result<Self> {
        let (thetas_x, nodes_x) = thetas_and_nodes(n_x)?;
        let (thetas_y, nodes_y) = thetas_and_nodes(n_y)?;
        Ok(ChebGrid { thetas_x, thetas_y, nodes_x, nodes_y })
    }

    pub fn n_x(&self) -> usize {
        self.nodes_x.len()
    }

    pub fn n_y(&self) -> usize {
        self.nodes_y.len()
    }

    pub fn nodes_x(&self) -> &[f64] {
        &self.nodes_x
    }

    pub fn nodes_y(&self) -> &[f64] {
        &self.nodes_y
    }
}

fn thetas_and_nodes(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    let thetas: Vec<f64> = (1..=n).map(|l| (2 * l - 1) as f64 * PI / (2.0 * n as f64)).collect();
    let nodes = thetas.iter().map(|t| t.cos()).collect();
    Ok((thetas, nodes))
}

/// Roots of the degree-n Chebyshev polynomial, x_l = cos((2l-1)pi/(2n)) for
/// l = 1..n, in strictly decreasing order.
///
/// ```
/// let nodes = bicheb::cheb::chebyshev_nodes(1).unwrap();
/// assert!(nodes[0].abs() < 1e-15);
/// ```
pub fn chebyshev_nodes(n: usize) -> Result<Vec<f64>> {
    thetas_and_nodes(n).map(|(_, nodes)| nodes)
}

/// The Chebyshev polynomial T_i(x) = cos(i arccos x) on [-1, 1].
pub fn eval_t(i: usize, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { value: x });
    }
    Ok((i as f64 * x.acos()).cos())
}

/// Where a coefficient matrix came from: a concrete quadrature grid, or the
/// oversampled reference rule that stands in for the exact integrals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Quadrature { n_x: usize, n_y: usize },
    Oracle { oversample: usize },
}

/// A (deg_x+1) x (deg_y+1) grid of raw Chebyshev coefficients.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    deg_x: usize,
    deg_y: usize,
    entries: Vec<f64>, // row-major: entry (i, j) at i * (deg_y + 1) + j
    provenance: Provenance,
}

impl CoeffMatrix {
    /// Wraps a row-major entry buffer; the buffer length must match the
    /// degree pair exactly.
    pub fn from_entries(
        deg_x: usize,
        deg_y: usize,
        entries: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let want = (deg_x + 1) * (deg_y + 1);
        if entries.len() != want {
            return Err(Error::InvalidArgument(format!(
                "entry buffer holds {} values but degrees ({}, {}) need {}",
                entries.len(),
                deg_x,
                deg_y,
                want
            )));
        }
        Ok(CoeffMatrix { deg_x, deg_y, entries, provenance })
    }

    pub fn deg_x(&self) -> usize {
        self.deg_x
    }

    pub fn deg_y(&self) -> usize {
        self.deg_y
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Raw entry c_{i,j}. Panics on out-of-range indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i <= self.deg_x && j <= self.deg_y, "coefficient index out of range");
        self.entries[i * (self.deg_y + 1) + j]
    }

    /// Row-major view of all entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * (self.deg_y + 1)..(i + 1) * (self.deg_y + 1)]
    }

    /// The primed partial sum at (x, y): entry (0,0) contributes with weight
    /// 1/4, the remaining first row and column with weight 1/2, everything
    /// else with weight 1. Evaluated by nested Clenshaw recurrences, which
    /// stay stable at high degree where naive cosine summation loses digits.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) || !(-1.0..=1.0).contains(&y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let col: Vec<f64> = (0..=self.deg_x).map(|i| clenshaw_primed(self.row(i), y)).collect();
        Ok(clenshaw_primed(&col, x))
    }

    /// Zeroes every entry whose index appears in `drop`; used to split a
    /// matrix into kept and dropped parts.
    pub fn with_zeroed(&self, drop: &dyn Fn(usize, usize) -> bool) -> CoeffMatrix {
        let mut out = self.clone();
        for i in 0..=self.deg_x {
            for j in 0..=self.deg_y {
                if drop(i, j) {
                    out.entries[i * (self.deg_y + 1) + j] = 0.0;
                }
            }
        }
        out
    }
}

/// One-dimensional primed Clenshaw sum: a[0]/2 + sum_{k>=1} a[k] T_k(t).
fn clenshaw_primed(a: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ak in a.iter().skip(1).rev() {
        let b0 = ak + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    0.5 * a[0] + t * b1 - b2
}

/// Tensor-product Chebyshev coefficients of f on the given grid,
///
/// ```text
/// c~_{i,j} = (4 / (n_x n_y)) sum_{l_x, l_y} f(x_{l_x}, y_{l_y}) T_i(x_{l_x}) T_j(y_{l_y})
/// ```
///
/// for i <= deg_x, j <= deg_y. The function is evaluated exactly once per
/// node; the double contraction reuses the sample table for every (i, j).
pub fn compute_coeffs_quadrature(
    f: &TargetFunction,
    grid: &ChebGrid,
    deg_x: usize,
    deg_y: usize,
) -> Result<CoeffMatrix> {
    let n_x = grid.n_x();
    let n_y = grid.n_y();
    if deg_x >= n_x {
        return Err(Error::DegreeUnresolvable { axis: Axis::X, degree: deg_x, nodes: n_x });
    }
    if deg_y >= n_y {
        return Err(Error::DegreeUnresolvable { axis: Axis::Y, degree: deg_y, nodes: n_y });
    }

    // Stage 1: contract over l_y. h[l_x][j] = sum_{l_y} f(x, y) cos(j theta_y).
    // Each row is an independent, fixed-order summation, so the parallel map
    // is bit-for-bit deterministic regardless of thread count.
    let cos_y: Vec<Vec<f64>> = (0..=deg_y)
        .map(|j| grid.thetas_y.iter().map(|&t| (j as f64 * t).cos()).collect())
        .collect();
    let h: Vec<Vec<f64>> = grid
        .nodes_x
        .par_iter()
        .map(|&x| {
            let mut samples = Vec::with_capacity(n_y);
            for &y in &grid.nodes_y {
                let v = f.eval(x, y);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { x, y, value: v });
                }
                samples.push(v);
            }
            let mut row = vec![0.0; deg_y + 1];
            for (j, cj) in cos_y.iter().enumerate() {
                let mut acc = 0.0;
                for (s, c) in samples.iter().zip(cj) {
                    acc += s * c;
                }
                row[j] = acc;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    // Stage 2: contract over l_x.
    let scale = 4.0 / (n_x as f64 * n_y as f64);
    let entries: Vec<f64> = (0..=deg_x)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut acc = vec![0.0; deg_y + 1];
            for (l_x, hrow) in h.iter().enumerate() {
                let ci = (i as f64 * grid.thetas_x[l_x]).cos();
                for (a, v) in acc.iter_mut().zip(hrow) {
                    *a += ci * v;
                }
            }
            acc.into_iter().map(move |a| scale * a)
        })
        .collect();

    CoeffMatrix::from_entries(deg_x, deg_y, entries, Provenance::Quadrature { n_x, n_y })
}

/// Reference coefficients standing in for the exact integrals: the same
/// quadrature rule on a heavily oversampled square grid with
/// n = oversample * (max degree + 1) + 64 nodes per axis. The +64 floor
/// protects low-degree requests on functions with slowly decaying tails.
pub fn exact_coeffs_oracle(
    f: &TargetFunction,
    deg_x: usize,
    deg_y: usize,
    oversample: usize,
) -> Result<CoeffMatrix> {
    if oversample < 2 {
        return Err(Error::InvalidArgument(format!(
            "oracle oversample factor must be at least 2, got {oversample}"
        )));
    }
    let n = oversample * (deg_x.max(deg_y) + 1) + 64;
    let grid = ChebGrid::new(n, n)?;
    let mut c = compute_coeffs_quadrature(f, &grid, deg_x, deg_y)?;
    c.provenance = Provenance::Oracle { oversample };
    Ok(c)
}

/// The L1 distance || f - C ||_1 over the square, measured by an m x m
/// tensor Gauss–Legendre rule (plain Lebesgue measure, no Chebyshev weight).
pub fn l1_error(f: &TargetFunction, c: &CoeffMatrix, m: usize) -> Result<f64> {
    tensor_l1(m, |x, y| {
        let v = f.eval(x, y);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { x, y, value: v });
        }
        Ok(v - c.eval(x, y)?)
    })
}

/// The L1 norm || C ||_1 of a partial sum, by the same rule as [`l1_error`].
pub fn l1_norm(c: &CoeffMatrix, m: usize) -> Result<f64> {
    tensor_l1(m, |x, y| c.eval(x, y))
}

fn tensor_l1(m: usize, g: impl Fn(f64, f64) -> Result<f64> + Sync) -> Result<f64> {
    if m < 16 {
        return Err(Error::InvalidArgument(format!(
            "the L1 rule needs at least 16 points per axis, got {m}"
        )));
    }
    let (x, w) = gauss_legendre(m)?;
    // Row sums are independent; the final reduction runs in index order.
    let rows: Vec<f64> = x
        .par_iter()
        .map(|&xa| {
            let mut acc = 0.0;
            for (&yb, &wb) in x.iter().zip(&w) {
                acc += wb * g(xa, yb)?.abs();
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(rows.iter().zip(&w).map(|(r, wa)| wa * r).sum())
}

/// Derivative coefficient: the raw coefficient of the supplied mixed partial,
///
/// ```text
/// c^{(r,s)}_{i,j} = (4/pi^2) int int fpartial(cos a, cos b) cos(i a) cos(j b) da db
/// ```
///
/// computed by the n x n Gauss–Chebyshev rule. The caller supplies `fpartial`
/// as the (r, s) mixed partial of the function under study; the quadrature
/// itself is order-agnostic.
pub fn derivative_coeff(fpartial: &TargetFunction, i: usize, j: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    if i >= n {
        return Err(Error::DegreeUnresolvable { axis: Axis::X, degree: i, nodes: n });
    }
    if j >= n {
        return Err(Error::DegreeUnresolvable { axis: Axis::Y, degree: j, nodes: n });
    }
    let grid = ChebGrid::new(n, n)?;
    let mut total = 0.0;
    for (l_x, &x) in grid.nodes_x.iter().enumerate() {
        let ci = (i as f64 * grid.thetas_x[l_x]).cos();
        let mut inner = 0.0;
        for (l_y, &y) in grid.nodes_y.iter().enumerate() {
            let v = fpartial.eval(x, y);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { x, y, value: v });
            }
            inner += v * (j as f64 * grid.thetas_y[l_y]).cos();
        }
        total += ci * inner;
    }
    Ok(4.0 / (n as f64 * n as f64) * total)
}
