//! A priori decay envelopes for bivariate Chebyshev coefficients of
//! functions with limited smoothness, and the audit machinery that checks
//! computed coefficients against them.
//!
//! The envelopes are parameterized by weighted variation integrals of mixed
//! partials (see [`crate::variation`]) and built from two product families:
//!
//! * the per-axis decay factor `Γ_{α,β}[p](η) = 1 / Π_{n=−p}^{p+α} (η+2n+β)`,
//!   whose parity-selected instances bound individual coefficients, and
//! * the telescoped tail `Π_α[p](n*)`, a two-term closed form for the sum of
//!   Γ factors beyond a truncation degree, which converts coefficient decay
//!   into L1 truncation-error budgets.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::cheb::CoeffMatrix;
use crate::error::{Error, Result};

/// Smoothness class (k, l): the mixed partial of order (k+1, l+1) and the
/// pure partials of order k+1 in x and l+1 in y are assumed to have bounded
/// weighted variation on the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothnessClass {
    pub k: usize,
    pub l: usize,
}

/// The three variation integrals attached to a smoothness class:
/// `v_kl` for the mixed partial, `v_k` and `v_l` for the pure partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationBundle {
    pub v_kl: f64,
    pub v_k: f64,
    pub v_l: f64,
}

impl VariationBundle {
    pub fn new(v_kl: f64, v_k: f64, v_l: f64) -> Result<Self> {
        for (name, v) in [("v_kl", v_kl), ("v_k", v_k), ("v_l", v_l)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "variation {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(VariationBundle { v_kl, v_k, v_l })
    }

    /// The single constant entering the combined quadrature-error bound.
    pub fn v_star(&self) -> f64 {
        self.v_kl.max(self.v_k).max(self.v_l)
    }
}

/// Reciprocal factor product `Γ_{α,β}[p](η) = 1 / Π_{n=−p}^{p+α} (η+2n+β)`.
///
/// Only the (α, β) pairs that actually arise — (0,0), (1,−1), (0,−1), (0,1),
/// (1,−2), (1,0), (0,−2) — are accepted; every factor must be strictly
/// positive, which is exactly the index range on which the decay bounds are
/// valid.
pub fn gamma(alpha: i32, beta: i32, p: usize, eta: f64) -> Result<f64> {
    const SUPPORTED: [(i32, i32); 7] =
        [(0, 0), (1, -1), (0, -1), (0, 1), (1, -2), (1, 0), (0, -2)];
    if !SUPPORTED.contains(&(alpha, beta)) {
        return Err(Error::InvalidArgument(format!(
            "unsupported factor-product family (alpha, beta) = ({alpha}, {beta})"
        )));
    }
    let p = p as i32;
    let mut prod = 1.0;
    for n in -p..=(p + alpha) {
        let factor = eta + (2 * n + beta) as f64;
        if factor <= 0.0 {
            return Err(Error::NonPositiveFactor { eta, factor });
        }
        prod *= factor;
    }
    Ok(1.0 / prod)
}

/// Parity-selected per-axis decay factor G_order(idx): `Γ_{0,0}[s]` when
/// order = 2s, `Γ_{1,−1}[s]` when order = 2s+1. Defined for idx ≥ order+1.
pub fn axis_decay_factor(order: usize, idx: usize) -> Result<f64> {
    if idx < order + 1 {
        return Err(Error::BoundNotApplicable { index: idx, min: order + 1 });
    }
    let s = order / 2;
    if order % 2 == 0 {
        gamma(0, 0, s, idx as f64)
    } else {
        gamma(1, -1, s, idx as f64)
    }
}

/// Joint coefficient bound: for a class-(k, l) function with mixed-partial
/// variation `v_kl`,
///
/// ```text
/// |c_{i,j}| <= (4 v_kl / pi^2) G_k(i) G_l(j),   i >= k+1, j >= l+1.
/// ```
pub fn coeff_bound(cls: SmoothnessClass, v_kl: f64, i: usize, j: usize) -> Result<f64> {
    let gi = axis_decay_factor(cls.k, i)?;
    let gj = axis_decay_factor(cls.l, j)?;
    Ok(4.0 * v_kl / (PI * PI) * gi * gj)
}

/// Directional coefficient bound: variation `v` of the pure partial of
/// order+1 along one axis gives
///
/// ```text
/// |c_{i,j}| <= (4 v / pi^2) G_order(idx),   idx >= order+1,
/// ```
///
/// valid for every index of the other axis, which is why it takes no second
/// index.
pub fn coeff_bound_directional(order: usize, v: f64, idx: usize) -> Result<f64> {
    Ok(4.0 * v / (PI * PI) * axis_decay_factor(order, idx)?)
}

/// Telescoped tail sum `Π_α[p](n*)`: the two-term closed form
///
/// ```text
/// 1/Π_{m=−p}^{p−α}(n*+2m+α) + 1/Π_{m=−p}^{p−α}(n*+2m+α+1).
/// ```
///
/// The pair (p, α) = (0, 1) would make both products empty and is rejected;
/// it never arises because the truncation bounds require k, l ≥ 1.
pub fn pi_fn(alpha: u8, p: usize, nstar: f64) -> Result<f64> {
    if alpha > 1 {
        return Err(Error::InvalidArgument(format!(
            "the telescoped tail product is defined for alpha in {{0, 1}}, got {alpha}"
        )));
    }
    if p == 0 && alpha == 1 {
        return Err(Error::InvalidArgument(
            "the telescoped tail product with (p, alpha) = (0, 1) is an empty product and \
             outside the domain"
                .into(),
        ));
    }
    let p = p as i32;
    let alpha = alpha as i32;
    let mut prod_a = 1.0;
    let mut prod_b = 1.0;
    for m in -p..=(p - alpha) {
        let factor = nstar + (2 * m + alpha) as f64;
        if factor <= 0.0 {
            return Err(Error::NonPositiveFactor { eta: nstar, factor });
        }
        prod_a *= factor;
        prod_b *= factor + 1.0;
    }
    Ok(1.0 / prod_a + 1.0 / prod_b)
}

/// Closed-form majorant `2 / (n* − 2p + α)^{2p−α+1}` for [`pi_fn`].
///
/// The two agree in order but the majorant only provably dominates for
/// n* ≥ 2p + 2; callers comparing the two near the lower end of the domain
/// should prefer [`pi_fn`] itself.
pub fn pi_upper(alpha: u8, p: usize, nstar: f64) -> Result<f64> {
    if alpha > 1 {
        return Err(Error::InvalidArgument(format!(
            "the tail majorant is defined for alpha in {{0, 1}}, got {alpha}"
        )));
    }
    let base = nstar - 2.0 * p as f64 + alpha as f64;
    if base <= 0.0 {
        return Err(Error::NonPositiveFactor { eta: nstar, factor: base });
    }
    let exponent = (2 * p + 1) as i32 - alpha as i32;
    Ok(2.0 / base.powi(exponent))
}

/// Parity-selected tail product P_order(d): `Π_1[s]` when order = 2s,
/// `Π_0[s]` when order = 2s+1. Satisfies the telescoping identity
/// sum_{i=d+1}^{N} G_order(i) = (P_order(d) − P_order(N)) / (2 order).
fn pi_factor(order: usize, d: f64) -> Result<f64> {
    let s = order / 2;
    if order % 2 == 0 {
        pi_fn(1, s, d)
    } else {
        pi_fn(0, s, d)
    }
}

/// L1 truncation-error bound for the exactly-truncated series: dropping all
/// terms with i > d_x or j > d_y of a class-(k, l) function costs at most
///
/// ```text
/// (4 v_kl / (k l pi^2)) P_k(d_x) P_l(d_y)
/// ```
///
/// in L1 over the square. Requires k, l ≥ 1 and degrees at or above the
/// smoothness orders.
pub fn l1_bound_exact_partial(
    cls: SmoothnessClass,
    v_kl: f64,
    d_x: usize,
    d_y: usize,
) -> Result<f64> {
    let SmoothnessClass { k, l } = cls;
    if k == 0 || l == 0 {
        return Err(Error::InvalidArgument(format!(
            "the truncation bound needs smoothness orders k, l >= 1, got ({k}, {l})"
        )));
    }
    for (axis, d, ord) in [("x", d_x, k), ("y", d_y, l)] {
        if d < ord {
            return Err(Error::InvalidArgument(format!(
                "truncation degree {d} on axis {axis} is below the smoothness order {ord}"
            )));
        }
    }
    let px = pi_factor(k, d_x as f64)?;
    let py = pi_factor(l, d_y as f64)?;
    Ok(4.0 * v_kl / (k as f64 * l as f64 * PI * PI) * px * py)
}

/// L1 error bound for the degree-(d_x, d_y) partial sum built from
/// quadrature coefficients on an (n_x, n_y) grid:
///
/// ```text
/// (8 V* / pi^2) ( 4/(k l A B) + 2(d_y+1)/(k A) + 2(d_x+1)/(l B) ),
/// A = (d_x−k+1)^k,  B = (d_y−l+1)^l,
/// ```
///
/// covering truncation and aliasing together through the single constant
/// V* = max(v_kl, v_k, v_l).
pub fn l1_bound_quadrature_partial(
    cls: SmoothnessClass,
    bundle: &VariationBundle,
    d_x: usize,
    d_y: usize,
    n_x: usize,
    n_y: usize,
) -> Result<f64> {
    let SmoothnessClass { k, l } = cls;
    if k == 0 || l == 0 {
        return Err(Error::InvalidArgument(format!(
            "the quadrature truncation bound needs smoothness orders k, l >= 1, got ({k}, {l})"
        )));
    }
    for (axis, d, n, ord) in [("x", d_x, n_x, k), ("y", d_y, n_y, l)] {
        if n < ord + 1 {
            return Err(Error::InvalidArgument(format!(
                "grid size {n} on axis {axis} is too small for smoothness order {ord}"
            )));
        }
        if d < ord {
            return Err(Error::InvalidArgument(format!(
                "degree {d} on axis {axis} is below the smoothness order {ord}"
            )));
        }
        if d >= n {
            return Err(Error::InvalidArgument(format!(
                "degree {d} on axis {axis} is not resolvable on {n} nodes"
            )));
        }
    }
    let a = ((d_x - k + 1) as f64).powi(k as i32);
    let b = ((d_y - l + 1) as f64).powi(l as i32);
    let (kf, lf) = (k as f64, l as f64);
    let inner = 4.0 / (kf * lf * a * b)
        + 2.0 * (d_y + 1) as f64 / (kf * a)
        + 2.0 * (d_x + 1) as f64 / (lf * b);
    Ok(8.0 * bundle.v_star() / (PI * PI) * inner)
}

/// Which of the three bound families produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Joint,
    DirectionalX,
    DirectionalY,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Joint => "joint",
            BoundKind::DirectionalX => "directional-x",
            BoundKind::DirectionalY => "directional-y",
        })
    }
}

/// The bounds applicable at index (i, j), tightest first. Empty exactly when
/// i ≤ k and j ≤ l, where no family covers the cell.
pub fn applicable_bounds(
    cls: SmoothnessClass,
    bundle: &VariationBundle,
    i: usize,
    j: usize,
) -> Vec<(BoundKind, f64)> {
    let mut out = Vec::with_capacity(3);
    if let Ok(b) = coeff_bound(cls, bundle.v_kl, i, j) {
        out.push((BoundKind::Joint, b));
    }
    if let Ok(b) = coeff_bound_directional(cls.k, bundle.v_k, i) {
        out.push((BoundKind::DirectionalX, b));
    }
    if let Ok(b) = coeff_bound_directional(cls.l, bundle.v_l, j) {
        out.push((BoundKind::DirectionalY, b));
    }
    out.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    out
}

/// The tightest applicable bound at (i, j), or None when no family covers
/// the cell. This is the envelope the compression pass prunes against.
pub fn min_applicable_bound(
    cls: SmoothnessClass,
    bundle: &VariationBundle,
    i: usize,
    j: usize,
) -> Option<f64> {
    applicable_bounds(cls, bundle, i, j).first().map(|&(_, b)| b)
}

/// A coefficient that exceeded one of its applicable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub abs_c: f64,
    pub bound: f64,
    pub ratio: f64,
    pub kind: BoundKind,
}

/// Per-cell audit record: the tightest applicable bound against the
/// computed coefficient magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCell {
    pub i: usize,
    pub j: usize,
    pub bound: f64,
    pub abs_c: f64,
    pub ratio: f64,
}

/// Outcome of a decay audit over a full coefficient matrix.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub class: SmoothnessClass,
    pub bundle: VariationBundle,
    pub i_max: usize,
    pub j_max: usize,
    /// One entry per cell with at least one applicable bound, row-major.
    pub cells: Vec<BoundCell>,
    pub violations: Vec<Violation>,
    /// Number of individual (cell, bound-family) checks performed.
    pub checked: usize,
    pub max_ratio: f64,
    /// Cell attaining `max_ratio`, if any check ran.
    pub argmax: Option<(usize, usize)>,
}

/// Coefficients this far above a zero bound are treated as floating-point
/// noise rather than violations; a genuinely violating coefficient of a
/// nonzero bound clears this margin by many orders of magnitude.
const NOISE_FLOOR: f64 = 1e-12;

/// Checks every coefficient of `c` against every bound family applicable at
/// its index: the joint bound where i ≥ k+1 and j ≥ l+1, the directional-x
/// bound where i ≥ k+1 (any j), and the directional-y bound where j ≥ l+1
/// (any i). A violation is recorded when |c| exceeds a bound by more than
/// the relative tolerance; an empty violation list is the success signal.
///
/// The matrix should hold oracle coefficients: the bounds govern exact
/// coefficients, and aliasing contamination of coarse quadrature is the
/// aliasing module's job to account for.
pub fn audit_decay(
    c: &CoeffMatrix,
    cls: SmoothnessClass,
    bundle: &VariationBundle,
    tol: f64,
) -> BoundReport {
    struct RowScan {
        cells: Vec<BoundCell>,
        violations: Vec<Violation>,
        checked: usize,
        max_ratio: f64,
        argmax: Option<(usize, usize)>,
    }

    let rows: Vec<RowScan> = (0..=c.deg_x())
        .into_par_iter()
        .map(|i| {
            let mut scan = RowScan {
                cells: Vec::new(),
                violations: Vec::new(),
                checked: 0,
                max_ratio: 0.0,
                argmax: None,
            };
            for j in 0..=c.deg_y() {
                let abs_c = c.get(i, j).abs();
                let mut tightest: Option<(f64, f64)> = None;
                for (kind, bound) in applicable_bounds(cls, bundle, i, j) {
                    scan.checked += 1;
                    let ratio = if bound > 0.0 {
                        abs_c / bound
                    } else if abs_c > NOISE_FLOOR {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    if abs_c > bound * (1.0 + tol) + NOISE_FLOOR {
                        scan.violations.push(Violation { i, j, abs_c, bound, ratio, kind });
                    }
                    if scan.argmax.is_none() || ratio > scan.max_ratio {
                        scan.max_ratio = ratio;
                        scan.argmax = Some((i, j));
                    }
                    if tightest.is_none() {
                        tightest = Some((bound, ratio)); // bounds arrive tightest first
                    }
                }
                if let Some((bound, ratio)) = tightest {
                    scan.cells.push(BoundCell { i, j, bound, abs_c, ratio });
                }
            }
            scan
        })
        .collect();

    let mut report = BoundReport {
        class: cls,
        bundle: *bundle,
        i_max: c.deg_x(),
        j_max: c.deg_y(),
        cells: Vec::new(),
        violations: Vec::new(),
        checked: 0,
        max_ratio: 0.0,
        argmax: None,
    };
    for scan in rows {
        report.cells.extend(scan.cells);
        report.violations.extend(scan.violations);
        report.checked += scan.checked;
        if scan.argmax.is_some() && (report.argmax.is_none() || scan.max_ratio > report.max_ratio)
        {
            report.max_ratio = scan.max_ratio;
            report.argmax = scan.argmax;
        }
    }
    report
}
