//! Certified sparsification of coefficient matrices: zero out entries whose
//! decay-envelope bound (or observed magnitude) falls below a threshold,
//! and account for the induced L1 error with the worst-case constant
//! ∫∫ |T_i T_j| dx dy ≤ ∫∫ dx dy = 4 per unit of dropped coefficient.

use crate::cheb::{
    compute_coeffs_quadrature, exact_coeffs_oracle, l1_error, l1_norm, ChebGrid, CoeffMatrix,
    Provenance, TargetFunction,
};
use crate::decay::{min_applicable_bound, SmoothnessClass, VariationBundle};
use crate::error::{Error, Result};

/// A thresholded coefficient matrix: the kept entries, the L1 budget paid
/// for everything dropped, and enough origin metadata to rebuild the dense
/// source deterministically.
#[derive(Debug, Clone)]
pub struct SparseCoeffs {
    /// Kept entries as (i, j, value), in row-major index order.
    pub kept: Vec<(usize, usize, f64)>,
    /// 4 × the sum of bounds (or magnitudes) of the dropped entries: an a
    /// priori cap on the L1 distance between dense and sparse approximants.
    pub dropped_l1_budget: f64,
    pub deg_x: usize,
    pub deg_y: usize,
    pub provenance: Provenance,
}

impl SparseCoeffs {
    pub fn kept_count(&self) -> usize {
        self.kept.len()
    }

    pub fn total_count(&self) -> usize {
        (self.deg_x + 1) * (self.deg_y + 1)
    }

    /// Re-inflates to a dense matrix with zeros in the dropped positions;
    /// evaluation then reuses the ordinary primed-weight partial sum.
    pub fn to_dense(&self) -> CoeffMatrix {
        let mut entries = vec![0.0; self.total_count()];
        for &(i, j, v) in &self.kept {
            entries[i * (self.deg_y + 1) + j] = v;
        }
        CoeffMatrix::from_entries(self.deg_x, self.deg_y, entries, self.provenance.clone())
            .expect("kept entries lie within the recorded degree range")
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be strictly positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Drops entry (i, j) exactly when its tightest applicable decay bound is
/// below epsilon; entries outside every bound's range (i ≤ k and j ≤ l) are
/// always kept — nothing is dropped without a certificate. The budget is
/// 4 × the sum of the dropped entries' bounds, so it caps the dense-sparse
/// L1 distance whatever the true coefficients are.
pub fn threshold_by_bound(
    c: &CoeffMatrix,
    cls: SmoothnessClass,
    bundle: &VariationBundle,
    epsilon: f64,
) -> Result<SparseCoeffs> {
    check_epsilon(epsilon)?;
    let mut kept = Vec::new();
    let mut budget = 0.0;
    for i in 0..=c.deg_x() {
        for j in 0..=c.deg_y() {
            match min_applicable_bound(cls, bundle, i, j) {
                Some(bound) if bound < epsilon => budget += 4.0 * bound,
                _ => kept.push((i, j, c.get(i, j))),
            }
        }
    }
    Ok(SparseCoeffs {
        kept,
        dropped_l1_budget: budget,
        deg_x: c.deg_x(),
        deg_y: c.deg_y(),
        provenance: c.provenance().clone(),
    })
}

/// Drops entry (i, j) exactly when |c_{i,j}| < epsilon; the budget is
/// 4 × the sum of dropped magnitudes. An a posteriori companion to
/// [`threshold_by_bound`] that needs no smoothness data.
pub fn threshold_by_magnitude(c: &CoeffMatrix, epsilon: f64) -> Result<SparseCoeffs> {
    check_epsilon(epsilon)?;
    let mut kept = Vec::new();
    let mut budget = 0.0;
    for i in 0..=c.deg_x() {
        for j in 0..=c.deg_y() {
            let v = c.get(i, j);
            if v.abs() < epsilon {
                budget += 4.0 * v.abs();
            } else {
                kept.push((i, j, v));
            }
        }
    }
    Ok(SparseCoeffs {
        kept,
        dropped_l1_budget: budget,
        deg_x: c.deg_x(),
        deg_y: c.deg_y(),
        provenance: c.provenance().clone(),
    })
}

/// Measured quality of a sparsification.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionReport {
    pub kept_count: usize,
    pub total_count: usize,
    pub budget: f64,
    /// L1 distance between the dense and sparse partial sums.
    pub measured_l1_vs_dense: f64,
    /// L1 distance between the sparse partial sum and f itself.
    pub measured_l1_vs_f: f64,
    /// Whether the measurement confirms the budget:
    /// measured_l1_vs_dense ≤ budget (1 + 1e−6).
    pub sound: bool,
}

/// Rebuilds the dense source matrix from the sparse set's provenance (the
/// pipeline is deterministic, so this reproduces it exactly), then measures
/// the actual L1 cost of the dropped entries with an m×m Gauss–Legendre
/// rule and checks it against the budget.
pub fn compression_report(
    s: &SparseCoeffs,
    f: &TargetFunction,
    m: usize,
) -> Result<CompressionReport> {
    if m < 16 {
        return Err(Error::InvalidArgument(format!(
            "the L1 rule needs at least 16 points per axis, got {m}"
        )));
    }
    let dense = match s.provenance {
        Provenance::Quadrature { n_x, n_y } => {
            let grid = ChebGrid::new(n_x, n_y)?;
            compute_coeffs_quadrature(f, &grid, s.deg_x, s.deg_y)?
        }
        Provenance::Oracle { oversample } => {
            exact_coeffs_oracle(f, s.deg_x, s.deg_y, oversample)?
        }
    };
    let sparse = s.to_dense();
    let diff_entries: Vec<f64> = dense
        .entries()
        .iter()
        .zip(sparse.entries())
        .map(|(a, b)| a - b)
        .collect();
    let diff =
        CoeffMatrix::from_entries(s.deg_x, s.deg_y, diff_entries, s.provenance.clone())?;
    let measured_l1_vs_dense = l1_norm(&diff, m)?;
    let measured_l1_vs_f = l1_error(f, &sparse, m)?;
    let budget = s.dropped_l1_budget;
    Ok(CompressionReport {
        kept_count: s.kept_count(),
        total_count: s.total_count(),
        budget,
        measured_l1_vs_dense,
        measured_l1_vs_f,
        sound: measured_l1_vs_dense <= budget * (1.0 + 1e-6),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::coeff_bound;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn abs_xy_setup(deg: usize) -> (TargetFunction, CoeffMatrix, SmoothnessClass, VariationBundle)
    {
        let f = TargetFunction::new(|x: f64, y: f64| x.abs() * y.abs());
        let c = exact_coeffs_oracle(&f, deg, deg, 4).unwrap();
        let cls = SmoothnessClass { k: 0, l: 0 };
        let bundle = VariationBundle::new(PI * PI, 2.0 * PI, 2.0 * PI).unwrap();
        (f, c, cls, bundle)
    }

    #[test]
    fn tiny_threshold_drops_nothing() {
        let (_, c, cls, bundle) = abs_xy_setup(8);
        let s = threshold_by_bound(&c, cls, &bundle, 1e-300).unwrap();
        assert_eq!(s.kept_count(), s.total_count());
        assert_eq!(s.dropped_l1_budget, 0.0);
    }

    #[test]
    fn huge_threshold_keeps_only_the_unbounded_border() {
        let (_, c, cls, bundle) = abs_xy_setup(8);
        let s = threshold_by_bound(&c, cls, &bundle, 1e300).unwrap();
        // For class (0,0) only (0,0) itself has no applicable bound.
        assert_eq!(s.kept, vec![(0, 0, c.get(0, 0))]);
        assert!(s.dropped_l1_budget > 0.0);
    }

    #[test]
    fn bound_partition_matches_brute_force_enumeration() {
        let (_, c, cls, bundle) = abs_xy_setup(32);
        let eps = 1e-2;
        let s = threshold_by_bound(&c, cls, &bundle, eps).unwrap();
        let kept: std::collections::BTreeSet<(usize, usize)> =
            s.kept.iter().map(|&(i, j, _)| (i, j)).collect();
        let mut expected_budget = 0.0;
        for i in 0..=32usize {
            for j in 0..=32usize {
                // Independent arithmetic: joint bound 4 v_kl/(pi^2 i j) and
                // directional bounds 4 v/(pi^2 idx) for class (0,0).
                let mut bounds = Vec::new();
                if i >= 1 && j >= 1 {
                    bounds.push(4.0 * PI * PI / (PI * PI) / (i as f64 * j as f64));
                }
                if i >= 1 {
                    bounds.push(4.0 * 2.0 * PI / (PI * PI) / i as f64);
                }
                if j >= 1 {
                    bounds.push(4.0 * 2.0 * PI / (PI * PI) / j as f64);
                }
                let min = bounds.iter().cloned().fold(f64::INFINITY, f64::min);
                let dropped = !bounds.is_empty() && min < eps;
                assert_eq!(
                    !kept.contains(&(i, j)),
                    dropped,
                    "partition mismatch at ({i}, {j}): min bound {min}"
                );
                if dropped {
                    expected_budget += 4.0 * min;
                }
            }
        }
        assert!(!s.kept.is_empty() && s.kept_count() < s.total_count());
        assert_relative_eq!(s.dropped_l1_budget, expected_budget, max_relative = 1e-12);
    }

    #[test]
    fn magnitude_partition_matches_brute_force_filter() {
        let (_, c, _, _) = abs_xy_setup(16);
        let eps = 1e-4;
        let s = threshold_by_magnitude(&c, eps).unwrap();
        let kept: std::collections::BTreeSet<(usize, usize)> =
            s.kept.iter().map(|&(i, j, _)| (i, j)).collect();
        for i in 0..=16usize {
            for j in 0..=16usize {
                assert_eq!(kept.contains(&(i, j)), c.get(i, j).abs() >= eps);
            }
        }
        assert!(!s.kept.is_empty() && s.kept_count() < s.total_count());
    }

    #[test]
    fn single_entry_matrix_drops_to_budget_four() {
        let mut entries = vec![0.0; 3 * 4];
        entries[2 * 4 + 3] = 1.0;
        let c = CoeffMatrix::from_entries(2, 3, entries, Provenance::Quadrature {
            n_x: 8,
            n_y: 8,
        })
        .unwrap();
        let s = threshold_by_magnitude(&c, 2.0).unwrap();
        assert!(s.kept.is_empty());
        assert_abs_diff_eq!(s.dropped_l1_budget, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn kept_count_is_monotone_in_epsilon() {
        let (_, c, cls, bundle) = abs_xy_setup(24);
        let mut last_bound = usize::MAX;
        let mut last_mag = usize::MAX;
        for eps in [1e-6, 1e-4, 1e-2, 1.0] {
            let nb = threshold_by_bound(&c, cls, &bundle, eps).unwrap().kept_count();
            let nm = threshold_by_magnitude(&c, eps).unwrap().kept_count();
            assert!(nb <= last_bound);
            assert!(nm <= last_mag);
            last_bound = nb;
            last_mag = nm;
        }
    }

    #[test]
    fn dropping_one_tensor_term_costs_its_l1_mass() {
        // f = 1 + T_2(x) T_3(y); dropping only the (2,3) entry must cost
        // exactly (integral |T_2|) (integral |T_3|) = ((4 sqrt 2 - 2)/3)(5/4).
        let f = TargetFunction::new(|x: f64, y: f64| {
            1.0 + (2.0 * x * x - 1.0) * (4.0 * y * y * y - 3.0 * y)
        });
        let grid = ChebGrid::new(8, 8).unwrap();
        let c = compute_coeffs_quadrature(&f, &grid, 2, 3).unwrap();
        let s = threshold_by_magnitude(&c, 1.5).unwrap();
        assert_eq!(s.kept.len(), 1);
        assert_eq!(s.kept[0].0, 0);
        assert_eq!(s.kept[0].1, 0);
        let report = compression_report(&s, &f, 400).unwrap();
        let expected = (4.0 * 2.0f64.sqrt() - 2.0) / 3.0 * 1.25;
        assert_relative_eq!(report.measured_l1_vs_dense, expected, max_relative = 1e-3);
        assert_relative_eq!(report.measured_l1_vs_f, expected, max_relative = 1e-3);
        assert!(report.sound);
        assert!(report.measured_l1_vs_dense <= report.budget);
    }

    #[test]
    fn nothing_dropped_measures_zero() {
        let (f, c, cls, bundle) = abs_xy_setup(8);
        let s = threshold_by_bound(&c, cls, &bundle, 1e-300).unwrap();
        let report = compression_report(&s, &f, 64).unwrap();
        assert_eq!(report.measured_l1_vs_dense, 0.0);
        assert!(report.sound);
        assert_eq!(report.kept_count, report.total_count);
    }

    #[test]
    fn real_compression_stays_within_budget() {
        let (f, c, cls, bundle) = abs_xy_setup(32);
        let s = threshold_by_bound(&c, cls, &bundle, 1e-2).unwrap();
        assert!(s.kept_count() < s.total_count());
        let report = compression_report(&s, &f, 200).unwrap();
        assert!(report.sound, "measured {} > budget {}", report.measured_l1_vs_dense, report.budget);
        assert!(report.measured_l1_vs_dense > 0.0);
        assert!(report.measured_l1_vs_f > 0.0);
    }

    #[test]
    fn bound_drops_imply_magnitude_drops_when_bounds_dominate() {
        let (_, c, cls, bundle) = abs_xy_setup(32);
        let eps = 1e-2;
        let by_bound = threshold_by_bound(&c, cls, &bundle, eps).unwrap();
        let kept_by_bound: std::collections::BTreeSet<(usize, usize)> =
            by_bound.kept.iter().map(|&(i, j, _)| (i, j)).collect();
        for i in 0..=32usize {
            for j in 0..=32usize {
                if !kept_by_bound.contains(&(i, j)) {
                    let bound = min_applicable_bound(cls, &bundle, i, j).unwrap();
                    // The envelope certifies the magnitude, so a bound-based
                    // drop is always also a magnitude-based drop.
                    assert!(c.get(i, j).abs() <= bound);
                    assert!(c.get(i, j).abs() < eps);
                }
            }
        }
    }

    #[test]
    fn budgets_reject_nonpositive_thresholds() {
        let (_, c, cls, bundle) = abs_xy_setup(8);
        assert!(matches!(
            threshold_by_bound(&c, cls, &bundle, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(threshold_by_magnitude(&c, -1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bound_budget_dominates_magnitude_budget_on_the_same_set() {
        // Construct the magnitude budget over exactly the bound-dropped set
        // and compare: within the valid range each bound dominates |c|.
        let (_, c, cls, bundle) = abs_xy_setup(24);
        let s = threshold_by_bound(&c, cls, &bundle, 5e-2).unwrap();
        let kept: std::collections::BTreeSet<(usize, usize)> =
            s.kept.iter().map(|&(i, j, _)| (i, j)).collect();
        let mut magnitude_budget = 0.0;
        for i in 0..=24usize {
            for j in 0..=24usize {
                if !kept.contains(&(i, j)) {
                    magnitude_budget += 4.0 * c.get(i, j).abs();
                }
            }
        }
        assert!(s.dropped_l1_budget >= magnitude_budget);
        assert!(s.kept_count() < s.total_count());
    }

    #[test]
    fn min_bound_never_exceeds_the_joint_bound() {
        // Guard the relationship the budget relies on: the pruning envelope
        // at any index is at most the joint bound there.
        let (_, _, cls, bundle) = abs_xy_setup(8);
        let direct = coeff_bound(cls, bundle.v_kl, 3, 5).unwrap();
        let min = min_applicable_bound(cls, &bundle, 3, 5).unwrap();
        assert!(min <= direct);
    }
}
