//! Bivariate Chebyshev approximation with certified coefficient-decay and
//! truncation-error bounds for functions of limited smoothness.
//!
//! The crate computes tensor-product Chebyshev coefficients on the unit
//! square by Gauss–Chebyshev quadrature, checks the computed coefficients
//! against a priori decay envelopes driven by mixed-partial variation,
//! converts coefficient tails into L1 truncation-error budgets, verifies the
//! aliasing identity relating quadrature coefficients to exact ones, and
//! uses the same envelopes to drive certified compression of coefficient
//! grids.

pub mod aliasing;
pub mod cheb;
pub mod compression;
pub mod corpus;
pub mod decay;
pub mod error;
pub mod parser;
pub mod quad;
pub mod variation;

pub use compression::{
    compression_report, threshold_by_bound, threshold_by_magnitude, CompressionReport,
    SparseCoeffs,
};

pub use aliasing::{
    alias_expansion, alias_residual, alias_scan, fold_indices, predicted_tail_bound,
    reconstruct_quadrature_coeff, suggest_k_max, AliasExpansion, AliasScan,
};

pub use cheb::{
    chebyshev_nodes, compute_coeffs_quadrature, derivative_coeff, eval_t, exact_coeffs_oracle,
    l1_error, l1_norm, ChebGrid, CoeffMatrix, Provenance, TargetFunction,
};
pub use decay::{
    audit_decay, coeff_bound, coeff_bound_directional, gamma, l1_bound_exact_partial,
    l1_bound_quadrature_partial, min_applicable_bound, pi_fn, pi_upper, BoundKind, BoundReport,
    SmoothnessClass, VariationBundle,
};
pub use corpus::{bessel_i0, builtin_corpus, corpus_entry, kink_weight, CorpusEntry};
pub use error::{Axis, Error, Result};
pub use parser::{ast_to_function, parse_expression, Expr, Func, ParseError};
pub use variation::{
    directional_variation, finite_difference_partial, sgn, vitali_variation, MixedPartialSpec,
    PartialSource, VariationEstimate,
};
