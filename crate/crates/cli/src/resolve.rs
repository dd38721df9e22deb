//! Turns command-line function references into callable targets, mixed
//! partials, and variation bundles, mapping failures onto the exit-code
//! contract: 2 for argument problems, 3 for evaluation failures, 4 when
//! variation quadrature refuses to converge.

use bicheb::{
    ast_to_function, corpus_entry, directional_variation, finite_difference_partial,
    parse_expression, vitali_variation, Axis, CorpusEntry, Error, MixedPartialSpec,
    SmoothnessClass, TargetFunction, VariationBundle, VariationEstimate,
};

use crate::CliError;

/// Default finite-difference step for partials of parsed expressions.
const FD_H_EXPR: f64 = 1e-4;

/// Default step for finite-difference remainders stacked on top of a corpus
/// entry's highest analytic partial. Deliberately coarse: when the remainder
/// order digs past the entry's smoothness the wide stencil keeps the kink
/// visible to the convergence check instead of stepping over it.
const FD_H_REMAINDER: f64 = 1e-2;

/// Maps library errors onto the exit-code contract: evaluation failures
/// (non-finite samples, domain breaches) are exit 3, everything else is a
/// misuse of arguments and exits 2.
pub fn classify(e: Error) -> CliError {
    match e {
        Error::NonFiniteSample { .. } | Error::DivisionByZero { .. } | Error::OutOfDomain { .. } => {
            CliError::Eval(e.to_string())
        }
        other => CliError::Usage(other.to_string()),
    }
}

/// A function selected by `--fn` or `--expr`, with the finite-difference
/// steps that apply to it.
pub struct ResolvedFunction {
    pub label: String,
    pub f: TargetFunction,
    pub entry: Option<CorpusEntry>,
    pub fd_h_expr: f64,
    pub fd_h_remainder: f64,
}

pub fn resolve_function(
    name: &Option<String>,
    expr: &Option<String>,
    fd_h: Option<f64>,
) -> Result<ResolvedFunction, CliError> {
    match (name, expr) {
        (Some(_), Some(_)) => {
            Err(CliError::Usage("pass either --fn or --expr, not both".into()))
        }
        (None, None) => Err(CliError::Usage(
            "no function selected: pass --fn NAME (see corpus-list) or --expr TEXT".into(),
        )),
        (Some(n), None) => {
            let entry = corpus_entry(n).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown corpus function '{n}'; run `bicheb corpus-list` for the catalogue"
                ))
            })?;
            Ok(ResolvedFunction {
                label: entry.name.to_string(),
                f: entry.f.clone(),
                entry: Some(entry),
                fd_h_expr: fd_h.unwrap_or(FD_H_EXPR),
                fd_h_remainder: fd_h.unwrap_or(FD_H_REMAINDER),
            })
        }
        (None, Some(text)) => {
            let ast = parse_expression(text)
                .map_err(|e| CliError::Usage(format!("cannot parse --expr: {e}")))?;
            Ok(ResolvedFunction {
                label: text.clone(),
                f: ast_to_function(ast),
                entry: None,
                fd_h_expr: fd_h.unwrap_or(FD_H_EXPR),
                fd_h_remainder: fd_h.unwrap_or(FD_H_REMAINDER),
            })
        }
    }
}

/// The (order_x, order_y) mixed partial of the resolved function: analytic
/// when the corpus carries it, otherwise the highest analytic partial with a
/// finite-difference remainder stacked on top (expressions are pure finite
/// differences). Remainders beyond total order 4 cannot be formed and exit 2.
pub fn resolve_partial(
    rf: &ResolvedFunction,
    order_x: usize,
    order_y: usize,
) -> Result<MixedPartialSpec, CliError> {
    let Some(entry) = &rf.entry else {
        if order_x + order_y > 4 {
            return Err(CliError::Usage(format!(
                "partial ({order_x},{order_y}) of an expression needs finite differences of \
                 total order {} beyond the supported cap of 4; use a built-in corpus function \
                 with analytic partials instead",
                order_x + order_y
            )));
        }
        return finite_difference_partial(&rf.f, order_x, order_y, rf.fd_h_expr)
            .map_err(classify);
    };

    if let Some(spec) = entry.partial(order_x, order_y) {
        return Ok(spec);
    }

    // Highest analytic base at or below the requested order. Advertised
    // partial sets are rectangles, so per-axis maxima combine.
    let ax = (0..=order_x).rev().find(|&a| entry.has_partial(a, 0)).unwrap_or(0);
    let ay = (0..=order_y).rev().find(|&b| entry.has_partial(0, b)).unwrap_or(0);
    let (ax, ay) = if entry.has_partial(ax, ay) { (ax, ay) } else { (0, 0) };
    let (rx, ry) = (order_x - ax, order_y - ay);
    if rx + ry > 4 {
        return Err(CliError::Usage(format!(
            "partial ({order_x},{order_y}) of '{}' is analytic only up to ({ax},{ay}); the \
             finite-difference remainder of total order {} exceeds the supported cap of 4",
            entry.name,
            rx + ry
        )));
    }
    let base = entry.partial(ax, ay).expect("order (0,0) always exists");
    let base_fn = TargetFunction::new(move |x, y| base.eval(x, y));
    let spec = finite_difference_partial(&base_fn, rx, ry, rf.fd_h_remainder).map_err(classify)?;
    Ok(spec.relabeled(order_x, order_y))
}

/// Where a variation bundle came from.
#[derive(Debug, Clone, PartialEq)]
pub enum BundleSource {
    ClosedForm,
    Estimated { n: usize },
}

impl BundleSource {
    pub fn tag(&self) -> String {
        match self {
            BundleSource::ClosedForm => "closed-form".into(),
            BundleSource::Estimated { n } => format!("estimated(n={n})"),
        }
    }
}

pub struct ResolvedBundle {
    pub bundle: VariationBundle,
    pub source: BundleSource,
}

/// The (V_{k,l}, V_k, V_l) bundle for smoothness class (k, l): corpus
/// closed forms when the class matches the entry's, otherwise quadrature
/// estimates on an n-point grid. A non-convergent estimate is exit 4.
pub fn resolve_bundle(
    rf: &ResolvedFunction,
    cls: SmoothnessClass,
    n: usize,
) -> Result<ResolvedBundle, CliError> {
    if let Some(entry) = &rf.entry {
        if let Some(bundle) = entry.variations {
            if entry.cls == cls {
                return Ok(ResolvedBundle { bundle, source: BundleSource::ClosedForm });
            }
        }
    }
    let estimates = estimate_bundle(rf, cls, n)?;
    for (label, est) in
        [("V_{k,l}", &estimates[0]), ("V_k[x]", &estimates[1]), ("V_l[y]", &estimates[2])]
    {
        if !est.converged {
            return Err(CliError::NonConvergence(format!(
                "variation quadrature for {label} of '{}' did not settle under grid doubling \
                 (n={}: {:.6e}, 2n: {:.6e}, 4n: {:.6e}); the requested class ({}, {}) likely \
                 exceeds the function's smoothness",
                rf.label, est.n_used, est.value, est.value_2n, est.value_4n, cls.k, cls.l
            )));
        }
    }
    let bundle =
        VariationBundle::new(estimates[0].value, estimates[1].value, estimates[2].value)
            .map_err(classify)?;
    Ok(ResolvedBundle { bundle, source: BundleSource::Estimated { n } })
}

/// The three class estimates (joint, x-directional, y-directional), whether
/// converged or not; callers decide how strict to be.
pub fn estimate_bundle(
    rf: &ResolvedFunction,
    cls: SmoothnessClass,
    n: usize,
) -> Result<[VariationEstimate; 3], CliError> {
    let joint = resolve_partial(rf, cls.k + 1, cls.l + 1)?;
    let along_x = resolve_partial(rf, cls.k + 1, 0)?;
    let along_y = resolve_partial(rf, 0, cls.l + 1)?;
    let v_kl = vitali_variation(&joint, n).map_err(classify)?;
    let v_k = directional_variation(&along_x, n, Axis::X).map_err(classify)?;
    let v_l = directional_variation(&along_y, n, Axis::Y).map_err(classify)?;
    Ok([v_kl, v_k, v_l])
}
