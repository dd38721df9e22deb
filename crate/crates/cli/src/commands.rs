//! Implementations of the seven subcommands. Each returns the process exit
//! code on the success path (0 certified / 1 ran-but-uncertified) and maps
//! failures through [`CliError`].

use std::time::Instant;

use bicheb::{
    alias_scan, audit_decay, builtin_corpus, compute_coeffs_quadrature, exact_coeffs_oracle,
    l1_bound_exact_partial, l1_bound_quadrature_partial, l1_error, predicted_tail_bound,
    threshold_by_bound, threshold_by_magnitude, ChebGrid, SmoothnessClass, SparseCoeffs,
    VariationBundle,
};

use crate::emit::{doc, Cell, Emitter, Format, Json, Table};
use crate::resolve::{classify, resolve_bundle, resolve_function, BundleSource, ResolvedBundle};
use crate::{
    AliasCheckArgs, ApproxArgs, CliError, CompressArgs, DecayAuditArgs, ErrorReportArgs,
    Strategy, VariationArgs,
};

/// Residuals at or below this absolute level are certified regardless of the
/// predicted tail bound: they sit at the rounding floor of the coefficient
/// pipeline itself.
const RESIDUAL_CERT_FLOOR: f64 = 1e-10;

/// Maximum number of violations listed in a JSON report; the count fields
/// always carry the full totals.
const MAX_LISTED_VIOLATIONS: usize = 200;

fn class_json(cls: SmoothnessClass) -> Json {
    Json::Obj(vec![("k", Json::Int(cls.k as i64)), ("l", Json::Int(cls.l as i64))])
}

fn bundle_json(bundle: &VariationBundle, source: &BundleSource) -> Json {
    Json::Obj(vec![
        ("v_kl", Json::Num(bundle.v_kl)),
        ("v_k", Json::Num(bundle.v_k)),
        ("v_l", Json::Num(bundle.v_l)),
        ("source", Json::str(source.tag())),
    ])
}

fn coeff_table(entries: impl Iterator<Item = (usize, usize, f64)>) -> Table {
    let mut table = Table::new(&["i", "j", "c"]);
    for (i, j, v) in entries {
        table.push(vec![Cell::Int(i as i64), Cell::Int(j as i64), Cell::Num(v)]);
    }
    table
}

pub fn approx(a: &ApproxArgs, em: &Emitter) -> Result<i32, CliError> {
    let rf = resolve_function(&a.func.name, &a.func.expr, a.func.fd_h)?;
    let n_x = a.nx.unwrap_or(2 * a.dx + 2);
    let n_y = a.ny.unwrap_or(2 * a.dy + 2);
    let started = Instant::now();
    let grid = ChebGrid::new(n_x, n_y).map_err(classify)?;
    let c = compute_coeffs_quadrature(&rf.f, &grid, a.dx, a.dy).map_err(classify)?;

    let table = coeff_table(
        (0..=a.dx).flat_map(|i| (0..=a.dy).map(move |j| (i, j))).map(|(i, j)| (i, j, c.get(i, j))),
    );
    let meta = vec![
        ("function", Json::str(rf.label.clone())),
        ("d_x", Json::Int(a.dx as i64)),
        ("d_y", Json::Int(a.dy as i64)),
        ("n_x", Json::Int(n_x as i64)),
        ("n_y", Json::Int(n_y as i64)),
        ("entries", Json::Int(table.rows.len() as i64)),
    ];
    em.emit_pair(Format::Csv, "approx", meta, &table)?;
    em.note(&format!(
        "approx {}: {} coefficients (degrees {}x{}) from a {}x{} grid [{:.1?}]",
        rf.label,
        table.rows.len(),
        a.dx,
        a.dy,
        n_x,
        n_y,
        started.elapsed()
    ));
    Ok(0)
}

pub fn decay_audit(a: &DecayAuditArgs, em: &Emitter) -> Result<i32, CliError> {
    let rf = resolve_function(&a.func.name, &a.func.expr, a.func.fd_h)?;
    let cls = SmoothnessClass { k: a.k, l: a.l };
    let started = Instant::now();
    let rb = resolve_bundle(&rf, cls, a.variation_n)?;
    let c = exact_coeffs_oracle(&rf.f, a.imax, a.jmax, a.oversample).map_err(classify)?;
    let report = audit_decay(&c, cls, &rb.bundle, a.tol);

    // The L1 view of the same run: measured truncation error of this very
    // partial sum, and the two a priori bounds, where the class admits them.
    let l1_json = if cls.k >= 1 && cls.l >= 1 {
        let measured = l1_error(&rf.f, &c, a.l1_grid).map_err(classify)?;
        let bound_exact = l1_bound_exact_partial(cls, rb.bundle.v_kl, a.imax, a.jmax)
            .map_err(classify)?;
        let n_oracle = a.oversample * (a.imax.max(a.jmax) + 1) + 64;
        let bound_quad =
            l1_bound_quadrature_partial(cls, &rb.bundle, a.imax, a.jmax, n_oracle, n_oracle)
                .map_err(classify)?;
        Json::Obj(vec![
            ("measured_error", Json::Num(measured)),
            ("bound_truncation", Json::Num(bound_exact)),
            ("bound_quadrature", Json::Num(bound_quad)),
            ("grid", Json::Int(a.l1_grid as i64)),
        ])
    } else {
        Json::Null
    };

    let listed: Vec<Json> = report
        .violations
        .iter()
        .take(MAX_LISTED_VIOLATIONS)
        .map(|v| {
            Json::Obj(vec![
                ("i", Json::Int(v.i as i64)),
                ("j", Json::Int(v.j as i64)),
                ("abs_c", Json::Num(v.abs_c)),
                ("bound", Json::Num(v.bound)),
                ("ratio", Json::Num(v.ratio)),
                ("kind", Json::str(v.kind.to_string())),
            ])
        })
        .collect();
    let certified = report.violations.is_empty();

    let meta = vec![
        ("function", Json::str(rf.label.clone())),
        ("class", class_json(cls)),
        ("variations", bundle_json(&rb.bundle, &rb.source)),
        (
            "range",
            Json::Obj(vec![
                ("i_max", Json::Int(a.imax as i64)),
                ("j_max", Json::Int(a.jmax as i64)),
            ]),
        ),
        ("oversample", Json::Int(a.oversample as i64)),
        ("tolerance", Json::Num(a.tol)),
        ("checked", Json::Int(report.checked as i64)),
        ("cell_count", Json::Int(report.cells.len() as i64)),
        ("violation_count", Json::Int(report.violations.len() as i64)),
        ("violations_truncated", Json::Bool(report.violations.len() > MAX_LISTED_VIOLATIONS)),
        ("violations", Json::Arr(listed)),
        ("max_ratio", Json::num_or_null(report.max_ratio)),
        (
            "argmax",
            match report.argmax {
                Some((i, j)) => Json::Arr(vec![Json::Int(i as i64), Json::Int(j as i64)]),
                None => Json::Null,
            },
        ),
        ("l1", l1_json),
        ("certified", Json::Bool(certified)),
    ];

    let mut table = Table::new(&["i", "j", "bound", "abs_c", "ratio"]);
    for cell in &report.cells {
        table.push(vec![
            Cell::Int(cell.i as i64),
            Cell::Int(cell.j as i64),
            Cell::Num(cell.bound),
            Cell::Num(cell.abs_c),
            Cell::Num(cell.ratio),
        ]);
    }
    em.emit_report("decay-audit", meta, &table)?;
    em.note(&format!(
        "decay-audit {}: {} checks over {} cells, {} violations, max ratio {:.3e}{} [{:.1?}]",
        rf.label,
        report.checked,
        report.cells.len(),
        report.violations.len(),
        report.max_ratio,
        report
            .argmax
            .map(|(i, j)| format!(" at ({i},{j})"))
            .unwrap_or_default(),
        started.elapsed()
    ));
    Ok(if certified { 0 } else { 1 })
}

pub fn alias_check(a: &AliasCheckArgs, em: &Emitter) -> Result<i32, CliError> {
    let rf = resolve_function(&a.func.name, &a.func.expr, a.func.fd_h)?;
    let cls = match (a.k, a.l) {
        (Some(k), Some(l)) => SmoothnessClass { k, l },
        (None, None) => match &rf.entry {
            Some(entry) => entry.cls,
            None => {
                return Err(CliError::Usage(
                    "expressions need an explicit smoothness class: pass --k and --l".into(),
                ))
            }
        },
        _ => return Err(CliError::Usage("pass both --k and --l, or neither".into())),
    };
    let started = Instant::now();
    let rb = resolve_bundle(&rf, cls, a.variation_n)?;
    let scan =
        alias_scan(&rf.f, a.dx, a.dy, a.nx, a.ny, a.kmax, a.oversample).map_err(classify)?;
    let bound = predicted_tail_bound(cls, &rb.bundle, a.dx, a.dy, a.nx, a.ny, a.kmax)
        .map_err(classify)?;
    // An infinite tail bound (order-zero class along either axis) certifies
    // nothing: the scan still reports the measured residual, but the run
    // cannot claim success.
    let divergent = !bound.is_finite();
    let certified = !divergent && scan.max_residual <= bound + RESIDUAL_CERT_FLOOR;

    let meta = vec![
        ("function", Json::str(rf.label.clone())),
        ("n_x", Json::Int(a.nx as i64)),
        ("n_y", Json::Int(a.ny as i64)),
        ("d_x", Json::Int(a.dx as i64)),
        ("d_y", Json::Int(a.dy as i64)),
        ("k_max", Json::Int(a.kmax as i64)),
        ("oversample", Json::Int(a.oversample as i64)),
        ("class", class_json(cls)),
        ("variations", bundle_json(&rb.bundle, &rb.source)),
        ("max_residual", Json::Num(scan.max_residual)),
        (
            "argmax",
            Json::Arr(vec![Json::Int(scan.argmax.0 as i64), Json::Int(scan.argmax.1 as i64)]),
        ),
        ("predicted_tail_bound", Json::num_or_null(bound)),
        ("tail_bound_divergent", Json::Bool(divergent)),
        ("certified", Json::Bool(certified)),
    ];
    let mut table = Table::new(&[
        "n_x",
        "n_y",
        "d_x",
        "d_y",
        "k_max",
        "max_residual",
        "argmax_i",
        "argmax_j",
        "predicted_tail_bound",
        "certified",
    ]);
    table.push(vec![
        Cell::Int(a.nx as i64),
        Cell::Int(a.ny as i64),
        Cell::Int(a.dx as i64),
        Cell::Int(a.dy as i64),
        Cell::Int(a.kmax as i64),
        Cell::Num(scan.max_residual),
        Cell::Int(scan.argmax.0 as i64),
        Cell::Int(scan.argmax.1 as i64),
        Cell::Num(bound),
        Cell::Str(certified.to_string()),
    ]);
    em.emit_scalar("alias-check", meta, &table)?;
    em.note(&format!(
        "alias-check {}: max residual {:.3e} at ({},{}) vs tail bound {:.3e} -> {} [{:.1?}]",
        rf.label,
        scan.max_residual,
        scan.argmax.0,
        scan.argmax.1,
        bound,
        if certified { "certified" } else { "NOT certified" },
        started.elapsed()
    ));
    Ok(if certified { 0 } else { 1 })
}

/// Node-count rule "Ad+B" (or "Ad", "Ad-B") mapping degree to grid size.
struct NodeRule {
    mult: usize,
    offset: i64,
    text: String,
}

impl NodeRule {
    fn parse(text: &str) -> Result<NodeRule, CliError> {
        let bad = || {
            CliError::Usage(format!(
                "cannot parse node rule '{text}': expected the form '2d+2' (Ad, Ad+B or Ad-B)"
            ))
        };
        let rest = text.trim();
        let d_pos = rest.find('d').ok_or_else(bad)?;
        let mult: usize = rest[..d_pos].parse().map_err(|_| bad())?;
        let tail = &rest[d_pos + 1..];
        let offset: i64 = if tail.is_empty() { 0 } else { tail.parse().map_err(|_| bad())? };
        if mult == 0 {
            return Err(bad());
        }
        Ok(NodeRule { mult, offset, text: rest.to_string() })
    }

    fn apply(&self, d: usize) -> Result<usize, CliError> {
        let n = self.mult as i64 * d as i64 + self.offset;
        if n <= d as i64 {
            return Err(CliError::Usage(format!(
                "node rule '{}' gives n = {n} at degree {d}; need n > d to resolve the block",
                self.text
            )));
        }
        Ok(n as usize)
    }
}

pub fn error_report(a: &ErrorReportArgs, em: &Emitter) -> Result<i32, CliError> {
    if a.k < 1 || a.l < 1 {
        return Err(CliError::Usage(format!(
            "the truncation bounds require smoothness orders k, l >= 1, got ({}, {})",
            a.k, a.l
        )));
    }
    if a.dmin < a.k.max(a.l) {
        return Err(CliError::Usage(format!(
            "dmin = {} is below max(k, l) = {}; the bounds are undefined there",
            a.dmin,
            a.k.max(a.l)
        )));
    }
    if a.dmax < a.dmin {
        return Err(CliError::Usage(format!("dmax = {} is below dmin = {}", a.dmax, a.dmin)));
    }
    if a.step == 0 {
        return Err(CliError::Usage("step must be at least 1".into()));
    }
    let rule = NodeRule::parse(&a.n_rule)?;
    let rf = resolve_function(&a.func.name, &a.func.expr, a.func.fd_h)?;
    let cls = SmoothnessClass { k: a.k, l: a.l };
    let started = Instant::now();
    let rb = resolve_bundle(&rf, cls, a.variation_n)?;

    let mut table = Table::new(&["d", "err_exact", "bound_c1", "err_quad", "bound_c2"]);
    let mut all_within = true;
    for d in (a.dmin..=a.dmax).step_by(a.step) {
        let n = rule.apply(d)?;
        let grid = ChebGrid::new(n, n).map_err(classify)?;
        let c_quad = compute_coeffs_quadrature(&rf.f, &grid, d, d).map_err(classify)?;
        let c_exact = exact_coeffs_oracle(&rf.f, d, d, a.oversample).map_err(classify)?;
        let err_exact = l1_error(&rf.f, &c_exact, a.l1_grid).map_err(classify)?;
        let err_quad = l1_error(&rf.f, &c_quad, a.l1_grid).map_err(classify)?;
        let bound_c1 = l1_bound_exact_partial(cls, rb.bundle.v_kl, d, d).map_err(classify)?;
        let bound_c2 =
            l1_bound_quadrature_partial(cls, &rb.bundle, d, d, n, n).map_err(classify)?;
        all_within &= err_exact <= bound_c1 && err_quad <= bound_c2;
        table.push(vec![
            Cell::Int(d as i64),
            Cell::Num(err_exact),
            Cell::Num(bound_c1),
            Cell::Num(err_quad),
            Cell::Num(bound_c2),
        ]);
    }
    let meta = vec![
        ("function", Json::str(rf.label.clone())),
        ("class", class_json(cls)),
        ("variations", bundle_json(&rb.bundle, &rb.source)),
        ("d_min", Json::Int(a.dmin as i64)),
        ("d_max", Json::Int(a.dmax as i64)),
        ("step", Json::Int(a.step as i64)),
        ("n_rule", Json::str(a.n_rule.clone())),
        ("l1_grid", Json::Int(a.l1_grid as i64)),
        ("certified", Json::Bool(all_within)),
    ];
    em.emit_single(Format::Csv, "error-report", meta, &table)?;
    em.note(&format!(
        "error-report {}: {} degrees, every error within bounds: {} [{:.1?}]",
        rf.label,
        table.rows.len(),
        all_within,
        started.elapsed()
    ));
    Ok(if all_within { 0 } else { 1 })
}

pub fn compress(a: &CompressArgs, em: &Emitter) -> Result<i32, CliError> {
    let rf = resolve_function(&a.func.name, &a.func.expr, a.func.fd_h)?;
    let started = Instant::now();
    let c = exact_coeffs_oracle(&rf.f, a.dx, a.dy, a.oversample).map_err(classify)?;

    let (sparse, class_field, variations_field): (SparseCoeffs, Json, Json) = match a.strategy {
        Strategy::Bound => {
            let cls = match (a.k, a.l) {
                (Some(k), Some(l)) => SmoothnessClass { k, l },
                (None, None) => match &rf.entry {
                    Some(entry) => entry.cls,
                    None => {
                        return Err(CliError::Usage(
                            "bound-driven compression of an expression needs --k and --l".into(),
                        ))
                    }
                },
                _ => {
                    return Err(CliError::Usage("pass both --k and --l, or neither".into()));
                }
            };
            let rb: ResolvedBundle = resolve_bundle(&rf, cls, a.variation_n)?;
            let sparse =
                threshold_by_bound(&c, cls, &rb.bundle, a.epsilon).map_err(classify)?;
            (sparse, class_json(cls), bundle_json(&rb.bundle, &rb.source))
        }
        Strategy::Magnitude => {
            let sparse = threshold_by_magnitude(&c, a.epsilon).map_err(classify)?;
            (sparse, Json::Null, Json::Null)
        }
    };
    let report = bicheb::compression_report(&sparse, &rf.f, a.l1_grid).map_err(classify)?;

    let table = coeff_table(sparse.kept.iter().copied());
    let meta = vec![
        ("function", Json::str(rf.label.clone())),
        (
            "strategy",
            Json::str(match a.strategy {
                Strategy::Bound => "bound",
                Strategy::Magnitude => "magnitude",
            }),
        ),
        ("epsilon", Json::Num(a.epsilon)),
        ("class", class_field),
        ("variations", variations_field),
        ("d_x", Json::Int(a.dx as i64)),
        ("d_y", Json::Int(a.dy as i64)),
        ("oversample", Json::Int(a.oversample as i64)),
        ("kept", Json::Int(report.kept_count as i64)),
        ("total", Json::Int(report.total_count as i64)),
        ("dropped_l1_budget", Json::Num(report.budget)),
        ("measured_l1_vs_dense", Json::Num(report.measured_l1_vs_dense)),
        ("measured_l1_vs_f", Json::Num(report.measured_l1_vs_f)),
        ("l1_grid", Json::Int(a.l1_grid as i64)),
        ("sound", Json::Bool(report.sound)),
    ];
    em.emit_pair(Format::Csv, "compress", meta, &table)?;
    em.note(&format!(
        "compress {}: kept {}/{} entries at epsilon {:.1e}; dense-sparse L1 {:.3e} within \
         budget {:.3e}: {} [{:.1?}]",
        rf.label,
        report.kept_count,
        report.total_count,
        a.epsilon,
        report.measured_l1_vs_dense,
        report.budget,
        report.sound,
        started.elapsed()
    ));
    Ok(if report.sound { 0 } else { 1 })
}

pub fn corpus_list(em: &Emitter) -> Result<i32, CliError> {
    let entries = builtin_corpus();
    let functions: Vec<Json> = entries
        .iter()
        .map(|e| {
            Json::Obj(vec![
                ("name", Json::str(e.name)),
                ("class", class_json(e.cls)),
                (
                    "variations",
                    match &e.variations {
                        Some(b) => Json::Obj(vec![
                            ("v_kl", Json::Num(b.v_kl)),
                            ("v_k", Json::Num(b.v_k)),
                            ("v_l", Json::Num(b.v_l)),
                        ]),
                        None => Json::Null,
                    },
                ),
                (
                    "poly_degree",
                    match e.poly_degree {
                        Some((dx, dy)) => {
                            Json::Arr(vec![Json::Int(dx as i64), Json::Int(dy as i64)])
                        }
                        None => Json::Null,
                    },
                ),
                ("notes", Json::str(e.notes)),
            ])
        })
        .collect();

    let mut table = Table::new(&["name", "k", "l", "v_kl", "v_k", "v_l", "poly_dx", "poly_dy", "notes"]);
    for e in &entries {
        let (vk, vl, vkl) = match &e.variations {
            Some(b) => (Cell::Num(b.v_k), Cell::Num(b.v_l), Cell::Num(b.v_kl)),
            None => (Cell::Str(String::new()), Cell::Str(String::new()), Cell::Str(String::new())),
        };
        let (px, py) = match e.poly_degree {
            Some((dx, dy)) => (Cell::Int(dx as i64), Cell::Int(dy as i64)),
            None => (Cell::Str(String::new()), Cell::Str(String::new())),
        };
        table.push(vec![
            Cell::Str(e.name.to_string()),
            Cell::Int(e.cls.k as i64),
            Cell::Int(e.cls.l as i64),
            vkl,
            vk,
            vl,
            px,
            py,
            Cell::Str(e.notes.to_string()),
        ]);
    }

    match em.format.unwrap_or(Format::Json) {
        Format::Json => em.primary(
            &doc(
                "corpus-list",
                vec![
                    ("count", Json::Int(functions.len() as i64)),
                    ("functions", Json::Arr(functions)),
                ],
            )
            .render(),
        )?,
        Format::Csv => em.primary(&table.to_csv())?,
    }
    em.note(&format!("corpus-list: {} functions", entries.len()));
    Ok(0)
}

pub fn variation(a: &VariationArgs, em: &Emitter) -> Result<i32, CliError> {
    let rf = resolve_function(&a.func.name, &a.func.expr, a.func.fd_h)?;
    let cls = SmoothnessClass { k: a.k, l: a.l };
    let started = Instant::now();
    let estimates = crate::resolve::estimate_bundle(&rf, cls, a.n)?;
    let closed = rf
        .entry
        .as_ref()
        .and_then(|e| if e.cls == cls { e.variations } else { None });
    let closed_values = [closed.map(|b| b.v_kl), closed.map(|b| b.v_k), closed.map(|b| b.v_l)];

    let mut fields = vec![
        ("function", Json::str(rf.label.clone())),
        ("class", class_json(cls)),
        ("n", Json::Int(a.n as i64)),
    ];
    for ((key, est), closed_value) in
        [("v_kl", &estimates[0]), ("v_k", &estimates[1]), ("v_l", &estimates[2])]
            .into_iter()
            .zip(closed_values)
    {
        fields.push((
            key,
            Json::Obj(vec![
                ("value", Json::Num(est.value)),
                ("value_2n", Json::Num(est.value_2n)),
                ("value_4n", Json::Num(est.value_4n)),
                ("converged", Json::Bool(est.converged)),
                (
                    "closed_form",
                    closed_value.map(Json::Num).unwrap_or(Json::Null),
                ),
            ]),
        ));
    }
    let all_converged = estimates.iter().all(|e| e.converged);
    fields.push(("converged", Json::Bool(all_converged)));

    let mut table =
        Table::new(&["k", "l", "n", "v_kl", "v_k", "v_l", "converged"]);
    table.push(vec![
        Cell::Int(a.k as i64),
        Cell::Int(a.l as i64),
        Cell::Int(a.n as i64),
        Cell::Num(estimates[0].value),
        Cell::Num(estimates[1].value),
        Cell::Num(estimates[2].value),
        Cell::Str(all_converged.to_string()),
    ]);
    em.emit_scalar("variation", fields, &table)?;
    em.note(&format!(
        "variation {}: V_kl {:.6e}, V_k {:.6e}, V_l {:.6e}, converged: {} [{:.1?}]",
        rf.label,
        estimates[0].value,
        estimates[1].value,
        estimates[2].value,
        all_converged,
        started.elapsed()
    ));
    if all_converged {
        Ok(0)
    } else {
        let stuck = [("V_{k,l}", &estimates[0]), ("V_k[x]", &estimates[1]), ("V_l[y]", &estimates[2])]
            .into_iter()
            .filter(|(_, est)| !est.converged)
            .map(|(label, est)| {
                format!(
                    "{label} (n={}: {:.6e}, 2n: {:.6e}, 4n: {:.6e})",
                    est.n_used, est.value, est.value_2n, est.value_4n
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        Err(CliError::NonConvergence(format!(
            "variation quadrature for '{}' at class ({}, {}) did not settle under grid doubling: {stuck}",
            rf.label, a.k, a.l
        )))
    }
}
