//! End-to-end contract of the `bicheb` binary: exit codes, artifact
//! formats, sidecar placement, determinism across reruns and thread counts,
//! and agreement between the corpus and expression front ends.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bicheb"))
        .args(args)
        .output()
        .expect("bicheb runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn assert_code(out: &Output, expected: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "{what}: expected exit {expected}, got {:?}; stderr: {}",
        out.status.code(),
        stderr(out)
    );
}

#[test]
fn exit_codes_follow_the_contract() {
    let cases: &[(&[&str], i32, &str)] = &[
        (&["approx", "--fn", "const_one", "--dx", "2", "--dy", "2", "--quiet"], 0, "success"),
        (
            &["approx", "--fn", "const_one", "--dx", "2", "--dy", "2", "--quiet", "--out",
              "/nonexistent-dir/artifact.csv"],
            1,
            "unwritable output path",
        ),
        (&["approx", "--fn", "no_such_fn", "--dx", "2", "--dy", "2"], 2, "unknown corpus name"),
        (
            &["approx", "--fn", "abs_xy", "--expr", "x*y", "--dx", "2", "--dy", "2"],
            2,
            "conflicting function selectors",
        ),
        (
            &["alias-check", "--fn", "abs_xy", "--dx", "8", "--dy", "4", "--nx", "8", "--ny", "8",
              "--quiet"],
            2,
            "degree not resolvable on the grid",
        ),
        (
            &["error-report", "--fn", "abs_cubed", "--k", "2", "--l", "2", "--dmin", "1",
              "--dmax", "8", "--quiet"],
            2,
            "sweep starting below the smoothness order",
        ),
        (
            &["error-report", "--fn", "abs_cubed", "--k", "2", "--l", "2", "--dmin", "4",
              "--dmax", "8", "--n-rule", "d", "--quiet"],
            2,
            "node rule that cannot resolve the degree",
        ),
        (
            &["alias-check", "--expr", "x*y", "--dx", "2", "--dy", "2", "--nx", "4", "--ny", "4",
              "--quiet"],
            2,
            "expression without an explicit class",
        ),
        (
            &["decay-audit", "--expr", "x*y", "--k", "2", "--l", "2", "--imax", "8", "--jmax",
              "8", "--quiet"],
            2,
            "expression class beyond the finite-difference order cap",
        ),
        (
            &["approx", "--expr", "1/(x-x)", "--dx", "2", "--dy", "2", "--quiet"],
            3,
            "division by zero at the nodes",
        ),
        (
            &["decay-audit", "--fn", "abs_xy", "--k", "2", "--l", "2", "--imax", "8", "--jmax",
              "8", "--quiet"],
            4,
            "variation quadrature that cannot settle",
        ),
    ];
    for (args, expected, what) in cases {
        let out = run(args);
        assert_code(&out, *expected, what);
        if *expected != 0 {
            assert!(
                stderr(&out).contains("error"),
                "{what}: non-zero exit must explain itself on stderr"
            );
        }
    }
}

#[test]
fn artifacts_are_byte_identical_across_reruns_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();

    let variants = [
        ("a", vec!["--threads", "1"]),
        ("b", vec!["--threads", "1"]),
        ("c", vec!["--threads", "4"]),
    ];
    for (tag, extra) in &variants {
        let mut args = vec![
            "approx", "--fn", "abs_cubed", "--dx", "12", "--dy", "12", "--quiet", "--out",
        ];
        let out_path = path(&format!("approx-{tag}.csv"));
        args.push(&out_path);
        args.extend(extra.iter().copied());
        assert_code(&run(&args), 0, "approx rerun");

        let mut args = vec![
            "decay-audit", "--fn", "abs_xy", "--k", "0", "--l", "0", "--imax", "12", "--jmax",
            "12", "--format", "json", "--quiet", "--out",
        ];
        let out_path = path(&format!("audit-{tag}.json"));
        args.push(&out_path);
        args.extend(extra.iter().copied());
        assert_code(&run(&args), 0, "decay-audit rerun");
    }

    for (stem, exts) in [("approx", ["csv", "json"]), ("audit", ["json", "csv"])] {
        for ext in exts {
            let a = std::fs::read(path(&format!("{stem}-a.{ext}"))).unwrap();
            let b = std::fs::read(path(&format!("{stem}-b.{ext}"))).unwrap();
            let c = std::fs::read(path(&format!("{stem}-c.{ext}"))).unwrap();
            assert_eq!(a, b, "{stem} {ext} artifact differs between identical reruns");
            assert_eq!(a, c, "{stem} {ext} artifact depends on the thread count");
        }
    }
}

#[test]
fn expression_front_end_matches_the_corpus_entry() {
    let by_name = run(&["approx", "--fn", "abs_xy", "--dx", "8", "--dy", "8", "--quiet"]);
    let by_expr =
        run(&["approx", "--expr", "abs(x)*abs(y)", "--dx", "8", "--dy", "8", "--quiet"]);
    assert_code(&by_name, 0, "approx by corpus name");
    assert_code(&by_expr, 0, "approx by expression");
    assert_eq!(
        stdout(&by_name),
        stdout(&by_expr),
        "abs(x)*abs(y) must reproduce the abs_xy coefficient table byte for byte"
    );
}

#[test]
fn json_artifacts_declare_schema_and_command() {
    let cases: &[(&str, &[&str])] = &[
        ("approx", &["approx", "--fn", "bilinear", "--dx", "2", "--dy", "2", "--format", "json"]),
        (
            "decay-audit",
            &["decay-audit", "--fn", "abs_xy", "--k", "0", "--l", "0", "--imax", "8", "--jmax",
              "8"],
        ),
        (
            "alias-check",
            &["alias-check", "--fn", "tensor_cheb", "--dx", "4", "--dy", "4", "--nx", "8",
              "--ny", "8"],
        ),
        (
            "error-report",
            &["error-report", "--fn", "abs_cubed", "--k", "2", "--l", "2", "--dmin", "4",
              "--dmax", "8", "--format", "json"],
        ),
        (
            "compress",
            &["compress", "--fn", "abs_xy", "--dx", "8", "--dy", "8", "--epsilon", "1e-2",
              "--format", "json"],
        ),
        ("corpus-list", &["corpus-list"]),
        ("variation", &["variation", "--fn", "abs_xy", "--k", "0", "--l", "0", "--n", "64"]),
    ];
    for (command, args) in cases {
        let mut args = args.to_vec();
        args.push("--quiet");
        let out = run(&args);
        assert_code(&out, 0, command);
        let text = stdout(&out);
        assert!(
            text.contains("\"schema\": 1") && text.contains(&format!("\"command\": \"{command}\"")),
            "{command}: JSON artifact must declare schema 1 and its command;\n{text}"
        );
    }
}

#[test]
fn decay_audit_json_keeps_cells_in_the_csv_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("audit.json");
    let out = run(&[
        "decay-audit", "--fn", "abs_xy", "--k", "0", "--l", "0", "--imax", "12", "--jmax", "12",
        "--format", "json", "--quiet", "--out", json_path.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "decay-audit to file");

    let json = std::fs::read_to_string(&json_path).unwrap();
    assert!(
        !json.contains("\"rows\""),
        "decay-audit JSON must summarize; the per-cell table belongs to the CSV sidecar"
    );
    let cell_count: usize = json
        .lines()
        .find_map(|l| l.trim().strip_prefix("\"cell_count\": "))
        .and_then(|v| v.trim_end_matches(',').parse().ok())
        .expect("cell_count field");

    let csv = std::fs::read_to_string(json_path.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("i,j,bound,abs_c,ratio"));
    assert_eq!(
        csv.lines().count(),
        cell_count + 1,
        "CSV sidecar must carry one row per audited cell plus the header"
    );
}

#[test]
fn compress_csv_primary_carries_a_json_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sparse.csv");
    let out = run(&[
        "compress", "--fn", "abs_xy", "--dx", "8", "--dy", "8", "--epsilon", "1e-2", "--quiet",
        "--out", csv_path.to_str().unwrap(),
    ]);
    assert_code(&out, 0, "compress to file");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().next(), Some("i,j,c"));
    let meta = std::fs::read_to_string(csv_path.with_extension("json")).unwrap();
    for field in ["\"schema\": 1", "\"kept\"", "\"dropped_l1_budget\"", "\"sound\": true"] {
        assert!(meta.contains(field), "compress JSON sidecar misses {field}:\n{meta}");
    }
}

#[test]
fn corpus_list_names_every_entry() {
    let out = run(&["corpus-list", "--format", "csv", "--quiet"]);
    assert_code(&out, 0, "corpus-list");
    let text = stdout(&out);
    for name in [
        "const_one", "bilinear", "tensor_cheb", "abs_xy", "abs_cubed", "shifted_kink", "exp_sum",
        "runge",
    ] {
        assert!(text.contains(name), "corpus-list omits {name}:\n{text}");
    }
    assert_eq!(text.lines().count(), 9, "eight entries plus a header line");
}

#[test]
fn variation_reports_closed_forms_alongside_estimates() {
    let out = run(&["variation", "--fn", "abs_xy", "--k", "0", "--l", "0", "--n", "64", "--quiet"]);
    assert_code(&out, 0, "variation with a matching closed form");
    let text = stdout(&out);
    assert!(
        text.contains("\"closed_form\": 9.8696044010893580e0"),
        "variation must print the closed-form V_00 = pi^2 next to the estimate:\n{text}"
    );
    assert!(text.contains("\"converged\": true"), "estimates at n = 64 converge:\n{text}");
}

#[test]
fn alias_check_accepts_expressions_with_an_explicit_class() {
    let out = run(&[
        "alias-check", "--expr", "exp(x)*exp(y)", "--k", "1", "--l", "1", "--fd-h", "0.01",
        "--dx", "6", "--dy", "6", "--nx", "8", "--ny", "8", "--variation-n", "64", "--quiet",
    ]);
    assert_code(&out, 0, "alias-check on an expression");
    let text = stdout(&out);
    assert!(
        text.contains("\"certified\": true") && text.contains("\"tail_bound_divergent\": false"),
        "a smooth separable exponential must certify its aliasing residual:\n{text}"
    );
}

#[test]
fn alias_check_flags_the_divergent_tail_for_order_zero_classes() {
    let out = run(&[
        "alias-check", "--fn", "abs_xy", "--dx", "4", "--dy", "4", "--nx", "8", "--ny", "8",
        "--quiet",
    ]);
    // abs_xy sits in class (0, 0): the fold-tail sum has no finite bound, so
    // the residual cannot be certified against it.
    assert_code(&out, 1, "divergent tail bound cannot certify");
    let text = stdout(&out);
    assert!(
        text.contains("\"predicted_tail_bound\": null")
            && text.contains("\"tail_bound_divergent\": true"),
        "order-zero classes must surface the divergent tail explicitly:\n{text}"
    );
}

#[test]
fn quiet_silences_the_progress_note() {
    let noisy = run(&["approx", "--fn", "const_one", "--dx", "2", "--dy", "2"]);
    let quiet = run(&["approx", "--fn", "const_one", "--dx", "2", "--dy", "2", "--quiet"]);
    assert_code(&noisy, 0, "approx without --quiet");
    assert_code(&quiet, 0, "approx with --quiet");
    assert!(!stderr(&noisy).is_empty(), "progress note expected on stderr");
    assert!(stderr(&quiet).is_empty(), "--quiet must silence stderr");
}

#[test]
fn stdout_mode_never_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let before: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(before.is_empty());
    let out = Command::new(env!("CARGO_BIN_EXE_bicheb"))
        .current_dir(dir.path())
        .args(["approx", "--fn", "const_one", "--dx", "2", "--dy", "2", "--quiet"])
        .output()
        .expect("bicheb runs");
    assert_code(&out, 0, "approx to stdout");
    let after: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(
        after.is_empty(),
        "stdout mode must not leave artifacts behind in the working directory"
    );
}

#[test]
fn error_report_node_rules_shape_the_measured_quadrature_error() {
    // The node rule moves only the measured quadrature error: the exact
    // columns ignore the grid entirely, and the quadrature bound holds for
    // every admissible grid, so it is grid-free by construction.
    let coarse = run(&[
        "error-report", "--fn", "abs_cubed", "--k", "2", "--l", "2", "--dmin", "4", "--dmax",
        "8", "--quiet",
    ]);
    let fine = run(&[
        "error-report", "--fn", "abs_cubed", "--k", "2", "--l", "2", "--dmin", "4", "--dmax",
        "8", "--n-rule", "4d", "--quiet",
    ]);
    assert_code(&coarse, 0, "error-report with the default node rule");
    assert_code(&fine, 0, "error-report with a finer node rule");

    let parse = |text: &str| -> Vec<Vec<f64>> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let coarse = parse(&stdout(&coarse));
    let fine = parse(&stdout(&fine));
    assert_eq!(coarse.len(), 2);
    for (c, f) in coarse.iter().zip(&fine) {
        assert_eq!(c[0], f[0], "same degree sweep");
        assert_eq!(c[1], f[1], "exact-truncation error ignores the node rule");
        assert_eq!(c[2], f[2], "exact-truncation bound ignores the node rule");
        assert_eq!(c[4], f[4], "the a priori quadrature bound is grid-free");
        let (drift_coarse, drift_fine) = ((c[3] - c[1]).abs(), (f[3] - f[1]).abs());
        assert!(
            drift_fine < drift_coarse,
            "a finer grid must pull the quadrature error toward the exact one \
             (coarse drift {drift_coarse:.3e}, fine drift {drift_fine:.3e})"
        );
    }
}

#[test]
fn help_documents_the_expression_grammar_and_exit_codes() {
    let out = run(&["--help"]);
    assert_code(&out, 0, "--help");
    let text = stdout(&out);
    for needle in ["approx", "decay-audit", "alias-check", "error-report", "compress",
                   "corpus-list", "variation"] {
        assert!(text.contains(needle), "--help misses subcommand {needle}");
    }
    let long = run(&["help"]);
    let text = stdout(&long);
    assert!(
        text.contains("expr") || text.contains("grammar"),
        "long help should mention the expression front end:\n{text}"
    );
}

#[test]
fn version_flag_prints_and_exits_zero() {
    let out = run(&["--version"]);
    assert_code(&out, 0, "--version");
    assert!(stdout(&out).starts_with("bicheb "));
}

/// The artifact written for a non-convergent variation run must still exist
/// (exit 4 reports the failure; the numbers that triggered it are data).
#[test]
fn variation_non_convergence_still_emits_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("variation.json");
    let out = run(&[
        "variation", "--fn", "abs_xy", "--k", "2", "--l", "2", "--n", "64", "--quiet", "--out",
        path.to_str().unwrap(),
    ]);
    assert_code(&out, 4, "class above the function's smoothness");
    let text = std::fs::read_to_string(&path).expect("artifact written before the failure exit");
    assert!(
        text.contains("\"converged\": false"),
        "the artifact must record which estimate failed to settle:\n{text}"
    );
    assert!(
        Path::new(&path).exists(),
        "exit 4 still leaves the diagnostic artifact on disk"
    );
}
