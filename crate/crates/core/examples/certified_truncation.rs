//! Certified coefficient decay and truncation error for `|x|^3 |y|^3`.
//!
//! Run with: `cargo run -p bicheb --example certified_truncation`

use bicheb::{coeff_bound, corpus_entry, exact_coeffs_oracle, l1_bound_exact_partial, l1_error};

fn main() -> bicheb::Result<()> {
    let entry = corpus_entry("abs_cubed").expect("built-in corpus entry");
    let cls = entry.cls; // smoothness class (2, 2)
    let v = entry.variations.expect("closed-form variations").v_kl;

    // Near-exact coefficients up to degree (16, 16).
    let c = exact_coeffs_oracle(&entry.f, 16, 16, 4)?;

    // Every coefficient with both indices past the smoothness order sits
    // under its decay envelope.
    let mut worst = f64::NEG_INFINITY;
    for i in (cls.k + 1)..=16 {
        for j in (cls.l + 1)..=16 {
            let bound = coeff_bound(cls, v, i, j)?;
            worst = worst.max(c.get(i, j).abs() / bound);
        }
    }
    assert!(worst <= 1.0, "decay envelope violated: ratio {worst}");

    // A priori L1 budget for the degree-(16, 16) truncation, next to the
    // error actually measured on a tensor Gauss-Legendre grid.
    let budget = l1_bound_exact_partial(cls, v, 16, 16)?;
    let measured = l1_error(&entry.f, &c, 200)?;
    assert!(measured <= budget);

    println!("worst |c_ij| / bound ratio: {worst:.3e}");
    println!("measured L1 error {measured:.3e} within certified budget {budget:.3e}");
    Ok(())
}
