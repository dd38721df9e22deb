//! Gauss–Legendre rules on [-1, 1], used for the unweighted L1 error
//! measurements. Nodes are found by Newton iteration on the three-term
//! recurrence; weights follow from the derivative identity
//! w = 2 / ((1 - x^2) P_n'(x)^2).

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// nodes in ascending order.
///
/// Exact for polynomials of degree <= 2n - 1.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    // Roots come in +/- pairs; solve the upper half and mirror.
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi-style initial guess, accurate enough for Newton to
        // converge in a handful of steps at any practical n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and its derivative at z via the recurrence.
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // The middle root of an odd rule is exactly zero.
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}
