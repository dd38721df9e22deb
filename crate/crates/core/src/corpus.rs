//! Built-in test functions with known smoothness classes, hand-computed
//! variation constants, and analytic mixed partials. These are the reference
//! targets for the decay audits, error reports, and CLI examples.

use std::f64::consts::PI;

use crate::cheb::TargetFunction;
use crate::decay::{SmoothnessClass, VariationBundle};
use crate::variation::{sgn, MixedPartialSpec};

/// A named target function bundled with everything the bound machinery
/// needs: its smoothness class, closed-form variation constants when they
/// exist, analytic mixed partials where available, and — for polynomials —
/// the exact degree pair.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub f: TargetFunction,
    pub cls: SmoothnessClass,
    /// Closed-form (V_{k,l}, V_k[x], V_l[y]) for the entry's class, when a
    /// hand evaluation exists. `None` means fall back to numeric estimation.
    pub variations: Option<VariationBundle>,
    /// Exact per-axis polynomial degree, when the entry is a polynomial.
    pub poly_degree: Option<(usize, usize)>,
    pub notes: &'static str,
    partials: fn(usize, usize) -> Option<TargetFunction>,
}

impl CorpusEntry {
    /// The analytic mixed partial of the given order, if the entry carries
    /// one. Order (0, 0) is the function itself.
    pub fn partial(&self, order_x: usize, order_y: usize) -> Option<MixedPartialSpec> {
        (self.partials)(order_x, order_y)
            .map(|g| MixedPartialSpec::analytic(order_x, order_y, g))
    }

    pub fn has_partial(&self, order_x: usize, order_y: usize) -> bool {
        (self.partials)(order_x, order_y).is_some()
    }
}

/// Modified Bessel function I_0 by its power series; converges to machine
/// precision in a handful of terms for the small arguments used here.
pub fn bessel_i0(t: f64) -> f64 {
    let q = t * t / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Chebyshev-weighted mass of a shifted kink factor:
/// integral_{-1}^{1} |t + c| / sqrt(1 - t^2) dt
///   = integral_0^pi |cos(theta) + c| dtheta
///   = 2 sqrt(1 - c^2) + c (pi - 2 arccos c)          for |c| <= 1.
pub fn kink_weight(c: f64) -> f64 {
    2.0 * (1.0 - c * c).sqrt() + c * (PI - 2.0 * c.acos())
}

fn const_one_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    Some(if order_x == 0 && order_y == 0 {
        TargetFunction::new(|_, _| 1.0)
    } else {
        TargetFunction::new(|_, _| 0.0)
    })
}

fn bilinear_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    Some(match (order_x, order_y) {
        (0, 0) => TargetFunction::new(|x, y| x * y),
        (1, 0) => TargetFunction::new(|_, y| y),
        (0, 1) => TargetFunction::new(|x, _| x),
        (1, 1) => TargetFunction::new(|_, _| 1.0),
        _ => TargetFunction::new(|_, _| 0.0),
    })
}

fn t2_deriv(order: usize, x: f64) -> f64 {
    match order {
        0 => 2.0 * x * x - 1.0,
        1 => 4.0 * x,
        2 => 4.0,
        _ => 0.0,
    }
}

fn t3_deriv(order: usize, y: f64) -> f64 {
    match order {
        0 => (4.0 * y * y - 3.0) * y,
        1 => 12.0 * y * y - 3.0,
        2 => 24.0 * y,
        3 => 24.0,
        _ => 0.0,
    }
}

fn tensor_cheb_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    Some(TargetFunction::new(move |x, y| t2_deriv(order_x, x) * t3_deriv(order_y, y)))
}

fn abs_xy_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    if order_x > 1 || order_y > 1 {
        return None;
    }
    Some(TargetFunction::new(move |x, y| {
        let fx = if order_x == 0 { x.abs() } else { sgn(x) };
        let fy = if order_y == 0 { y.abs() } else { sgn(y) };
        fx * fy
    }))
}

/// Per-axis derivatives of |t|^3: 3t|t|, then 6|t|, then 6 sgn(t).
fn cubed_factor(order: usize, t: f64) -> f64 {
    match order {
        0 => t.abs().powi(3),
        1 => 3.0 * t * t.abs(),
        2 => 6.0 * t.abs(),
        _ => 6.0 * sgn(t),
    }
}

fn abs_cubed_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    if order_x > 3 || order_y > 3 {
        return None;
    }
    Some(TargetFunction::new(move |x, y| cubed_factor(order_x, x) * cubed_factor(order_y, y)))
}

const KINK_X: f64 = 0.3;
const KINK_Y: f64 = -0.2;

fn shifted_kink_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    if order_x > 1 || order_y > 1 {
        return None;
    }
    Some(TargetFunction::new(move |x, y| {
        let u = x - KINK_X;
        let v = y - KINK_Y;
        let fx = if order_x == 0 { u.abs() } else { sgn(u) };
        let fy = if order_y == 0 { v.abs() } else { sgn(v) };
        fx * fy
    }))
}

fn exp_sum_partial(_order_x: usize, _order_y: usize) -> Option<TargetFunction> {
    Some(TargetFunction::new(|x, y| (x + y).exp()))
}

fn runge_partial(order_x: usize, order_y: usize) -> Option<TargetFunction> {
    if order_x > 2 || order_y > 2 {
        return None;
    }
    Some(TargetFunction::new(move |x, y| {
        let u = 1.0 + 25.0 * (x * x + y * y);
        match (order_x, order_y) {
            (0, 0) => u.powi(-1),
            (1, 0) => -50.0 * x * u.powi(-2),
            (0, 1) => -50.0 * y * u.powi(-2),
            (1, 1) => 5000.0 * x * y * u.powi(-3),
            (2, 0) => -50.0 * u.powi(-2) + 5000.0 * x * x * u.powi(-3),
            (0, 2) => -50.0 * u.powi(-2) + 5000.0 * y * y * u.powi(-3),
            (2, 1) => 5000.0 * y * u.powi(-3) - 750_000.0 * x * x * y * u.powi(-4),
            (1, 2) => 5000.0 * x * u.powi(-3) - 750_000.0 * x * y * y * u.powi(-4),
            _ => {
                5000.0 * u.powi(-3) - 750_000.0 * (x * x + y * y) * u.powi(-4)
                    + 150_000_000.0 * x * x * y * y * u.powi(-5)
            }
        }
    }))
}

/// The built-in corpus. Variation constants are hand evaluations of the
/// weighted integrals; the recurring ingredients are
/// integral |t| w dt = 2, integral |t|^3 w dt = 4/3,
/// integral |T_k(t)| w dt = 2 (k >= 1), and integral e^t w dt = pi I_0(1),
/// all against the Chebyshev weight w(t) = 1/sqrt(1 - t^2).
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    let i0 = bessel_i0(1.0);
    let v_exp = (PI * i0) * (PI * i0);
    vec![
        CorpusEntry {
            name: "const_one",
            f: TargetFunction::new(|_, _| 1.0),
            cls: SmoothnessClass { k: 0, l: 0 },
            variations: Some(VariationBundle { v_kl: 0.0, v_k: 0.0, v_l: 0.0 }),
            poly_degree: Some((0, 0)),
            notes: "constant 1; every variation vanishes, so every bound is zero",
            partials: const_one_partial,
        },
        CorpusEntry {
            name: "bilinear",
            f: TargetFunction::new(|x, y| x * y),
            cls: SmoothnessClass { k: 0, l: 0 },
            variations: Some(VariationBundle { v_kl: PI * PI, v_k: 2.0 * PI, v_l: 2.0 * PI }),
            poly_degree: Some((1, 1)),
            notes: "x*y = T_1(x) T_1(y); the single nonzero coefficient sits at (1,1)",
            partials: bilinear_partial,
        },
        CorpusEntry {
            name: "tensor_cheb",
            f: TargetFunction::new(|x, y| (2.0 * x * x - 1.0) * ((4.0 * y * y - 3.0) * y)),
            cls: SmoothnessClass { k: 1, l: 1 },
            variations: Some(VariationBundle { v_kl: 192.0 * PI, v_k: 8.0 * PI, v_l: 96.0 }),
            poly_degree: Some((2, 3)),
            notes: "T_2(x) T_3(y); exact coefficient 1 at (2,3) and nothing else",
            partials: tensor_cheb_partial,
        },
        CorpusEntry {
            name: "abs_xy",
            f: TargetFunction::new(|x, y| x.abs() * y.abs()),
            cls: SmoothnessClass { k: 0, l: 0 },
            variations: Some(VariationBundle { v_kl: PI * PI, v_k: 2.0 * PI, v_l: 2.0 * PI }),
            poly_degree: None,
            notes: "|x||y|; kinked along both axes, partials advertised up to (1,1)",
            partials: abs_xy_partial,
        },
        CorpusEntry {
            name: "abs_cubed",
            f: TargetFunction::new(|x, y| x.abs().powi(3) * y.abs().powi(3)),
            cls: SmoothnessClass { k: 2, l: 2 },
            variations: Some(VariationBundle {
                v_kl: 36.0 * PI * PI,
                v_k: 8.0 * PI,
                v_l: 8.0 * PI,
            }),
            poly_degree: None,
            notes: "|x|^3 |y|^3; two absolutely continuous derivatives per axis, \
                    third derivative jumps at the axes",
            partials: abs_cubed_partial,
        },
        CorpusEntry {
            name: "shifted_kink",
            f: TargetFunction::new(|x, y| (x - KINK_X).abs() * (y - KINK_Y).abs()),
            cls: SmoothnessClass { k: 0, l: 0 },
            variations: Some(VariationBundle {
                v_kl: PI * PI,
                v_k: PI * kink_weight(-KINK_Y),
                v_l: PI * kink_weight(-KINK_X),
            }),
            poly_degree: None,
            notes: "|x-0.3||y+0.2|; kink lines off the node lattice, so nothing \
                    is hidden by symmetry",
            partials: shifted_kink_partial,
        },
        CorpusEntry {
            name: "exp_sum",
            f: TargetFunction::new(|x, y| (x + y).exp()),
            cls: SmoothnessClass { k: 1, l: 1 },
            variations: Some(VariationBundle { v_kl: v_exp, v_k: v_exp, v_l: v_exp }),
            poly_degree: None,
            notes: "exp(x+y); every mixed partial equals the function itself",
            partials: exp_sum_partial,
        },
        CorpusEntry {
            name: "runge",
            f: TargetFunction::new(|x, y| 1.0 / (1.0 + 25.0 * (x * x + y * y))),
            cls: SmoothnessClass { k: 1, l: 1 },
            variations: None,
            poly_degree: None,
            notes: "1/(1+25x^2+25y^2); smooth but steep, variations estimated \
                    numerically",
            partials: runge_partial,
        },
    ]
}

/// Looks up a corpus entry by name.
pub fn corpus_entry(name: &str) -> Option<CorpusEntry> {
    builtin_corpus().into_iter().find(|e| e.name == name)
}
