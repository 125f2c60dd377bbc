//! Adaptive composite Gauss–Legendre quadrature for complex-valued integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum bisection depth of a single panel.
pub const MAX_DEPTH: usize = 40;
/// Budget of 7-point rule applications per integral.
pub const MAX_PANELS: usize = 1 << 16;

const NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Outcome of a successful integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Sum over accepted panels of `|whole - (left + right)|`.
    pub error_estimate: f64,
    pub panels: usize,
}

/// 7-point Gauss–Legendre rule on `[a, b]`; `b < a` gives the signed integral.
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(&x, w)| f(mid + half * x) * w)
        .sum::<Complex64>()
        * half
}

/// `∫_a^b f(y) dy`, bisecting each panel until the 7-point estimate of the
/// panel and the sum over its two halves agree within the panel's share of `tol`.
///
/// Panels are refined level by level. A panel that reaches [`MAX_DEPTH`], or any
/// panel left once [`MAX_PANELS`] rules have been applied, is accepted as it
/// stands and the call fails with the resulting estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs finite limits and a positive tolerance (a={a}, b={b}, tol={tol})"
        )));
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = 0;
    if a == b {
        return Ok(Quadrature {
            value,
            error_estimate: error,
            panels,
        });
    }
    let mut failed = false;
    let mut pending = vec![(a, b, panel(&f, a, b), tol)];
    panels += 1;
    let mut depth = 0;
    while !pending.is_empty() {
        let mut next = Vec::with_capacity(2 * pending.len());
        for (lo, hi, whole, local_tol) in pending {
            let mid = 0.5 * (lo + hi);
            let left = panel(&f, lo, mid);
            let right = panel(&f, mid, hi);
            panels += 2;
            let diff = (left + right - whole).norm();
            if diff < local_tol {
                value += left + right;
                error += diff;
            } else if depth + 1 >= MAX_DEPTH || panels >= MAX_PANELS {
                failed = true;
                value += left + right;
                error += diff;
            } else {
                next.push((lo, mid, left, 0.5 * local_tol));
                next.push((mid, hi, right, 0.5 * local_tol));
            }
        }
        pending = next;
        depth += 1;
    }
    if failed || !value.is_finite() {
        return Err(Error::Quadrature {
            estimate: value,
            achieved: error,
            requested: tol,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: error,
        panels,
    })
}
