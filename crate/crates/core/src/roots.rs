//! Durand–Kerner simultaneous root iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

const MAX_ITERATIONS: usize = 500;
const MOVEMENT_RTOL: f64 = 1e-13;
/// Multiple of the Horner rounding bound at which a residual counts as zero.
const BACKWARD_ERROR_FACTOR: f64 = 8.0;

/// All `deg p` complex roots of `p`, with multiplicity.
pub(crate) fn durand_kerner(p: &Polynomial) -> Result<Vec<Complex64>> {
    let n = match p.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(n) => n,
    };
    let lead = p.coeff(n);
    let monic: Vec<Complex64> = p.coeffs().iter().map(|&c| c / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    let abs_coeffs: Vec<f64> = monic.iter().map(|c| c.norm()).collect();

    // Fujiwara-style bound on the root moduli sets the circle radius.
    let radius = (1..=n)
        .map(|m| abs_coeffs[n - m].powf(1.0 / m as f64))
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let centroid = -monic[n - 1] / n as f64;
    let offset = std::f64::consts::FRAC_1_SQRT_2;
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / n as f64 + offset;
            centroid + Complex64::from_polar(radius, angle)
        })
        .collect();

    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c);
    let rounding_bound = |x: Complex64| {
        let r = x.norm();
        let magnitude = abs_coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c);
        BACKWARD_ERROR_FACTOR * n as f64 * f64::EPSILON * magnitude
    };

    let mut movement = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        movement = 0.0;
        for i in 0..n {
            let zi = z[i];
            let denom: Complex64 = z
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| zi - zj)
                .product();
            let step = if denom.norm() > 0.0 {
                eval(zi) / denom
            } else {
                // Coincident iterates: nudge apart.
                Complex64::new(radius, radius) * 1e-8
            };
            z[i] = zi - step;
            movement = movement.max(step.norm());
        }
        let scale = 1.0 + z.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if movement < MOVEMENT_RTOL * scale {
            return Ok(z);
        }
        // Iterates at the rounding floor of the evaluation cannot move much closer.
        if z.iter().all(|&x| eval(x).norm() <= rounding_bound(x)) {
            return Ok(z);
        }
    }
    Err(Error::RootsNotConverged {
        iterations: MAX_ITERATIONS,
        movement,
        last: z,
    })
}
