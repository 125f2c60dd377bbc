//! Dense complex polynomials in the monomial basis and truncated power series.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold below which trailing coefficients are dropped.
const TRIM_RTOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A polynomial `Σ c_m z^m` stored densely, lowest degree first.
///
/// Always normalized: the last coefficient is nonzero, or the polynomial is the
/// single coefficient `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cutoff = TRIM_RTOL * max;
        while coeffs.last().is_some_and(|c| c.norm() <= cutoff) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![ZERO] }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z - root`
    pub fn linear_factor(root: Complex64) -> Self {
        Polynomial {
            coeffs: vec![-root, ONE],
        }
    }

    /// `z^m`
    pub fn monomial(m: usize) -> Self {
        let mut coeffs = vec![ZERO; m + 1];
        coeffs[m] = ONE;
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^m`, zero beyond the degree.
    pub fn coeff(&self, m: usize) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or(ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == ZERO
    }

    /// Largest coefficient modulus.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(m, &c)| c * m as f64)
                .collect(),
        )
    }

    /// `j`-th formal derivative.
    pub fn nth_derivative(&self, j: usize) -> Polynomial {
        (0..j).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, e: usize) -> Polynomial {
        (0..e).fold(Polynomial::one(), |acc, _| &acc * self)
    }
}

impl Default for Polynomial {
    fn default() -> Self {
        Polynomial::zero()
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|m| self.coeff(m) + rhs.coeff(m)).collect())
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|m| self.coeff(m) - rhs.coeff(m)).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-ONE)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO && !self.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match m {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{m}")?,
            }
        }
        Ok(())
    }
}

/// Truncated Taylor expansion `Σ_{n < order} c_n (z - center)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    center: Complex64,
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn new(center: Complex64, coeffs: Vec<Complex64>) -> Self {
        PowerSeries { center, coeffs }
    }

    /// The constant series `1` truncated to `order` terms.
    pub fn one(center: Complex64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order];
        if let Some(c) = coeffs.first_mut() {
            *c = ONE;
        }
        PowerSeries { center, coeffs }
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Cauchy product truncated to the shorter order. Both series must share a center.
    pub fn mul_truncated(&self, other: &PowerSeries) -> PowerSeries {
        debug_assert_eq!(self.center, other.center);
        let order = self.order().min(other.order());
        let coeffs = (0..order)
            .map(|n| (0..=n).map(|i| self.coeffs[i] * other.coeffs[n - i]).sum())
            .collect();
        PowerSeries {
            center: self.center,
            coeffs,
        }
    }

    /// Series of `1 / s` to the same order, by recursive division.
    pub fn reciprocal(&self) -> Result<PowerSeries> {
        let s0 = match self.coeffs.first() {
            Some(&c) if c != ZERO => c,
            Some(_) => return Err(Error::SingularSeries),
            None => return Ok(self.clone()),
        };
        let inv0 = s0.inv();
        let mut out: Vec<Complex64> = Vec::with_capacity(self.order());
        out.push(inv0);
        for n in 1..self.order() {
            let acc: Complex64 = (1..=n).map(|i| self.coeffs[i] * out[n - i]).sum();
            out.push(-acc * inv0);
        }
        Ok(PowerSeries {
            center: self.center,
            coeffs: out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.eval(c(2.0, 0.0)), c(3.0, 0.0));
        assert_eq!(Polynomial::zero().eval(c(3.7, -1.2)), ZERO);
        // (1+i)^3 - (1+i)^2 = (-2+2i) - 2i
        let q = Polynomial::from_real(&[0.0, 0.0, -1.0, 1.0]);
        let v = q.eval(c(1.0, 1.0));
        assert!((v - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_polynomial_evaluates_exactly() {
        let z = c(0.123456789, -9.87654321);
        assert_eq!(Polynomial::monomial(1).eval(z), z);
    }

    #[test]
    fn mul_examples() {
        let a = Polynomial::from_real(&[-1.0, 1.0]);
        let b = Polynomial::from_real(&[1.0, 1.0]);
        assert_eq!(&a * &b, Polynomial::from_real(&[-1.0, 0.0, 1.0]));
        assert!((&a * &Polynomial::zero()).is_zero());
        assert_eq!(
            &Polynomial::monomial(2) * &a,
            Polynomial::from_real(&[0.0, 0.0, -1.0, 1.0])
        );
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            Polynomial::from_real(&[-1.0, 0.0, 1.0]).derivative(),
            Polynomial::from_real(&[0.0, 2.0])
        );
        assert!(Polynomial::constant(c(4.0, 1.0)).derivative().is_zero());
        assert_eq!(
            Polynomial::from_real(&[0.0, 0.0, -1.0, 1.0]).derivative(),
            Polynomial::from_real(&[0.0, -2.0, 3.0])
        );
    }

    #[test]
    fn normalization_trims_noise() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1e-17, 0.0)]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Polynomial::new(vec![]).degree(), None);
        assert!(Polynomial::new(vec![ZERO, ZERO]).is_zero());
    }

    #[test]
    fn reciprocal_examples() {
        let s = PowerSeries::new(ZERO, vec![ONE, ONE, ZERO]);
        assert_eq!(
            s.reciprocal().unwrap().coeffs(),
            &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]
        );
        let s = PowerSeries::new(ZERO, vec![c(2.0, 0.0)]);
        assert_eq!(s.reciprocal().unwrap().coeffs(), &[c(0.5, 0.0)]);
        let s = PowerSeries::new(ONE, vec![c(2.0, 0.0), ONE]);
        let r = s.reciprocal().unwrap();
        assert_eq!(r.center(), ONE);
        assert_eq!(r.coeffs(), &[c(0.5, 0.0), c(-0.25, 0.0)]);
    }

    #[test]
    fn reciprocal_of_singular_series_fails() {
        let s = PowerSeries::new(ZERO, vec![ZERO, ONE]);
        assert!(matches!(s.reciprocal(), Err(Error::SingularSeries)));
    }

    fn coeff() -> impl Strategy<Value = Complex64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
    }

    fn poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(coeff(), 1..=7).prop_map(Polynomial::new)
    }

    proptest! {
        #[test]
        fn product_evaluates_to_product_of_values(a in poly(), b in poly(), z in coeff()) {
            let lhs = (&a * &b).eval(z);
            let rhs = a.eval(z) * b.eval(z);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn reciprocal_times_series_is_one(
            s0 in (1.0f64..2.0, -1.0f64..1.0),
            rest in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 0..8),
        ) {
            let coeffs: Vec<Complex64> = std::iter::once(s0)
                .chain(rest)
                .map(|(re, im)| Complex64::new(re, im))
                .collect();
            let s = PowerSeries::new(ZERO, coeffs);
            let prod = s.mul_truncated(&s.reciprocal().unwrap());
            let one = PowerSeries::one(ZERO, s.order());
            for (x, y) in prod.coeffs().iter().zip(one.coeffs()) {
                prop_assert!((x - y).norm() <= 1e-12);
            }
        }

        #[test]
        fn derivative_matches_central_difference(p in poly(), z in coeff()) {
            let h = 1e-6;
            let step = Complex64::new(h, 0.0);
            let fd = (p.eval(z + step) - p.eval(z - step)) / (2.0 * h);
            prop_assert!((p.derivative().eval(z) - fd).norm() <= 1e-6);
        }
    }
}
