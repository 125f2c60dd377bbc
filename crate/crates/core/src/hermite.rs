//! Taylor coefficients of `1/Q_p` and the Hermite interpolant `P(f(z), z)`.
//!
//! For each root `a_p`, `b_{p,n}` is the `n`-th Taylor coefficient of `1/Q_p`
//! at `a_p`. The interpolant is assembled in centered form
//!
//! ```text
//! P(z) = Σ_p Σ_{q ≤ α_p} c_{p,q} (z - a_p)^q Q_p(z),   c_{p,q} = Σ_{j ≤ q} f^(j)(a_p)/j! · b_{p,q-j}
//! ```
//!
//! which is `Q` times the principal part of `f/Q`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::annihilator::AnnihilatorSpec;
use crate::error::{Error, Result};
use crate::poly::{Polynomial, PowerSeries};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An entire function known through its derivatives.
///
/// Implementations are called reentrantly and must not rely on interior state.
pub trait EntireFunction: Send + Sync {
    /// `f^(order)(at)`
    fn derivative_at(&self, order: usize, at: Complex64) -> Result<Complex64>;
}

/// Built-in entire functions with closed-form derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    Exp,
    /// `z ↦ e^{t z}`
    ExpScaled(f64),
    Sin,
    Cos,
    Sinh,
    Cosh,
    Poly(Polynomial),
}

impl EntireFunction for Builtin {
    fn derivative_at(&self, order: usize, at: Complex64) -> Result<Complex64> {
        let v = match self {
            Builtin::Exp => at.exp(),
            Builtin::ExpScaled(t) => Complex64::new(t.powi(order as i32), 0.0) * (at * t).exp(),
            Builtin::Sin => match order % 4 {
                0 => at.sin(),
                1 => at.cos(),
                2 => -at.sin(),
                _ => -at.cos(),
            },
            Builtin::Cos => match order % 4 {
                0 => at.cos(),
                1 => -at.sin(),
                2 => -at.cos(),
                _ => at.sin(),
            },
            Builtin::Sinh if order.is_multiple_of(2) => at.sinh(),
            Builtin::Sinh => at.cosh(),
            Builtin::Cosh if order.is_multiple_of(2) => at.cosh(),
            Builtin::Cosh => at.sinh(),
            Builtin::Poly(p) => p.nth_derivative(order).eval(at),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Oracle(format!("{self} has non-finite derivative {order} at {at}")))
        }
    }
}

impl<F> EntireFunction for F
where
    F: Fn(usize, Complex64) -> Complex64 + Send + Sync,
{
    fn derivative_at(&self, order: usize, at: Complex64) -> Result<Complex64> {
        Ok(self(order, at))
    }
}

/// Parses a comma-separated list of complex numbers (`1`, `-2.5`, `1+2i`, ...).
pub(crate) fn parse_complex_list(s: &str) -> Option<Vec<Complex64>> {
    s.split(',')
        .map(|part| part.trim().parse::<Complex64>().ok())
        .collect()
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts `exp`, `exp:t=<real>`, `sin`, `cos`, `sinh`, `cosh` and `poly:<c0,c1,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Selector(s.to_string());
        match s {
            "exp" => return Ok(Builtin::Exp),
            "sin" => return Ok(Builtin::Sin),
            "cos" => return Ok(Builtin::Cos),
            "sinh" => return Ok(Builtin::Sinh),
            "cosh" => return Ok(Builtin::Cosh),
            _ => {}
        }
        if let Some(t) = s.strip_prefix("exp:t=") {
            let t: f64 = t.trim().parse().map_err(|_| bad())?;
            return if t.is_finite() { Ok(Builtin::ExpScaled(t)) } else { Err(bad()) };
        }
        if let Some(list) = s.strip_prefix("poly:") {
            let coeffs = parse_complex_list(list).ok_or_else(bad)?;
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(bad());
            }
            return Ok(Builtin::Poly(Polynomial::new(coeffs)));
        }
        Err(bad())
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Exp => write!(f, "exp"),
            Builtin::ExpScaled(t) => write!(f, "exp:t={t}"),
            Builtin::Sin => write!(f, "sin"),
            Builtin::Cos => write!(f, "cos"),
            Builtin::Sinh => write!(f, "sinh"),
            Builtin::Cosh => write!(f, "cosh"),
            Builtin::Poly(p) => {
                write!(f, "poly:")?;
                for (i, c) in p.coeffs().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

/// `C(alpha + beta, alpha)` by the multiplicative recurrence.
fn binomial(alpha: usize, beta: usize) -> f64 {
    (1..=beta).fold(1.0, |acc, i| acc * (alpha + i) as f64 / i as f64)
}

/// `b_{p,0..=n_max}` from the closed form
///
/// ```text
/// b_{p,n} = (-1)^n Σ_{|β| = n} Π_{j≠p} C(α_j + β_j, α_j) / (a_p - a_j)^{α_j + 1 + β_j}
/// ```
///
/// where `β` ranges over all compositions of `n` into the `k - 1` indices `j ≠ p`.
pub fn taylor_coeffs_closed_form(spec: &AnnihilatorSpec, p: usize, n_max: usize) -> Result<Vec<Complex64>> {
    let ap = spec.root(p)?.a;
    // factors[j][β] = C(α_j + β, α_j) / (a_p - a_j)^{α_j + 1 + β}
    let factors: Vec<Vec<Complex64>> = spec
        .roots()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != p)
        .map(|(_, r)| {
            let inv = (ap - r.a).inv();
            let base = inv.powu(r.multiplicity() as u32);
            let mut pow = base;
            (0..=n_max)
                .map(|beta| {
                    let v = pow * binomial(r.alpha, beta);
                    pow *= inv;
                    v
                })
                .collect()
        })
        .collect();

    fn compositions(factors: &[Vec<Complex64>], remaining: usize, acc: Complex64) -> Complex64 {
        match factors.split_first() {
            None if remaining == 0 => acc,
            None => ZERO,
            Some((last, [])) => acc * last[remaining],
            Some((head, rest)) => (0..=remaining)
                .map(|beta| compositions(rest, remaining - beta, acc * head[beta]))
                .sum(),
        }
    }

    Ok((0..=n_max)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            compositions(&factors, n, ONE) * sign
        })
        .collect())
}

/// `b_{p,0..=n_max}` by expanding `Q_p` as a power series at `a_p` and
/// inverting it term by term. Independent of [`taylor_coeffs_closed_form`].
pub fn taylor_coeffs_series(spec: &AnnihilatorSpec, p: usize, n_max: usize) -> Result<Vec<Complex64>> {
    let ap = spec.root(p)?.a;
    let order = n_max + 1;
    let mut qp = PowerSeries::one(ap, order);
    for (j, r) in spec.roots().iter().enumerate() {
        if j == p {
            continue;
        }
        // z - a_j = (a_p - a_j) + (z - a_p)
        let mut lin = vec![ZERO; order];
        lin[0] = ap - r.a;
        if order > 1 {
            lin[1] = ONE;
        }
        let lin = PowerSeries::new(ap, lin);
        for _ in 0..r.multiplicity() {
            qp = qp.mul_truncated(&lin);
        }
    }
    Ok(qp.reciprocal()?.into_coeffs())
}

/// Which route computes `b_{p,n}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CoeffMethod {
    #[default]
    ClosedForm,
    Series,
}

/// `b_{p,n}` for every root `p` and `0 ≤ n ≤ α_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    rows: Vec<Vec<Complex64>>,
}

impl CoeffTable {
    pub fn new(spec: &AnnihilatorSpec) -> Self {
        Self::with_method(spec, CoeffMethod::ClosedForm).expect("valid specs have invertible cofactors")
    }

    pub fn with_method(spec: &AnnihilatorSpec, method: CoeffMethod) -> Result<Self> {
        let rows = spec
            .roots()
            .iter()
            .enumerate()
            .map(|(p, r)| match method {
                CoeffMethod::ClosedForm => taylor_coeffs_closed_form(spec, p, r.alpha),
                CoeffMethod::Series => taylor_coeffs_series(spec, p, r.alpha),
            })
            .collect::<Result<_>>()?;
        Ok(CoeffTable { rows })
    }

    pub fn row(&self, p: usize) -> &[Complex64] {
        &self.rows[p]
    }

    pub fn get(&self, p: usize, n: usize) -> Complex64 {
        self.rows[p][n]
    }
}

/// `(z - a_p)^q Q_p(z)` expanded.
pub fn centered_term(spec: &AnnihilatorSpec, p: usize, q: usize) -> Result<Polynomial> {
    let a = spec.root(p)?.a;
    Ok(&Polynomial::linear_factor(a).pow(q) * &spec.cofactor(p)?)
}

/// The Hermite interpolant of `f` on the roots of `Q`, kept in centered form
/// with a cached monomial expansion.
#[derive(Clone, Debug)]
pub struct HermiteInterpolant {
    spec: AnnihilatorSpec,
    table: CoeffTable,
    terms: Vec<Vec<Complex64>>,
    expanded: Polynomial,
}

impl HermiteInterpolant {
    pub fn spec(&self) -> &AnnihilatorSpec {
        &self.spec
    }

    pub fn coeff_table(&self) -> &CoeffTable {
        &self.table
    }

    /// `c_{p,q}` for `q = 0..=α_p`.
    pub fn centered_coeffs(&self, p: usize) -> &[Complex64] {
        &self.terms[p]
    }

    pub fn expanded(&self) -> &Polynomial {
        &self.expanded
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.expanded.eval(z)
    }
}

/// Combines scaled derivatives `f^(j)(a_p)/j!` with `b_{p,·}` into `c_{p,q}`.
pub(crate) fn centered_from_taylor(taylor: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    (0..b.len())
        .map(|q| (0..=q).map(|j| taylor[j] * b[q - j]).sum())
        .collect()
}

pub fn hermite_interpolant<F: EntireFunction + ?Sized>(f: &F, spec: &AnnihilatorSpec) -> Result<HermiteInterpolant> {
    hermite_interpolant_with(f, spec, CoeffMethod::ClosedForm)
}

pub fn hermite_interpolant_with<F: EntireFunction + ?Sized>(
    f: &F,
    spec: &AnnihilatorSpec,
    method: CoeffMethod,
) -> Result<HermiteInterpolant> {
    let table = CoeffTable::with_method(spec, method)?;
    let mut terms = Vec::with_capacity(spec.k());
    let mut expanded = Polynomial::zero();
    for (p, r) in spec.roots().iter().enumerate() {
        let mut factorial = 1.0;
        let taylor = (0..=r.alpha)
            .map(|j| {
                if j > 0 {
                    factorial *= j as f64;
                }
                Ok(f.derivative_at(j, r.a)? / factorial)
            })
            .collect::<Result<Vec<_>>>()?;
        let c = centered_from_taylor(&taylor, table.row(p));
        let shift = Polynomial::linear_factor(r.a);
        let mut basis = spec.cofactor(p)?;
        for &cq in &c {
            expanded = &expanded + &basis.scale(cq);
            basis = &basis * &shift;
        }
        terms.push(c);
    }
    Ok(HermiteInterpolant {
        spec: spec.clone(),
        table,
        terms,
        expanded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(roots: &[(f64, usize)]) -> AnnihilatorSpec {
        AnnihilatorSpec::new(roots.iter().map(|&(a, alpha)| (c(a, 0.0), alpha)).collect()).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn closed_form_examples() {
        let s = spec(&[(0.0, 2)]);
        assert_eq!(taylor_coeffs_closed_form(&s, 0, 2).unwrap(), vec![ONE, ZERO, ZERO]);
        let s = spec(&[(1.0, 0), (-1.0, 0)]);
        assert!(close(&taylor_coeffs_closed_form(&s, 0, 1).unwrap(), &[c(0.5, 0.0), c(-0.25, 0.0)], 1e-15));
        let s = spec(&[(0.0, 1), (1.0, 0)]);
        assert!(close(&taylor_coeffs_closed_form(&s, 0, 1).unwrap(), &[c(-1.0, 0.0), c(-1.0, 0.0)], 1e-15));
        assert!(close(&taylor_coeffs_closed_form(&s, 1, 0).unwrap(), &[ONE], 1e-15));
        // 1/z^2 at z = 1: 1 - 2(z-1) + 3(z-1)^2
        assert!(close(
            &taylor_coeffs_closed_form(&s, 1, 2).unwrap(),
            &[ONE, c(-2.0, 0.0), c(3.0, 0.0)],
            1e-14
        ));
    }

    #[test]
    fn series_examples() {
        let s = spec(&[(0.0, 2)]);
        assert_eq!(taylor_coeffs_series(&s, 0, 2).unwrap(), vec![ONE, ZERO, ZERO]);
        let s = spec(&[(1.0, 0), (-1.0, 0)]);
        assert!(close(&taylor_coeffs_series(&s, 0, 1).unwrap(), &[c(0.5, 0.0), c(-0.25, 0.0)], 1e-15));
        let s = spec(&[(0.0, 1), (1.0, 0)]);
        assert!(close(&taylor_coeffs_series(&s, 0, 1).unwrap(), &[c(-1.0, 0.0), c(-1.0, 0.0)], 1e-15));
        assert!(matches!(taylor_coeffs_series(&s, 2, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(0, 5), 1.0);
        assert_eq!(binomial(2, 3), 10.0);
        assert_eq!(binomial(3, 0), 1.0);
    }

    #[test]
    fn interpolant_of_exp_on_two_points() {
        let p = hermite_interpolant(&Builtin::Exp, &spec(&[(1.0, 0), (-1.0, 0)])).unwrap();
        let e = p.expanded();
        assert_eq!(e.degree(), Some(1));
        assert!((e.coeff(0) - c(1.5430806348152437, 0.0)).norm() < 1e-14);
        assert!((e.coeff(1) - c(1.1752011936438014, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn interpolant_reproduces_low_degree_polynomials() {
        let f = Polynomial::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.25, -1.0)]);
        let s = AnnihilatorSpec::new(vec![(c(0.3, 0.1), 1), (c(-1.0, 0.5), 0), (c(1.0, -1.0), 0)]).unwrap();
        let p = hermite_interpolant(&Builtin::Poly(f.clone()), &s).unwrap();
        for m in 0..4 {
            assert!((p.expanded().coeff(m) - f.coeff(m)).norm() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn single_root_gives_taylor_polynomial() {
        let p = hermite_interpolant(&Builtin::Exp, &spec(&[(0.0, 2)])).unwrap();
        assert!(close(p.expanded().coeffs(), &[ONE, ONE, c(0.5, 0.0)], 1e-15));
    }

    #[test]
    fn builtin_derivatives_match_finite_differences() {
        let h = 1e-5;
        let at = c(0.7, -1.1);
        for f in [
            Builtin::Exp,
            Builtin::ExpScaled(-0.6),
            Builtin::Sin,
            Builtin::Cos,
            Builtin::Sinh,
            Builtin::Cosh,
            Builtin::Poly(Polynomial::from_real(&[1.0, -2.0, 0.5, 0.25])),
        ] {
            for j in 1..6 {
                let fd = (f.derivative_at(j - 1, at + h).unwrap() - f.derivative_at(j - 1, at - h).unwrap())
                    / (2.0 * h);
                let exact = f.derivative_at(j, at).unwrap();
                assert!((fd - exact).norm() < 1e-5, "{f} order {j}");
            }
        }
    }

    #[test]
    fn selectors_parse_and_display() {
        assert_eq!("exp".parse::<Builtin>().unwrap(), Builtin::Exp);
        assert_eq!("exp:t=-0.5".parse::<Builtin>().unwrap(), Builtin::ExpScaled(-0.5));
        assert_eq!("cosh".parse::<Builtin>().unwrap(), Builtin::Cosh);
        assert_eq!(
            "poly:1,0,-2".parse::<Builtin>().unwrap(),
            Builtin::Poly(Polynomial::from_real(&[1.0, 0.0, -2.0]))
        );
        assert_eq!(
            "poly:1+2i,3".parse::<Builtin>().unwrap(),
            Builtin::Poly(Polynomial::new(vec![c(1.0, 2.0), c(3.0, 0.0)]))
        );
        for bad in ["tan", "exp:t=", "exp:t=inf", "poly:", "poly:1,x", ""] {
            assert!(matches!(bad.parse::<Builtin>(), Err(Error::Selector(_))), "{bad}");
        }
        for f in ["exp", "exp:t=2.5", "sin", "poly:1+0i,2+0i"] {
            assert_eq!(f.parse::<Builtin>().unwrap().to_string(), f);
        }
    }

    #[test]
    fn closure_oracles_are_entire_functions() {
        let f = |_: usize, a: Complex64| a.exp();
        let p = hermite_interpolant(&f, &spec(&[(1.0, 0), (-1.0, 0)])).unwrap();
        assert!((p.eval(ONE) - c(1f64.exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn oracle_failure_propagates() {
        struct Failing;
        impl EntireFunction for Failing {
            fn derivative_at(&self, _: usize, _: Complex64) -> Result<Complex64> {
                Err(Error::Oracle("unavailable".into()))
            }
        }
        assert!(matches!(hermite_interpolant(&Failing, &spec(&[(0.0, 0)])), Err(Error::Oracle(_))));
    }
}
