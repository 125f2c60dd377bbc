//! Kernel functions `g_j` of `Q(d/dt)` and the solution of `Q(d/dt) u = h`.
//!
//! The `g_j` are the coefficients of `P(e^{tz}, z) = Σ_j g_j(t) z^j`. They form
//! the fundamental system with `g_j^(i)(0) = δ_ij`, and
//!
//! ```text
//! u(t) = Σ_j u^(j)(0) g_j(t) + ∫_0^t g_{d-1}(t - y) h(y) dy.
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::annihilator::AnnihilatorSpec;
use crate::error::{Error, Result};
use crate::hermite::{centered_term, parse_complex_list, CoeffTable};
use crate::poly::Polynomial;
use crate::quadrature::integrate;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// One summand `e^{rate·t} · poly(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub rate: Complex64,
    pub poly: Polynomial,
}

/// An exponential-polynomial `Σ e^{a t} r(t)` with pairwise distinct rates.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

impl ExpPoly {
    /// Merges rates closer than the default tolerance `1e-8 · (1 + max|a|)`.
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        let scale = 1.0 + terms.iter().map(|t| t.rate.norm()).fold(0.0, f64::max);
        Self::with_tolerance(terms, crate::annihilator::SEPARATION_RTOL * scale)
    }

    /// Merges rates within `tol` of an earlier rate, dropping zero polynomials.
    pub fn with_tolerance(terms: Vec<ExpTerm>, tol: f64) -> Self {
        let mut merged: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            match merged.iter_mut().find(|m| (m.rate - term.rate).norm() <= tol) {
                Some(m) => m.poly = &m.poly + &term.poly,
                None => merged.push(term),
            }
        }
        merged.retain(|t| !t.poly.is_zero());
        ExpPoly { terms: merged }
    }

    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    /// `e^{rate·t} · poly(t)`
    pub fn term(rate: Complex64, poly: Polynomial) -> Self {
        Self::new(vec![ExpTerm { rate, poly }])
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let tc = Complex64::new(t, 0.0);
        self.terms
            .iter()
            .map(|term| (term.rate * t).exp() * term.poly.eval(tc))
            .sum()
    }

    /// Termwise `(a, r) ↦ (a, r' + a r)`.
    pub fn derivative(&self) -> ExpPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm {
                rate: t.rate,
                poly: &t.poly.derivative() + &t.poly.scale(t.rate),
            })
            .collect();
        Self::new(terms)
    }

    pub fn scale(&self, s: Complex64) -> ExpPoly {
        Self::new(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    rate: t.rate,
                    poly: t.poly.scale(s),
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        Self::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    /// Largest coefficient modulus over all polynomial parts.
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.poly.max_coeff_norm()).fold(0.0, f64::max)
    }

    /// `Σ_m coeffs[m] · (d/dt)^m self`, together with the largest coefficient
    /// of the individual summands (for scaling comparisons against zero).
    pub fn apply_operator(&self, operator: &Polynomial) -> (ExpPoly, f64) {
        let mut acc = ExpPoly::zero();
        let mut scale: f64 = 0.0;
        let mut deriv = self.clone();
        for (m, &c) in operator.coeffs().iter().enumerate() {
            if m > 0 {
                deriv = deriv.derivative();
            }
            let summand = deriv.scale(c);
            scale = scale.max(summand.max_coeff_norm());
            acc = acc.add(&summand);
        }
        (acc, scale)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "exp(({})t)·[{}]", t.rate, t.poly)?;
        }
        Ok(())
    }
}

/// `g_0, …, g_{d-1}` as exponential-polynomials.
///
/// With `c_{p,q,m}` the coefficient of `z^m` in `(z - a_p)^q Q_p(z)`,
/// `g_m(t) = Σ_{p,q} c_{p,q,m} e^{a_p t} Σ_{j ≤ q} b_{p,q-j} t^j / j!`.
pub fn kernel_basis(spec: &AnnihilatorSpec) -> Vec<ExpPoly> {
    let d = spec.degree();
    let table = CoeffTable::new(spec);
    let mut parts: Vec<Vec<ExpTerm>> = vec![Vec::with_capacity(spec.k()); d];
    for (p, r) in spec.roots().iter().enumerate() {
        let b = table.row(p);
        let mut per_power = vec![Polynomial::zero(); d];
        for q in 0..=r.alpha {
            // Σ_{j ≤ q} b_{p,q-j} t^j / j!
            let mut factorial = 1.0;
            let time_poly = Polynomial::new(
                (0..=q)
                    .map(|j| {
                        if j > 0 {
                            factorial *= j as f64;
                        }
                        b[q - j] / factorial
                    })
                    .collect(),
            );
            let term = centered_term(spec, p, q).expect("root index in range");
            for (m, slot) in per_power.iter_mut().enumerate() {
                let c = term.coeff(m);
                if c != Complex64::new(0.0, 0.0) {
                    *slot = &*slot + &time_poly.scale(c);
                }
            }
        }
        for (m, poly) in per_power.into_iter().enumerate() {
            parts[m].push(ExpTerm { rate: r.a, poly });
        }
    }
    let tol = spec.separation_tolerance();
    parts
        .into_iter()
        .map(|terms| ExpPoly::with_tolerance(terms, tol))
        .collect()
}

type ForcingFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Right-hand side `h` of `Q(d/dt) u = h`.
///
/// `h` must be continuous; the quadrature gives no guarantee otherwise.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    Const(Complex64),
    Cos,
    Sin,
    /// `y ↦ e^{c y}`
    Exp(Complex64),
    Poly(Polynomial),
    Custom(ForcingFn),
}

impl Forcing {
    pub fn custom<F: Fn(f64) -> Complex64 + Send + Sync + 'static>(f: F) -> Self {
        Forcing::Custom(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        match self {
            Forcing::Zero => Complex64::new(0.0, 0.0),
            Forcing::Const(c) => *c,
            Forcing::Cos => Complex64::new(y.cos(), 0.0),
            Forcing::Sin => Complex64::new(y.sin(), 0.0),
            Forcing::Exp(c) => (c * y).exp(),
            Forcing::Poly(p) => p.eval(Complex64::new(y, 0.0)),
            Forcing::Custom(f) => f(y),
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Custom(_) => write!(f, "Custom(..)"),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "zero"),
            Forcing::Const(c) => write!(f, "const:{},{}", c.re, c.im),
            Forcing::Cos => write!(f, "cos"),
            Forcing::Sin => write!(f, "sin"),
            Forcing::Exp(c) => write!(f, "exp:{},{}", c.re, c.im),
            Forcing::Poly(p) => {
                write!(f, "poly:")?;
                for (i, c) in p.coeffs().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            Forcing::Custom(_) => write!(f, "custom"),
        }
    }
}

fn parse_re_im(s: &str) -> Option<Complex64> {
    let (re, im) = s.split_once(',')?;
    let z = Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?);
    z.is_finite().then_some(z)
}

impl FromStr for Forcing {
    type Err = Error;

    /// Accepts `zero`, `const:<re,im>`, `cos`, `sin`, `exp:<re,im>` and `poly:<c0,c1,...>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Selector(s.to_string());
        match s {
            "zero" => return Ok(Forcing::Zero),
            "cos" => return Ok(Forcing::Cos),
            "sin" => return Ok(Forcing::Sin),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("const:") {
            return parse_re_im(rest).map(Forcing::Const).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix("exp:") {
            return parse_re_im(rest).map(Forcing::Exp).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let coeffs = parse_complex_list(rest).ok_or_else(bad)?;
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(bad());
            }
            return Ok(Forcing::Poly(Polynomial::new(coeffs)));
        }
        Err(bad())
    }
}

/// `Q(d/dt) u = h` with `u^(j)(0)` given for `0 ≤ j < d`.
#[derive(Clone, Debug)]
pub struct IVProblem {
    spec: AnnihilatorSpec,
    init: Vec<Complex64>,
    forcing: Forcing,
    kernels: Vec<ExpPoly>,
}

impl IVProblem {
    pub fn new(spec: AnnihilatorSpec, init: Vec<Complex64>, forcing: Forcing) -> Result<Self> {
        if init.len() != spec.degree() {
            return Err(Error::DimensionMismatch {
                expected: spec.degree(),
                got: init.len(),
            });
        }
        if init.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("initial values"));
        }
        let kernels = kernel_basis(&spec);
        Ok(IVProblem {
            spec,
            init,
            forcing,
            kernels,
        })
    }

    pub fn spec(&self) -> &AnnihilatorSpec {
        &self.spec
    }

    pub fn init(&self) -> &[Complex64] {
        &self.init
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn kernels(&self) -> &[ExpPoly] {
        &self.kernels
    }

    /// `Σ_j u^(j)(0) g_j(t)`
    pub fn homogeneous(&self, t: f64) -> Complex64 {
        self.init
            .iter()
            .zip(&self.kernels)
            .map(|(&u, g)| u * g.eval(t))
            .sum()
    }
}

/// `u(t)` for real `t` of either sign. The forcing integral is skipped for zero
/// forcing and otherwise evaluated by adaptive Gauss–Legendre quadrature.
pub fn solve_ivp(prob: &IVProblem, t: f64, quad_tol: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrature tolerance must be positive, got {quad_tol}")));
    }
    let homogeneous = prob.homogeneous(t);
    if prob.forcing.is_zero() {
        return Ok(homogeneous);
    }
    let kernel = prob.kernels.last().expect("degree is at least one");
    let forcing = &prob.forcing;
    match integrate(|y| kernel.eval(t - y) * forcing.eval(y), 0.0, t, quad_tol) {
        Ok(q) => Ok(homogeneous + q.value),
        Err(Error::Quadrature {
            estimate,
            achieved,
            requested,
        }) => Err(Error::Quadrature {
            estimate: homogeneous + estimate,
            achieved,
            requested,
        }),
        Err(e) => Err(e),
    }
}
