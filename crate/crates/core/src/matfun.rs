//! `f(A)`, spectral projectors and the Jordan split, all evaluated from the
//! centered matrices `(A - a_p I)^q Q_p(A)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::annihilator::{verify_annihilates, AnnihilatorSpec};
use crate::error::{Error, Result};
use crate::hermite::{hermite_interpolant, CoeffTable, EntireFunction, HermiteInterpolant};
use crate::matrix::Matrix;
use crate::poly::Polynomial;

/// Default relative bound on `‖Q(A)‖_F / (1 + ‖A‖_F)^d`.
pub const DEFAULT_RESIDUAL_RTOL: f64 = 1e-8;
/// Projector norm below which a root is reported as not being an eigenvalue.
const EXTRANEOUS_PROJECTOR_NORM: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// `None` skips the annihilation check.
    pub residual_rtol: Option<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            residual_rtol: Some(DEFAULT_RESIDUAL_RTOL),
        }
    }
}

impl EvalOptions {
    pub fn unchecked() -> Self {
        EvalOptions { residual_rtol: None }
    }
}

/// Tolerance on `‖Q(A)‖_F` for relative bound `rtol`.
pub fn residual_tolerance(a: &Matrix, spec: &AnnihilatorSpec, rtol: f64) -> f64 {
    rtol * (1.0 + a.frobenius_norm()).powi(spec.degree() as i32)
}

/// Computes `‖Q(A)‖_F` and fails if it exceeds the tolerance from `opts`.
pub fn check_annihilates(a: &Matrix, spec: &AnnihilatorSpec, opts: &EvalOptions) -> Result<f64> {
    let residual = verify_annihilates(a, spec);
    if let Some(rtol) = opts.residual_rtol {
        let tolerance = residual_tolerance(a, spec, rtol);
        if !(residual <= tolerance) {
            return Err(Error::AnnihilationResidual {
                residual,
                tolerance,
                spec: spec.clone(),
            });
        }
    }
    Ok(residual)
}

/// Horner evaluation of `p(A)`.
pub fn mat_poly_eval(p: &Polynomial, a: &Matrix) -> Matrix {
    let n = a.dim();
    let mut coeffs = p.coeffs().iter().rev();
    let lead = coeffs.next().copied().unwrap_or_default();
    coeffs.fold(Matrix::scalar(n, lead), |acc, &c| {
        let mut next = acc.matmul(a);
        for i in 0..n {
            next[(i, i)] += c;
        }
        next
    })
}

/// The matrices `T_{p,q} = (A - a_p I)^q Q_p(A)` for `0 ≤ q ≤ α_p`.
///
/// Every quantity in this module is a linear combination of these, so they are
/// computed once and shared.
#[derive(Clone, Debug)]
pub struct CenteredBasis {
    spec: AnnihilatorSpec,
    terms: Vec<Vec<Matrix>>,
}

impl CenteredBasis {
    pub fn new(a: &Matrix, spec: &AnnihilatorSpec) -> Self {
        let n = a.dim();
        let k = spec.k();
        let shifted: Vec<Matrix> = spec.roots().iter().map(|r| a.shift(r.a)).collect();
        let factors: Vec<Matrix> = spec
            .roots()
            .iter()
            .zip(&shifted)
            .map(|(r, s)| s.pow(r.multiplicity()))
            .collect();

        // Q_p(A) = (Π_{j<p} F_j)(Π_{j>p} F_j); the factors commute.
        let mut prefix = Vec::with_capacity(k + 1);
        prefix.push(Matrix::identity(n));
        for f in &factors {
            let next = prefix.last().unwrap().matmul(f);
            prefix.push(next);
        }
        let mut suffix = vec![Matrix::identity(n); k + 1];
        for p in (0..k).rev() {
            suffix[p] = factors[p].matmul(&suffix[p + 1]);
        }

        let terms = (0..k)
            .map(|p| {
                let mut t = prefix[p].matmul(&suffix[p + 1]);
                let mut row = Vec::with_capacity(spec.roots()[p].multiplicity());
                for _ in 0..spec.roots()[p].alpha {
                    let next = shifted[p].matmul(&t);
                    row.push(t);
                    t = next;
                }
                row.push(t);
                row
            })
            .collect();
        CenteredBasis {
            spec: spec.clone(),
            terms,
        }
    }

    pub fn spec(&self) -> &AnnihilatorSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.terms[0][0].dim()
    }

    /// `(A - a_p I)^q Q_p(A)`
    pub fn term(&self, p: usize, q: usize) -> &Matrix {
        &self.terms[p][q]
    }

    /// `Σ_{p,q} c_{p,q} T_{p,q}`
    pub fn evaluate(&self, interpolant: &HermiteInterpolant) -> Matrix {
        let mut out = Matrix::zeros(self.dim());
        for (p, row) in self.terms.iter().enumerate() {
            for (&c, t) in interpolant.centered_coeffs(p).iter().zip(row) {
                out.add_scaled(c, t);
            }
        }
        out
    }

    pub fn apply<F: EntireFunction + ?Sized>(&self, f: &F) -> Result<Matrix> {
        Ok(self.evaluate(&hermite_interpolant(f, &self.spec)?))
    }
}

/// `f(A)` with the default annihilation check.
pub fn apply_function<F: EntireFunction + ?Sized>(f: &F, a: &Matrix, spec: &AnnihilatorSpec) -> Result<Matrix> {
    apply_function_with(f, a, spec, &EvalOptions::default())
}

pub fn apply_function_with<F: EntireFunction + ?Sized>(
    f: &F,
    a: &Matrix,
    spec: &AnnihilatorSpec,
    opts: &EvalOptions,
) -> Result<Matrix> {
    check_annihilates(a, spec, opts)?;
    CenteredBasis::new(a, spec).apply(f)
}

/// A measured invariant that exceeded its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantViolation {
    pub invariant: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
}

/// Post-hoc measurements of the projector algebra. All deviations are
/// Frobenius norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralDiagnostics {
    pub annihilation_residual: f64,
    /// `‖Σ E_p - I‖`
    pub partition_of_unity: f64,
    /// `max ‖E_p E_q - δ_pq E_p‖`
    pub idempotence: f64,
    /// `max ‖N_p^(α_p + 1)‖`
    pub nilpotency: f64,
    /// `‖S + N - A‖`
    pub reconstruction: f64,
    /// `‖SN - NS‖`
    pub commutation: f64,
    /// Roots whose projector vanishes, i.e. that are not eigenvalues of `A`.
    pub extraneous_roots: Vec<usize>,
    pub violations: Vec<InvariantViolation>,
}

impl SpectralDiagnostics {
    pub fn worst_deviation(&self) -> f64 {
        [
            self.partition_of_unity,
            self.idempotence,
            self.nilpotency,
            self.reconstruction,
            self.commutation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    spec: AnnihilatorSpec,
    projectors: Vec<Matrix>,
    nilpotents: Vec<Matrix>,
    semisimple: Matrix,
    nilpotent: Matrix,
    diagnostics: SpectralDiagnostics,
}

impl SpectralDecomposition {
    pub fn spec(&self) -> &AnnihilatorSpec {
        &self.spec
    }

    /// `E_p`
    pub fn projector(&self, p: usize) -> &Matrix {
        &self.projectors[p]
    }

    /// `N_p`
    pub fn nilpotent_part(&self, p: usize) -> &Matrix {
        &self.nilpotents[p]
    }

    pub fn projectors(&self) -> &[Matrix] {
        &self.projectors
    }

    pub fn nilpotent_parts(&self) -> &[Matrix] {
        &self.nilpotents
    }

    pub fn diagnostics(&self) -> &SpectralDiagnostics {
        &self.diagnostics
    }
}

/// `E_p = Σ_{q ≤ α_p} b_{p,q} T_{p,q}` and `N_p = Σ_{q < α_p} b_{p,q} T_{p,q+1}`,
/// followed by a check of the projector algebra.
///
/// Failed invariants are reported in the diagnostics and logged, not returned
/// as errors.
pub fn spectral_decomposition(a: &Matrix, spec: &AnnihilatorSpec) -> Result<SpectralDecomposition> {
    spectral_decomposition_with(a, spec, &EvalOptions::default())
}

pub fn spectral_decomposition_with(
    a: &Matrix,
    spec: &AnnihilatorSpec,
    opts: &EvalOptions,
) -> Result<SpectralDecomposition> {
    let residual = check_annihilates(a, spec, opts)?;
    let n = a.dim();
    let basis = CenteredBasis::new(a, spec);
    let table = CoeffTable::new(spec);

    let mut projectors = Vec::with_capacity(spec.k());
    let mut nilpotents = Vec::with_capacity(spec.k());
    let mut semisimple = Matrix::zeros(n);
    let mut nilpotent = Matrix::zeros(n);
    for (p, r) in spec.roots().iter().enumerate() {
        let b = table.row(p);
        let mut e = Matrix::zeros(n);
        for (q, &bq) in b.iter().enumerate() {
            e.add_scaled(bq, basis.term(p, q));
        }
        let mut np = Matrix::zeros(n);
        for (q, &bq) in b.iter().take(r.alpha).enumerate() {
            np.add_scaled(bq, basis.term(p, q + 1));
        }
        semisimple.add_scaled(r.a, &e);
        nilpotent.add_scaled(Complex64::new(1.0, 0.0), &np);
        projectors.push(e);
        nilpotents.push(np);
    }

    let diagnostics = measure(a, spec, residual, &projectors, &nilpotents, &semisimple, &nilpotent);
    for v in &diagnostics.violations {
        log::warn!(
            "spectral decomposition: {} deviates by {:e} (tolerance {:e})",
            v.invariant,
            v.deviation,
            v.tolerance
        );
    }
    Ok(SpectralDecomposition {
        spec: spec.clone(),
        projectors,
        nilpotents,
        semisimple,
        nilpotent,
        diagnostics,
    })
}

fn measure(
    a: &Matrix,
    spec: &AnnihilatorSpec,
    residual: f64,
    projectors: &[Matrix],
    nilpotents: &[Matrix],
    s: &Matrix,
    nil: &Matrix,
) -> SpectralDiagnostics {
    let n = a.dim();
    let nf = n as f64;
    let a_norm = a.frobenius_norm();
    let mut violations = Vec::new();
    let mut check = |invariant: &'static str, deviation: f64, tolerance: f64| {
        if !(deviation <= tolerance) {
            violations.push(InvariantViolation {
                invariant,
                deviation,
                tolerance,
            });
        }
    };

    let mut sum = Matrix::zeros(n);
    for e in projectors {
        sum.add_scaled(Complex64::new(1.0, 0.0), e);
    }
    let partition_of_unity = sum.distance(&Matrix::identity(n));
    check("sum of projectors equals identity", partition_of_unity, 1e-8 * nf);

    let e_norm = projectors.iter().map(Matrix::frobenius_norm).fold(0.0, f64::max);
    let mut idempotence: f64 = 0.0;
    for (p, ep) in projectors.iter().enumerate() {
        for (q, eq) in projectors.iter().enumerate() {
            let prod = ep.matmul(eq);
            let dev = if p == q { prod.distance(ep) } else { prod.frobenius_norm() };
            idempotence = idempotence.max(dev);
        }
    }
    check("E_p E_q = δ_pq E_p", idempotence, 1e-8 * nf * (1.0 + e_norm).powi(2));

    let mut nilpotency: f64 = 0.0;
    for (np, r) in nilpotents.iter().zip(spec.roots()) {
        let power = r.multiplicity() as i32;
        let dev = np.pow(r.multiplicity()).frobenius_norm();
        nilpotency = nilpotency.max(dev);
        check("N_p^(α_p+1) = 0", dev, 1e-7 * (1.0 + np.frobenius_norm().powi(power)));
    }

    let reconstruction = (s + nil).distance(a);
    check("A = S + N", reconstruction, 1e-8 * (1.0 + a_norm));
    let commutation = s.matmul(nil).distance(&nil.matmul(s));
    check("SN = NS", commutation, 1e-8 * (1.0 + a_norm).powi(2));

    let extraneous_roots = projectors
        .iter()
        .enumerate()
        .filter(|(_, e)| e.frobenius_norm() <= EXTRANEOUS_PROJECTOR_NORM)
        .map(|(p, _)| p)
        .collect();

    SpectralDiagnostics {
        annihilation_residual: residual,
        partition_of_unity,
        idempotence,
        nilpotency,
        reconstruction,
        commutation,
        extraneous_roots,
        violations,
    }
}

/// `(S, N)` with `S = Σ a_p E_p` semisimple and `N = Σ N_p` nilpotent.
pub fn jordan_parts(dec: &SpectralDecomposition) -> (&Matrix, &Matrix) {
    (&dec.semisimple, &dec.nilpotent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::Builtin;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(roots: &[(f64, usize)]) -> AnnihilatorSpec {
        AnnihilatorSpec::new(roots.iter().map(|&(a, alpha)| (c(a, 0.0), alpha)).collect()).unwrap()
    }

    fn m(n: usize, data: &[f64]) -> Matrix {
        Matrix::from_real(n, data).unwrap()
    }

    /// Σ_{m ≤ 30} A^m / m!
    fn taylor_expm(a: &Matrix) -> Matrix {
        let mut term = Matrix::identity(a.dim());
        let mut sum = term.clone();
        for k in 1..=30 {
            term = term.matmul(a).scale(c(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn mat_poly_eval_examples() {
        let swap = m(2, &[0.0, 1.0, 1.0, 0.0]);
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(mat_poly_eval(&p, &swap), Matrix::zeros(2));
        assert_eq!(mat_poly_eval(&Polynomial::one(), &swap), Matrix::identity(2));
        let jordan = m(2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(mat_poly_eval(&Polynomial::monomial(2), &jordan), m(2, &[1.0, 2.0, 0.0, 1.0]));
    }

    #[test]
    fn exp_of_swap_matrix() {
        let swap = m(2, &[0.0, 1.0, 1.0, 0.0]);
        let e = apply_function(&Builtin::Exp, &swap, &spec(&[(1.0, 0), (-1.0, 0)])).unwrap();
        let (ch, sh) = (1f64.cosh(), 1f64.sinh());
        assert!(e.max_abs_diff(&m(2, &[ch, sh, sh, ch])) < 1e-12);
        assert!(e.max_abs_diff(&taylor_expm(&swap)) < 1e-10);
    }

    #[test]
    fn exp_of_zero_and_jordan_block() {
        let e = apply_function(&Builtin::Exp, &Matrix::zeros(2), &spec(&[(0.0, 0)])).unwrap();
        assert_eq!(e, Matrix::identity(2));
        let jordan = m(2, &[1.0, 1.0, 0.0, 1.0]);
        let e = apply_function(&Builtin::Exp, &jordan, &spec(&[(1.0, 1)])).unwrap();
        let x = 1f64.exp();
        assert!(e.max_abs_diff(&m(2, &[x, x, 0.0, x])) < 1e-14);
        assert!(e.max_abs_diff(&taylor_expm(&jordan)) < 1e-10);
    }

    #[test]
    fn residual_check_rejects_wrong_spec() {
        let jordan = m(2, &[1.0, 1.0, 0.0, 1.0]);
        match apply_function(&Builtin::Exp, &jordan, &spec(&[(2.0, 0)])) {
            Err(Error::AnnihilationResidual { residual, .. }) => assert!((residual - 3f64.sqrt()).abs() < 1e-15),
            other => panic!("expected residual error, got {other:?}"),
        }
        // Opting out evaluates anyway.
        assert!(apply_function_with(&Builtin::Exp, &jordan, &spec(&[(2.0, 0)]), &EvalOptions::unchecked()).is_ok());
    }

    #[test]
    fn decomposition_of_jordan_block() {
        let jordan = m(2, &[1.0, 1.0, 0.0, 1.0]);
        let dec = spectral_decomposition(&jordan, &spec(&[(1.0, 1)])).unwrap();
        assert_eq!(dec.projector(0), &Matrix::identity(2));
        assert_eq!(dec.nilpotent_part(0), &m(2, &[0.0, 1.0, 0.0, 0.0]));
        let (s, n) = jordan_parts(&dec);
        assert_eq!(s, &Matrix::identity(2));
        assert_eq!(n, &m(2, &[0.0, 1.0, 0.0, 0.0]));
        assert!(dec.diagnostics().is_clean());
    }

    #[test]
    fn decomposition_of_swap_matrix() {
        let swap = m(2, &[0.0, 1.0, 1.0, 0.0]);
        let dec = spectral_decomposition(&swap, &spec(&[(1.0, 0), (-1.0, 0)])).unwrap();
        assert!(dec.projector(0).max_abs_diff(&m(2, &[0.5, 0.5, 0.5, 0.5])) < 1e-15);
        assert!(dec.projector(1).max_abs_diff(&m(2, &[0.5, -0.5, -0.5, 0.5])) < 1e-15);
        assert_eq!(dec.nilpotent_part(0), &Matrix::zeros(2));
        assert_eq!(dec.nilpotent_part(1), &Matrix::zeros(2));
        let (s, n) = jordan_parts(&dec);
        assert!(s.max_abs_diff(&swap) < 1e-15);
        assert_eq!(n, &Matrix::zeros(2));
    }

    #[test]
    fn decomposition_of_diagonal() {
        let d = m(2, &[2.0, 0.0, 0.0, 3.0]);
        let dec = spectral_decomposition(&d, &spec(&[(2.0, 0), (3.0, 0)])).unwrap();
        assert!(dec.projector(0).max_abs_diff(&m(2, &[1.0, 0.0, 0.0, 0.0])) < 1e-15);
        assert!(dec.projector(1).max_abs_diff(&m(2, &[0.0, 0.0, 0.0, 1.0])) < 1e-15);
        let (s, n) = jordan_parts(&dec);
        assert!(s.max_abs_diff(&d) < 1e-15);
        assert_eq!(n, &Matrix::zeros(2));
        assert!(dec.diagnostics().worst_deviation() < 1e-14);
    }

    #[test]
    fn extraneous_root_gets_zero_projector() {
        // Q = (z-2)(z-3)(z-5) annihilates diag(2,3); 5 is not an eigenvalue.
        let d = m(2, &[2.0, 0.0, 0.0, 3.0]);
        let dec = spectral_decomposition(&d, &spec(&[(2.0, 0), (3.0, 0), (5.0, 0)])).unwrap();
        assert_eq!(dec.diagnostics().extraneous_roots, vec![2]);
        assert!(dec.projector(2).frobenius_norm() < 1e-15);
        assert!(dec.diagnostics().is_clean());
    }

    #[test]
    fn characteristic_spec_with_larger_multiplicity() {
        // diag(1,1,2): minimal (z-1)(z-2), characteristic (z-1)^2(z-2).
        let a = Matrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let f_min = apply_function(&Builtin::Exp, &a, &spec(&[(1.0, 0), (2.0, 0)])).unwrap();
        let f_char = apply_function(&Builtin::Exp, &a, &spec(&[(1.0, 1), (2.0, 0)])).unwrap();
        assert!(f_min.max_abs_diff(&f_char) < 1e-12 * f_min.max_abs());
        let dec = spectral_decomposition(&a, &spec(&[(1.0, 1), (2.0, 0)])).unwrap();
        assert!(dec.nilpotent_part(0).frobenius_norm() < 1e-14);
        assert!(dec.diagnostics().is_clean());
    }
}
