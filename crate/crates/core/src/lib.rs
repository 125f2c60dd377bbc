//! Matrix functions through Hermite interpolation on an annihilating polynomial.
//!
//! Given a square complex matrix `A` and a polynomial
//! `Q(z) = (z - a_1)^(α_1 + 1) ⋯ (z - a_k)^(α_k + 1)` with `Q(A) = 0`, every
//! entire function `f` satisfies `f(A) = P(A)`, where `P` is the unique
//! polynomial of degree below `deg Q` matching `f` and its first `α_p`
//! derivatives at each root `a_p`. The crate builds `P` from closed-form
//! Taylor coefficients of `1 / Q_p` (with `Q_p` the cofactor of the `p`-th
//! root), and reuses the same coefficients for
//!
//! * spectral projectors `E_p`, nilpotent parts `N_p` and the Jordan split `A = S + N`,
//! * the fundamental solutions `g_j` of `Q(d/dt) u = 0` and the solution of the
//!   forced initial-value problem `Q(d/dt) u = h`.
//!
//! ```
//! use hermite_funm::{apply_function, AnnihilatorSpec, Builtin, Matrix};
//! use num_complex::Complex64;
//!
//! let a = Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
//! let spec = AnnihilatorSpec::new(vec![
//!     (Complex64::new(1.0, 0.0), 0),
//!     (Complex64::new(-1.0, 0.0), 0),
//! ])
//! .unwrap();
//! let e = apply_function(&Builtin::Exp, &a, &spec).unwrap();
//! assert!((e[(0, 1)].re - 1f64.sinh()).abs() < 1e-14);
//! ```

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annihilator;
pub mod cli;
mod error;
pub mod hermite;
pub mod io;
pub mod matfun;
pub mod matrix;
pub mod odekernel;
pub mod poly;
pub mod quadrature;
mod roots;

pub use annihilator::{characteristic_polynomial, spec_from_matrix, verify_annihilates, AnnihilatorSpec};
pub use error::{Error, Result};
pub use hermite::{
    hermite_interpolant, taylor_coeffs_closed_form, taylor_coeffs_series, Builtin, CoeffTable,
    EntireFunction, HermiteInterpolant,
};
pub use matfun::{
    apply_function, apply_function_with, jordan_parts, mat_poly_eval, spectral_decomposition,
    EvalOptions, SpectralDecomposition,
};
pub use matrix::Matrix;
pub use odekernel::{kernel_basis, solve_ivp, ExpPoly, Forcing, IVProblem};
pub use poly::{Polynomial, PowerSeries};
