//! Random generators and independent oracles shared by the integration tests.
//!
//! Nothing here goes through the interpolation machinery: the expm oracle is a
//! plain Taylor sum and the ODE oracle is RK4 on the companion system.

#![allow(dead_code)]

use hermite_funm::{AnnihilatorSpec, Matrix, Polynomial};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn uniform_complex(rng: &mut ChaCha8Rng, half_width: f64) -> Complex64 {
    c(rng.gen_range(-half_width..half_width), rng.gen_range(-half_width..half_width))
}

/// Uniform point in the closed disk of the given radius.
pub fn in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Roots in `|a| ≤ radius` with pairwise distance ≥ `separation`,
/// `k ≤ max_k`, `α ≤ max_alpha`, and total degree ≤ `max_degree`.
pub fn random_spec(
    rng: &mut ChaCha8Rng,
    max_k: usize,
    max_alpha: usize,
    radius: f64,
    separation: f64,
    max_degree: usize,
) -> AnnihilatorSpec {
    loop {
        let k = rng.gen_range(1..=max_k);
        let mut roots: Vec<(Complex64, usize)> = Vec::with_capacity(k);
        let mut attempts = 0;
        while roots.len() < k && attempts < 1000 {
            attempts += 1;
            let a = in_disk(rng, radius);
            if roots.iter().all(|(b, _)| (a - b).norm() >= separation) {
                roots.push((a, rng.gen_range(0..=max_alpha)));
            }
        }
        let degree: usize = roots.iter().map(|(_, alpha)| alpha + 1).sum();
        if roots.len() == k && degree <= max_degree {
            return AnnihilatorSpec::new(roots).unwrap();
        }
    }
}

/// Dense complex matrix of size `1..=max_n` with Frobenius norm drawn from `(0, max_norm]`.
pub fn random_matrix(rng: &mut ChaCha8Rng, max_n: usize, max_norm: f64) -> Matrix {
    let n = rng.gen_range(1..=max_n);
    let m = Matrix::new(n, (0..n * n).map(|_| uniform_complex(rng, 1.0)).collect()).unwrap();
    let target = rng.gen_range(0.05..=max_norm);
    m.scale(c(target / m.frobenius_norm(), 0.0))
}

pub fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> Polynomial {
    let deg = rng.gen_range(0..=max_degree);
    Polynomial::new((0..=deg).map(|_| uniform_complex(rng, 1.0)).collect())
}

/// `Σ_{m ≤ M} (tA)^m / m!` with `M` chosen so the next-term bound
/// `‖tA‖^{M+1} / (M+1)!` drops below 1e-16 (well under the 1e-12 requirement).
pub fn taylor_expm(a: &Matrix, t: f64) -> Matrix {
    let ta = a.scale(c(t, 0.0));
    let norm = ta.frobenius_norm();
    let mut bound = norm;
    let mut m = 1usize;
    while bound >= 1e-16 {
        m += 1;
        bound *= norm / m as f64;
        if m > 200 {
            break;
        }
    }
    let mut term = Matrix::identity(a.dim());
    let mut sum = term.clone();
    for k in 1..=m {
        term = term.matmul(&ta).scale(c(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    sum
}

/// Integrates `Q(d/dt) u = h` as the companion system `y' = C y + h e_d`
/// with classical RK4 at fixed `step`, returning `u` at each requested time
/// (times must be nonnegative multiples of `step`, in increasing order).
pub fn rk4_companion(
    q: &Polynomial,
    init: &[Complex64],
    h: &dyn Fn(f64) -> Complex64,
    step: f64,
    times: &[f64],
) -> Vec<Complex64> {
    let d = init.len();
    let lead = q.coeff(d);
    let coeffs: Vec<Complex64> = (0..d).map(|m| q.coeff(m) / lead).collect();
    let rhs = |t: f64, y: &[Complex64]| -> Vec<Complex64> {
        let mut dy = vec![c(0.0, 0.0); d];
        dy[..(d - 1)].copy_from_slice(&y[1..d]);
        let top: Complex64 = h(t) / lead - coeffs.iter().zip(y).map(|(a, b)| a * b).sum::<Complex64>();
        dy[d - 1] = top;
        dy
    };
    let axpy = |y: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
        y.iter().zip(k).map(|(a, b)| a + b * s).collect()
    };
    let mut y = init.to_vec();
    let mut t = 0.0;
    let mut step_index = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let target_steps = (target / step).round() as usize;
        while step_index < target_steps {
            let k1 = rhs(t, &y);
            let k2 = rhs(t + 0.5 * step, &axpy(&y, &k1, 0.5 * step));
            let k3 = rhs(t + 0.5 * step, &axpy(&y, &k2, 0.5 * step));
            let k4 = rhs(t + step, &axpy(&y, &k3, step));
            for i in 0..d {
                y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0);
            }
            step_index += 1;
            t = step_index as f64 * step;
        }
        out.push(y[0]);
    }
    out
}

/// Unit lower-triangular times unit upper-triangular with off-diagonal
/// entries in `[-spread, spread]^2`, together with its inverse.
pub fn random_similarity(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> (Matrix, Matrix) {
    let mut lower = Matrix::identity(n);
    let mut upper = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            lower[(i, j)] = uniform_complex(rng, spread);
            upper[(j, i)] = uniform_complex(rng, spread);
        }
    }
    let v = lower.matmul(&upper);
    let inv = unit_upper_inverse(&upper).matmul(&unit_lower_inverse(&lower));
    (v, inv)
}

fn unit_lower_inverse(l: &Matrix) -> Matrix {
    let n = l.dim();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        for i in col + 1..n {
            let s: Complex64 = (col..i).map(|k| l[(i, k)] * inv[(k, col)]).sum();
            inv[(i, col)] = -s;
        }
    }
    inv
}

fn unit_upper_inverse(u: &Matrix) -> Matrix {
    let n = u.dim();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        for i in (0..col).rev() {
            let s: Complex64 = (i + 1..=col).map(|k| u[(i, k)] * inv[(k, col)]).sum();
            inv[(i, col)] = -s;
        }
    }
    inv
}

/// Block-diagonal Jordan matrix from `(eigenvalue, block sizes)`.
pub fn jordan_matrix(blocks: &[(Complex64, Vec<usize>)]) -> Matrix {
    let n: usize = blocks.iter().flat_map(|(_, sizes)| sizes).sum();
    let mut j = Matrix::zeros(n);
    let mut offset = 0;
    for (lambda, sizes) in blocks {
        for &size in sizes {
            for i in 0..size {
                j[(offset + i, offset + i)] = *lambda;
                if i + 1 < size {
                    j[(offset + i, offset + i + 1)] = c(1.0, 0.0);
                }
            }
            offset += size;
        }
    }
    j
}

/// Largest entrywise modulus of `a - b` relative to `1 + max|b|`.
pub fn rel_entrywise(a: &Matrix, b: &Matrix) -> f64 {
    a.max_abs_diff(b) / (1.0 + b.max_abs())
}
