//! Annihilating polynomials `Q(z) = Π (z - a_p)^(α_p + 1)` given by their roots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Polynomial;
use crate::roots::durand_kerner;

/// Default relative separation below which two roots count as equal.
pub const SEPARATION_RTOL: f64 = 1e-8;
/// Roots closer than this (relative) are accepted but logged as near-confluent.
pub const NEAR_CONFLUENT_RTOL: f64 = 1e-3;
/// Default cluster tolerance for [`spec_from_matrix`].
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// One root `a` of `Q` with multiplicity `alpha + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub a: Complex64,
    pub alpha: usize,
}

impl Root {
    pub fn multiplicity(&self) -> usize {
        self.alpha + 1
    }
}

#[derive(Deserialize)]
struct RawSpec {
    roots: Vec<Root>,
}

/// The distinct roots of an annihilating polynomial together with their
/// multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct AnnihilatorSpec {
    roots: Vec<Root>,
}

impl TryFrom<RawSpec> for AnnihilatorSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        Self::from_roots(raw.roots)
    }
}

impl AnnihilatorSpec {
    /// Builds a spec from `(a_p, α_p)` pairs with the default separation tolerance.
    pub fn new(roots: Vec<(Complex64, usize)>) -> Result<Self> {
        Self::from_roots(roots.into_iter().map(|(a, alpha)| Root { a, alpha }).collect())
    }

    pub fn from_roots(roots: Vec<Root>) -> Result<Self> {
        let scale = 1.0 + roots.iter().map(|r| r.a.norm()).fold(0.0, f64::max);
        Self::with_separation(roots, SEPARATION_RTOL * scale)
    }

    /// Builds a spec rejecting roots closer than `tolerance` (absolute).
    pub fn with_separation(roots: Vec<Root>, tolerance: f64) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidSpec("at least one root is required".into()));
        }
        if roots.iter().any(|r| !r.a.is_finite()) {
            return Err(Error::NonFinite("root"));
        }
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                let distance = (roots[i].a - roots[j].a).norm();
                if distance <= tolerance {
                    return Err(Error::RootsNotDistinct {
                        first: i,
                        second: j,
                        distance,
                        tolerance,
                    });
                }
            }
        }
        let spec = AnnihilatorSpec { roots };
        if spec.is_near_confluent() {
            log::warn!(
                "roots are only {:e} apart; Taylor coefficients of 1/Q_p grow like separation^-(alpha+1+n)",
                spec.min_separation()
            );
        }
        Ok(spec)
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root(&self, p: usize) -> Result<Root> {
        self.roots.get(p).copied().ok_or(Error::IndexOutOfRange {
            index: p,
            len: self.roots.len(),
        })
    }

    /// Number of distinct roots.
    pub fn k(&self) -> usize {
        self.roots.len()
    }

    /// Degree of `Q`.
    pub fn degree(&self) -> usize {
        self.roots.iter().map(Root::multiplicity).sum()
    }

    pub fn max_alpha(&self) -> usize {
        self.roots.iter().map(|r| r.alpha).max().unwrap_or(0)
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|r| r.a.norm()).fold(0.0, f64::max)
    }

    /// Absolute distance below which two roots are treated as the same point.
    pub fn separation_tolerance(&self) -> f64 {
        SEPARATION_RTOL * (1.0 + self.max_modulus())
    }

    /// Smallest pairwise root distance, infinite for a single root.
    pub fn min_separation(&self) -> f64 {
        let mut min = f64::INFINITY;
        for (i, ri) in self.roots.iter().enumerate() {
            for rj in &self.roots[i + 1..] {
                min = min.min((ri.a - rj.a).norm());
            }
        }
        min
    }

    pub fn is_near_confluent(&self) -> bool {
        self.min_separation() < NEAR_CONFLUENT_RTOL * (1.0 + self.max_modulus())
    }

    /// The same roots listed in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let roots = order
            .iter()
            .map(|&i| self.root(i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_roots(roots)
    }

    /// `(z - a_p)^(α_p + 1)`
    pub fn factor(&self, p: usize) -> Result<Polynomial> {
        let r = self.root(p)?;
        Ok(Polynomial::linear_factor(r.a).pow(r.multiplicity()))
    }

    /// Expanded monic `Q`.
    pub fn build_q(&self) -> Polynomial {
        self.roots.iter().fold(Polynomial::one(), |acc, r| {
            &acc * &Polynomial::linear_factor(r.a).pow(r.multiplicity())
        })
    }

    /// Expanded cofactor `Q_p = Q / (z - a_p)^(α_p + 1)`.
    pub fn cofactor(&self, p: usize) -> Result<Polynomial> {
        self.root(p)?;
        Ok(self
            .roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != p)
            .fold(Polynomial::one(), |acc, (_, r)| {
                &acc * &Polynomial::linear_factor(r.a).pow(r.multiplicity())
            }))
    }
}

/// Frobenius norm of `Q(A)`, multiplied out factor by factor in listed order.
pub fn verify_annihilates(a: &Matrix, spec: &AnnihilatorSpec) -> f64 {
    let mut acc = Matrix::identity(a.dim());
    for r in spec.roots() {
        let shifted = a.shift(r.a);
        for _ in 0..r.multiplicity() {
            acc = acc.matmul(&shifted);
        }
    }
    acc.frobenius_norm()
}

/// Monic characteristic polynomial by the Faddeev–LeVerrier recurrence.
pub fn characteristic_polynomial(a: &Matrix) -> Polynomial {
    let n = a.dim();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut m = Matrix::zeros(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        m = a.matmul(&m);
        for i in 0..n {
            m[(i, i)] += coeffs[n - k + 1];
        }
        coeffs[n - k] = -a.matmul(&m).trace() / k as f64;
    }
    Polynomial::new(coeffs)
}

/// Recovers an annihilating spec from the characteristic polynomial of `a`.
///
/// Roots within `cluster_tol · (1 + max|root|)` of each other (single linkage)
/// are merged into one entry at their mean, with multiplicity equal to the
/// cluster size.
pub fn spec_from_matrix(a: &Matrix, cluster_tol: f64) -> Result<AnnihilatorSpec> {
    if a.dim() == 0 {
        return Err(Error::InvalidSpec("empty matrix has no eigenvalues".into()));
    }
    let charpoly = characteristic_polynomial(a);
    let roots = durand_kerner(&charpoly)?;
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let threshold = cluster_tol * scale;

    let mut parent: Vec<usize> = (0..roots.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }

    let mut clusters: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &root) in roots.iter().enumerate() {
        let rep = find(&mut parent, i);
        match clusters.iter_mut().find(|(r, _)| *r == rep) {
            Some((_, members)) => members.push(root),
            None => clusters.push((rep, vec![root])),
        }
    }
    let mut merged: Vec<Root> = clusters
        .into_iter()
        .map(|(_, members)| {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            Root {
                a: polish(&charpoly, mean, members.len(), threshold),
                alpha: members.len() - 1,
            }
        })
        .collect();
    merged.sort_by(|x, y| x.a.re.total_cmp(&y.a.re).then(x.a.im.total_cmp(&y.a.im)));
    AnnihilatorSpec::from_roots(merged)
}

/// Newton on `p^(m-1)`, where an `m`-fold root of `p` is simple. Falls back
/// to `start` if the iteration wanders farther than `radius`.
fn polish(p: &Polynomial, start: Complex64, m: usize, radius: f64) -> Complex64 {
    let q = p.nth_derivative(m - 1);
    let dq = q.derivative();
    let mut z = start;
    for _ in 0..8 {
        let slope = dq.eval(z);
        if slope.norm() == 0.0 {
            break;
        }
        let step = q.eval(z) / slope;
        z -= step;
        if !(step.norm() > 4.0 * f64::EPSILON * (1.0 + z.norm())) {
            break;
        }
    }
    if z.is_finite() && (z - start).norm() <= radius {
        z
    } else {
        start
    }
}
