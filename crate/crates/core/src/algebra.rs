//! Nilpotent Lie algebras given by structure constants.
//!
//! Brackets are stored densely: `c(i, j, k)` is the coefficient of `e_k` in
//! `[e_i, e_j]`, zero-based internally. Model files and constructors speak
//! one-based indices, matching the usual way these algebras are written
//! down (`[e1, e2] = e3` for the Heisenberg algebra).

use crate::error::{Error, Result};
use crate::linalg::{nullspace, sym_eigen, Mat};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct NilpotentAlgebra {
    dim: usize,
    class_bound: usize,
    /// Dense structure constants, index `(i * dim + j) * dim + k`.
    c: Vec<f64>,
}

/// Outcome of the structural validation of a candidate algebra.
#[derive(Clone, Debug)]
pub struct AlgebraValidation {
    /// Largest violation of `c(i,j,k) + c(j,i,k) = 0`.
    pub antisymmetry_max: f64,
    /// Largest component of a Jacobi cyclic sum over basis triples.
    pub jacobi_max: f64,
    /// One-based triple realizing `jacobi_max`, when it exceeds tolerance.
    pub jacobi_witness: Option<(usize, usize, usize)>,
    /// Dimensions of the lower central series, starting with the algebra
    /// itself and ending with the first zero term when nilpotent.
    pub series_dims: Vec<usize>,
    pub nilpotent: bool,
    /// Smallest `k` with vanishing k-th series term, when nilpotent.
    pub class: Option<usize>,
    pub class_within_bound: bool,
}

impl AlgebraValidation {
    pub fn ok(&self) -> bool {
        self.antisymmetry_max <= 1e-12
            && self.jacobi_max <= 1e-12
            && self.nilpotent
            && self.class_within_bound
    }
}

/// Basis of the derivation algebra, orthonormal in the Frobenius sense.
#[derive(Clone, Debug)]
pub struct DerivationBasis {
    pub generators: Vec<Mat<f64>>,
}

impl DerivationBasis {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Combine generators with the given coefficients.
    pub fn combine(&self, coeffs: &[f64]) -> Mat<f64> {
        assert_eq!(coeffs.len(), self.generators.len());
        let n = self.generators.first().map_or(0, |g| g.rows);
        let mut d = Mat::zeros(n, n);
        for (c, g) in coeffs.iter().zip(&self.generators) {
            d = d.add(&g.scale(*c));
        }
        d
    }
}

impl NilpotentAlgebra {
    /// Build from one-based sparse brackets `(i, j, k, value)` meaning the
    /// `e_k` coefficient of `[e_i, e_j]`. The antisymmetric counterpart is
    /// filled automatically; only pairs with `i < j` may be given.
    pub fn new(dim: usize, class_bound: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        if class_bound == 0 || class_bound > 4 {
            return Err(Error::UnsupportedClass { class: class_bound });
        }
        if dim == 0 || dim > 8 {
            return Err(Error::InvalidAlgebra(format!(
                "dimension must be between 1 and 8, got {dim}"
            )));
        }
        let mut c = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in brackets {
            for idx in [i, j, k] {
                if idx == 0 || idx > dim {
                    return Err(Error::IndexOutOfRange { index: idx, dim });
                }
            }
            if i >= j {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket entries need i < j, got ({i}, {j})"
                )));
            }
            let (i, j, k) = (i - 1, j - 1, k - 1);
            let fwd = (i * dim + j) * dim + k;
            if c[fwd] != 0.0 {
                return Err(Error::InvalidAlgebra(format!(
                    "duplicate bracket entry for ({}, {}) -> {}",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            c[fwd] = v;
            c[(j * dim + i) * dim + k] = -v;
        }
        Ok(NilpotentAlgebra { dim, class_bound, c })
    }

    pub fn from_dense(dim: usize, class_bound: usize, c: Vec<f64>) -> Result<Self> {
        if class_bound == 0 || class_bound > 4 {
            return Err(Error::UnsupportedClass { class: class_bound });
        }
        if dim == 0 || dim > 8 {
            return Err(Error::InvalidAlgebra(format!(
                "dimension must be between 1 and 8, got {dim}"
            )));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: c.len(),
            });
        }
        Ok(NilpotentAlgebra { dim, class_bound, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_bound(&self) -> usize {
        self.class_bound
    }

    /// Structure constant `c(i, j, k)`, zero-based.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Bracket of two coefficient vectors, generic over the scalar so jets
    /// and dual numbers flow through group operations unchanged.
    pub fn bracket<T: Scalar>(&self, u: &[T], v: &[T]) -> Vec<T> {
        let n = self.dim;
        debug_assert_eq!(u.len(), n);
        debug_assert_eq!(v.len(), n);
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..n {
                let uv = u[i].clone() * v[j].clone();
                for k in 0..n {
                    let c = self.c(i, j, k);
                    if c != 0.0 {
                        out[k] = out[k].clone() + T::from_f64(c) * uv.clone();
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad_x = [x, .]` acting on coefficient vectors.
    pub fn ad_matrix<T: Scalar>(&self, x: &[T]) -> Mat<T> {
        let n = self.dim;
        debug_assert_eq!(x.len(), n);
        Mat::from_fn(n, n, |k, j| {
            let mut acc = T::zero();
            for i in 0..n {
                let c = self.c(i, j, k);
                if c != 0.0 {
                    acc = acc + T::from_f64(c) * x[i].clone();
                }
            }
            acc
        })
    }

    /// Antisymmetry, Jacobi identity, nilpotency and class, reported with
    /// witnesses. Tolerance for the algebraic identities is 1e-12.
    pub fn validate(&self) -> AlgebraValidation {
        let n = self.dim;
        let mut anti = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    anti = anti.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }

        let mut jac = 0.0f64;
        let mut witness = None;
        let e = Mat::<f64>::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (ei, ej, ek) = (e.column(i), e.column(j), e.column(k));
                    let mut cyc = self.bracket(&ei, &self.bracket(&ej, &ek));
                    let t2 = self.bracket(&ej, &self.bracket(&ek, &ei));
                    let t3 = self.bracket(&ek, &self.bracket(&ei, &ej));
                    for m in 0..n {
                        cyc[m] += t2[m] + t3[m];
                    }
                    let worst = cyc.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                    if worst > jac {
                        jac = worst;
                        witness = Some((i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        if jac <= 1e-12 {
            witness = None;
        }

        let series = self.lower_central_series();
        let series_dims: Vec<usize> = series.iter().map(|b| b.cols).collect();
        let nilpotent = series_dims.last() == Some(&0);
        let class = if nilpotent {
            Some(series_dims.len() - 1)
        } else {
            None
        };
        AlgebraValidation {
            antisymmetry_max: anti,
            jacobi_max: jac,
            jacobi_witness: witness,
            series_dims,
            nilpotent,
            class,
            class_within_bound: class.is_some_and(|c| c <= self.class_bound),
        }
    }

    /// Lower central series as orthonormal column bases: the algebra, then
    /// `[g, previous]` repeatedly. Stops at zero or after `dim + 1` terms
    /// (a genuinely nilpotent series hits zero by then).
    fn lower_central_series(&self) -> Vec<Mat<f64>> {
        let n = self.dim;
        let mut series = vec![Mat::<f64>::identity(n)];
        loop {
            let prev = series.last().unwrap();
            if prev.cols == 0 || series.len() > n + 1 {
                break;
            }
            let e = Mat::<f64>::identity(n);
            let mut gens: Vec<Vec<f64>> = Vec::new();
            for i in 0..n {
                for b in 0..prev.cols {
                    gens.push(self.bracket(&e.column(i), &prev.column(b)));
                }
            }
            let next = column_space(n, &gens);
            let stalled = next.cols == prev.cols;
            series.push(next);
            if stalled {
                break;
            }
        }
        series
    }

    /// Orthonormal basis (Frobenius inner product) of the space of
    /// derivations: matrices `D` with `D[u,v] = [Du,v] + [u,Dv]`.
    pub fn derivation_basis(&self) -> DerivationBasis {
        let n = self.dim;
        // One linear constraint per basis pair (i < j) and component k;
        // unknowns are the n^2 entries of D, column index a*n + b for d_ab.
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut rows = Vec::with_capacity(pairs.len() * n);
        for &(i, j) in &pairs {
            for k in 0..n {
                let mut row = vec![0.0; n * n];
                for m in 0..n {
                    row[k * n + m] += self.c(i, j, m);
                }
                for a in 0..n {
                    row[a * n + i] -= self.c(a, j, k);
                }
                for b in 0..n {
                    row[b * n + j] -= self.c(i, b, k);
                }
                rows.push(row);
            }
        }
        let constraints = Mat::from_rows(rows);
        let ns = nullspace(&constraints, 1e-9);
        let generators = (0..ns.cols)
            .map(|col| {
                let v = ns.column(col);
                Mat::from_fn(n, n, |a, b| v[a * n + b])
            })
            .collect();
        DerivationBasis { generators }
    }

    /// Largest component of `D[u,v] - [Du,v] - [u,Dv]` over basis pairs.
    pub fn derivation_residual(&self, d: &Mat<f64>) -> f64 {
        let n = self.dim;
        let e = Mat::<f64>::identity(n);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let (ei, ej) = (e.column(i), e.column(j));
                let lhs = d.matvec(&self.bracket(&ei, &ej));
                let r1 = self.bracket(&d.matvec(&ei), &ej);
                let r2 = self.bracket(&ei, &d.matvec(&ej));
                for k in 0..n {
                    worst = worst.max((lhs[k] - r1[k] - r2[k]).abs());
                }
            }
        }
        worst
    }
}

/// Orthonormal basis of the span of the given vectors, via the spectrum of
/// the outer-product Gram matrix. Relative cutoff 1e-9 on singular values.
fn column_space(n: usize, vectors: &[Vec<f64>]) -> Mat<f64> {
    if vectors.is_empty() {
        return Mat::zeros(n, 0);
    }
    let mut gram = Mat::<f64>::zeros(n, n);
    for v in vectors {
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += v[i] * v[j];
            }
        }
    }
    let (vals, vecs) = sym_eigen(&gram);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = 1e-18 * top;
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > cut && vals[i] > 0.0).collect();
    Mat::from_fn(n, keep.len(), |i, j| vecs[(i, keep[j])])
}
