//! Dense matrices over generic scalars, plus the f64-only decompositions
//! the fitting pipeline needs (Jacobi eigenvalues, null spaces, minimum-norm
//! least squares).
//!
//! Sizes here are tiny (n is the algebra dimension, rarely above 10), so
//! everything is written for clarity and determinism rather than speed:
//! no blocking, no randomization, fixed summation order.

use crate::error::Error;
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Mat {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Lift an f64 matrix into any scalar type as constants.
    pub fn lift(src: &Mat<f64>) -> Self {
        Mat {
            rows: src.rows,
            cols: src.cols,
            data: src.data.iter().map(|&x| T::from_f64(x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
            }
            acc
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self[(i, k)].clone() * v[k].clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| s.clone() * self[(i, j)].clone())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// LU with partial pivoting on the leading (value) coefficient. Returns
    /// the solution of `self * X = rhs`, or `None` when the value part of
    /// the matrix is singular to working precision.
    pub fn solve(&self, rhs: &Mat<T>) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, rhs.rows, "solve shape mismatch");
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[(col, col)].re().abs();
            for r in col + 1..n {
                let mag = a[(r, col)].re().abs();
                if mag > best {
                    best = mag;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            if piv != col {
                a.swap_rows(piv, col);
                b.swap_rows(piv, col);
            }
            let d = a[(col, col)].clone();
            for r in col + 1..n {
                let factor = a[(r, col)].clone() / d.clone();
                for c in col + 1..n {
                    let upd = a[(r, c)].clone() - factor.clone() * a[(col, c)].clone();
                    a[(r, c)] = upd;
                }
                a[(r, col)] = T::zero();
                for c in 0..b.cols {
                    let upd = b[(r, c)].clone() - factor.clone() * b[(col, c)].clone();
                    b[(r, c)] = upd;
                }
            }
        }
        // Back substitution.
        let mut x: Mat<T> = Mat::zeros(n, b.cols);
        for c in 0..b.cols {
            for i in (0..n).rev() {
                let mut acc = b[(i, c)].clone();
                for k in i + 1..n {
                    acc = acc - a[(i, k)].clone() * x[(k, c)].clone();
                }
                x[(i, c)] = acc / a[(i, i)].clone();
            }
        }
        Some(x)
    }

    pub fn solve_vec(&self, rhs: &[T]) -> Option<Vec<T>> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i].clone());
        self.solve(&b).map(|x| x.column(0))
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        self.solve(&Mat::identity(self.rows))
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[(col, col)].re().abs();
            for r in col + 1..n {
                let mag = a[(r, col)].re().abs();
                if mag > best {
                    best = mag;
                    piv = r;
                }
            }
            if best == 0.0 {
                return T::zero();
            }
            if piv != col {
                a.swap_rows(piv, col);
                det = -det;
            }
            let d = a[(col, col)].clone();
            det = det * d.clone();
            for r in col + 1..n {
                let factor = a[(r, col)].clone() / d.clone();
                for c in col + 1..n {
                    let upd = a[(r, c)].clone() - factor.clone() * a[(col, c)].clone();
                    a[(r, c)] = upd;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mat<f64> {
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Symmetrize in place; cheap guard against roundoff drift.
    pub fn symmetrized(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending and the matching orthonormal eigenvectors
/// as columns. Deterministic: fixed sweep order, fixed convergence test.
pub fn sym_eigen(a: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    assert_eq!(a.rows, a.cols, "sym_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.symmetrized();
    let mut v = Mat::<f64>::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    (vals, vecs)
}

/// Smallest eigenvalue of a symmetric matrix; the SPD tests ride on this.
pub fn min_eigenvalue(a: &Mat<f64>) -> f64 {
    sym_eigen(a).0[0]
}

pub fn check_spd(a: &Mat<f64>, sym_tol: f64) -> Result<(), Error> {
    if !a.is_symmetric(sym_tol) {
        return Err(Error::NotSymmetric);
    }
    let lo = min_eigenvalue(a);
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(())
}

/// Orthonormal basis (columns) of the null space of `a`, detected through
/// the spectrum of the Gram matrix `aᵀa`: eigenvalues below
/// `rel_tol * λ_max` count as zero. The cut lives on the eigenvalue scale
/// because squared tiny singular values sink below the Jacobi noise floor.
/// For an exactly zero matrix the whole domain is returned.
pub fn nullspace(a: &Mat<f64>, rel_tol: f64) -> Mat<f64> {
    let gram = a.transpose().matmul(a);
    let (vals, vecs) = sym_eigen(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = if lmax == 0.0 { f64::MAX } else { rel_tol * lmax };
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= cut).collect();
    Mat::from_fn(a.cols, keep.len(), |i, j| vecs[(i, keep[j])])
}

/// Result of a least-squares solve with rank diagnostics.
pub struct Lstsq {
    pub x: Vec<f64>,
    /// Euclidean norm of `a x - b`.
    pub residual: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// Minimum-norm least squares through the eigendecomposition of the normal
/// equations. Directions whose Gram eigenvalue falls below
/// `rel_tol * λ_max` are dropped, which is what makes the solution the
/// minimum-norm one.
pub fn lstsq_min_norm(a: &Mat<f64>, b: &[f64], rel_tol: f64) -> Lstsq {
    assert_eq!(a.rows, b.len(), "lstsq shape mismatch");
    let gram = a.transpose().matmul(a);
    let atb = a.transpose().matvec(&b.to_vec());
    let (vals, vecs) = sym_eigen(&gram);
    let lmax = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_tol * lmax;
    let mut x = vec![0.0; a.cols];
    let mut rank = 0;
    for j in 0..vals.len() {
        if vals[j] > cut && vals[j] > 0.0 {
            rank += 1;
            let col = vecs.column(j);
            let coeff = col.iter().zip(&atb).map(|(v, w)| v * w).sum::<f64>() / vals[j];
            for i in 0..x.len() {
                x[i] += coeff * col[i];
            }
        }
    }
    let ax = a.matvec(&x);
    let residual = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    Lstsq {
        residual,
        rank,
        rank_deficient: rank < a.cols,
        x,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
