//! Forward-mode truncated-Taylor scalars.
//!
//! Every geometric formula in this crate is written once, generically over
//! [`Scalar`], and differentiated by evaluating it on dual numbers or on
//! second-order jets. `Dual<Dual<f64>>` yields one mixed second derivative
//! per evaluation; [`Jet`] carries a gradient and a Hessian in `m` seeded
//! directions at once. Both are exact to roundoff, unlike the central
//! finite differences kept around in the test suite as the oracle.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic interface shared by `f64`, dual numbers and jets.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    /// Leading (value) coefficient; used for pivoting and branch decisions.
    fn re(&self) -> f64;
    fn sqrt(&self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

/// First-order dual number `v + d·ε`, `ε² = 0`, over any base scalar.
///
/// Nesting (`Dual<Dual<f64>>`) gives mixed second derivatives: seed the
/// inner ε on one variable and the outer ε on another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(v: T, d: T) -> Self {
        Dual { v, d }
    }

    pub fn constant(v: T) -> Self {
        Dual { v, d: T::zero() }
    }

    /// Value with a unit seed: differentiating with respect to this input.
    pub fn seeded(v: T) -> Self {
        Dual { v, d: T::one() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(
            self.v.clone() * o.v.clone(),
            self.v * o.d + self.d * o.v,
        )
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v.clone() / o.v.clone();
        Dual::new(q.clone(), (self.d - q * o.d) / o.v)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.v, -self.d)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(x: f64) -> Self {
        Dual::constant(T::from_f64(x))
    }
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn one() -> Self {
        Dual::constant(T::one())
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sqrt(&self) -> Self {
        let r = self.v.clone().sqrt();
        let two = T::from_f64(2.0);
        Dual::new(r.clone(), self.d.clone() / (two * r))
    }
}

/// Second-order multivariate jet: value, gradient and symmetric Hessian in
/// `m` directions. An empty gradient marks a constant; binary operations
/// broadcast constants against seeded jets of any width.
///
/// The Hessian is stored packed, upper triangle row by row:
/// index of `(i, j)` with `i <= j` is `i*m - i*(i+1)/2 + j`.
#[derive(Clone, Debug)]
pub struct Jet<T> {
    pub v: T,
    pub g: Vec<T>,
    pub h: Vec<T>,
}

pub(crate) fn tri_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

impl<T: Scalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet {
            v,
            g: Vec::new(),
            h: Vec::new(),
        }
    }

    /// Variable seeded in direction `dir` out of `m`.
    pub fn seeded(v: T, m: usize, dir: usize) -> Self {
        let mut g = vec![T::zero(); m];
        g[dir] = T::one();
        Jet {
            v,
            g,
            h: vec![T::zero(); m * (m + 1) / 2],
        }
    }

    pub fn width(&self) -> usize {
        self.g.len()
    }

    pub fn grad(&self, i: usize) -> T {
        if self.g.is_empty() {
            T::zero()
        } else {
            self.g[i].clone()
        }
    }

    /// Second partial with respect to directions `i` and `j`.
    pub fn hess(&self, i: usize, j: usize) -> T {
        if self.h.is_empty() {
            T::zero()
        } else {
            self.h[tri_index(self.width(), i, j)].clone()
        }
    }

    fn widen(&self, m: usize) -> Jet<T> {
        if self.width() == m {
            self.clone()
        } else {
            debug_assert!(self.g.is_empty(), "jet width mismatch");
            Jet {
                v: self.v.clone(),
                g: vec![T::zero(); m],
                h: vec![T::zero(); m * (m + 1) / 2],
            }
        }
    }

    /// Apply a smooth scalar function given value and first two derivatives
    /// at `self.v`: chain rule through gradient and Hessian.
    fn compose(&self, f: T, df: T, d2f: T) -> Jet<T> {
        let m = self.width();
        let mut g = Vec::with_capacity(m);
        for i in 0..m {
            g.push(df.clone() * self.g[i].clone());
        }
        let mut h = Vec::with_capacity(self.h.len());
        for i in 0..m {
            for j in i..m {
                let idx = tri_index(m, i, j);
                h.push(
                    df.clone() * self.h[idx].clone()
                        + d2f.clone() * self.g[i].clone() * self.g[j].clone(),
                );
            }
        }
        Jet { v: f, g, h }
    }

    fn recip(&self) -> Jet<T> {
        let w = T::one() / self.v.clone();
        let w2 = w.clone() * w.clone();
        let w3 = w2.clone() * w.clone();
        self.compose(w, -w2, T::from_f64(2.0) * w3)
    }
}

fn jet_binary<T: Scalar>(
    a: &Jet<T>,
    b: &Jet<T>,
    combine: impl Fn(&Jet<T>, &Jet<T>) -> Jet<T>,
) -> Jet<T> {
    // Broadcast a constant against a seeded jet.
    let m = a.width().max(b.width());
    if a.width() == b.width() {
        combine(a, b)
    } else {
        combine(&a.widen(m), &b.widen(m))
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        jet_binary(&self, &o, |a, b| Jet {
            v: a.v.clone() + b.v.clone(),
            g: a.g.iter().zip(&b.g).map(|(x, y)| x.clone() + y.clone()).collect(),
            h: a.h.iter().zip(&b.h).map(|(x, y)| x.clone() + y.clone()).collect(),
        })
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        jet_binary(&self, &o, |a, b| Jet {
            v: a.v.clone() - b.v.clone(),
            g: a.g.iter().zip(&b.g).map(|(x, y)| x.clone() - y.clone()).collect(),
            h: a.h.iter().zip(&b.h).map(|(x, y)| x.clone() - y.clone()).collect(),
        })
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        jet_binary(&self, &o, |a, b| {
            let m = a.width();
            let v = a.v.clone() * b.v.clone();
            let mut g = Vec::with_capacity(m);
            for i in 0..m {
                g.push(a.v.clone() * b.g[i].clone() + a.g[i].clone() * b.v.clone());
            }
            let mut h = Vec::with_capacity(a.h.len());
            for i in 0..m {
                for j in i..m {
                    let idx = tri_index(m, i, j);
                    h.push(
                        a.v.clone() * b.h[idx].clone()
                            + a.h[idx].clone() * b.v.clone()
                            + a.g[i].clone() * b.g[j].clone()
                            + a.g[j].clone() * b.g[i].clone(),
                    );
                }
            }
            Jet { v, g, h }
        })
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        jet_binary(&self, &o, |a, b| a.clone() * b.recip())
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            v: -self.v,
            g: self.g.into_iter().map(|x| -x).collect(),
            h: self.h.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn from_f64(x: f64) -> Self {
        Jet::constant(T::from_f64(x))
    }
    fn zero() -> Self {
        Jet::constant(T::zero())
    }
    fn one() -> Self {
        Jet::constant(T::one())
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sqrt(&self) -> Self {
        let r = self.v.clone().sqrt();
        let half = T::from_f64(0.5);
        let quarter = T::from_f64(-0.25);
        let df = half / r.clone();
        let d2f = quarter / (self.v.clone() * r.clone());
        self.compose(r, df, d2f)
    }
}

/// Lift an `f64` slice into any scalar type as constants.
pub fn lift<T: Scalar>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::from_f64(x)).collect()
}
