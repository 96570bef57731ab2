//! Built-in algebras and Randers structures used throughout the tests and
//! mirrored by the JSON files in the repository `catalog/` directory.
//!
//! Every structure uses the Euclidean inner product at the identity. The
//! drift vectors with magnitude 0.2 sit in the center of each algebra, so
//! they generate Killing fields of the reference metric.

use crate::algebra::NilpotentAlgebra;
use crate::linalg::Mat;
use crate::randers::RandersStructure;

pub fn abelian(n: usize) -> NilpotentAlgebra {
    NilpotentAlgebra::new(n, 1, &[]).expect("abelian algebra is valid")
}

/// Heisenberg algebra: `[e1, e2] = e3`.
pub fn heisenberg3() -> NilpotentAlgebra {
    NilpotentAlgebra::new(3, 2, &[(1, 2, 3, 1.0)]).expect("h3 is valid")
}

/// Five-dimensional Heisenberg algebra: `[e1, e2] = e5`, `[e3, e4] = e5`.
pub fn heisenberg5() -> NilpotentAlgebra {
    NilpotentAlgebra::new(5, 2, &[(1, 2, 5, 1.0), (3, 4, 5, 1.0)]).expect("h5 is valid")
}

/// Filiform algebra of dimension 4: `[e1, e2] = e3`, `[e1, e3] = e4`.
pub fn filiform4() -> NilpotentAlgebra {
    NilpotentAlgebra::new(4, 3, &[(1, 2, 3, 1.0), (1, 3, 4, 1.0)]).expect("f4 is valid")
}

fn structure(alg: NilpotentAlgebra, drift: &[(usize, f64)]) -> RandersStructure {
    let n = alg.dim();
    let mut x = vec![0.0; n];
    for &(i, v) in drift {
        x[i - 1] = v;
    }
    RandersStructure::new(alg, Mat::identity(n), x).expect("catalog structure is valid")
}

pub fn abelian3_riemannian() -> RandersStructure {
    structure(abelian(3), &[])
}

pub fn abelian3_killing() -> RandersStructure {
    structure(abelian(3), &[(1, 0.2)])
}

pub fn heisenberg3_riemannian() -> RandersStructure {
    structure(heisenberg3(), &[])
}

pub fn heisenberg3_killing() -> RandersStructure {
    structure(heisenberg3(), &[(3, 0.2)])
}

pub fn heisenberg5_riemannian() -> RandersStructure {
    structure(heisenberg5(), &[])
}

pub fn heisenberg5_killing() -> RandersStructure {
    structure(heisenberg5(), &[(5, 0.2)])
}

pub fn filiform4_riemannian() -> RandersStructure {
    structure(filiform4(), &[])
}

pub fn filiform4_killing() -> RandersStructure {
    structure(filiform4(), &[(4, 0.2)])
}

/// Heisenberg structure whose drift is not Killing; exercises the failure
/// paths of the structural checks.
pub fn heisenberg3_non_killing() -> RandersStructure {
    structure(heisenberg3(), &[(1, 0.2)])
}
