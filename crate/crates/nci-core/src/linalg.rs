//! Small dense linear-algebra helpers shared across the crate.

use ndarray::prelude::*;
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// Largest entry magnitude.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Largest entry magnitude of `a - a†`.
pub fn hermiticity_residual(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            m = m.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    m
}

/// Sum of diagonal entries.
pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

/// n x n identity.
pub fn eye(n: usize) -> CMat {
    CMat::eye(n)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.assign(&b.mapv(|z| z * aij));
        }
    }
    out
}

/// Deviation from unitarity, `max |U†U - 1|`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let p = dagger(u).dot(u);
    let n = p.nrows();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            m = m.max((p[[i, j]] - Complex64::new(want, 0.0)).norm());
        }
    }
    m
}
