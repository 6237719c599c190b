//! Dense Hermitian eigendecompositions, Fermi projections, and chiral
//! flat-band unitaries.
//!
//! Everything here is LAPACK-backed and deterministic for a fixed input and
//! thread count (set `OPENBLAS_NUM_THREADS=1` for run-to-run determinism
//! across machines).

use crate::linalg::{dagger, max_abs, CMat};
use crate::models::{HamiltonianMatrix, SiteBasis};
use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("input matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),
    #[error("spectrum reaches zero (min |eigenvalue| = {0:.3e}); flat band undefined")]
    Gapless(f64),
    #[error("not chiral: {0}")]
    NotChiral(String),
}

/// Full eigendecomposition with ascending eigenvalues and eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: CMat,
}

impl EigenDecomposition {
    /// `max_k ||H v_k - λ_k v_k||` for a residual check.
    pub fn residual(&self, h: &CMat) -> f64 {
        let hv = h.dot(&self.eigenvectors);
        let mut worst = 0.0f64;
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            let mut norm2 = 0.0;
            for i in 0..h.nrows() {
                let r = hv[[i, k]] - self.eigenvectors[[i, k]] * *lam;
                norm2 += r.norm_sqr();
            }
            worst = worst.max(norm2.sqrt());
        }
        worst
    }
}

/// Diagonalizes a Hermitian matrix; eigenvalues come back ascending.
pub fn diagonalize_matrix(h: &CMat) -> Result<EigenDecomposition, SpectralError> {
    let res = crate::linalg::hermiticity_residual(h);
    let scale = max_abs(h).max(1e-300);
    if res > 1e-12 * scale {
        return Err(SpectralError::NotHermitian(res / scale));
    }
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| SpectralError::ConvergenceFailure(e.to_string()))?;
    // the LAPACK wrapper hands back the eigenvectors of the row-major
    // reinterpretation (the transpose, i.e. conj(H)); conjugating restores
    // columns with H v_k = λ_k v_k
    let vecs = vecs.mapv(|z| z.conj());
    let eig = EigenDecomposition { eigenvalues: vals, eigenvectors: vecs };
    debug_assert!(eig.residual(h) <= 1e-10 * max_abs(h).max(1.0) * h.nrows() as f64);
    Ok(eig)
}

pub fn diagonalize(h: &HamiltonianMatrix) -> Result<EigenDecomposition, SpectralError> {
    diagonalize_matrix(&h.entries)
}

/// Spectral projection onto energies `<= fermi_energy` (closed interval;
/// eigenvalues within 1e-12 of the Fermi energy are included and flagged).
#[derive(Clone, Debug)]
pub struct FermiProjection {
    pub matrix: CMat,
    pub fermi_energy: f64,
    pub rank: usize,
    /// An eigenvalue sits within 1e-12 of the Fermi energy; pairings are
    /// ill-conditioned there.
    pub degenerate_at_fermi: bool,
}

pub fn fermi_projection(eig: &EigenDecomposition, fermi_energy: f64) -> FermiProjection {
    let n = eig.eigenvectors.nrows();
    let rank = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l <= fermi_energy + 1e-12)
        .count();
    let degenerate = eig
        .eigenvalues
        .iter()
        .any(|&l| (l - fermi_energy).abs() <= 1e-12);
    let matrix = if rank == 0 {
        CMat::zeros((n, n))
    } else {
        let occ = eig.eigenvectors.slice(s![.., 0..rank]);
        occ.dot(&occ.t().mapv(|z| z.conj()))
    };
    FermiProjection { matrix, fermi_energy, rank, degenerate_at_fermi: degenerate }
}

impl FermiProjection {
    /// `max |P² - P|`.
    pub fn idempotency_residual(&self) -> f64 {
        let p2 = self.matrix.dot(&self.matrix);
        max_abs(&(&p2 - &self.matrix))
    }
}

/// Off-diagonal block of the flat-band unitary of a chiral Hamiltonian,
/// `sign(H) = [[0, U†], [U, 0]]` in the grading of the chirality operator;
/// `U` maps the `+1` sector to the `-1` sector and is stored over the
/// half-dimensional site basis.
#[derive(Clone, Debug)]
pub struct ChiralUnitary {
    pub matrix: CMat,
    pub basis: SiteBasis,
    pub unitarity_residual: f64,
}

/// Flattens a gapped chiral Hamiltonian. The chirality `Σ` must be diagonal
/// with entries ±1 in the flat basis and balanced per site (same number of
/// `+` and `-` orbitals on every site), which keeps the site labels of `U`
/// meaningful for the winding derivation.
pub fn chiral_flatten(
    h: &HamiltonianMatrix,
    chirality: &CMat,
) -> Result<ChiralUnitary, SpectralError> {
    let dim = h.entries.nrows();
    // chirality must be diagonal ±1
    for i in 0..dim {
        for j in 0..dim {
            let z = chirality[[i, j]];
            let ok = if i == j {
                (z.im == 0.0) && (z.re.abs() - 1.0).abs() < 1e-12
            } else {
                z.norm() < 1e-14
            };
            if !ok {
                return Err(SpectralError::NotChiral(
                    "chirality must be diagonal with entries ±1".into(),
                ));
            }
        }
    }
    let anti = chirality.dot(&h.entries).dot(chirality) + &h.entries;
    let scale = max_abs(&h.entries).max(1e-300);
    if max_abs(&anti) > 1e-10 * scale {
        return Err(SpectralError::NotChiral(format!(
            "Σ H Σ + H has residual {:.3e}",
            max_abs(&anti) / scale
        )));
    }
    let eig = diagonalize(h)?;
    let min_abs = eig.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    if min_abs <= 1e-8 {
        return Err(SpectralError::Gapless(min_abs));
    }
    // sign(H) = V diag(sign λ) V†
    let n = dim;
    let mut sv = eig.eigenvectors.clone();
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let s = Complex64::new(lam.signum(), 0.0);
        sv.column_mut(k).mapv_inplace(|z| z * s);
    }
    let sign_h = sv.dot(&dagger(&eig.eigenvectors));
    // index lists of the ± sectors, in basis order
    let plus: Vec<usize> =
        (0..n).filter(|&i| chirality[[i, i]].re > 0.0).collect();
    let minus: Vec<usize> =
        (0..n).filter(|&i| chirality[[i, i]].re < 0.0).collect();
    if plus.len() != minus.len() {
        return Err(SpectralError::NotChiral("unbalanced chirality sectors".into()));
    }
    let orb = h.basis.orbitals_per_site;
    let sites = h.basis.pattern.len();
    let per_site = orb / 2;
    if orb % 2 != 0 {
        return Err(SpectralError::NotChiral("odd orbital count".into()));
    }
    for s in 0..sites {
        let plus_here = (0..orb)
            .filter(|&o| chirality[[h.basis.flat(s, o), h.basis.flat(s, o)]].re > 0.0)
            .count();
        if plus_here != per_site {
            return Err(SpectralError::NotChiral("chirality not balanced per site".into()));
        }
    }
    let half = plus.len();
    let mut u = CMat::zeros((half, half));
    for (a, &ia) in minus.iter().enumerate() {
        for (b, &ib) in plus.iter().enumerate() {
            u[[a, b]] = sign_h[[ia, ib]];
        }
    }
    let resid = crate::linalg::unitarity_residual(&u);
    let basis = SiteBasis::new(h.basis.pattern.clone(), per_site);
    Ok(ChiralUnitary { matrix: u, basis, unitarity_residual: resid })
}
