//! N-fermion Fock sectors over a pattern: second-quantized representations
//! of one- and two-body coefficient kernels, many-body position derivations,
//! the anchored trace per volume, and sector cyclic-cocycle pairings.
//!
//! Basis kets are the ascending site subsets; any other ordering is the
//! sorted ket times the sign of the sorting permutation. At `N = 1` every
//! operation reduces entrywise to its single-particle counterpart.

use crate::linalg::CMat;
use crate::models::{CoefficientSpec, Kernel, ModelError, SiteBasis, TwoBodyInput};
use crate::pattern::{DisorderField, PointPattern};
use crate::spectral::EigenDecomposition;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManyBodyError {
    #[error("sector dimension C({sites}, {fermions}) = {dim} exceeds the desk-scale guard 2e5")]
    SectorTooLarge { sites: usize, fermions: usize, dim: usize },
    #[error("invalid fermion count {0}")]
    BadFermionCount(usize),
    #[error(transparent)]
    Spec(#[from] ModelError),
    #[error(transparent)]
    Invariants(#[from] crate::invariants::InvariantsError),
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lexicographically ordered N-subsets of the site indices, with maps in
/// both directions.
#[derive(Clone, Debug)]
pub struct FockBasis {
    pub pattern: Arc<PointPattern>,
    pub n_fermions: usize,
    pub states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl FockBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &[u32]) -> Option<usize> {
        self.index.get(state).copied()
    }
}

pub fn build_fock_basis(
    pattern: &Arc<PointPattern>,
    n_fermions: usize,
) -> Result<FockBasis, ManyBodyError> {
    let sites = pattern.len();
    if n_fermions == 0 || n_fermions > sites {
        return Err(ManyBodyError::BadFermionCount(n_fermions));
    }
    let dim = binomial(sites, n_fermions);
    if dim > 200_000 {
        return Err(ManyBodyError::SectorTooLarge { sites, fermions: n_fermions, dim });
    }
    let mut states = Vec::with_capacity(dim);
    let mut cur: Vec<u32> = (0..n_fermions as u32).collect();
    loop {
        states.push(cur.clone());
        // next lexicographic combination
        let n = sites as u32;
        let k = n_fermions;
        let mut i = k;
        loop {
            if i == 0 {
                let index = states
                    .iter()
                    .enumerate()
                    .map(|(p, s)| (s.clone(), p))
                    .collect();
                return Ok(FockBasis {
                    pattern: pattern.clone(),
                    n_fermions,
                    states,
                    index,
                });
            }
            i -= 1;
            if cur[i] < n - (k - i) as u32 {
                cur[i] += 1;
                for j in (i + 1)..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Dense operator on a Fock sector.
#[derive(Clone, Debug)]
pub struct ManyBodyOperator {
    pub basis: Arc<FockBasis>,
    pub entries: CMat,
}

/// `a_y |state>`: sign and remaining subset, `None` if `y` is empty.
fn annihilate(state: &[u32], y: u32) -> Option<(f64, Vec<u32>)> {
    let pos = state.iter().position(|&s| s == y)?;
    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
    let mut rest = state.to_vec();
    rest.remove(pos);
    Some((sign, rest))
}

/// `a†_x |state>`: sign and extended subset, `None` if `x` is occupied.
fn create(state: &[u32], x: u32) -> Option<(f64, Vec<u32>)> {
    if state.contains(&x) {
        return None;
    }
    let pos = state.iter().take_while(|&&s| s < x).count();
    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
    let mut ext = state.to_vec();
    ext.insert(pos, x);
    Some((sign, ext))
}

/// Second-quantized representation of a coefficient kernel on the sector.
/// Body order above the fermion number gives the zero operator.
pub fn represent(
    spec: &CoefficientSpec,
    basis: &Arc<FockBasis>,
    disorder: Option<&DisorderField>,
) -> Result<ManyBodyOperator, ManyBodyError> {
    let dim = basis.len();
    let n = basis.n_fermions;
    let mut h = CMat::zeros((dim, dim));
    if spec.body_order > n {
        return Ok(ManyBodyOperator { basis: basis.clone(), entries: h });
    }
    match &spec.kernel {
        Kernel::OneBody(_) => {
            // evaluate (and validate) the one-body matrix once, then lift
            let site_basis = SiteBasis::new(basis.pattern.clone(), 1);
            let one = crate::models::build_from_spec(&site_basis, spec, disorder)?;
            let sites = basis.pattern.len() as u32;
            for (col, state) in basis.states.iter().enumerate() {
                for &y in state {
                    let (s1, rest) = annihilate(state, y).unwrap();
                    for x in 0..sites {
                        let amp = one.entries[[x as usize, y as usize]];
                        if amp == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        if let Some((s2, new_state)) = create(&rest, x) {
                            let row = basis.index_of(&new_state).unwrap();
                            h[[row, col]] += amp * (s1 * s2);
                        }
                    }
                }
            }
        }
        Kernel::TwoBody(kernel) => {
            validate_two_body(spec, basis, disorder)?;
            let pattern = &basis.pattern;
            let mi = pattern.min_image();
            let zeros = vec![0.0; pattern.len()];
            let xi: Vec<f64> = disorder
                .map(|d| d.values.clone())
                .unwrap_or(zeros);
            let pos = |i: usize| pattern.position(i);
            let disp = |i: usize, j: usize| {
                let mut out = vec![0.0; pattern.dim()];
                mi.displacement(&pattern.position(i), &pattern.position(j), &mut out);
                out
            };
            let dis = |i: usize| xi[i];
            let sites = pattern.len() as u32;
            // all ascending pairs within the interaction range
            let mut pairs = Vec::new();
            for p1 in 0..sites {
                for p2 in (p1 + 1)..sites {
                    let d = disp(p1 as usize, p2 as usize);
                    let dist = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if dist <= spec.range + 1e-9 {
                        pairs.push([p1, p2]);
                    }
                }
            }
            for (col, state) in basis.states.iter().enumerate() {
                for qi in 0..state.len() {
                    for qj in (qi + 1)..state.len() {
                        let q = [state[qi], state[qj]];
                        // a_{q1} first, then a_{q2}
                        let (sa, rest1) = annihilate(state, q[0]).unwrap();
                        let (sb, rest) = annihilate(&rest1, q[1]).unwrap();
                        for p in &pairs {
                            // a†_{p2} then a†_{p1}
                            let Some((sc, mid)) = create(&rest, p[1]) else { continue };
                            let Some((sd, new_state)) = create(&mid, p[0]) else { continue };
                            let w = kernel(&TwoBodyInput {
                                create: [p[0] as usize, p[1] as usize],
                                annihilate: [q[0] as usize, q[1] as usize],
                                pos: &pos,
                                displacement: &disp,
                                disorder: &dis,
                            });
                            if w == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let row = basis.index_of(&new_state).unwrap();
                            // coefficient-kernel normalization: the ordered
                            // double sum with the 1/2! prefactor collapses to
                            // 2 q₂ per ascending pair
                            h[[row, col]] += w * (2.0 * sa * sb * sc * sd);
                        }
                    }
                }
            }
        }
    }
    Ok(ManyBodyOperator { basis: basis.clone(), entries: h })
}

fn validate_two_body(
    spec: &CoefficientSpec,
    basis: &Arc<FockBasis>,
    disorder: Option<&DisorderField>,
) -> Result<(), ManyBodyError> {
    let kernel = match &spec.kernel {
        Kernel::TwoBody(k) => k,
        _ => unreachable!(),
    };
    let pattern = &basis.pattern;
    let sites = pattern.len();
    if sites < 2 {
        return Ok(());
    }
    let mi = pattern.min_image();
    let zeros = vec![0.0; sites];
    let xi: Vec<f64> = disorder.map(|d| d.values.clone()).unwrap_or(zeros);
    let pos = |i: usize| pattern.position(i);
    let disp = |i: usize, j: usize| {
        let mut out = vec![0.0; pattern.dim()];
        mi.displacement(&pattern.position(i), &pattern.position(j), &mut out);
        out
    };
    let dis = |i: usize| xi[i];
    let step = (sites / 6).max(1);
    let mut sample_pairs = Vec::new();
    for a in (0..sites).step_by(step) {
        for b in ((a + 1)..sites).step_by(step) {
            sample_pairs.push([a, b]);
        }
    }
    for p in &sample_pairs {
        for q in &sample_pairs {
            let fwd = kernel(&TwoBodyInput {
                create: *p,
                annihilate: *q,
                pos: &pos,
                displacement: &disp,
                disorder: &dis,
            });
            let bwd = kernel(&TwoBodyInput {
                create: *q,
                annihilate: *p,
                pos: &pos,
                displacement: &disp,
                disorder: &dis,
            });
            if (fwd - bwd.conj()).norm() > 1e-10 * (1.0 + fwd.norm()) {
                return Err(ManyBodyError::Spec(ModelError::SpecViolation(
                    crate::models::Constraint::Hermiticity,
                )));
            }
            // finite range: vanish when the union of the two pairs has
            // diameter beyond the declared range
            let mut diam = 0.0f64;
            let pts = [p[0], p[1], q[0], q[1]];
            for (i, &a) in pts.iter().enumerate() {
                for &b in &pts[i + 1..] {
                    let d = disp(a, b);
                    diam = diam.max(d.iter().map(|v| v * v).sum::<f64>().sqrt());
                }
            }
            if diam > spec.range + 1e-9 && fwd.norm() > 1e-12 {
                return Err(ManyBodyError::Spec(ModelError::SpecViolation(
                    crate::models::Constraint::Range,
                )));
            }
        }
    }
    Ok(())
}

/// Macroscopic position observable `𝔛_j = Σ_x x_j a†_x a_x`, diagonal on the
/// sector. On a torus the positions are read from the fundamental domain;
/// `𝔛` is then not single-valued under wrapping, so prefer open patches for
/// derivation work.
pub fn position_operator(basis: &Arc<FockBasis>, direction: usize) -> ManyBodyOperator {
    let dim = basis.len();
    let mut h = CMat::zeros((dim, dim));
    for (k, state) in basis.states.iter().enumerate() {
        let x: f64 = state
            .iter()
            .map(|&s| basis.pattern.positions[[s as usize, direction]])
            .sum();
        h[[k, k]] = Complex64::new(x, 0.0);
    }
    ManyBodyOperator { basis: basis.clone(), entries: h }
}

/// Sector derivation `∂_j A = i [𝔛_j, A]`, evaluated entrywise as
/// `i (X_ζ - X_ξ) A_{ζξ}` with `X` the summed site coordinates.
pub fn mb_derive(a: &ManyBodyOperator, direction: usize) -> ManyBodyOperator {
    let basis = &a.basis;
    let dim = basis.len();
    let xs: Vec<f64> = basis
        .states
        .iter()
        .map(|state| {
            state
                .iter()
                .map(|&s| basis.pattern.positions[[s as usize, direction]])
                .sum()
        })
        .collect();
    let mut out = CMat::zeros((dim, dim));
    for r in 0..dim {
        for c in 0..dim {
            out[[r, c]] = Complex64::new(0.0, xs[r] - xs[c]) * a.entries[[r, c]];
        }
    }
    ManyBodyOperator { basis: basis.clone(), entries: out }
}

/// Particle current `𝔍_j = d𝔛_j/dt = i [𝔛_j, H]`.
pub fn current_operator(h: &ManyBodyOperator, direction: usize) -> ManyBodyOperator {
    mb_derive(h, direction)
}

/// Anchored trace per volume: diagonal sum over the sector states whose
/// lowest site index lies in the collar window, divided by the number of
/// window sites.
pub fn mb_trace_per_volume(
    a: &ManyBodyOperator,
    collar: Option<f64>,
) -> Result<Complex64, ManyBodyError> {
    let pattern = &a.basis.pattern;
    let window = pattern.window_sites(collar.unwrap_or(0.0));
    if window.is_empty() {
        return Err(ManyBodyError::Invariants(
            crate::invariants::InvariantsError::EmptyWindow,
        ));
    }
    let in_window: Vec<bool> = {
        let mut v = vec![false; pattern.len()];
        for &s in &window {
            v[s] = true;
        }
        v
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, state) in a.basis.states.iter().enumerate() {
        if in_window[state[0] as usize] {
            acc += a.entries[[k, k]];
        }
    }
    Ok(acc / Complex64::new(window.len() as f64, 0.0))
}

/// Sector pairing `Λ_|J| Σ_λ (-1)^λ 𝒯( P Π ∂_{λ_k} P )` with the many-body
/// derivation and the anchored trace.
pub fn mb_chern_pairing(
    p: &ManyBodyOperator,
    j_set: &[usize],
    collar: Option<f64>,
) -> Result<crate::invariants::PairingResult, ManyBodyError> {
    let k = j_set.len();
    if k == 0 || k % 2 != 0 {
        return Err(ManyBodyError::Invariants(
            crate::invariants::InvariantsError::BadIndexSet,
        ));
    }
    let dps: Vec<ManyBodyOperator> = j_set.iter().map(|&j| mb_derive(p, j)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    let pattern = &p.basis.pattern;
    let window = pattern.window_sites(collar.unwrap_or(0.0));
    if window.is_empty() {
        return Err(ManyBodyError::Invariants(
            crate::invariants::InvariantsError::EmptyWindow,
        ));
    }
    let in_window: Vec<bool> = {
        let mut v = vec![false; pattern.len()];
        for &s in &window {
            v[s] = true;
        }
        v
    };
    for (perm, sign) in permutations(k) {
        let mut prod = p.entries.clone();
        for &slot in &perm {
            prod = prod.dot(&dps[slot].entries);
        }
        let mut diag = Complex64::new(0.0, 0.0);
        for (idx, state) in p.basis.states.iter().enumerate() {
            if in_window[state[0] as usize] {
                diag += prod[[idx, idx]];
            }
        }
        acc += Complex64::new(sign, 0.0) * diag;
    }
    let value = crate::invariants::lambda_prefactor(k) * acc
        / Complex64::new(window.len() as f64, 0.0);
    let q = value.re.round();
    Ok(crate::invariants::PairingResult {
        value,
        quantized_value: q as i64,
        deviation: (value - Complex64::new(q, 0.0)).norm(),
        window: Some(crate::invariants::WindowInfo {
            collar: collar.unwrap_or(0.0),
            sites_in_window: window.len(),
            window_volume: window.len() as f64,
        }),
        degenerate_at_fermi: false,
    })
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn build(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            let mut inv = 0;
            for i in 0..prefix.len() {
                for j in (i + 1)..prefix.len() {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            build(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    build(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

/// Projection onto the Slater determinants built from the lowest `filled`
/// one-body eigenvectors: the sector spectral projection corresponding to a
/// uniformly populated band cluster.
pub fn slater_sector_projection(
    eig: &EigenDecomposition,
    basis: &Arc<FockBasis>,
    filled: usize,
) -> ManyBodyOperator {
    let n = basis.n_fermions;
    let dim = basis.len();
    // enumerate ascending n-subsets of the filled orbitals
    let mut orbital_sets = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    if filled >= n {
        loop {
            orbital_sets.push(cur.clone());
            let mut i = n;
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                if cur[i] < filled - (n - i) {
                    cur[i] += 1;
                    for j in (i + 1)..n {
                        cur[j] = cur[j - 1] + 1;
                    }
                    break;
                }
            }
            if done {
                break;
            }
        }
    }
    let mut v = CMat::zeros((dim, orbital_sets.len()));
    for (col, orbs) in orbital_sets.iter().enumerate() {
        for (row, state) in basis.states.iter().enumerate() {
            // Slater amplitude: det of the n x n matrix ψ_{orb}(site)
            let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
            for (a, &site) in state.iter().enumerate() {
                for (b, &orb) in orbs.iter().enumerate() {
                    mat[a * n + b] = eig.eigenvectors[[site as usize, orb]];
                }
            }
            v[[row, col]] = det_small(&mut mat, n);
        }
    }
    let p = v.dot(&crate::linalg::dagger(&v));
    ManyBodyOperator { basis: basis.clone(), entries: p }
}

/// In-place LU determinant of a small complex matrix.
fn det_small(m: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        // partial pivot
        let mut piv = k;
        for r in (k + 1)..n {
            if m[r * n + k].norm() > m[piv * n + k].norm() {
                piv = r;
            }
        }
        if m[piv * n + k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = m[k * n + k];
        det *= pivot;
        for r in (k + 1)..n {
            let f = m[r * n + k] / pivot;
            for c in k..n {
                let sub = f * m[k * n + c];
                m[r * n + c] -= sub;
            }
        }
    }
    det
}
